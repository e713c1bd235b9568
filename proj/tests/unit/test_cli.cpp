#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include <json.hpp>

namespace fs = std::filesystem;
using namespace branchlab;

namespace {

struct Result {
    int status = 0;
    std::string out, err;
};

Result invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int status = cli::run(args, out, err);
    return {status, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("branchlab_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

const std::string kConfigs = BRANCHLAB_CONFIG_DIR;
const std::string kData = BRANCHLAB_TEST_DATA;

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("exit code 2 on validation failures") {
        const auto dir = fresh_dir("invalid").string();
        CHECK(invoke({"fkpp", "--config", kData + "/malformed.toml", "--out", dir}).status == cli::kExitValidation);
        CHECK(invoke({"fkpp", "--config", kData + "/bad_value.toml", "--out", dir}).status == cli::kExitValidation);
        CHECK(invoke({"gw", "--law", kData + "/missing.json", "--out", dir}).status == cli::kExitValidation);
        CHECK(invoke({"bmp", "--config", kConfigs + "/bbm_interval.toml", "--mode", "sideways", "--out", dir}).status ==
              cli::kExitValidation);
        CHECK(invoke({"nonsense"}).status == cli::kExitValidation);
        const auto r = invoke({"fkpp", "--config", kData + "/malformed.toml", "--out", dir});
        CHECK(r.err.find("right") != std::string::npos);
    }

    TEST_CASE("exit code 3 when the extinction solve does not settle") {
        const auto dir = fresh_dir("convergence");
        fs::create_directories(dir);
        std::ofstream(dir / "law.json") << R"({"probs": [[0, 0.499999999], [2, 0.500000001]]})";
        CHECK(invoke({"gw", "--law", (dir / "law.json").string(), "--out", dir.string()}).status ==
              cli::kExitConvergence);
    }

    TEST_CASE("help and version exit 0") {
        CHECK(invoke({"--help"}).status == cli::kExitOk);
        const auto v = invoke({"--version"});
        CHECK(v.status == cli::kExitOk);
        CHECK_FALSE(v.out.empty());
    }

    TEST_CASE("JSON output carries hash, seed and version") {
        const auto dir = fresh_dir("meta");
        const auto r = invoke({"gw", "--law", kConfigs + "/binary_law.json", "--seed", "7", "--out", dir.string()});
        REQUIRE(r.status == cli::kExitOk);
        const auto j = nlohmann::json::parse(r.out);
        CHECK(j.at("seed") == 7);
        CHECK(j.at("config_hash").get<std::string>().size() == 16);
        CHECK(j.contains("version"));
        CHECK(j.at("extinction_prob").get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
        CHECK(nlohmann::json::parse(slurp(dir / "gw.json")) == j);
    }

    TEST_CASE("same seed gives byte-identical files for any thread count") {
        const std::vector<std::string> base{"bmc", "--config", kConfigs + "/brw_z.toml", "--horizon", "12",
                                            "--replicas", "300", "--seed", "11"};
        auto one = base, two = base;
        const auto d1 = fresh_dir("det1"), d2 = fresh_dir("det2");
        one.insert(one.end(), {"--out", d1.string(), "--threads", "1"});
        two.insert(two.end(), {"--out", d2.string(), "--threads", "3"});
        const auto r1 = invoke(one), r2 = invoke(two);
        REQUIRE(r1.status == 0);
        REQUIRE(r2.status == 0);
        CHECK(r1.out == r2.out);
        CHECK(slurp(d1 / "bmc.json") == slurp(d2 / "bmc.json"));
        CHECK(slurp(d1 / "bmc_traces.csv") == slurp(d2 / "bmc_traces.csv"));
        auto other = base;
        other[other.size() - 1] = "12";
        other.insert(other.end(), {"--out", fresh_dir("det3").string()});
        CHECK(invoke(other).out != r1.out);
    }

    TEST_CASE("CSV outputs have a header and LF endings") {
        const auto dir = fresh_dir("csv");
        REQUIRE(invoke({"fkpp", "--config", kConfigs + "/fkpp_interval.toml", "--mode", "parabolic", "--t-end", "0.5",
                        "--out", dir.string()})
                    .status == 0);
        const auto text = slurp(dir / "fkpp_field.csv");
        CHECK(text.rfind("x,", 0) == 0);
        CHECK(text.substr(0, text.find('\n')).find("t=0.5") != std::string::npos);
        CHECK(text.find('\r') == std::string::npos);
        CHECK(text.back() == '\n');
    }

    TEST_CASE("intervals example reports exact rationals") {
        const auto r = invoke({"repro", "--example", "intervals", "--replicas", "200", "--out",
                               fresh_dir("intervals").string()});
        REQUIRE(r.status == 0);
        const auto j = nlohmann::json::parse(r.out);
        CHECK(j.at("avg_at_Sn") == "0");
        CHECK(j.at("avg_at_Sn_plus_a") == "4/5");
        CHECK(j.at("rescaled_measure") == "1/2");
    }

    TEST_CASE("global flags may follow the subcommand") {
        const auto dir = fresh_dir("order");
        const auto r = invoke({"gw", "--law", kConfigs + "/binary_law.json", "--seed", "3", "--out", dir.string()});
        CHECK(r.status == 0);
        CHECK(fs::exists(dir / "gw.json"));
    }
}
