#include <doctest.h>

#include <clocale>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "branchlab/io.hpp"

using namespace branchlab;
namespace fs = std::filesystem;

namespace {

std::string validation_message(const std::function<void()>& body) {
    try {
        body();
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("io") {
    TEST_CASE("law JSON round trip") {
        const auto law = io::law_from_json(nlohmann::json::parse(R"({"probs": [[0, 0.25], [2, 0.75]]})"));
        CHECK(law.mean() == doctest::Approx(1.5));
        const auto again = io::law_from_json(io::law_to_json(law));
        CHECK(again.prob(0) == law.prob(0));
        CHECK(again.prob(2) == law.prob(2));
        const auto walk = io::law_from_json(
            nlohmann::json::parse(R"({"probs": [[1, 1.0]], "displacement": {"lattice": 2, "laziness": 0.5}})"));
        CHECK(walk.displacement() != nullptr);
        CHECK_THROWS_AS(io::law_from_json(nlohmann::json::parse(R"({"probs": [[0, 0.5]]})")), ValidationError);
        CHECK_THROWS_AS(io::load_law(fs::path(BRANCHLAB_TEST_DATA) / "missing.json"), ValidationError);
    }

    TEST_CASE("malformed TOML names the line and key") {
        const auto msg = validation_message([] { io::TomlDocument::load(fs::path(BRANCHLAB_TEST_DATA) / "malformed.toml"); });
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("'right'") != std::string::npos);
    }

    TEST_CASE("typed lookups name the offending key") {
        const auto doc = io::TomlDocument::parse("[grid]\nleft = 0.0\nright = \"far\"\n");
        CHECK(io::require_number(doc.json(), "grid.left") == 0.0);
        CHECK(validation_message([&] { io::require_number(doc.json(), "grid.right"); }).find("grid.right") !=
              std::string::npos);
        CHECK(validation_message([&] { io::require_number(doc.json(), "grid.cells"); }).find("grid.cells") !=
              std::string::npos);
        CHECK(io::number_or(doc.json(), "grid.cells", 7.0) == 7.0);
        CHECK(io::has_key(doc.json(), "grid.left"));
        CHECK_FALSE(io::has_key(doc.json(), "grid.top"));
    }

    TEST_CASE("field forms") {
        const auto doc = io::TomlDocument::parse(R"(
a = 2.5
b = { breaks = [1.0], values = [3.0, 4.0] }
c = { inverse_sqrt = 1.0, scale = 2.0 }
d = { indicator = [1.0, 2.0], inside = 5.0 }
e = { ramp = [0.0, 4.0] }
f = { nothing = 1 }
)");
        const auto& j = doc.json();
        CHECK(io::field_from(j, "a", 0.0)(10.0) == 2.5);
        CHECK(io::field_from(j, "b", 0.0)(0.5) == 3.0);
        CHECK(io::field_from(j, "b", 0.0)(1.0) == 4.0);
        CHECK(io::field_from(j, "c", 0.0)(4.0) == doctest::Approx(1.0));
        CHECK(io::field_from(j, "d", 0.0)(1.5) == 5.0);
        CHECK(io::field_from(j, "d", 0.0)(2.0) == 0.0);
        CHECK(io::field_from(j, "e", 0.0)(1.0) == doctest::Approx(0.25));
        CHECK(io::field_from(j, "missing", 9.0)(0.0) == 9.0);
        CHECK_THROWS_AS(io::field_from(j, "f", 0.0), ValidationError);
    }

    TEST_CASE("sample configs load") {
        const fs::path dir(BRANCHLAB_CONFIG_DIR);
        const auto brw = io::bmc_from_config(io::TomlDocument::load(dir / "brw_z.toml"));
        CHECK(brw.kind == "lattice_zd");
        CHECK(brw.spec.law(brw.start)->mean() == doctest::Approx(1.3));
        const auto ring = io::bmc_from_config(io::TomlDocument::load(dir / "ring.toml"));
        CHECK(ring.spec.law(StateIndex{2})->mean() == 2.0);
        CHECK(ring.spec.law(StateIndex{0})->mean() == doctest::Approx(1.2));
        const auto doc = io::TomlDocument::load(dir / "bbm_interval.toml");
        const auto motion = io::motion_from_config(doc);
        CHECK(motion.domain.left_boundary == Boundary::dirichlet);
        CHECK(motion.domain.right == 3.0);
        CHECK(io::branch_from_config(doc).mean_offspring(1.0) == 2.0);
        const auto problem = io::fkpp_from_config(io::TomlDocument::load(dir / "fkpp_interval.toml"));
        CHECK(problem.grid.n_cells() == 600);
        CHECK(problem.initial(3.0) == 1.0);
        CHECK_THROWS_AS(io::fkpp_from_config(io::TomlDocument::load(fs::path(BRANCHLAB_TEST_DATA) / "bad_value.toml")),
                        ValidationError);
    }

    TEST_CASE("config hash is stable and content sensitive") {
        const auto a = nlohmann::json::parse(R"({"x": 1, "y": [1, 2]})");
        const auto b = nlohmann::json::parse(R"({"y": [1, 2], "x": 1})");
        const auto c = nlohmann::json::parse(R"({"x": 2, "y": [1, 2]})");
        CHECK(io::config_hash(a) == io::config_hash(b));
        CHECK(io::config_hash(a) != io::config_hash(c));
        CHECK(io::config_hash(a).size() == 16);
    }

    TEST_CASE("CSV uses LF and dot decimals under a comma locale") {
        const auto path = fs::temp_directory_path() / "branchlab_io_test.csv";
        const char* previous = std::setlocale(LC_NUMERIC, nullptr);
        const std::string saved = previous ? previous : "C";
        std::setlocale(LC_NUMERIC, "de_DE.UTF-8");
        {
            io::CsvWriter csv(path, {"label", "x", "y"});
            csv.row({"a"}, {0.5, 1e-20});
            CHECK_THROWS_AS(csv.row({1.0}), ValidationError);
        }
        std::setlocale(LC_NUMERIC, saved.c_str());
        std::ifstream in(path, std::ios::binary);
        std::stringstream text;
        text << in.rdbuf();
        CHECK(text.str() == "label,x,y\na,0.5,1e-20\n");
        fs::remove(path);
    }

    TEST_CASE("format_double round trips") {
        for (double v : {0.1, 1.0 / 3.0, 1e300, -2.5e-310}) CHECK(std::strtod(io::format_double(v).c_str(), nullptr) == v);
    }
}
