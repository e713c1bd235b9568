#include "branchlab/io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "branchlab/repro/mutation.hpp"
#include "branchlab/spaces.hpp"
#include "branchlab/types.hpp"

namespace branchlab::io {

namespace {

std::vector<OffspringLaw::Outcome> outcomes_from(const nlohmann::json& probs, std::string_view key) {
    if (!probs.is_array() || probs.empty()) {
        throw ValidationError("'" + std::string(key) + "' must be a nonempty list of [n, p] pairs");
    }
    std::vector<OffspringLaw::Outcome> out;
    for (const auto& pair : probs) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() || !pair[1].is_number() ||
            pair[0].get<std::int64_t>() < 0) {
            throw ValidationError("'" + std::string(key) + "' entries must be [count, probability]");
        }
        out.push_back({static_cast<std::uint32_t>(pair[0].get<std::int64_t>()), pair[1].get<double>()});
    }
    return out;
}

const nlohmann::json* find(const nlohmann::json& root, std::string_view key) {
    const nlohmann::json* node = &root;
    std::size_t pos = 0;
    while (pos <= key.size()) {
        const auto dot = key.find('.', pos);
        const auto part = std::string(key.substr(pos, dot == std::string_view::npos ? key.size() - pos : dot - pos));
        if (!node->is_object()) return nullptr;
        const auto it = node->find(part);
        if (it == node->end()) return nullptr;
        node = &*it;
        if (dot == std::string_view::npos) break;
        pos = dot + 1;
    }
    return node;
}

nlohmann::json to_json(const toml::node& node) {
    if (const auto* t = node.as_table()) {
        auto obj = nlohmann::json::object();
        for (const auto& [k, v] : *t) obj[std::string(k.str())] = to_json(v);
        return obj;
    }
    if (const auto* a = node.as_array()) {
        auto arr = nlohmann::json::array();
        for (const auto& v : *a) arr.push_back(to_json(v));
        return arr;
    }
    if (const auto* v = node.as_integer()) return v->get();
    if (const auto* v = node.as_floating_point()) return v->get();
    if (const auto* v = node.as_boolean()) return v->get();
    if (const auto* v = node.as_string()) return v->get();
    throw ValidationError("dates and times are not accepted in configs");
}

/// Key on the offending line, if the line looks like "key = ...".
std::string key_on_line(std::string_view text, std::size_t line) {
    std::size_t start = 0;
    for (std::size_t l = 1; l < line && start != std::string_view::npos; ++l) {
        start = text.find('\n', start);
        if (start != std::string_view::npos) ++start;
    }
    if (start == std::string_view::npos) return {};
    auto end = text.find('\n', start);
    auto content = text.substr(start, end == std::string_view::npos ? text.size() - start : end - start);
    const auto eq = content.find('=');
    auto key = eq == std::string_view::npos ? content : content.substr(0, eq);
    while (!key.empty() && (key.front() == ' ' || key.front() == '\t' || key.front() == '[')) key.remove_prefix(1);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t' || key.back() == ']' || key.back() == '\r')) {
        key.remove_suffix(1);
    }
    return std::string(key);
}

std::shared_ptr<const OffspringLaw> law_at(const nlohmann::json& probs, std::shared_ptr<const Displacement> d,
                                           std::string_view key) {
    return std::make_shared<const OffspringLaw>(outcomes_from(probs, key), std::move(d));
}

}  // namespace

OffspringLaw law_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("probs")) throw ValidationError("law needs a 'probs' key");
    std::shared_ptr<const Displacement> displacement;
    if (j.contains("displacement") && !j["displacement"].is_null()) {
        const auto& d = j["displacement"];
        if (!d.is_object() || !d.contains("lattice") || !d["lattice"].is_number_integer()) {
            throw ValidationError("'displacement' must be {\"lattice\": d, \"laziness\": q}");
        }
        displacement = lattice::nearest_neighbour_walk(d["lattice"].get<int>(), d.value("laziness", 0.0));
    }
    return OffspringLaw(outcomes_from(j["probs"], "probs"), std::move(displacement));
}

OffspringLaw load_law(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
    }
    return law_from_json(j);
}

nlohmann::json law_to_json(const OffspringLaw& law) {
    auto probs = nlohmann::json::array();
    for (const auto& o : law.outcomes()) probs.push_back({o.count, o.prob});
    return {{"probs", probs}};
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

TomlDocument TomlDocument::parse(std::string_view text, std::string source) {
    TomlDocument doc;
    doc.source_ = std::move(source);
    try {
        const auto table = toml::parse(text, doc.source_);
        doc.json_ = to_json(table);
    } catch (const toml::parse_error& e) {
        const auto line = e.source().begin.line;
        const auto key = key_on_line(text, line);
        std::string msg = "malformed TOML in " + doc.source_ + " at line " + std::to_string(line);
        if (!key.empty()) msg += " (key '" + key + "')";
        msg += ": " + std::string(e.description());
        throw ValidationError(msg);
    }
    return doc;
}

TomlDocument TomlDocument::load(const std::filesystem::path& path) {
    auto doc = parse(read_text(path), path.string());
    doc.base_dir_ = path.parent_path();
    return doc;
}

TomlDocument::TomlDocument(TomlDocument&&) noexcept = default;
TomlDocument& TomlDocument::operator=(TomlDocument&&) noexcept = default;
TomlDocument::~TomlDocument() = default;

bool has_key(const nlohmann::json& root, std::string_view key) { return find(root, key) != nullptr; }

double require_number(const nlohmann::json& root, std::string_view key) {
    const auto* node = find(root, key);
    if (!node) throw ValidationError("missing key '" + std::string(key) + "'");
    if (!node->is_number()) throw ValidationError("key '" + std::string(key) + "' must be a number");
    return node->get<double>();
}

double number_or(const nlohmann::json& root, std::string_view key, double fallback) {
    return has_key(root, key) ? require_number(root, key) : fallback;
}

std::string string_or(const nlohmann::json& root, std::string_view key, std::string fallback) {
    const auto* node = find(root, key);
    if (!node) return fallback;
    if (!node->is_string()) throw ValidationError("key '" + std::string(key) + "' must be a string");
    return node->get<std::string>();
}

std::int64_t integer_or(const nlohmann::json& root, std::string_view key, std::int64_t fallback) {
    const auto* node = find(root, key);
    if (!node) return fallback;
    if (!node->is_number_integer()) throw ValidationError("key '" + std::string(key) + "' must be an integer");
    return node->get<std::int64_t>();
}

ScalarField field_from(const nlohmann::json& root, std::string_view key, double fallback) {
    const auto* node = find(root, key);
    if (!node) return fallback;
    const std::string k(key);
    if (node->is_number()) return node->get<double>();
    if (!node->is_object()) throw ValidationError("key '" + k + "' must be a number or a field table");
    try {
        if (node->contains("breaks")) {
            return ScalarField::piecewise(node->at("breaks").get<std::vector<double>>(),
                                          node->at("values").get<std::vector<double>>());
        }
        if (node->contains("inverse_sqrt")) {
            return ScalarField::inverse_sqrt(node->at("inverse_sqrt").get<double>(), node->value("scale", 1.0));
        }
        if (node->contains("indicator")) {
            const auto ends = node->at("indicator").get<std::vector<double>>();
            if (ends.size() != 2) throw ValidationError("key '" + k + ".indicator' must be [lo, hi]");
            return ScalarField::indicator(ends[0], ends[1], node->value("inside", 1.0), node->value("outside", 0.0));
        }
        if (node->contains("ramp")) {
            const auto ends = node->at("ramp").get<std::vector<double>>();
            if (ends.size() != 2 || !(ends[1] > ends[0])) throw ValidationError("key '" + k + ".ramp' must be [lo, hi]");
            const double lo = ends[0], hi = ends[1];
            return ScalarField([lo, hi](double x) { return std::clamp((x - lo) / (hi - lo), 0.0, 1.0); }, 0.0, 1.0);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("key '" + k + "': " + e.what());
    }
    throw ValidationError("key '" + k + "' has no recognised field form");
}

Boundary parse_boundary(std::string_view name, std::string_view key) {
    if (name == "dirichlet") return Boundary::dirichlet;
    if (name == "reflecting") return Boundary::reflecting;
    if (name == "open") return Boundary::open;
    throw ValidationError("key '" + std::string(key) + "' must be dirichlet, reflecting or open");
}

BmcConfig bmc_from_config(const TomlDocument& doc) {
    const auto& j = doc.json();
    BmcConfig cfg;
    cfg.kind = string_or(j, "space.kind", "");
    if (cfg.kind == "layered_dag") {
        cfg.spec = repro::mutation_spec();
        cfg.start = repro::mutation_state(0, repro::MutationPath::main);
        return cfg;
    }
    std::shared_ptr<const Displacement> displacement;
    auto state_of = [&](const nlohmann::json& v, std::string_view key) -> StateIndex {
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return StateIndex{v.get<std::uint64_t>()};
        if (cfg.kind == "lattice_zd" && v.is_array()) {
            try {
                const auto coords = v.get<std::vector<std::int64_t>>();
                if (static_cast<int>(coords.size()) != cfg.dimension) throw ValidationError("wrong dimension");
                return lattice::encode(coords);
            } catch (const std::exception&) {
                throw ValidationError("key '" + std::string(key) + "' must list " + std::to_string(cfg.dimension) +
                                      " integer coordinates");
            }
        }
        throw ValidationError("key '" + std::string(key) + "' must be a state id");
    };
    if (cfg.kind == "lattice_zd") {
        cfg.dimension = static_cast<int>(integer_or(j, "space.dim", 1));
        if (cfg.dimension < 1 || cfg.dimension > lattice::kMaxDimension) {
            throw ValidationError("key 'space.dim' must be 1, 2 or 3");
        }
        displacement = lattice::nearest_neighbour_walk(cfg.dimension, number_or(j, "space.laziness", 0.0));
        cfg.start = lattice::encode(std::vector<std::int64_t>(static_cast<std::size_t>(cfg.dimension), 0));
    } else if (cfg.kind == "graph_file") {
        const auto rel = string_or(j, "space.path", "");
        if (rel.empty()) throw ValidationError("missing key 'space.path'");
        const auto graph = WeightedGraph::load(doc.base_dir() / rel);
        displacement = graph.walk();
        cfg.start = StateIndex{0};
    } else {
        throw ValidationError("key 'space.kind' must be lattice_zd, graph_file or layered_dag");
    }
    if (const auto* s = find(j, "space.start")) cfg.start = state_of(*s, "space.start");
    const auto* probs = find(j, "space.probs");
    if (!probs) throw ValidationError("missing key 'space.probs'");
    auto base = law_at(*probs, displacement, "space.probs");
    std::map<StateIndex, std::shared_ptr<const OffspringLaw>> overrides;
    if (const auto* list = find(j, "space.override")) {
        if (!list->is_array()) throw ValidationError("key 'space.override' must be an array of tables");
        for (const auto& entry : *list) {
            if (!entry.contains("state") || !entry.contains("probs")) {
                throw ValidationError("each 'space.override' needs 'state' and 'probs'");
            }
            overrides[state_of(entry["state"], "space.override.state")] =
                law_at(entry["probs"], displacement, "space.override.probs");
        }
    }
    cfg.spec.law = [base, overrides](StateIndex s) {
        const auto it = overrides.find(s);
        return it == overrides.end() ? base : it->second;
    };
    return cfg;
}

MotionSpec motion_from_config(const TomlDocument& doc) {
    const auto& j = doc.json();
    MotionSpec m;
    const auto kind = string_or(j, "motion.kind", "diffusion_1d");
    if (kind == "diffusion_1d") {
        m.kind = MotionKind::diffusion_1d;
    } else if (kind == "diffusion_radial") {
        m.kind = MotionKind::diffusion_radial;
        m.dimension = static_cast<int>(integer_or(j, "motion.dimension", 3));
    } else if (kind == "ctmc") {
        m.kind = MotionKind::ctmc;
    } else {
        throw ValidationError("key 'motion.kind' must be diffusion_1d, diffusion_radial or ctmc");
    }
    m.drift = field_from(j, "motion.drift", 0.0);
    m.diffusion = field_from(j, "motion.diffusion", 1.0);
    const double inf = std::numeric_limits<double>::infinity();
    m.domain.left = number_or(j, "motion.left", m.kind == MotionKind::diffusion_radial ? 0.0 : -inf);
    m.domain.right = number_or(j, "motion.right", inf);
    const bool finite_left = std::isfinite(m.domain.left), finite_right = std::isfinite(m.domain.right);
    m.domain.left_boundary =
        parse_boundary(string_or(j, "motion.left_boundary", finite_left ? "dirichlet" : "open"), "motion.left_boundary");
    m.domain.right_boundary = parse_boundary(
        string_or(j, "motion.right_boundary", finite_right ? "dirichlet" : "open"), "motion.right_boundary");
    if (m.kind == MotionKind::ctmc) {
        const auto* rates = find(j, "motion.rates");
        if (!rates || !rates->is_array()) throw ValidationError("key 'motion.rates' must list [from, to, rate]");
        for (const auto& r : *rates) {
            if (!r.is_array() || r.size() != 3 || !r[0].is_number_integer() || !r[1].is_number_integer() ||
                !r[2].is_number() || r[0].get<int>() < 0) {
                throw ValidationError("key 'motion.rates' entries must be [from, to, rate]");
            }
            const auto from = static_cast<std::size_t>(r[0].get<int>());
            if (m.ctmc.jumps.size() <= from) m.ctmc.jumps.resize(from + 1);
            m.ctmc.jumps[from].push_back({r[1].get<int>(), r[2].get<double>()});
        }
        for (const auto& row : m.ctmc.jumps) {
            for (const auto& [to, rate] : row) {
                if (to >= static_cast<int>(m.ctmc.jumps.size())) m.ctmc.jumps.resize(static_cast<std::size_t>(to) + 1);
                (void)rate;
            }
        }
    }
    m.validate();
    return m;
}

BranchField branch_from_config(const TomlDocument& doc) {
    const auto& j = doc.json();
    const auto rate = field_from(j, "branch.rate", 0.0);
    const auto* probs = find(j, "branch.probs");
    if (!probs) throw ValidationError("missing key 'branch.probs'");
    return BranchField(rate, OffspringLaw(outcomes_from(*probs, "branch.probs")));
}

FkppProblem fkpp_from_config(const TomlDocument& doc) {
    const auto& j = doc.json();
    FkppProblem p;
    const auto cells = integer_or(j, "grid.cells", 400);
    if (cells < 16) throw ValidationError("key 'grid.cells' must be at least 16");
    p.grid = Grid1D(require_number(j, "grid.left"), require_number(j, "grid.right"), static_cast<int>(cells));
    p.diffusion = field_from(j, "coefficients.diffusion", 1.0);
    p.drift = field_from(j, "coefficients.drift", 0.0);
    p.left = parse_boundary(string_or(j, "boundary.left", "dirichlet"), "boundary.left");
    p.right = parse_boundary(string_or(j, "boundary.right", "dirichlet"), "boundary.right");
    p.radial_dimension = static_cast<int>(integer_or(j, "grid.radial_dimension", 1));
    p.branch = branch_from_config(doc);
    p.initial = field_from(j, "initial.g", 1.0);
    if (p.initial.lower() < 0.0 || p.initial.upper() > 1.0) throw ValidationError("key 'initial.g' must lie in [0, 1]");
    return p;
}

std::string config_hash(const nlohmann::json& canonical) {
    const auto text = canonical.dump();
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (unsigned char c : text) h = mix64(h ^ c);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), columns_(header.size()) {
    if (!out_) throw ValidationError("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) { row({}, values); }

void CsvWriter::row(const std::vector<std::string>& labels, const std::vector<double>& values) {
    if (labels.size() + values.size() != columns_) throw ValidationError("CSV row width does not match the header");
    std::size_t i = 0;
    for (const auto& l : labels) out_ << (i++ ? "," : "") << l;
    for (double v : values) out_ << (i++ ? "," : "") << format_double(v);
    out_ << '\n';
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace branchlab::io
