#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "branchlab/bmc.hpp"
#include "branchlab/field.hpp"
#include "branchlab/fkpp.hpp"
#include "branchlab/motion.hpp"

namespace branchlab::io {

/// Offspring law from {"probs": [[n, p], ...], "displacement": {...}}. The
/// optional displacement is {"lattice": d, "laziness": q}.
OffspringLaw law_from_json(const nlohmann::json& j);
OffspringLaw load_law(const std::filesystem::path& path);
nlohmann::json law_to_json(const OffspringLaw& law);

/// Contents of a file; throws ValidationError when unreadable.
std::string read_text(const std::filesystem::path& path);

/// Parsed TOML document kept behind a pointer so toml++ stays out of the headers.
class TomlDocument {
public:
    static TomlDocument parse(std::string_view text, std::string source = "<string>");
    static TomlDocument load(const std::filesystem::path& path);
    TomlDocument(TomlDocument&&) noexcept;
    TomlDocument& operator=(TomlDocument&&) noexcept;
    ~TomlDocument();

    /// Same data as JSON, tables as objects. Used for hashing and lookups.
    const nlohmann::json& json() const { return json_; }
    const std::string& source() const { return source_; }
    const std::filesystem::path& base_dir() const { return base_dir_; }

private:
    TomlDocument() = default;
    nlohmann::json json_;
    std::string source_;
    std::filesystem::path base_dir_;
};

/// Typed lookup of a dotted key ("motion.drift"). Errors name the key.
double require_number(const nlohmann::json& root, std::string_view key);
double number_or(const nlohmann::json& root, std::string_view key, double fallback);
std::string string_or(const nlohmann::json& root, std::string_view key, std::string fallback);
std::int64_t integer_or(const nlohmann::json& root, std::string_view key, std::int64_t fallback);
bool has_key(const nlohmann::json& root, std::string_view key);

/// Field from a number, {breaks = [...], values = [...]}, {inverse_sqrt = threshold,
/// scale = s}, or {indicator = [lo, hi], inside = v, outside = w}.
ScalarField field_from(const nlohmann::json& root, std::string_view key, double fallback);

/// BmcSpec from a [space] table: kind = "lattice_zd" (dim, laziness),
/// "graph_file" (path, relative to the config), or "layered_dag" (the
/// four-fold mutation chain), a default law `probs`, and optional
/// [[space.override]] entries {state = id or [coords], probs = ...}.
struct BmcConfig {
    BmcSpec spec;
    StateIndex start;
    std::string kind;
    int dimension = 1;
};
BmcConfig bmc_from_config(const TomlDocument& doc);

/// [motion] kind, drift, diffusion, left, right, left_boundary, right_boundary,
/// dimension and [branch] rate, probs.
MotionSpec motion_from_config(const TomlDocument& doc);
BranchField branch_from_config(const TomlDocument& doc);

/// [grid] left, right, cells; [coefficients] diffusion, drift;
/// [boundary] left, right; [branch]; [initial] as a field; radial dimension.
FkppProblem fkpp_from_config(const TomlDocument& doc);

Boundary parse_boundary(std::string_view name, std::string_view key);

/// 64-bit hash of the canonical JSON text, as 16 hex digits.
std::string config_hash(const nlohmann::json& canonical);

/// Shortest round-trip text of a double, locale independent.
std::string format_double(double v);

/// CSV with a header row and LF line endings, '.' decimals regardless of locale.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(const std::vector<double>& values);
    /// Row whose leading cells are text.
    void row(const std::vector<std::string>& labels, const std::vector<double>& values);

private:
    std::ofstream out_;
    std::size_t columns_;
};

/// Writes pretty JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace branchlab::io
