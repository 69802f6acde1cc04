#pragma once

#include "pinv/coefficients.hpp"
#include "pinv/geometry.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pinv::cli {

using Json = nlohmann::ordered_json;

/// The fourteen subcommands, in the order they are documented.
const std::vector<std::string>& command_names();
bool is_command(const std::string& name);

struct RunOptions {
    std::string command;
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    int workers = 1;
    std::vector<std::string> overrides;
};

/// Defaults for a subcommand, merged with the config file, then --seed and --override.
Json default_config(const std::string& command);
Json resolve_config(const RunOptions& options);

/// KEY=VALUE with a dotted key; the value is parsed as JSON when it parses, otherwise kept as a string.
void apply_override(Json& config, const std::string& assignment);
/// Recursive merge: objects merge key by key, everything else replaces.
void merge_into(Json& base, const Json& patch);

/// Typed read access; every failure names the dotted path of the offending field.
class ConfigView {
public:
    explicit ConfigView(const Json& root, std::string prefix = "") : root_(&root), prefix_(std::move(prefix)) {}

    bool has(const std::string& key) const;
    const Json& at(const std::string& key) const;
    ConfigView sub(const std::string& key) const;

    double number(const std::string& key) const;
    double positive(const std::string& key) const;
    int integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::string text(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;
    std::vector<int> integers(const std::string& key) const;
    std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

private:
    const Json* root_;
    std::string prefix_;
};

Grid grid_from(const ConfigView& view);
/// Box given by lo and hi arrays, or {"complement": box}.
SubdomainMask mask_from(const Grid& grid, const ConfigView& view, const std::string& name);

/// Field specification: a number, "csv:PATH", or an object with terms
/// {"const": c, "x": slope, "sin": [[amp, k], ...], "cos": [[amp, k], ...], "bump": {"lo", "hi", "amp", "k"}}
/// evaluated along "axis" (default 0), with sin/cos arguments k * pi * x.
SpatialField field_from(const Grid& grid, const ConfigView& view, const std::string& key);
CoefficientField coefficient_from(const Grid& grid, const ConfigView& view, const std::string& key);
VectorCoefficient vector_from(const Grid& grid, const ConfigView& view, const std::string& key);
CoefficientSet2x2 coefficients_2x2(const Grid& grid, const ConfigView& view);
CoefficientSet3x3 coefficients_3x3(const Grid& grid, const ConfigView& view);

}  // namespace pinv::cli
