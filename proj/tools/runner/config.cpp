#include "config.hpp"

#include "pinv/errors.hpp"
#include "pinv/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace pinv::cli {

namespace {

const char* kCommon = R"({
  "seed": 1,
  "grid": {"dim": 1, "lo": [0.0], "hi": [1.0], "nx": [101], "T": 1.0, "nt": 500, "theta": 0.5}
})";

const std::map<std::string, const char*>& defaults_table() {
    static const std::map<std::string, const char*> table = {
        {"forward", R"({
  "preset": "heat",
  "grid": {"nx": [201], "nt": 2000},
  "heat": {"mode": 1},
  "coefficients": {"a": 0.5, "b": 1.0, "c": 0.8, "d": -0.2, "A": [0.3], "B": [0.1], "C": [0.1], "D": [0.2]},
  "initial": {"U": {"sin": [[1.0, 1]]}, "V": {"sin": [[0.5, 2]]}},
  "boundary": {"U": 0.0, "V": 0.0},
  "convergence": {"enabled": true, "nx": [26, 51, 101, 201], "min_order": 1.8},
  "tolerance": 1e-3,
  "output": {"max_levels": 101}
})"},
        {"forward3", R"({
  "preset": "coupled3",
  "matrix": [[0.2, 1.0, 0.8], [0.5, -0.1, 0.3], [0.4, 0.6, 0.1]],
  "initial": {"U": {"sin": [[1.0, 1]]}, "V": {"sin": [[0.5, 2]]}, "W": 0.0},
  "output": {"max_levels": 101}
})"},
        {"audit-carleman", R"({
  "grid": {"nx": [51], "nt": 200},
  "omega": {"lo": [0.3], "hi": [0.6]},
  "instances": 10,
  "coefficient_range": 1.0,
  "weight": {"lambda": 2.0, "tau": 1.0, "s_grid": [1, 2, 5, 10, 20, 50]},
  "log10_cap": 300
})"},
        {"audit-carleman3", R"({
  "grid": {"nx": [51], "nt": 200},
  "omega": {"lo": [0.3], "hi": [0.6]},
  "instances": 10,
  "coefficient_range": 1.0,
  "weight": {"lambda": 2.0, "s_grid": [1, 2, 5, 10, 20, 50]},
  "tol13": 1e-8,
  "log10_cap": 300
})"},
        {"audit-lemma31", R"({
  "cases": 100,
  "s_values": [1, 10, 100],
  "samples": 2001,
  "T": 1.0,
  "modes": 6,
  "amplitude": 1.0,
  "kappa0": 1.0,
  "slack": 1e-3,
  "lemma31": {"exponent_sign": -1}
})"},
        {"audit-lemma32", R"({
  "grid": {"nx": [51], "nt": 2000},
  "omega": {"lo": [0.3], "hi": [0.6]},
  "cases": 20,
  "s_values": [1, 10, 100],
  "delta": 0.05,
  "lambda": 2.0,
  "max_variation": 2.0
})"},
        {"audit-lemma23", R"({
  "grid": {"nx": [101], "nt": 100},
  "omega": {"lo": [0.0], "hi": [0.4]},
  "omega_prime": {"lo": [0.05], "hi": [0.3]},
  "p": [1.0],
  "q": 0.5,
  "cases": 20,
  "s_values": [1, 5, 10],
  "tol_nu": -1,
  "refine": true,
  "max_change": 0.2
})"},
        {"reconstruct-snapshot", R"({
  "grid": {"nx": [201], "nt": 2000},
  "tilde": {"a": 0.5, "b": 1.0, "c": 0.8, "d": -0.2},
  "reference": {"initial": {"U": {"const": 1.0, "sin": [[0.5, 1]]}, "V": {"const": 1.0, "sin": [[0.3, 1]]}},
                "boundary": {"U": 1.0, "V": 1.0}},
  "planted": {"f": {"sin": [[1.0, 1]]}, "g": {"cos": [[0.3, 1]]}},
  "delta0": 1e-3,
  "fine_factor": 0.01,
  "tolerance": 1e-2
})"},
        {"reconstruct-variational", R"({
  "grid": {"nx": [51], "nt": 200},
  "omega": {"lo": [0.2], "hi": [0.5]},
  "known": {"a": 0.5, "d": -0.2},
  "prior": {"b": 1.0, "c": 0.8},
  "reference": {"initial": {"U": {"const": 1.0, "sin": [[0.5, 1]]}, "V": {"const": 1.0, "sin": [[0.3, 1]]}},
                "boundary": {"U": 1.0, "V": 1.0}},
  "planted": {"f": {"sin": [[0.5, 2]]}, "g": 0.0},
  "noise_levels": [0.0, 0.01],
  "tolerances": [5e-2, 5e-1],
  "mu": 1e-8,
  "mu_sweep": [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8],
  "discrepancy_tau": 1.05,
  "max_iter": 500,
  "gradient_check": {"directions": 10, "step": 1e-5, "tolerance": 1e-4}
})"},
        {"stability-sweep", R"({
  "grid": {"nx": [101], "nt": 1000},
  "omega": {"lo": [0.2], "hi": [0.5]},
  "tilde": {"a": 0.5, "b": 1.0, "c": 0.8, "d": -0.2},
  "reference": {"initial": {"U": {"const": 1.0, "sin": [[0.5, 1]]}, "V": {"const": 1.0, "sin": [[0.3, 1]]}},
                "boundary": {"U": 1.0, "V": 1.0}},
  "pairs": 20,
  "modes": 4,
  "epsilon": 1e-2,
  "delta0": -1,
  "bound_M": 1e6,
  "check_scaling": {"enabled": true, "factor": 0.1, "max_change": 0.05},
  "check_refinement": {"enabled": true, "max_change": 0.2}
})"},
        {"identify-all", R"({
  "grid": {"nx": [101], "nt": 200},
  "tilde": {"a": 0.5, "b": 1.0, "c": 1.0, "d": 0.3, "A": [0.2], "B": [0.1], "C": [0.1], "D": [0.2]},
  "omega1": {"complement": {"lo": [0.15], "hi": [0.85]}},
  "planted": {
    "a": {"bump": {"lo": 0.2, "hi": 0.8, "amp": 0.5, "k": 0}},
    "b": {"bump": {"lo": 0.2, "hi": 0.8, "amp": 0.4, "k": 1}},
    "c": {"bump": {"lo": 0.2, "hi": 0.8, "amp": -0.3, "k": 2}},
    "d": {"bump": {"lo": 0.2, "hi": 0.8, "amp": 0.6, "k": 1}},
    "A": [{"bump": {"lo": 0.2, "hi": 0.8, "amp": 0.3, "k": 0}}],
    "B": [{"bump": {"lo": 0.2, "hi": 0.8, "amp": -0.2, "k": 1}}],
    "C": [{"bump": {"lo": 0.2, "hi": 0.8, "amp": 0.25, "k": 0}}],
    "D": [{"bump": {"lo": 0.2, "hi": 0.8, "amp": 0.35, "k": 2}}]
  },
  "tol_det": -1,
  "condition_cap": 1e12,
  "fine_factor": 0.01,
  "tolerance": 5e-2
})"},
        {"control", R"({
  "grid": {"nx": [101], "nt": 500, "T": 0.5, "theta": 0.25},
  "coefficients": {"a": 0.5, "b": 0.2, "c": 1.0, "d": -0.3, "B": [0.5], "C": [0.3]},
  "omega": {"lo": [0.0], "hi": [0.3]},
  "initial": {"U": {"sin": [[1.0, 1]]}, "V": 0.0},
  "target": {"U": {"sin": [[0.5, 1]]}, "V": {"sin": [[0.3, 1]]}},
  "t_target": -1,
  "epsilon": 0.05,
  "beta": 1e-2,
  "beta_factor": 0.1,
  "beta_floor": 1e-8,
  "cg_max_iter": 400,
  "tol_nu": 1e-8
})"},
        {"control3", R"({
  "grid": {"nx": [101], "nt": 500, "T": 0.5, "theta": 0.25},
  "matrix": [[0.2, 1.0, 0.8], [0.5, -0.1, 0.3], [0.4, 0.6, 0.1]],
  "omega": {"lo": [0.1], "hi": [0.4]},
  "initial": {"U": {"sin": [[1.0, 1]]}, "V": 0.0, "W": 0.0},
  "target": {"U": {"sin": [[0.5, 1]]}, "V": {"sin": [[0.3, 1]]}, "W": {"sin": [[0.3, 1]]}},
  "t_target": -1,
  "epsilon": 0.1,
  "beta": 1e-2,
  "beta_factor": 0.1,
  "beta_floor": 1e-8,
  "cg_max_iter": 400,
  "tol13": 1e-8
})"},
        {"realize-positivity", R"({
  "grid": {"nx": [101], "nt": 500, "T": 1.0, "theta": 0.5},
  "coefficients": {"a": 0.5, "b": 0.2, "c": 1.0, "d": -0.3, "B": [0.5], "C": [0.3]},
  "omega": {"lo": [0.2], "hi": [0.6]},
  "omega1": {"complement": {"lo": [0.15], "hi": [0.85]}},
  "initial": {"U": {"sin": [[1.0, 2]]}, "V": {"sin": [[-1.0, 2]]}},
  "boundary": {"U": 0.0, "V": 0.0},
  "delta0": 0.1,
  "t1_fraction": 0.8,
  "level": 1.0,
  "rolloff": 0.05,
  "epsilon": 0.02
})"},
    };
    return table;
}

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw ConfigError("config field '" + path + "': " + what);
}

double eval_terms(const ConfigView& v, double x) {
    double out = 0.0;
    if (v.has("const")) out += v.number("const");
    if (v.has("x")) out += v.number("x") * x;
    for (const char* kind : {"sin", "cos"}) {
        if (!v.has(kind)) continue;
        const Json& terms = v.at(kind);
        if (!terms.is_array()) bad(v.path(kind), "expected a list of [amplitude, k] pairs");
        for (const auto& t : terms) {
            if (!t.is_array() || t.size() != 2 || !t[0].is_number() || !t[1].is_number())
                bad(v.path(kind), "expected a list of [amplitude, k] pairs");
            double arg = t[1].get<double>() * M_PI * x;
            out += t[0].get<double>() * (kind[0] == 's' ? std::sin(arg) : std::cos(arg));
        }
    }
    if (v.has("bump")) {
        ConfigView b = v.sub("bump");
        double lo = b.number("lo"), hi = b.number("hi");
        if (!(hi > lo)) bad(b.path("hi"), "must exceed lo");
        if (x > lo && x < hi) {
            double y = (x - lo) / (hi - lo);
            double k = b.has("k") ? b.number("k") : 0.0;
            out += b.number("amp") * std::pow(std::sin(M_PI * y), 2) * std::cos(k * M_PI * y);
        }
    }
    return out;
}

std::array<double, 2> pair_from(const ConfigView& v, const std::string& key, int dim, double fill) {
    std::vector<double> vals = v.numbers(key);
    if (static_cast<int>(vals.size()) < dim) bad(v.path(key), "needs one entry per axis");
    std::array<double, 2> out{fill, fill};
    for (int a = 0; a < dim; ++a) out[static_cast<std::size_t>(a)] = vals[static_cast<std::size_t>(a)];
    return out;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {
        "forward", "forward3", "audit-carleman", "audit-carleman3", "audit-lemma31", "audit-lemma32", "audit-lemma23",
        "reconstruct-snapshot", "reconstruct-variational", "stability-sweep", "identify-all", "control", "control3",
        "realize-positivity"};
    return names;
}

bool is_command(const std::string& name) {
    const auto& n = command_names();
    return std::find(n.begin(), n.end(), name) != n.end();
}

void merge_into(Json& base, const Json& patch) {
    if (base.is_object() && patch.is_object()) {
        for (auto it = patch.begin(); it != patch.end(); ++it) {
            if (base.contains(it.key())) merge_into(base[it.key()], it.value());
            else base[it.key()] = it.value();
        }
        return;
    }
    base = patch;
}

Json default_config(const std::string& command) {
    const auto& table = defaults_table();
    auto it = table.find(command);
    if (it == table.end()) throw ConfigError("config field 'command': unknown subcommand '" + command + "'");
    Json cfg = Json::object();
    cfg["command"] = command;
    merge_into(cfg, Json::parse(kCommon));
    merge_into(cfg, Json::parse(it->second));
    return cfg;
}

void apply_override(Json& config, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not KEY=VALUE");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    Json value = Json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    Json* node = &config;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) {
        if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
        parts.push_back(part);
    }
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->is_object()) throw ConfigError("override key '" + key + "' descends into a non-object");
        node = &(*node)[parts[i]];
        if (node->is_null()) *node = Json::object();
    }
    if (!node->is_object()) throw ConfigError("override key '" + key + "' descends into a non-object");
    (*node)[parts.back()] = value;
}

Json resolve_config(const RunOptions& options) {
    Json file = Json::object();
    if (!options.config_path.empty()) {
        std::ifstream in(options.config_path);
        if (!in) throw ConfigError("cannot open config file '" + options.config_path + "'");
        file = Json::parse(in, nullptr, false);
        if (file.is_discarded() || !file.is_object())
            throw ConfigError("config file '" + options.config_path + "' is not a JSON object");
    }
    std::string command = options.command;
    if (command.empty()) {
        if (!file.contains("command") || !file["command"].is_string())
            throw ConfigError("config field 'command': missing (give it in the file or on the command line)");
        command = file["command"].get<std::string>();
    }
    Json cfg = default_config(command);
    merge_into(cfg, file);
    cfg["command"] = command;
    if (options.seed) cfg["seed"] = *options.seed;
    for (const auto& o : options.overrides) apply_override(cfg, o);
    if (!cfg["seed"].is_number_integer() || cfg["seed"].get<long long>() < 0)
        throw ConfigError("config field 'seed': must be a non-negative integer");
    return cfg;
}

bool ConfigView::has(const std::string& key) const {
    return root_->is_object() && root_->contains(key) && !(*root_)[key].is_null();
}

const Json& ConfigView::at(const std::string& key) const {
    if (!has(key)) bad(path(key), "missing");
    return (*root_)[key];
}

ConfigView ConfigView::sub(const std::string& key) const {
    const Json& j = at(key);
    if (!j.is_object()) bad(path(key), "expected an object");
    return ConfigView(j, path(key));
}

double ConfigView::number(const std::string& key) const {
    const Json& j = at(key);
    if (!j.is_number()) bad(path(key), "expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) bad(path(key), "must be finite");
    return v;
}

double ConfigView::positive(const std::string& key) const {
    double v = number(key);
    if (!(v > 0.0)) bad(path(key), "must be positive");
    return v;
}

int ConfigView::integer(const std::string& key) const {
    const Json& j = at(key);
    if (!j.is_number_integer()) bad(path(key), "expected an integer");
    return j.get<int>();
}

bool ConfigView::flag(const std::string& key) const {
    const Json& j = at(key);
    if (!j.is_boolean()) bad(path(key), "expected true or false");
    return j.get<bool>();
}

std::string ConfigView::text(const std::string& key) const {
    const Json& j = at(key);
    if (!j.is_string()) bad(path(key), "expected a string");
    return j.get<std::string>();
}

std::vector<double> ConfigView::numbers(const std::string& key) const {
    const Json& j = at(key);
    if (!j.is_array()) bad(path(key), "expected a list of numbers");
    std::vector<double> out;
    for (const auto& x : j) {
        if (!x.is_number()) bad(path(key), "expected a list of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

std::vector<int> ConfigView::integers(const std::string& key) const {
    const Json& j = at(key);
    if (!j.is_array()) bad(path(key), "expected a list of integers");
    std::vector<int> out;
    for (const auto& x : j) {
        if (!x.is_number_integer()) bad(path(key), "expected a list of integers");
        out.push_back(x.get<int>());
    }
    return out;
}

Grid grid_from(const ConfigView& view) {
    ConfigView g = view.sub("grid");
    int dim = g.integer("dim");
    if (dim != 1 && dim != 2) bad(g.path("dim"), "must be 1 or 2");
    std::vector<int> nx = g.integers("nx");
    if (static_cast<int>(nx.size()) < dim) bad(g.path("nx"), "needs one entry per axis");
    auto lo = pair_from(g, "lo", dim, 0.0);
    auto hi = pair_from(g, "hi", dim, 1.0);
    try {
        if (dim == 1) return Grid::make_1d(lo[0], hi[0], nx[0], g.positive("T"), g.integer("nt"), g.number("theta"));
        return Grid::make_2d(lo, hi, {nx[0], nx[1]}, g.positive("T"), g.integer("nt"), g.number("theta"));
    } catch (const Error& e) {
        throw ConfigError(std::string("config field 'grid': ") + e.what());
    }
}

SubdomainMask mask_from(const Grid& grid, const ConfigView& view, const std::string& name) {
    ConfigView m = view.sub(name);
    if (m.has("complement")) {
        ConfigView c = m.sub("complement");
        auto inner = box_mask(grid, name + "_core", pair_from(c, "lo", grid.dim(), 0.0), pair_from(c, "hi", grid.dim(), 0.0));
        return complement(grid, inner, name);
    }
    auto mask = box_mask(grid, name, pair_from(m, "lo", grid.dim(), 0.0), pair_from(m, "hi", grid.dim(), 0.0));
    if (mask.count() == 0) bad(view.path(name), "contains no grid nodes");
    return mask;
}

SpatialField field_from(const Grid& grid, const ConfigView& view, const std::string& key) {
    const auto N = static_cast<std::size_t>(grid.nodes());
    if (!view.has(key)) return SpatialField(N, 0.0);
    const Json& j = view.at(key);
    if (j.is_number()) return SpatialField(N, j.get<double>());
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s.rfind("csv:", 0) != 0) bad(view.path(key), "string fields must be 'csv:PATH'");
        std::string p = s.substr(4);
        std::ifstream in(p);
        if (!in) bad(view.path(key), "cannot open input CSV '" + p + "'");
        return read_spatial_csv(in, grid);
    }
    if (!j.is_object()) bad(view.path(key), "expected a number, 'csv:PATH' or a term object");
    ConfigView terms(j, view.path(key));
    int axis = terms.has("axis") ? terms.integer("axis") : 0;
    if (axis < 0 || axis >= grid.dim()) bad(terms.path("axis"), "out of range");
    SpatialField out(N);
    for (int n = 0; n < grid.nodes(); ++n) out[static_cast<std::size_t>(n)] = eval_terms(terms, grid.x(n, axis));
    return out;
}

CoefficientField coefficient_from(const Grid& grid, const ConfigView& view, const std::string& key) {
    if (!view.has(key)) return {};
    const Json& j = view.at(key);
    if (j.is_number()) {
        if (j.get<double>() == 0.0) return {};
        return CoefficientField::constant(grid, j.get<double>());
    }
    return CoefficientField::spatial(field_from(grid, view, key));
}

VectorCoefficient vector_from(const Grid& grid, const ConfigView& view, const std::string& key) {
    VectorCoefficient v;
    if (!view.has(key)) return v;
    const Json& j = view.at(key);
    if (!j.is_array() || static_cast<int>(j.size()) < grid.dim())
        bad(view.path(key), "expected one entry per axis");
    for (int a = 0; a < grid.dim(); ++a) {
        Json holder = Json::object();
        holder["v"] = j[static_cast<std::size_t>(a)];
        ConfigView hv(holder, view.path(key) + "[" + std::to_string(a) + "]");
        v.comp[static_cast<std::size_t>(a)] = coefficient_from(grid, hv, "v");
    }
    return v;
}

CoefficientSet2x2 coefficients_2x2(const Grid& grid, const ConfigView& view) {
    CoefficientSet2x2 c;
    c.a = coefficient_from(grid, view, "a");
    c.b = coefficient_from(grid, view, "b");
    c.c = coefficient_from(grid, view, "c");
    c.d = coefficient_from(grid, view, "d");
    c.A = vector_from(grid, view, "A");
    c.B = vector_from(grid, view, "B");
    c.C = vector_from(grid, view, "C");
    c.D = vector_from(grid, view, "D");
    return c;
}

CoefficientSet3x3 coefficients_3x3(const Grid& grid, const ConfigView& view) {
    const Json& m = view.at("matrix");
    if (!m.is_array() || m.size() != 3) bad(view.path("matrix"), "expected a 3x3 list");
    CoefficientSet3x3 c;
    for (std::size_t i = 0; i < 3; ++i) {
        if (!m[i].is_array() || m[i].size() != 3) bad(view.path("matrix"), "expected a 3x3 list");
        for (std::size_t j = 0; j < 3; ++j) {
            Json holder = Json::object();
            holder["v"] = m[i][j];
            ConfigView hv(holder, view.path("matrix") + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
            c.a[i][j] = coefficient_from(grid, hv, "v");
        }
    }
    return c;
}

}  // namespace pinv::cli
