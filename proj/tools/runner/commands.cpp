#include "commands.hpp"

#include "pinv/errors.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

namespace pinv::cli {

CommandContext::CommandContext(const Json& config, ArtifactWriter& writer, int workers)
    : config_(config), writer_(writer), workers_(workers), seed_(config.at("seed").get<std::uint64_t>()) {}

void CommandContext::check(const std::string& name, bool ok) { checks_[name] = ok; }

bool CommandContext::passed() const {
    for (const auto& [name, ok] : checks_.items())
        if (!ok.get<bool>()) return false;
    return true;
}

void CommandContext::write_field(const std::string& name, const Grid& grid, const SpaceTimeField& field) {
    int max_levels = 0;
    ConfigView v = view();
    if (v.has("output") && v.sub("output").has("max_levels")) max_levels = v.sub("output").integer("max_levels");
    writer_.write(name, strided_field_csv(grid, field, max_levels));
}

void CommandContext::write_spatial(const std::string& name, const Grid& grid, const SpatialField& field, double t) {
    writer_.write(name, spatial_csv(grid, field, t));
}

void CommandContext::write_table(const std::string& name, const std::vector<std::string>& header,
                                 const std::vector<std::vector<double>>& rows) {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
        os << '\n';
    }
    writer_.write(name, os.str());
}

void CommandContext::write_plot(const std::string& name, const std::vector<PlotSeries>& series, const PlotSpec& spec) {
    auto svg = render_plot(series, spec);
    if (!svg) {
        std::fprintf(stderr, "warning: empty table, plot '%s' not written\n", name.c_str());
        return;
    }
    writer_.write(name, *svg);
}

void CommandContext::timing(const std::string& phase, double seconds) { timings_.emplace_back(phase, seconds); }

std::string strided_field_csv(const Grid& grid, const SpaceTimeField& field, int max_levels) {
    const int nt = grid.nt();
    if (max_levels <= 1 || nt + 1 <= max_levels) return field_csv(grid, field);
    const int stride = (nt + max_levels - 2) / (max_levels - 1);
    std::vector<int> levels;
    for (int k = 0; k < nt; k += stride) levels.push_back(k);
    levels.push_back(nt);
    std::ostringstream os;
    os << (grid.dim() == 2 ? "x,y,t,value\n" : "x,t,value\n");
    for (int k : levels) {
        const std::string t = format_double(grid.time(k));
        for (int n = 0; n < grid.nodes(); ++n) {
            os << format_double(grid.x(n, 0)) << ',';
            if (grid.dim() == 2) os << format_double(grid.x(n, 1)) << ',';
            os << t << ',' << format_double(field(k, n)) << '\n';
        }
    }
    return os.str();
}

double relative_error(const Grid& grid, const SpatialField& a, const SpatialField& b) {
    SpatialField d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const double ref = l2_norm_spatial(grid, b);
    return ref > 0.0 ? l2_norm_spatial(grid, d) / ref : l2_norm_spatial(grid, d);
}

namespace {

using Handler = void (*)(CommandContext&);

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> table = {
        {"forward", run_forward},
        {"forward3", run_forward3},
        {"audit-carleman", run_audit_carleman},
        {"audit-carleman3", run_audit_carleman3},
        {"audit-lemma31", run_audit_lemma31},
        {"audit-lemma32", run_audit_lemma32},
        {"audit-lemma23", run_audit_lemma23},
        {"reconstruct-snapshot", run_reconstruct_snapshot},
        {"reconstruct-variational", run_reconstruct_variational},
        {"stability-sweep", run_stability_sweep},
        {"identify-all", run_identify_all},
        {"control", run_control},
        {"control3", run_control3},
        {"realize-positivity", run_realize_positivity},
    };
    return table;
}

}  // namespace

int run(const RunOptions& options, std::ostream& err) {
    try {
        if (options.workers < 1) throw ConfigError("option '--workers': must be at least 1");
        const Json config = resolve_config(options);
        const std::string command = config.at("command").get<std::string>();
        ArtifactWriter writer(options.out_dir);
        CommandContext ctx(config, writer, options.workers);
        writer.write("config.json", config.dump(2) + "\n");

        const auto start = std::chrono::steady_clock::now();
        handlers().at(command)(ctx);
        const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        const bool pass = ctx.passed();
        Json summary = Json::object();
        summary["command"] = command;
        summary["pass"] = pass;
        summary["checks"] = ctx.checks();
        summary["results"] = ctx.results();
        writer.write("summary.json", summary.dump(2) + "\n");

        std::ostringstream log;
        for (const auto& [phase, seconds] : ctx.timings()) log << phase << ' ' << format_double(seconds) << '\n';
        log << "total " << format_double(total) << '\n';
        writer.write("timings.log", log.str());
        err << log.str();
        writer.flush();

        for (const auto& [name, ok] : ctx.checks().items())
            err << (ok.get<bool>() ? "PASS " : "FAIL ") << name << '\n';
        return pass ? kPass : kAuditFail;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kError;
    }
}

}  // namespace pinv::cli
