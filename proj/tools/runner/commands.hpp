#pragma once

#include "artifacts.hpp"
#include "config.hpp"

#include "pinv/geometry.hpp"
#include "pinv/report.hpp"

#include <chrono>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace pinv::cli {

/// Everything a subcommand needs: the resolved config, the artifact writer and the summary being built.
class CommandContext {
public:
    CommandContext(const Json& config, ArtifactWriter& writer, int workers);

    const Json& config() const { return config_; }
    ConfigView view() const { return ConfigView(config_); }
    std::uint64_t seed() const { return seed_; }
    int workers() const { return workers_; }
    ArtifactWriter& writer() { return writer_; }

    /// Record a named PASS/FAIL flag; the run passes only if every flag does.
    void check(const std::string& name, bool ok);
    bool passed() const;
    Json& results() { return results_; }
    const Json& checks() const { return checks_; }

    void write_field(const std::string& name, const Grid& grid, const SpaceTimeField& field);
    void write_spatial(const std::string& name, const Grid& grid, const SpatialField& field, double t);
    void write_table(const std::string& name, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);
    void write_plot(const std::string& name, const std::vector<PlotSeries>& series, const PlotSpec& spec);

    /// Wall-clock timing of a named phase, kept out of the deterministic artifacts.
    void timing(const std::string& phase, double seconds);
    const std::vector<std::pair<std::string, double>>& timings() const { return timings_; }

private:
    const Json& config_;
    ArtifactWriter& writer_;
    int workers_;
    std::uint64_t seed_;
    Json checks_ = Json::object();
    Json results_ = Json::object();
    std::vector<std::pair<std::string, double>> timings_;
};

/// Times a scope and reports it to the context on destruction.
class PhaseTimer {
public:
    PhaseTimer(CommandContext& ctx, std::string phase)
        : ctx_(ctx), phase_(std::move(phase)), start_(std::chrono::steady_clock::now()) {}
    ~PhaseTimer() {
        ctx_.timing(phase_, std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count());
    }

private:
    CommandContext& ctx_;
    std::string phase_;
    std::chrono::steady_clock::time_point start_;
};

/// CSV of a space-time field keeping at most max_levels time levels (evenly strided, last level always kept).
std::string strided_field_csv(const Grid& grid, const SpaceTimeField& field, int max_levels);

/// Relative L2 error |a - b| / |b| over the grid.
double relative_error(const Grid& grid, const SpatialField& a, const SpatialField& b);

void run_forward(CommandContext& ctx);
void run_forward3(CommandContext& ctx);
void run_audit_carleman(CommandContext& ctx);
void run_audit_carleman3(CommandContext& ctx);
void run_audit_lemma31(CommandContext& ctx);
void run_audit_lemma32(CommandContext& ctx);
void run_audit_lemma23(CommandContext& ctx);
void run_reconstruct_snapshot(CommandContext& ctx);
void run_reconstruct_variational(CommandContext& ctx);
void run_stability_sweep(CommandContext& ctx);
void run_identify_all(CommandContext& ctx);
void run_control(CommandContext& ctx);
void run_control3(CommandContext& ctx);
void run_realize_positivity(CommandContext& ctx);

/// Exit codes of a run.
enum ExitCode : int { kPass = 0, kError = 1, kAuditFail = 2 };

/// Resolve the config, execute the subcommand and write summary.json, config.json and timings.log.
/// Errors are reported on `err` and mapped to kError.
int run(const RunOptions& options, std::ostream& err);

}  // namespace pinv::cli
