#include "commands.hpp"
#include "presets.hpp"

#include "pinv/carleman.hpp"
#include "pinv/errors.hpp"
#include "pinv/forward.hpp"
#include "pinv/random_fields.hpp"
#include "pinv/transforms.hpp"
#include "pinv/transport.hpp"

#include <algorithm>
#include <cmath>

namespace pinv::cli {

namespace {

double max_abs(const FieldSet& fields) {
    double m = 0.0;
    for (const auto& f : fields) m = std::max(m, f.max_abs());
    return m;
}

void record_residual(CommandContext& ctx, const ParabolicSolver& solver, const FieldSet& state, const ProblemData& data) {
    const double r = solver.residual(state, data);
    ctx.results()["residual"] = r;
    ctx.check("discrete_residual", r <= 1e-8 * std::max(1.0, max_abs(state)));
}

double heat_error(const Grid& grid, int mode) {
    ProblemData data = ProblemData::zero(grid, 2);
    for (int n = 0; n < grid.nodes(); ++n)
        data.initial[0][static_cast<std::size_t>(n)] = std::sin(mode * M_PI * grid.x(n, 0));
    FieldSet X = solve_system(SystemOperator(2), data, grid);
    return l2_norm(grid, X[0] - heat_solution(grid, mode));
}

std::vector<Json> audit_rows(const AuditTable& table) {
    std::vector<Json> rows;
    for (const auto& r : table.rows)
        rows.push_back({{"s", r.s}, {"max_ratio", r.max_ratio}, {"log10_max_ratio", r.log10_max_ratio},
                        {"valid", r.valid}, {"degenerate", r.degenerate}});
    return rows;
}

void report_audit(CommandContext& ctx, const AuditTable& table) {
    std::vector<std::vector<double>> rows;
    PlotSeries series{"max ratio", {}, {}};
    for (const auto& r : table.rows) {
        rows.push_back({r.s, r.max_ratio, r.log10_max_ratio, double(r.valid), double(r.degenerate)});
        series.x.push_back(r.s);
        series.y.push_back(r.log10_max_ratio);
    }
    ctx.write_table("ratios.csv", {"s", "max_ratio", "log10_max_ratio", "valid", "degenerate"}, rows);
    ctx.write_plot("ratio_vs_s.svg", {series}, {"Carleman ratio", "s", "log10 ratio", true, false, false});
    ctx.results()["rows"] = audit_rows(table);
    if (table.s0_index) ctx.results()["s0"] = table.s0();
    else ctx.results()["s0"] = nullptr;
    ctx.check("finite", table.finite);
    ctx.check("nonincreasing_from_s0", table.nonincreasing);
}

WeightSpec weight_from(const Grid& grid, const ConfigView& view, const SubdomainMask& omega) {
    ConfigView w = view.sub("weight");
    WeightSpec weight = build_weight(grid, omega, w.positive("lambda"));
    if (w.has("tau")) weight.tau = w.positive("tau");
    for (const auto& msg : weight.warnings) std::fprintf(stderr, "warning: %s\n", msg.c_str());
    return weight;
}

}  // namespace

void run_forward(CommandContext& ctx) {
    ConfigView v = ctx.view();
    const Grid grid = grid_from(v);
    const std::string preset = v.text("preset");
    CoefficientSet2x2 coeffs;
    ProblemData data = ProblemData::zero(grid, 2);
    if (preset == "heat") {
        const int mode = v.sub("heat").integer("mode");
        for (int n = 0; n < grid.nodes(); ++n)
            data.initial[0][static_cast<std::size_t>(n)] = std::sin(mode * M_PI * grid.x(n, 0));
    } else if (preset == "coupled") {
        coeffs = coefficients_2x2(grid, v.sub("coefficients"));
        data = problem_data(grid, v, {"U", "V"});
    } else if (preset != "zero") {
        throw ConfigError("config field 'preset': expected heat, coupled or zero");
    }
    for (const auto& w : data.compatibility_warnings(grid)) std::fprintf(stderr, "warning: %s\n", w.c_str());

    FieldSet X;
    {
        PhaseTimer t(ctx, "solve");
        ParabolicSolver solver(grid, SystemOperator::from(coeffs));
        X = solver.solve(data);
        record_residual(ctx, solver, X, data);
    }
    ctx.write_field("U.csv", grid, X[0]);
    ctx.write_field("V.csv", grid, X[1]);
    ctx.results()["preset"] = preset;
    ctx.results()["max_abs"] = max_abs(X);

    if (preset == "zero") ctx.check("zero_solution", max_abs(X) == 0.0);
    if (preset != "heat") return;

    const int mode = v.sub("heat").integer("mode");
    const double error = l2_norm(grid, X[0] - heat_solution(grid, mode));
    ctx.results()["l2_error"] = error;
    ctx.check("l2_error_below_tolerance", error < v.positive("tolerance"));

    ConfigView cv = v.sub("convergence");
    if (!cv.flag("enabled")) return;
    PhaseTimer t(ctx, "convergence");
    const std::vector<int> nxs = cv.integers("nx");
    if (nxs.size() < 2) throw ConfigError("config field 'convergence.nx': needs at least two resolutions");
    const double base = grid.nx(0) - 1;
    std::vector<double> dx(nxs.size()), err(nxs.size());
    auto errors = parallel_map(ctx.workers(), nxs.size(), [&](std::size_t i) {
        const double r = (nxs[i] - 1) / base;
        const int nt = std::max(2, static_cast<int>(std::lround(grid.nt() * r * r)));
        return heat_error(Grid::make_1d(grid.lo(0), grid.hi(0), nxs[i], grid.T(), nt, grid.theta()), mode);
    });
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < nxs.size(); ++i) {
        dx[i] = (grid.hi(0) - grid.lo(0)) / (nxs[i] - 1);
        err[i] = errors[i];
        rows.push_back({double(nxs[i]), dx[i], err[i]});
    }
    std::vector<double> orders;
    for (std::size_t i = 1; i < nxs.size(); ++i) orders.push_back(std::log(err[i - 1] / err[i]) / std::log(dx[i - 1] / dx[i]));
    const double slope = loglog_slope(dx, err);
    ctx.write_table("convergence.csv", {"nx", "dx", "l2_error"}, rows);
    ctx.write_plot("convergence.svg", {{"L2 error", dx, err}}, {"Convergence", "dx", "L2 error", true, true, true});
    ctx.results()["convergence"] = {{"nx", nxs}, {"l2_error", err}, {"orders", orders}, {"fitted_order", slope}};
    ctx.check("observed_order", slope >= cv.number("min_order"));
}

void run_forward3(CommandContext& ctx) {
    ConfigView v = ctx.view();
    const Grid grid = grid_from(v);
    const CoefficientSet3x3 coeffs = coefficients_3x3(grid, v);
    const ProblemData data = problem_data(grid, v, {"U", "V", "W"});
    FieldSet X;
    {
        PhaseTimer t(ctx, "solve");
        ParabolicSolver solver(grid, SystemOperator::from(coeffs));
        X = solver.solve(data);
        record_residual(ctx, solver, X, data);
    }
    ctx.write_field("U.csv", grid, X[0]);
    ctx.write_field("V.csv", grid, X[1]);
    ctx.write_field("W.csv", grid, X[2]);
    ctx.results()["max_abs"] = max_abs(X);
}

void run_audit_carleman(CommandContext& ctx) {
    ConfigView v = ctx.view();
    const Grid grid = grid_from(v);
    const SubdomainMask omega = mask_from(grid, v, "omega");
    WeightSpec weight = weight_from(grid, v, omega);
    const std::vector<double> s_grid = v.sub("weight").numbers("s_grid");
    const int count = v.integer("instances");
    const double range = v.positive("coefficient_range");
    PhaseTimer t(ctx, "audit");
    auto per_instance = parallel_map(ctx.workers(), static_cast<std::size_t>(count), [&](std::size_t i) {
        Instance2x2 inst = random_instance_2x2(grid, stream_seed(ctx.seed(), 1, i), range);
        WeightSpec w = weight;
        std::vector<CarlemanSides> out;
        for (double s : s_grid) {
            w.s = s;
            out.push_back(carleman_sides_2x2(grid, inst.coeffs, inst.u, inst.v, inst.f, inst.g, w, omega));
        }
        return out;
    });
    std::vector<std::vector<CarlemanSides>> sides(s_grid.size());
    for (const auto& inst : per_instance)
        for (std::size_t j = 0; j < s_grid.size(); ++j) sides[j].push_back(inst[j]);
    report_audit(ctx, audit_ratios(s_grid, sides, v.number("log10_cap")));
}

void run_audit_carleman3(CommandContext& ctx) {
    ConfigView v = ctx.view();
    const Grid grid = grid_from(v);
    const SubdomainMask omega = mask_from(grid, v, "omega");
    WeightSpec weight = weight_from(grid, v, omega);
    const std::vector<double> s_grid = v.sub("weight").numbers("s_grid");
    const int count = v.integer("instances");
    const double range = v.positive("coefficient_range");
    const double tol13 = v.positive("tol13");
    PhaseTimer t(ctx, "audit");
    auto per_instance = parallel_map(ctx.workers(), static_cast<std::size_t>(count), [&](std::size_t i) {
        Instance3x3 inst = random_instance_3x3(grid, stream_seed(ctx.seed(), 2, i), range);
        check_a13_floor(grid, inst.coeffs, tol13);
        WeightSpec w = weight;
        std::vector<CarlemanSides> out;
        for (double s : s_grid) {
            w.s = s;
            out.push_back(carleman_sides_3x3(grid, inst.coeffs, inst.u, inst.v, inst.w, inst.f, inst.g, inst.h, w, omega));
        }
        return out;
    });
    std::vector<std::vector<CarlemanSides>> sides(s_grid.size());
    for (const auto& inst : per_instance)
        for (std::size_t j = 0; j < s_grid.size(); ++j) sides[j].push_back(inst[j]);
    report_audit(ctx, audit_ratios(s_grid, sides, v.number("log10_cap")));
}

void run_audit_lemma31(CommandContext& ctx) {
    ConfigView v = ctx.view();
    const int cases = v.integer("cases");
    const std::vector<double> s_values = v.numbers("s_values");
    const int samples = v.integer("samples");
    const double T = v.positive("T");
    const int modes = v.integer("modes");
    const double amplitude = v.positive("amplitude");
    const double kappa0 = v.positive("kappa0");
    const double slack = v.number("slack");
    const double sign = v.sub("lemma31").number("exponent_sign");
    PhaseTimer t(ctx, "audit");
    auto per_case = parallel_map(ctx.workers(), static_cast<std::size_t>(cases), [&](std::size_t i) {
        Rng rng(stream_seed(ctx.seed(), 31, i));
        const std::vector<double> g = random_time_series(rng, samples, T, modes, amplitude);
        std::vector<InequalitySides> out;
        for (double s : s_values) out.push_back(lemma31_check(g, T, s, kappa0, sign));
        return out;
    });
    std::vector<std::vector<double>> rows;
    int failures = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < per_case.size(); ++i)
        for (std::size_t j = 0; j < s_values.size(); ++j) {
            const auto& r = per_case[i][j];
            const bool holds = r.lhs <= r.rhs * (1.0 + slack);
            const double ratio = r.rhs > 0.0 ? r.lhs / r.rhs : (r.lhs > 0.0 ? HUGE_VAL : 0.0);
            if (!holds) ++failures;
            worst = std::max(worst, ratio);
            rows.push_back({double(i), s_values[j], r.lhs, r.rhs, ratio, holds ? 1.0 : 0.0});
        }
    ctx.write_table("cases.csv", {"case", "s", "lhs", "rhs", "ratio", "holds"}, rows);
    ctx.results()["cases"] = static_cast<int>(rows.size());
    ctx.results()["failures"] = failures;
    ctx.results()["worst_ratio"] = worst;
    ctx.check("all_cases_hold", failures == 0);
}

void run_audit_lemma32(CommandContext& ctx) {
    ConfigView v = ctx.view();
    const Grid grid = grid_from(v);
    const SubdomainMask omega = mask_from(grid, v, "omega");
    const WeightSpec weight = build_weight(grid, omega, v.positive("lambda"));
    const std::vector<double> s_values = v.numbers("s_values");
    const double delta = v.positive("delta");
    const int cases = v.integer("cases");
    PhaseTimer t(ctx, "audit");
    auto per_case = parallel_map(ctx.workers(), static_cast<std::size_t>(cases), [&](std::size_t i) {
        Rng rng(stream_seed(ctx.seed(), 32, i));
        const SpaceTimeField q = random_spacetime_field(grid, rng, 4, 1.0);
        std::vector<double> out;
        for (double s : s_values) out.push_back(lemma32_check(grid, q, weight, s, delta).kappa17);
        return out;
    });
    std::vector<std::vector<double>> rows;
    bool finite = true;
    double worst = 1.0;
    std::vector<double> kmax(s_values.size(), 0.0);
    for (std::size_t i = 0; i < per_case.size(); ++i) {
        double lo = HUGE_VAL, hi = 0.0;
        for (std::size_t j = 0; j < s_values.size(); ++j) {
            const double k = per_case[i][j];
            if (!std::isfinite(k) || !(k > 0.0)) finite = false;
            lo = std::min(lo, k);
            hi = std::max(hi, k);
            kmax[j] = std::max(kmax[j], k);
            rows.push_back({double(i), s_values[j], k});
        }
        if (lo > 0.0) worst = std::max(worst, hi / lo);
    }
    ctx.write_table("kappa17.csv", {"case", "s", "kappa17"}, rows);
    ctx.write_plot("kappa17_vs_s.svg", {{"max kappa", s_values, kmax}}, {"Lemma constant", "s", "kappa", true, false, false});
    ctx.results()["kappa17_max"] = kmax;
    ctx.results()["worst_variation"] = worst;
    ctx.check("finite", finite);
    ctx.check("variation_below_limit", finite && worst < v.positive("max_variation"));
}

void run_audit_lemma23(CommandContext& ctx) {
    ConfigView v = ctx.view();
    const Grid grid = grid_from(v);
    const int cases = v.integer("cases");
    const std::vector<double> s_values = v.numbers("s_values");
    TransportOptions topt;
    topt.tol_nu = v.number("tol_nu");

    auto sweep = [&](const Grid& g, bool weighted) {
        const SubdomainMask omega = mask_from(g, v, "omega");
        const SubdomainMask omega_prime = mask_from(g, v, "omega_prime");
        if (!omega_prime.subset_of(omega)) throw ConfigError("config field 'omega_prime': must lie inside omega");
        const VectorCoefficient p = vector_from(g, v, "p");
        const CoefficientField q = coefficient_from(g, v, "q");
        return parallel_map(ctx.workers(), static_cast<std::size_t>(cases), [&, weighted](std::size_t i) {
            const SpaceTimeField f = random_transport_rhs(g, stream_seed(ctx.seed(), 23, i));
            const SpaceTimeField u = solve_transport(g, p, q, f, omega, topt);
            std::vector<double> out{transport_estimate_ratio(g, u, f, omega_prime)};
            if (weighted)
                for (double s : s_values)
                    out.push_back(lemma23_weighted_estimate(g, u, f, p, q, omega, omega_prime, s, topt.tol_nu).kappa);
            return out;
        });
    };

    PhaseTimer t(ctx, "audit");
    auto base = sweep(grid, true);
    std::vector<std::vector<double>> rows;
    double kappa = 0.0;
    bool finite = true;
    std::vector<double> kappa_s(s_values.size(), 0.0);
    for (std::size_t i = 0; i < base.size(); ++i) {
        kappa = std::max(kappa, base[i][0]);
        if (!std::isfinite(base[i][0])) finite = false;
        std::vector<double> row{double(i), base[i][0]};
        for (std::size_t j = 0; j < s_values.size(); ++j) {
            kappa_s[j] = std::max(kappa_s[j], base[i][j + 1]);
            row.push_back(base[i][j + 1]);
        }
        rows.push_back(row);
    }
    std::vector<std::string> header{"case", "ratio"};
    for (double s : s_values) header.push_back("kappa_s" + format_double(s));
    ctx.write_table("ratios.csv", header, rows);
    ctx.results()["kappa_hat"] = kappa;
    ctx.results()["kappa_weighted"] = kappa_s;
    ctx.check("finite", finite && std::isfinite(kappa));

    if (v.flag("refine")) {
        auto fine = sweep(grid.refined(), false);
        double kappa_fine = 0.0;
        for (const auto& r : fine) kappa_fine = std::max(kappa_fine, r[0]);
        const double change = kappa > 0.0 ? std::abs(kappa_fine - kappa) / kappa : HUGE_VAL;
        ctx.results()["kappa_hat_refined"] = kappa_fine;
        ctx.results()["refinement_change"] = change;
        ctx.check("stable_under_refinement", change < v.positive("max_change"));
    }
}

}  // namespace pinv::cli
