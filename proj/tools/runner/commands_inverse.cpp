#include "commands.hpp"
#include "presets.hpp"

#include "pinv/errors.hpp"
#include "pinv/forward.hpp"
#include "pinv/identification.hpp"
#include "pinv/inverse.hpp"
#include "pinv/random_fields.hpp"

#include <algorithm>
#include <cmath>

namespace pinv::cli {

namespace {

SpatialField nodal(const Grid& grid, const CoefficientField& c) {
    if (c.is_zero()) return SpatialField(static_cast<std::size_t>(grid.nodes()), 0.0);
    return c.level(0);
}

std::vector<double> x_axis(const Grid& grid) {
    std::vector<double> x;
    for (int n = 0; n < grid.nodes(); ++n) x.push_back(grid.x(n, 0));
    return x;
}

double pair_error(const Grid& grid, const SpatialField& fh, const SpatialField& gh, const SpatialField& f,
                  const SpatialField& g) {
    SpatialField df(f.size()), dg(g.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        df[i] = fh[i] - f[i];
        dg[i] = gh[i] - g[i];
    }
    const double num = std::hypot(l2_norm_spatial(grid, df), l2_norm_spatial(grid, dg));
    const double den = std::hypot(l2_norm_spatial(grid, f), l2_norm_spatial(grid, g));
    return den > 0.0 ? num / den : num;
}

}  // namespace

void run_reconstruct_snapshot(CommandContext& ctx) {
    ConfigView v = ctx.view();
    const Grid grid = grid_from(v);
    const CoefficientSet2x2 tilde = coefficients_2x2(grid, v.sub("tilde"));
    const ProblemData reference = problem_data(grid, v.sub("reference"), {"U", "V"});
    const SpatialField f = field_from(grid, v.sub("planted"), "f");
    const SpatialField g = field_from(grid, v.sub("planted"), "g");
    RateOptions rate;
    rate.fine_factor = v.positive("fine_factor");

    SpatialField fh, gh;
    {
        PhaseTimer t(ctx, "reconstruct");
        auto [Ut, Vt] = solve_2x2(tilde, reference, grid);
        CoefficientSet2x2 truth = tilde;
        truth.b = tilde.b.plus(CoefficientField::spatial(f), grid);
        truth.c = tilde.c.plus(CoefficientField::spatial(g), grid);
        FieldSet sources{SpaceTimeField(grid), SpaceTimeField(grid)};
        for (int k = 0; k <= grid.nt(); ++k)
            for (int n = 0; n < grid.nodes(); ++n) {
                sources[0](k, n) = f[static_cast<std::size_t>(n)] * Vt(k, n);
                sources[1](k, n) = g[static_cast<std::size_t>(n)] * Ut(k, n);
            }
        const auto r = matched_difference_rate(grid, SystemOperator::from(truth), sources, rate);
        const int kth = grid.theta_index();
        std::tie(fh, gh) = snapshot_reconstruct(grid, r[0], r[1], Ut.level(kth), Vt.level(kth), v.positive("delta0"));
    }
    const double ef = relative_error(grid, fh, f), eg = relative_error(grid, gh, g);
    ctx.write_spatial("f_hat.csv", grid, fh, grid.theta());
    ctx.write_spatial("g_hat.csv", grid, gh, grid.theta());
    const auto x = x_axis(grid);
    ctx.write_plot("reconstruction.svg",
                   {{"f planted", x, f, false, true}, {"f recovered", x, fh, true, false},
                    {"g planted", x, g, false, true}, {"g recovered", x, gh, true, false}},
                   {"Snapshot reconstruction", "x", "coefficient difference"});
    ctx.results()["f_error"] = ef;
    ctx.results()["g_error"] = eg;
    const double tol = v.positive("tolerance");
    ctx.check("f_error_below_tolerance", ef < tol);
    ctx.check("g_error_below_tolerance", eg < tol);
}

void run_reconstruct_variational(CommandContext& ctx) {
    ConfigView v = ctx.view();
    const Grid grid = grid_from(v);
    VariationalProblem problem{grid, coefficients_2x2(grid, v.sub("known")),
                               problem_data(grid, v.sub("reference"), {"U", "V"}), mask_from(grid, v, "omega"),
                               field_from(grid, v.sub("prior"), "b"), field_from(grid, v.sub("prior"), "c")};
    const SpatialField f = field_from(grid, v.sub("planted"), "f");
    const SpatialField g = field_from(grid, v.sub("planted"), "g");
    SpatialField b_true = problem.b_prior, c_true = problem.c_prior;
    for (std::size_t i = 0; i < b_true.size(); ++i) {
        b_true[i] += f[i];
        c_true[i] += g[i];
    }
    const std::size_t N = b_true.size();

    {
        PhaseTimer t(ctx, "gradient_check");
        ConfigView gc = v.sub("gradient_check");
        const Observation obs = make_observation(problem, b_true, c_true, 0.0, stream_seed(ctx.seed(), 6, 0));
        const VariationalObjective objective(problem, obs, v.positive("mu"));
        Rng rng(stream_seed(ctx.seed(), 6, 1));
        SpatialField b0 = problem.b_prior, c0 = problem.c_prior;
        for (auto& b : b0) b += 0.1 * rng.uniform(-1.0, 1.0);
        SpatialField gb, gcv;
        objective.evaluate(b0, c0, &gb, &gcv);
        const double h = gc.positive("step");
        double worst = 0.0;
        std::vector<std::vector<double>> rows;
        for (int d = 0; d < gc.integer("directions"); ++d) {
            SpatialField db(N), dc(N);
            for (std::size_t i = 0; i < N; ++i) {
                db[i] = rng.uniform(-1.0, 1.0);
                dc[i] = rng.uniform(-1.0, 1.0);
            }
            double analytic = 0.0;
            SpatialField bp = b0, bm = b0, cp = c0, cm = c0;
            for (std::size_t i = 0; i < N; ++i) {
                analytic += gb[i] * db[i] + gcv[i] * dc[i];
                bp[i] += h * db[i];
                bm[i] -= h * db[i];
                cp[i] += h * dc[i];
                cm[i] -= h * dc[i];
            }
            const double fd = (objective.evaluate(bp, cp) - objective.evaluate(bm, cm)) / (2.0 * h);
            const double rel = std::abs(fd - analytic) / std::max(std::abs(fd), 1e-300);
            worst = std::max(worst, rel);
            rows.push_back({double(d), analytic, fd, rel});
        }
        ctx.write_table("gradient_check.csv", {"direction", "adjoint", "finite_difference", "relative_error"}, rows);
        ctx.results()["gradient_check_error"] = worst;
        ctx.check("gradient_check", worst < gc.positive("tolerance"));
    }

    const std::vector<double> noise = v.numbers("noise_levels");
    const std::vector<double> tols = v.numbers("tolerances");
    if (tols.size() != noise.size()) throw ConfigError("config field 'tolerances': needs one entry per noise level");
    VariationalOptions base;
    base.mu = v.positive("mu");
    base.max_iter = v.integer("max_iter");
    base.discrepancy_tau = v.positive("discrepancy_tau");
    const std::vector<double> sweep = v.numbers("mu_sweep");

    PhaseTimer t(ctx, "reconstruct");
    auto results = parallel_map(ctx.workers(), noise.size(), [&](std::size_t i) {
        const Observation obs = make_observation(problem, b_true, c_true, noise[i], stream_seed(ctx.seed(), 7, i));
        VariationalOptions opt = base;
        if (noise[i] > 0.0) opt.mu_sweep = sweep;
        return variational_reconstruct(problem, obs, opt);
    });
    Json runs = Json::array();
    const auto x = x_axis(grid);
    for (std::size_t i = 0; i < noise.size(); ++i) {
        const auto& r = results[i];
        const double err = pair_error(grid, r.f_hat, r.g_hat, f, g);
        const std::string tag = "noise" + std::to_string(i);
        ctx.write_spatial("b_hat_" + tag + ".csv", grid, r.b_hat, 0.0);
        ctx.write_spatial("c_hat_" + tag + ".csv", grid, r.c_hat, 0.0);
        std::vector<std::vector<double>> hist;
        std::vector<double> it, val;
        for (std::size_t k = 0; k < r.misfit_history.size(); ++k) {
            hist.push_back({double(k), r.misfit_history[k]});
            it.push_back(double(k + 1));
            val.push_back(r.misfit_history[k]);
        }
        ctx.write_table("misfit_" + tag + ".csv", {"iteration", "objective"}, hist);
        ctx.write_plot("misfit_" + tag + ".svg", {{"objective", it, val, false, true}},
                       {"Objective history", "iteration", "objective", false, true, false});
        ctx.write_plot("recovery_" + tag + ".svg",
                       {{"b planted", x, b_true, false, true}, {"b recovered", x, r.b_hat, true, false}},
                       {"Variational recovery", "x", "b"});
        runs.push_back({{"noise_level", noise[i]}, {"relative_error", err}, {"mu", r.mu},
                        {"data_misfit", r.data_misfit}, {"iterations", r.iterations}, {"converged", r.converged},
                        {"kappa_hat", r.kappa_hat}, {"warning", r.warning}});
        ctx.check("recovery_" + tag, err < tols[i]);
    }
    ctx.results()["runs"] = runs;
}

void run_stability_sweep(CommandContext& ctx) {
    ConfigView v = ctx.view();
    const Grid grid = grid_from(v);
    const int count = v.integer("pairs");
    const int modes = v.integer("modes");
    const double epsilon = v.positive("epsilon");
    StabilityOptions opt;
    opt.delta0 = v.number("delta0");
    opt.bound_M = v.positive("bound_M");

    auto sweep = [&](const Grid& g, double eps) {
        const ProblemData reference = problem_data(g, v.sub("reference"), {"U", "V"});
        const SubdomainMask omega = mask_from(g, v, "omega");
        const CoefficientSet2x2 t = coefficients_2x2(g, v.sub("tilde"));
        auto rows = parallel_map(ctx.workers(), static_cast<std::size_t>(count), [&](std::size_t i) {
            const StabilityPair pair = random_stability_pair(g, t, stream_seed(ctx.seed(), 5, i), modes, eps);
            return stability_ratio(g, reference, pair, omega, opt);
        });
        StabilityResult out;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].excluded) out.excluded.push_back("pair " + std::to_string(i) + ": " + rows[i].reason);
            else out.kappa_hat = std::max(out.kappa_hat, rows[i].ratio);
        }
        out.rows = std::move(rows);
        return out;
    };

    StabilityResult base;
    {
        PhaseTimer t(ctx, "sweep");
        base = sweep(grid, epsilon);
    }
    std::vector<std::vector<double>> rows;
    std::vector<double> idx, ratios;
    for (std::size_t i = 0; i < base.rows.size(); ++i) {
        const auto& r = base.rows[i];
        rows.push_back({double(i), r.lhs, r.rhs, r.ratio, r.excluded ? 1.0 : 0.0});
        if (!r.excluded) {
            idx.push_back(double(i));
            ratios.push_back(r.ratio);
        }
    }
    ctx.write_table("ratios.csv", {"pair", "lhs", "rhs", "ratio", "excluded"}, rows);
    ctx.write_plot("ratios.svg", {{"ratio", idx, ratios, true, false}}, {"Stability ratios", "pair", "ratio"});
    ctx.results()["kappa_hat"] = base.kappa_hat;
    ctx.results()["excluded"] = base.excluded;
    const bool finite = std::isfinite(base.kappa_hat) && base.kappa_hat > 0.0;
    ctx.check("kappa_finite", finite);

    ConfigView sc = v.sub("check_scaling");
    if (sc.flag("enabled")) {
        PhaseTimer t(ctx, "scaling");
        const double k = sweep(grid, epsilon * sc.positive("factor")).kappa_hat;
        const double change = finite ? std::abs(k - base.kappa_hat) / base.kappa_hat : HUGE_VAL;
        ctx.results()["kappa_hat_scaled"] = k;
        ctx.results()["scaling_change"] = change;
        ctx.check("linear_under_scaling", change < sc.positive("max_change"));
    }
    ConfigView rc = v.sub("check_refinement");
    if (rc.flag("enabled")) {
        PhaseTimer t(ctx, "refinement");
        const double k = sweep(grid.refined(), epsilon).kappa_hat;
        const double change = finite ? std::abs(k - base.kappa_hat) / base.kappa_hat : HUGE_VAL;
        ctx.results()["kappa_hat_refined"] = k;
        ctx.results()["refinement_change"] = change;
        ctx.check("stable_under_refinement", change < rc.positive("max_change"));
    }
}

void run_identify_all(CommandContext& ctx) {
    ConfigView v = ctx.view();
    const Grid grid = grid_from(v);
    const CoefficientSet2x2 tilde = coefficients_2x2(grid, v.sub("tilde"));
    const CoefficientSet2x2 planted_set = coefficients_2x2(grid, v.sub("planted"));
    const SubdomainMask omega1 = mask_from(grid, v, "omega1");

    CoefficientDifferences planted = CoefficientDifferences::zero(grid);
    planted.a = nodal(grid, planted_set.a);
    planted.b = nodal(grid, planted_set.b);
    planted.c = nodal(grid, planted_set.c);
    planted.d = nodal(grid, planted_set.d);
    for (std::size_t a = 0; a < static_cast<std::size_t>(grid.dim()); ++a) {
        planted.A[a] = nodal(grid, planted_set.A.comp[a]);
        planted.B[a] = nodal(grid, planted_set.B.comp[a]);
        planted.C[a] = nodal(grid, planted_set.C.comp[a]);
        planted.D[a] = nodal(grid, planted_set.D.comp[a]);
    }
    IdentificationOptions opt;
    opt.tol_det = v.number("tol_det");
    opt.condition_cap = v.positive("condition_cap");
    RateOptions rate;
    rate.fine_factor = v.positive("fine_factor");

    IdentificationResult res;
    {
        PhaseTimer t(ctx, "identify");
        const auto refs = example_references(grid);
        const auto experiments = simulate_experiments(grid, tilde, planted.as_coefficients(grid), refs, rate);
        res = full_identification(grid, experiments, omega1, opt);
    }
    ctx.write_spatial("determinant.csv", grid, res.det.det, grid.theta());
    ctx.results()["determinant_min_abs"] = res.det.min_abs;
    ctx.results()["determinant_failing_nodes"] = res.det.failing_nodes;
    ctx.results()["flagged_nodes"] = res.flagged_nodes;
    ctx.check("determinant", res.det.pass);

    const double tol = v.positive("tolerance");
    Json errors = Json::object();
    auto report = [&](const std::string& name, const SpatialField& hat, const SpatialField& truth) {
        const double e = relative_error(grid, hat, truth);
        errors[name] = e;
        ctx.write_spatial(name + "_hat.csv", grid, hat, grid.theta());
        ctx.check("recovery_" + name, e < tol);
    };
    report("a", res.diff.a, planted.a);
    report("b", res.diff.b, planted.b);
    report("c", res.diff.c, planted.c);
    report("d", res.diff.d, planted.d);
    const char* axes[] = {"x", "y"};
    for (int a = 0; a < grid.dim(); ++a) {
        const std::string s = grid.dim() == 1 ? "" : std::string("_") + axes[a];
        const auto ua = static_cast<std::size_t>(a);
        report("A" + s, res.diff.A[ua], planted.A[ua]);
        report("B" + s, res.diff.B[ua], planted.B[ua]);
        report("C" + s, res.diff.C[ua], planted.C[ua]);
        report("D" + s, res.diff.D[ua], planted.D[ua]);
    }
    ctx.results()["relative_errors"] = errors;
}

}  // namespace pinv::cli
