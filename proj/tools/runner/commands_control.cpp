#include "commands.hpp"
#include "presets.hpp"

#include "pinv/control.hpp"
#include "pinv/errors.hpp"

#include <cmath>

namespace pinv::cli {

namespace {

ControlProblem control_problem(const ConfigView& v, const Grid& grid, const std::vector<std::string>& names) {
    ControlProblem p;
    p.grid = grid;
    p.data = problem_data(grid, v, names);
    p.omega = mask_from(grid, v, "omega");
    for (const auto& c : names) p.target.push_back(field_from(grid, v.sub("target"), c));
    p.t_target = v.number("t_target");
    p.epsilon = v.positive("epsilon");
    p.beta = v.positive("beta");
    p.beta_factor = v.positive("beta_factor");
    p.beta_floor = v.positive("beta_floor");
    p.cg_max_iter = v.integer("cg_max_iter");
    if (v.has("tol_nu")) p.tol_nu = v.positive("tol_nu");
    return p;
}

void report_control(CommandContext& ctx, const ControlProblem& p, const ControlResult& r,
                    const std::vector<std::string>& names) {
    const Grid cg = control_grid(p.grid, p.t_target);
    ctx.write_field("control.csv", cg, r.h);
    for (std::size_t c = 0; c < names.size(); ++c)
        ctx.write_spatial("achieved_" + names[c] + ".csv", cg, r.achieved[c], cg.T());
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < r.beta_history.size(); ++i)
        rows.push_back({r.beta_history[i], r.misfit_history[i]});
    ctx.write_table("beta_history.csv", {"beta", "misfit"}, rows);
    ctx.write_plot("misfit_vs_beta.svg", {{"misfit", r.beta_history, r.misfit_history}},
                   {"Terminal misfit", "beta", "misfit", true, true, false});
    ctx.results()["misfit"] = r.misfit;
    ctx.results()["target_norm"] = r.target_norm;
    ctx.results()["relative_misfit"] = r.target_norm > 0.0 ? r.misfit / r.target_norm : r.misfit;
    ctx.results()["energy"] = r.energy;
    ctx.results()["beta"] = r.beta;
    ctx.results()["cg_iterations"] = r.cg_iterations;
    ctx.check("target_reached", r.reached);
}

}  // namespace

void run_control(CommandContext& ctx) {
    ConfigView v = ctx.view();
    const Grid grid = grid_from(v);
    const CoefficientSet2x2 coeffs = coefficients_2x2(grid, v.sub("coefficients"));
    const std::vector<std::string> names{"U", "V"};
    const ControlProblem p = control_problem(v, grid, names);
    ControlResult r;
    {
        PhaseTimer t(ctx, "synthesize");
        r = synthesize_control_2x2(p, coeffs);
    }
    report_control(ctx, p, r, names);
}

void run_control3(CommandContext& ctx) {
    ConfigView v = ctx.view();
    const Grid grid = grid_from(v);
    const CoefficientSet3x3 coeffs = coefficients_3x3(grid, v);
    const std::vector<std::string> names{"U", "V", "W"};
    const ControlProblem p = control_problem(v, grid, names);
    ControlResult r;
    {
        PhaseTimer t(ctx, "synthesize");
        r = synthesize_control_3x3(p, coeffs, v.positive("tol13"));
    }
    report_control(ctx, p, r, names);
}

void run_realize_positivity(CommandContext& ctx) {
    ConfigView v = ctx.view();
    const Grid grid = grid_from(v);
    const CoefficientSet2x2 coeffs = coefficients_2x2(grid, v.sub("coefficients"));
    const ProblemData data = problem_data(grid, v, {"U", "V"});
    const SubdomainMask omega = mask_from(grid, v, "omega");
    const SubdomainMask omega1 = mask_from(grid, v, "omega1");
    PositivityOptions opt;
    opt.delta0 = v.positive("delta0");
    opt.t1_fraction = v.positive("t1_fraction");
    opt.level = v.positive("level");
    opt.rolloff = v.positive("rolloff");
    opt.epsilon = v.positive("epsilon");

    PositivityResult r;
    {
        PhaseTimer t(ctx, "realize");
        r = realize_positivity(grid, coeffs, data, omega, omega1, opt);
    }
    ctx.write_spatial("U_theta.csv", grid, r.U_theta, grid.theta());
    ctx.write_spatial("V_theta.csv", grid, r.V_theta, grid.theta());
    if (r.control_used) {
        const Grid cg = control_grid(grid, opt.t1_fraction * grid.theta());
        ctx.write_field("control.csv", cg, r.control.h);
    }
    std::vector<double> x;
    for (int n = 0; n < grid.nodes(); ++n) x.push_back(grid.x(n, 0));
    ctx.write_plot("snapshot_theta.svg", {{"U", x, r.U_theta, false, true}, {"V", x, r.V_theta, false, true}},
                   {"State at theta", "x", "value"});
    ctx.results()["floor"] = r.floor;
    ctx.results()["control_used"] = r.control_used;
    ctx.results()["control_energy"] = r.control.energy;
    ctx.results()["control_misfit"] = r.control.misfit;
    ctx.check("positivity_floor", r.verified);
}

}  // namespace pinv::cli
