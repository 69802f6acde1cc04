#include "pinv/control.hpp"

#include "pinv/calculus.hpp"
#include "pinv/errors.hpp"
#include "pinv/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pinv {

ControlMap::ControlMap(const Grid& grid, SystemOperator op, const SubdomainMask& omega)
    : grid_(grid), solver_(grid, std::move(op)), mask_(static_cast<std::size_t>(grid.nodes()), 0),
      ws_(spatial_weights(grid, nullptr)) {
    if (omega.inside.size() != static_cast<std::size_t>(grid.nodes())) throw DimensionError("omega does not match grid");
    int count = 0;
    for (int n = 0; n < grid.nodes(); ++n)
        if (omega.contains(n) && !grid.on_boundary(n)) {
            mask_[static_cast<std::size_t>(n)] = 1;
            ++count;
        }
    if (count == 0) throw ConfigError("omega has no interior nodes");
}

std::vector<SpatialField> ControlMap::apply(const SpaceTimeField& h) const {
    const int nc = solver_.op().ncomp;
    ProblemData data = ProblemData::zero(grid_, nc);
    data.sources[0] = h;
    FieldSet X = solver_.solve(data);
    std::vector<SpatialField> out;
    for (const auto& x : X) out.push_back(x.level(grid_.nt()));
    return out;
}

SpaceTimeField ControlMap::adjoint(const std::vector<SpatialField>& y) const {
    const int nc = solver_.op().ncomp;
    FieldSet G;
    for (int c = 0; c < nc; ++c) {
        SpaceTimeField g(grid_);
        for (int n = 0; n < grid_.nodes(); ++n)
            g(grid_.nt(), n) = ws_[static_cast<std::size_t>(n)] * y[static_cast<std::size_t>(c)][static_cast<std::size_t>(n)];
        G.push_back(std::move(g));
    }
    std::vector<SpatialField> terminal(static_cast<std::size_t>(nc), SpatialField(static_cast<std::size_t>(grid_.nodes()), 0.0));
    FieldSet L = solver_.adjoint(terminal, G);
    SpaceTimeField h(grid_);
    const double dt = grid_.dt();
    for (int k = 1; k <= grid_.nt(); ++k)
        for (int n = 0; n < grid_.nodes(); ++n)
            if (active(n)) h(k, n) = L[0](k, n) / (dt * ws_[static_cast<std::size_t>(n)]);
    return h;
}

double ControlMap::inner(const SpaceTimeField& h1, const SpaceTimeField& h2) const {
    double s = 0.0;
    for (int k = 1; k <= grid_.nt(); ++k)
        for (int n = 0; n < grid_.nodes(); ++n)
            if (active(n)) s += ws_[static_cast<std::size_t>(n)] * h1(k, n) * h2(k, n);
    return s * grid_.dt();
}

double ControlMap::state_inner(const std::vector<SpatialField>& y1, const std::vector<SpatialField>& y2) const {
    double s = 0.0;
    for (std::size_t c = 0; c < y1.size(); ++c)
        for (std::size_t i = 0; i < ws_.size(); ++i) s += ws_[i] * y1[c][i] * y2[c][i];
    return s;
}

Grid control_grid(const Grid& grid, double t_target) {
    if (t_target <= 0.0 || t_target >= grid.T() - 0.5 * grid.dt()) return grid;
    int kT = static_cast<int>(std::lround(t_target / grid.dt()));
    if (kT < 8) throw ConfigError("t_target leaves fewer than 8 time steps");
    double T = kT * grid.dt();
    return grid.with_time(T, kT, std::min(grid.theta(), T - grid.dt()));
}

namespace {

ProblemData restrict_data(const ProblemData& data, int k1) {
    ProblemData out = data;
    for (auto* group : {&out.sources, &out.boundary})
        for (auto& f : *group)
            if (!f.empty()) f = restrict_window(f, 0, k1);
    return out;
}

void axpy(SpaceTimeField& y, double a, const SpaceTimeField& x) {
    auto& yd = y.data();
    const auto& xd = x.data();
    for (std::size_t i = 0; i < yd.size(); ++i) yd[i] += a * xd[i];
}

}  // namespace

ControlResult synthesize_control(const ControlProblem& problem, const SystemOperator& op) {
    if (!(problem.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (!(problem.beta > 0.0) || !(problem.beta_floor > 0.0)) throw ConfigError("beta must be positive");
    if (!(problem.beta_factor > 0.0 && problem.beta_factor < 1.0)) throw ConfigError("beta_factor must lie in (0, 1)");
    const int nc = op.ncomp;
    if (static_cast<int>(problem.target.size()) != nc) throw DimensionError("target needs one field per component");

    const Grid g = control_grid(problem.grid, problem.t_target);
    ControlMap map(g, op, problem.omega);
    ProblemData data = restrict_data(problem.data, g.nt());
    FieldSet free_state = solve_system(op, data, g);
    std::vector<SpatialField> r(static_cast<std::size_t>(nc));
    for (int c = 0; c < nc; ++c) {
        const auto uc = static_cast<std::size_t>(c);
        r[uc] = problem.target[uc];
        auto fl = free_state[uc].level(g.nt());
        for (std::size_t i = 0; i < r[uc].size(); ++i) r[uc][i] -= fl[i];
    }

    ControlResult res;
    for (const auto& t : problem.target) res.target_norm += l2_norm_spatial(g, t);
    const SpaceTimeField rhs = map.adjoint(r);

    auto evaluate = [&](const SpaceTimeField& h, std::vector<SpatialField>& achieved) {
        auto Sh = map.apply(h);
        achieved.resize(static_cast<std::size_t>(nc));
        double m = 0.0;
        for (int c = 0; c < nc; ++c) {
            const auto uc = static_cast<std::size_t>(c);
            achieved[uc] = free_state[uc].level(g.nt());
            SpatialField diff(achieved[uc].size());
            for (std::size_t i = 0; i < diff.size(); ++i) {
                achieved[uc][i] += Sh[uc][i];
                diff[i] = achieved[uc][i] - problem.target[uc][i];
            }
            m += l2_norm_spatial(g, diff);
        }
        return m;
    };

    SpaceTimeField h(g);
    std::vector<SpatialField> achieved;
    double best_misfit = evaluate(h, achieved);
    res.h = h;
    res.achieved = achieved;
    res.misfit = best_misfit;
    if (best_misfit <= problem.epsilon * res.target_norm) {
        res.reached = true;
        return res;
    }

    const double rhs_norm = std::sqrt(map.inner(rhs, rhs));
    for (double beta = problem.beta; beta >= problem.beta_floor * (1.0 - 1e-12); beta *= problem.beta_factor) {
        auto normal_op = [&](const SpaceTimeField& x) {
            SpaceTimeField y = map.adjoint(map.apply(x));
            axpy(y, beta, x);
            return y;
        };
        SpaceTimeField resid = rhs;
        axpy(resid, -1.0, normal_op(h));
        SpaceTimeField p = resid;
        double rr = map.inner(resid, resid);
        for (int it = 0; it < problem.cg_max_iter && std::sqrt(rr) > problem.cg_rtol * rhs_norm; ++it) {
            SpaceTimeField Ap = normal_op(p);
            double alpha = rr / map.inner(p, Ap);
            axpy(h, alpha, p);
            axpy(resid, -alpha, Ap);
            double rr_new = map.inner(resid, resid);
            double b = rr_new / rr;
            rr = rr_new;
            SpaceTimeField np = resid;
            axpy(np, b, p);
            p = std::move(np);
            ++res.cg_iterations;
        }
        double m = evaluate(h, achieved);
        res.beta_history.push_back(beta);
        res.misfit_history.push_back(m);
        if (m <= best_misfit) {
            best_misfit = m;
            res.h = h;
            res.achieved = achieved;
            res.misfit = m;
            res.beta = beta;
        }
        if (m <= problem.epsilon * res.target_norm) {
            res.reached = true;
            break;
        }
    }
    res.energy = map.inner(res.h, res.h);
    return res;
}

ControlResult synthesize_control_2x2(const ControlProblem& problem, const CoefficientSet2x2& coeffs) {
    coeffs.check_grid(problem.grid);
    if (coeffs.time_dependent()) throw PreconditionError("control synthesis expects time-independent coefficients");
    if (!problem.omega.gamma.empty()) {
        double tol = problem.tol_nu * std::max(1.0, coeffs.B.sup_norm());
        NormalCheck nc = check_assumption_normal(problem.grid, coeffs.B, problem.omega.gamma, tol);
        if (!nc.ok) {
            std::ostringstream msg;
            msg << "|B . nu| = " << nc.margin << " on gamma is below " << tol;
            throw PreconditionError(msg.str());
        }
    }
    return synthesize_control(problem, SystemOperator::from(coeffs));
}

ControlResult synthesize_control_3x3(const ControlProblem& problem, const CoefficientSet3x3& coeffs, double tol13) {
    coeffs.check_grid(problem.grid);
    if (coeffs.time_dependent()) throw PreconditionError("control synthesis expects time-independent coefficients");
    check_a13_floor(problem.grid, coeffs, tol13);
    if (!problem.omega.gamma.empty()) {
        const VectorCoefficient field = normal_condition_field_3x3(problem.grid, coeffs);
        NormalCheck nc = check_assumption_normal(problem.grid, field, problem.omega.gamma, problem.tol_nu);
        if (!nc.ok) {
            std::ostringstream msg;
            msg << "|(grad a12 - (a12 / a13) grad a13) . nu| = " << nc.margin << " on gamma is below " << problem.tol_nu;
            throw PreconditionError(msg.str());
        }
    }
    return synthesize_control(problem, SystemOperator::from(coeffs.transposed()));
}

namespace {

double floor_on(const Grid& grid, const SpatialField& U, const SpatialField& V, const SubdomainMask& omega1) {
    double f = HUGE_VAL;
    for (int n = 0; n < grid.nodes(); ++n) {
        if (omega1.contains(n)) continue;
        const auto i = static_cast<std::size_t>(n);
        f = std::min({f, std::abs(U[i]), std::abs(V[i])});
    }
    return f == HUGE_VAL ? 0.0 : f;
}

SpatialField plateau(const Grid& grid, double level, double rolloff) {
    SpatialField m(static_cast<std::size_t>(grid.nodes()), level);
    for (int n = 0; n < grid.nodes(); ++n)
        for (int a = 0; a < grid.dim(); ++a) {
            double L = grid.hi(a) - grid.lo(a);
            double w = rolloff * L;
            double x = grid.x(n, a);
            m[static_cast<std::size_t>(n)] *= std::tanh((x - grid.lo(a)) / w) * std::tanh((grid.hi(a) - x) / w);
        }
    return m;
}

}  // namespace

PositivityResult realize_positivity(const Grid& grid, const CoefficientSet2x2& coeffs, const ProblemData& data,
                                    const SubdomainMask& omega, const SubdomainMask& omega1,
                                    const PositivityOptions& options) {
    const int kth = grid.theta_index();
    PositivityResult out;
    auto [U0, V0] = solve_2x2(coeffs, data, grid);
    out.U_theta = U0.level(kth);
    out.V_theta = V0.level(kth);
    out.floor = floor_on(grid, out.U_theta, out.V_theta, omega1);
    if (out.floor >= options.delta0) {
        out.verified = true;
        out.control.h = SpaceTimeField(grid);
        out.control.reached = true;
        return out;
    }

    ControlProblem cp;
    cp.grid = grid;
    cp.data = data;
    cp.omega = omega;
    SpatialField m = plateau(grid, options.level, options.rolloff);
    cp.target = {m, m};
    cp.t_target = options.t1_fraction * grid.theta();
    cp.epsilon = options.epsilon;
    out.control = synthesize_control_2x2(cp, coeffs);
    out.control_used = true;

    ProblemData full = data;
    if (full.sources.size() < 2) full.sources.resize(2);
    SpaceTimeField h(grid);
    if (!full.sources[0].empty()) h = full.sources[0];
    for (int k = 0; k < out.control.h.levels() && k <= grid.nt(); ++k)
        for (int n = 0; n < grid.nodes(); ++n) h(k, n) += out.control.h(k, n);
    full.sources[0] = std::move(h);
    auto [U, V] = solve_2x2(coeffs, full, grid);
    out.U_theta = U.level(kth);
    out.V_theta = V.level(kth);
    out.floor = floor_on(grid, out.U_theta, out.V_theta, omega1);
    out.verified = out.floor >= options.delta0;
    return out;
}

}  // namespace pinv
