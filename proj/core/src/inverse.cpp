#include "pinv/inverse.hpp"

#include "pinv/calculus.hpp"
#include "pinv/errors.hpp"
#include "pinv/random_fields.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace pinv {

namespace {

CoefficientField freeze(const CoefficientField& f, int k) {
    if (!f.time_dependent()) return f;
    return CoefficientField::spatial(f.level(k));
}

SystemOperator freeze(const SystemOperator& op, int k) {
    SystemOperator out = op;
    for (int c = 0; c < op.ncomp; ++c)
        for (int e = 0; e < op.ncomp; ++e) {
            auto& r = out.reaction[static_cast<std::size_t>(c)][static_cast<std::size_t>(e)];
            r = freeze(r, k);
            auto& v = out.convection[static_cast<std::size_t>(c)][static_cast<std::size_t>(e)];
            for (auto& comp : v.comp) comp = freeze(comp, k);
        }
    return out;
}

double min_spacing(const Grid& grid) {
    double h = grid.dx(0);
    if (grid.dim() == 2) h = std::min(h, grid.dx(1));
    return h;
}

double sq(double x) { return x * x; }

}  // namespace

std::vector<SpatialField> matched_difference_rate(const Grid& grid, const SystemOperator& op, const FieldSet& sources,
                                                  const RateOptions& options) {
    const int kth = grid.theta_index();
    if (kth + 1 > grid.nt()) throw PreconditionError("theta must leave at least one step before T");
    const int nc = op.ncomp;
    if (static_cast<int>(sources.size()) != nc) throw DimensionError("one source per component is required");

    int m = options.substeps;
    if (m <= 0) {
        double h = min_spacing(grid);
        m = static_cast<int>(std::ceil(grid.dt() / (options.fine_factor * h * h)));
        m = std::max(m, 8);
    }
    const double dtf = grid.dt() / m;
    const int steps = 8;
    Grid local = grid.with_time(steps * dtf, steps, steps * dtf / 2);

    ProblemData data = ProblemData::zero(local, nc);
    for (int c = 0; c < nc; ++c) {
        const auto& s = sources[static_cast<std::size_t>(c)];
        if (s.empty()) continue;
        if (!s.matches(grid)) throw DimensionError("source does not match grid");
        SpaceTimeField loc(local);
        for (int k = 0; k <= steps; ++k) {
            double w = static_cast<double>(k) / m;
            for (int n = 0; n < grid.nodes(); ++n) loc(k, n) = (1.0 - w) * s(kth, n) + w * s(kth + 1, n);
        }
        data.sources[static_cast<std::size_t>(c)] = std::move(loc);
    }

    FieldSet X = solve_system(freeze(op, kth), data, local);
    std::vector<SpatialField> out;
    out.reserve(static_cast<std::size_t>(nc));
    for (const auto& x : X) out.push_back(dt_onesided4(local, x, 0, +1));
    return out;
}

FieldSet simulate_matched_difference(const Grid& grid, const SystemOperator& op, const FieldSet& sources) {
    ProblemData data = ProblemData::zero(grid, op.ncomp);
    for (std::size_t c = 0; c < sources.size() && c < data.sources.size(); ++c) data.sources[c] = sources[c];
    return solve_system(op, data, grid, grid.theta_index());
}

void extrapolate_to_boundary(const Grid& grid, SpatialField& f) {
    auto fill_axis = [&](int axis, bool skip_other_boundary) {
        const int nx = grid.nx(axis);
        const int stride = axis == 0 ? 1 : grid.nx(0);
        if (nx < 4) throw StencilError("extrapolation needs four nodes per axis");
        for (int n = 0; n < grid.nodes(); ++n) {
            int i = grid.coord(n, axis);
            if (i != 0 && i != nx - 1) continue;
            if (skip_other_boundary && grid.dim() == 2) {
                int j = grid.coord(n, 1 - axis);
                if (j == 0 || j == grid.nx(1 - axis) - 1) continue;
            }
            int s = i == 0 ? stride : -stride;
            auto at = [&](int off) { return f[static_cast<std::size_t>(n + off * s)]; };
            f[static_cast<std::size_t>(n)] = 3.0 * at(1) - 3.0 * at(2) + at(3);
        }
    };
    fill_axis(0, true);
    if (grid.dim() == 2) fill_axis(1, false);
}

std::pair<SpatialField, SpatialField> snapshot_reconstruct(const Grid& grid, const SpatialField& dUdt,
                                                           const SpatialField& dVdt, const SpatialField& Ut_theta,
                                                           const SpatialField& Vt_theta, double delta0,
                                                           bool extrapolate_boundary) {
    const auto N = static_cast<std::size_t>(grid.nodes());
    if (dUdt.size() != N || dVdt.size() != N || Ut_theta.size() != N || Vt_theta.size() != N)
        throw DimensionError("snapshot fields do not match grid");
    SpatialField f(N, 0.0), g(N, 0.0);
    for (int n = 0; n < grid.nodes(); ++n) {
        if (extrapolate_boundary && grid.on_boundary(n)) continue;
        auto i = static_cast<std::size_t>(n);
        if (std::abs(Vt_theta[i]) < delta0 || std::abs(Ut_theta[i]) < delta0) {
            std::ostringstream msg;
            msg << "reference snapshot below floor " << delta0 << " at node " << n << " (x = " << grid.x(n, 0) << ")";
            throw DegeneracyError(msg.str());
        }
        f[i] = dUdt[i] / Vt_theta[i];
        g[i] = dVdt[i] / Ut_theta[i];
    }
    if (extrapolate_boundary) {
        extrapolate_to_boundary(grid, f);
        extrapolate_to_boundary(grid, g);
    }
    return {std::move(f), std::move(g)};
}

VariationalObjective::VariationalObjective(const VariationalProblem& problem, const Observation& obs, double mu)
    : problem_(problem), obs_(obs), mu_(mu) {
    if (!(mu >= 0.0)) throw ConfigError("mu must be non-negative");
    const Grid& grid = problem.grid;
    if (!obs.u_on_omega.matches(grid)) throw DimensionError("observation does not match grid");
    if (obs.snapshot_U.size() != static_cast<std::size_t>(grid.nodes()) ||
        obs.snapshot_V.size() != static_cast<std::size_t>(grid.nodes()))
        throw DimensionError("snapshot does not match grid");
    ws_ = spatial_weights(grid, nullptr);
    ws_omega_ = spatial_weights(grid, &problem.omega);
    wt_ = time_weights(grid, TimeWindow::full(grid));
}

double VariationalObjective::evaluate(const SpatialField& b, const SpatialField& c, SpatialField* grad_b,
                                      SpatialField* grad_c) const {
    const Grid& grid = problem_.grid;
    const int N = grid.nodes();
    const int kth = grid.theta_index();
    CoefficientSet2x2 coeffs = problem_.known;
    coeffs.b = CoefficientField::spatial(b);
    coeffs.c = CoefficientField::spatial(c);
    ParabolicSolver solver(grid, SystemOperator::from(coeffs));
    FieldSet X = solver.solve(problem_.data);
    const auto& U = X[0];
    const auto& V = X[1];

    FieldSet G;
    if (grad_b || grad_c) G = {SpaceTimeField(grid), SpaceTimeField(grid)};

    double data = 0.0;
    for (int k = 0; k <= grid.nt(); ++k) {
        for (int n = 0; n < N; ++n) {
            double w = wt_[static_cast<std::size_t>(k)] * ws_omega_[static_cast<std::size_t>(n)];
            if (w == 0.0) continue;
            double r = U(k, n) - obs_.u_on_omega(k, n);
            data += 0.5 * w * r * r;
            if (!G.empty()) G[0](k, n) += w * r;
        }
    }
    for (int n = 0; n < N; ++n) {
        auto i = static_cast<std::size_t>(n);
        double ru = U(kth, n) - obs_.snapshot_U[i];
        double rv = V(kth, n) - obs_.snapshot_V[i];
        data += 0.5 * ws_[i] * (ru * ru + rv * rv);
        if (!G.empty()) {
            G[0](kth, n) += ws_[i] * ru;
            G[1](kth, n) += ws_[i] * rv;
        }
    }
    last_data_ = data;

    double reg = 0.0;
    for (int n = 0; n < N; ++n) {
        auto i = static_cast<std::size_t>(n);
        reg += 0.5 * mu_ * ws_[i] * (sq(b[i] - problem_.b_prior[i]) + sq(c[i] - problem_.c_prior[i]));
    }

    if (!G.empty()) {
        for (int n = 0; n < N; ++n) {
            G[0](0, n) = 0.0;
            G[1](0, n) = 0.0;
        }
        std::vector<SpatialField> terminal(2, SpatialField(static_cast<std::size_t>(N), 0.0));
        FieldSet L = solver.adjoint(terminal, G);
        SpatialField gb(static_cast<std::size_t>(N), 0.0), gc(static_cast<std::size_t>(N), 0.0);
        for (int n = 0; n < N; ++n) {
            auto i = static_cast<std::size_t>(n);
            if (!grid.on_boundary(n)) {
                double sb = 0.0, sc = 0.0;
                for (int k = 1; k <= grid.nt(); ++k) {
                    sb += L[0](k, n) * V(k, n);
                    sc += L[1](k, n) * U(k, n);
                }
                gb[i] = sb;
                gc[i] = sc;
            }
            gb[i] += mu_ * ws_[i] * (b[i] - problem_.b_prior[i]);
            gc[i] += mu_ * ws_[i] * (c[i] - problem_.c_prior[i]);
        }
        if (grad_b) *grad_b = std::move(gb);
        if (grad_c) *grad_c = std::move(gc);
    }
    return data + reg;
}

Observation make_observation(const VariationalProblem& problem, const SpatialField& b, const SpatialField& c,
                             double noise_level, std::uint64_t seed) {
    const Grid& grid = problem.grid;
    CoefficientSet2x2 coeffs = problem.known;
    coeffs.b = CoefficientField::spatial(b);
    coeffs.c = CoefficientField::spatial(c);
    auto [U, V] = solve_2x2(coeffs, problem.data, grid);
    const int kth = grid.theta_index();

    Observation obs;
    obs.noise_level = noise_level;
    obs.u_on_omega = SpaceTimeField(grid);
    for (int k = 0; k <= grid.nt(); ++k)
        for (int n = 0; n < grid.nodes(); ++n)
            if (problem.omega.contains(n)) obs.u_on_omega(k, n) = U(k, n);
    obs.snapshot_U = U.level(kth);
    obs.snapshot_V = V.level(kth);
    if (noise_level <= 0.0) return obs;

    double su = 0.0, cu = 0.0, sv = 0.0;
    for (int k = 0; k <= grid.nt(); ++k)
        for (int n = 0; n < grid.nodes(); ++n)
            if (problem.omega.contains(n)) {
                su += sq(U(k, n));
                cu += 1.0;
            }
    for (int n = 0; n < grid.nodes(); ++n) sv += sq(obs.snapshot_U[static_cast<std::size_t>(n)]) +
                                                sq(obs.snapshot_V[static_cast<std::size_t>(n)]);
    const double rms_u = cu > 0 ? std::sqrt(su / cu) : 0.0;
    const double rms_s = std::sqrt(sv / (2.0 * grid.nodes()));

    Rng rng(seed);
    for (int k = 0; k <= grid.nt(); ++k)
        for (int n = 0; n < grid.nodes(); ++n)
            if (problem.omega.contains(n)) obs.u_on_omega(k, n) += noise_level * rms_u * rng.normal();
    for (auto& x : obs.snapshot_U) x += noise_level * rms_s * rng.normal();
    for (auto& x : obs.snapshot_V) x += noise_level * rms_s * rng.normal();
    return obs;
}

namespace {

// L-BFGS in the quadrature-weighted inner product, with Armijo backtracking.
struct LbfgsState {
    std::vector<double> x;
    double value = 0.0;
    std::vector<double> grad;
    std::vector<double> history;
    int iterations = 0;
    bool converged = false;
};

LbfgsState run_lbfgs(const VariationalObjective& obj, const std::vector<double>& ws, std::vector<double> x0,
                     const VariationalOptions& opt) {
    const std::size_t N = ws.size();
    auto split_eval = [&](const std::vector<double>& x, std::vector<double>* riesz) {
        SpatialField b(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(N));
        SpatialField c(x.begin() + static_cast<std::ptrdiff_t>(N), x.end());
        SpatialField gb, gc;
        double J = obj.evaluate(b, c, riesz ? &gb : nullptr, riesz ? &gc : nullptr);
        if (riesz) {
            riesz->assign(2 * N, 0.0);
            for (std::size_t i = 0; i < N; ++i) {
                (*riesz)[i] = gb[i] / ws[i];
                (*riesz)[N + i] = gc[i] / ws[i];
            }
        }
        return J;
    };
    auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < 2 * N; ++i) s += ws[i % N] * a[i] * b[i];
        return s;
    };

    LbfgsState st;
    st.x = std::move(x0);
    st.value = split_eval(st.x, &st.grad);
    st.history.push_back(st.value);
    const double g0 = std::sqrt(dot(st.grad, st.grad));
    if (g0 == 0.0 || st.value == 0.0) {
        st.converged = true;
        return st;
    }

    std::deque<std::vector<double>> S, Y;
    std::deque<double> R;
    double step0 = 1.0 / g0;
    for (int it = 0; it < opt.max_iter; ++it) {
        std::vector<double> q = st.grad;
        std::vector<double> alpha(S.size());
        for (std::size_t j = S.size(); j-- > 0;) {
            alpha[j] = R[j] * dot(S[j], q);
            for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[j] * Y[j][i];
        }
        double gamma = S.empty() ? step0 : dot(S.back(), Y.back()) / dot(Y.back(), Y.back());
        for (auto& v : q) v *= gamma;
        for (std::size_t j = 0; j < S.size(); ++j) {
            double beta = R[j] * dot(Y[j], q);
            for (std::size_t i = 0; i < q.size(); ++i) q[i] += (alpha[j] - beta) * S[j][i];
        }
        for (auto& v : q) v = -v;
        double slope = dot(st.grad, q);
        if (!(slope < 0.0)) {
            S.clear();
            Y.clear();
            R.clear();
            q = st.grad;
            for (auto& v : q) v *= -step0;
            slope = dot(st.grad, q);
        }

        double t = 1.0;
        std::vector<double> xn(st.x.size());
        double Jn = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            for (std::size_t i = 0; i < xn.size(); ++i) xn[i] = st.x[i] + t * q[i];
            Jn = split_eval(xn, nullptr);
            if (std::isfinite(Jn) && Jn <= st.value + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;

        std::vector<double> gn;
        Jn = split_eval(xn, &gn);
        std::vector<double> s(xn.size()), y(xn.size());
        for (std::size_t i = 0; i < xn.size(); ++i) {
            s[i] = xn[i] - st.x[i];
            y[i] = gn[i] - st.grad[i];
        }
        double sy = dot(s, y);
        if (sy > 1e-300) {
            S.push_back(std::move(s));
            Y.push_back(std::move(y));
            R.push_back(1.0 / sy);
            if (static_cast<int>(S.size()) > opt.memory) {
                S.pop_front();
                Y.pop_front();
                R.pop_front();
            }
        }
        const double prev = st.value;
        st.x = std::move(xn);
        st.value = Jn;
        st.grad = std::move(gn);
        st.history.push_back(st.value);
        st.iterations = it + 1;
        if (std::sqrt(dot(st.grad, st.grad)) <= opt.grad_rtol * g0 || st.value <= 1e-30 ||
            prev - st.value <= 1e-15 * std::abs(prev)) {
            st.converged = true;
            break;
        }
    }
    return st;
}

ReconstructionResult finish(const VariationalProblem& problem, const LbfgsState& st, double mu, double data_term,
                            double initial_data_term) {
    const std::size_t N = static_cast<std::size_t>(problem.grid.nodes());
    ReconstructionResult r;
    r.b_hat.assign(st.x.begin(), st.x.begin() + static_cast<std::ptrdiff_t>(N));
    r.c_hat.assign(st.x.begin() + static_cast<std::ptrdiff_t>(N), st.x.end());
    r.f_hat.resize(N);
    r.g_hat.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        r.f_hat[i] = r.b_hat[i] - problem.b_prior[i];
        r.g_hat[i] = r.c_hat[i] - problem.c_prior[i];
    }
    r.misfit_history = st.history;
    r.iterations = st.iterations;
    r.converged = st.converged;
    r.warning = !st.converged;
    r.mu = mu;
    r.data_misfit = std::sqrt(2.0 * data_term);
    double denom = std::sqrt(2.0 * initial_data_term);
    double num = l2_norm_spatial(problem.grid, r.f_hat) + l2_norm_spatial(problem.grid, r.g_hat);
    r.kappa_hat = denom > 0.0 ? num / denom : 0.0;
    return r;
}

}  // namespace

ReconstructionResult variational_reconstruct(const VariationalProblem& problem, const Observation& obs,
                                             const VariationalOptions& options) {
    const Grid& grid = problem.grid;
    const auto N = static_cast<std::size_t>(grid.nodes());
    if (problem.b_prior.size() != N || problem.c_prior.size() != N) throw DimensionError("prior does not match grid");
    const auto ws = spatial_weights(grid, nullptr);

    std::vector<double> x(2 * N);
    std::copy(problem.b_prior.begin(), problem.b_prior.end(), x.begin());
    std::copy(problem.c_prior.begin(), problem.c_prior.end(), x.begin() + static_cast<std::ptrdiff_t>(N));

    double initial_data = 0.0;
    {
        VariationalObjective probe(problem, obs, 0.0);
        probe.evaluate(problem.b_prior, problem.c_prior);
        initial_data = probe.last_data_term();
    }

    std::vector<double> mus = options.mu_sweep;
    if (mus.empty()) mus.push_back(options.mu);
    std::sort(mus.begin(), mus.end(), std::greater<>());
    if (mus.back() <= 0.0) throw ConfigError("mu must be positive");

    // Expected size of the noise in the data norm.
    double delta = 0.0;
    if (obs.noise_level > 0.0) {
        double obs_norm2 = sq(l2_norm(grid, obs.u_on_omega, &problem.omega, TimeWindow::full(grid))) +
                           sq(l2_norm_spatial(grid, obs.snapshot_U)) + sq(l2_norm_spatial(grid, obs.snapshot_V));
        delta = obs.noise_level * std::sqrt(obs_norm2);
    }

    ReconstructionResult best;
    bool have = false;
    for (double mu : mus) {
        VariationalObjective obj(problem, obs, mu);
        LbfgsState st = run_lbfgs(obj, ws, x, options);
        SpatialField b(st.x.begin(), st.x.begin() + static_cast<std::ptrdiff_t>(N));
        SpatialField c(st.x.begin() + static_cast<std::ptrdiff_t>(N), st.x.end());
        obj.evaluate(b, c);
        best = finish(problem, st, mu, obj.last_data_term(), initial_data);
        have = true;
        x = st.x;
        if (delta > 0.0 && best.data_misfit <= options.discrepancy_tau * delta) break;
    }
    if (!have) throw ConfigError("empty mu sweep");
    return best;
}

StabilityRow stability_ratio(const Grid& grid, const ProblemData& reference, const StabilityPair& pair,
                             const SubdomainMask& omega, const StabilityOptions& options) {
    StabilityRow row;
    const auto N = static_cast<std::size_t>(grid.nodes());
    if (pair.f.size() != N || pair.g.size() != N) throw DimensionError("perturbation does not match grid");

    CoefficientSet2x2 truth = pair.tilde;
    truth.b = pair.tilde.b.plus(CoefficientField::spatial(pair.f), grid);
    truth.c = pair.tilde.c.plus(CoefficientField::spatial(pair.g), grid);
    try {
        pair.tilde.check_bound(options.bound_M);
        truth.check_bound(options.bound_M);
    } catch (const ConfigError& e) {
        row.excluded = true;
        row.reason = std::string("bound: ") + e.what();
        return row;
    }

    row.lhs = l2_norm_spatial(grid, pair.f) + l2_norm_spatial(grid, pair.g);
    if (row.lhs == 0.0) {
        row.degenerate = true;
        row.excluded = true;
        row.reason = "identical pair (0/0)";
        return row;
    }

    auto [Ut, Vt] = solve_2x2(pair.tilde, reference, grid);
    const int kth = grid.theta_index();
    const double delta0 = options.delta0 > 0.0 ? options.delta0 : 1e-3 * Ut.max_abs();
    for (int n = 0; n < grid.nodes(); ++n) {
        if (std::abs(Ut(kth, n)) < delta0 || std::abs(Vt(kth, n)) < delta0) {
            std::ostringstream msg;
            msg << "positivity: reference snapshot below " << delta0 << " at node " << n;
            row.excluded = true;
            row.reason = msg.str();
            return row;
        }
    }

    FieldSet sources = {SpaceTimeField(grid), SpaceTimeField(grid)};
    for (int k = 0; k <= grid.nt(); ++k)
        for (int n = 0; n < grid.nodes(); ++n) {
            auto i = static_cast<std::size_t>(n);
            sources[0](k, n) = pair.f[i] * Vt(k, n);
            sources[1](k, n) = pair.g[i] * Ut(k, n);
        }
    FieldSet X = simulate_matched_difference(grid, SystemOperator::from(truth), sources);

    const int steps = grid.nt() - kth;
    Grid window = grid.with_time(grid.T() - grid.theta(), steps, 0.5 * (grid.T() - grid.theta()));
    SpaceTimeField uw = restrict_window(X[0], kth, grid.nt());
    SpaceTimeField ut = dt_centered(window, uw);
    row.rhs = w21_norm(window, ut, &omega, TimeWindow::full(window)) + w21_norm(window, uw, &omega, TimeWindow::full(window));
    if (row.rhs == 0.0) {
        row.degenerate = true;
        row.excluded = true;
        row.reason = "observation vanishes (ratio unbounded)";
        return row;
    }
    row.ratio = row.lhs / row.rhs;
    return row;
}

StabilityResult stability_sweep(const Grid& grid, const ProblemData& reference, const std::vector<StabilityPair>& pairs,
                                const SubdomainMask& omega, const StabilityOptions& options) {
    StabilityResult out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        StabilityRow row = stability_ratio(grid, reference, pairs[i], omega, options);
        if (row.excluded) out.excluded.push_back("pair " + std::to_string(i) + ": " + row.reason);
        else out.kappa_hat = std::max(out.kappa_hat, row.ratio);
        out.rows.push_back(std::move(row));
    }
    return out;
}

}  // namespace pinv
