#include "pinv/carleman.hpp"

#include "pinv/calculus.hpp"
#include "pinv/errors.hpp"
#include "pinv/forward.hpp"
#include "pinv/transforms.hpp"
#include "pinv/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pinv {

void LogSum::add(double log_term) {
    if (log_term == -HUGE_VAL || std::isnan(log_term)) return;
    if (log_term > max_) {
        sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
        max_ = log_term;
    } else {
        sum_ += std::exp(log_term - max_);
    }
}

void LogSum::add(double log_weight, double value) {
    if (value > 0.0) add(log_weight + std::log(value));
}

double LogSum::log() const { return sum_ > 0.0 ? max_ + std::log(sum_) : -HUGE_VAL; }
double LogSum::value() const { return std::exp(log()); }

double WeightSpec::log_weight(int node, double t) const {
    if (!inside(t)) return -HUGE_VAL;
    return -2.0 * s * eta(node, t);
}

double WeightSpec::alpha_min() const { return *std::min_element(alpha.begin(), alpha.end()); }

namespace {

double logaddexp(double a, double b) {
    if (a == -HUGE_VAL) return b;
    if (b == -HUGE_VAL) return a;
    double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

std::array<double, 2> mask_center(const Grid& grid, const SubdomainMask& omega) {
    std::array<double, 2> lo{HUGE_VAL, HUGE_VAL}, hi{-HUGE_VAL, -HUGE_VAL};
    for (int n = 0; n < grid.nodes(); ++n) {
        if (!omega.contains(n)) continue;
        for (int a = 0; a < grid.dim(); ++a) {
            const auto ua = static_cast<std::size_t>(a);
            lo[ua] = std::min(lo[ua], grid.x(n, a));
            hi[ua] = std::max(hi[ua], grid.x(n, a));
        }
    }
    if (lo[0] == HUGE_VAL) throw PreconditionError("observation region '" + omega.name + "' is empty");
    return {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])};
}

void finish_weight(WeightSpec& w, const Grid& grid) {
    double mx = *std::max_element(w.psi.begin(), w.psi.end());
    w.alpha.resize(w.psi.size());
    for (std::size_t i = 0; i < w.psi.size(); ++i)
        w.alpha[i] = std::exp(2.0 * w.lambda * mx) - std::exp(w.lambda * w.psi[i]);
    w.T = grid.T();
}

}  // namespace

WeightSpec build_weight(const Grid& grid, const SubdomainMask& omega, double lambda) {
    if (!(lambda > 0.0)) throw ConfigError("weight.lambda must be positive");
    auto center = mask_center(grid, omega);
    WeightSpec w;
    w.lambda = lambda;
    w.psi.assign(static_cast<std::size_t>(grid.nodes()), 1.0);
    for (int a = 0; a < grid.dim(); ++a) {
        const auto ua = static_cast<std::size_t>(a);
        const double L = grid.hi(a) - grid.lo(a);
        const double r = std::clamp((center[ua] - grid.lo(a)) / L, 0.05, 0.95);
        const double p = r <= 0.5 ? 2.0 : 2.0 * r / (1.0 - r);
        const double q = r <= 0.5 ? 2.0 * (1.0 - r) / r : 2.0;
        const double peak = std::pow(r, p) * std::pow(1.0 - r, q);
        for (int n = 0; n < grid.nodes(); ++n) {
            double y = (grid.x(n, a) - grid.lo(a)) / L;
            y = std::clamp(y, 0.0, 1.0);
            w.psi[static_cast<std::size_t>(n)] *= std::pow(y, p) * std::pow(1.0 - y, q) / peak;
        }
    }
    int peak_node = static_cast<int>(std::max_element(w.psi.begin(), w.psi.end()) - w.psi.begin());
    if (!omega.contains(peak_node))
        w.warnings.push_back("psi peaks outside the observation region; audit validity reduced");
    finish_weight(w, grid);
    return w;
}

WeightSpec weight_from_psi(const Grid& grid, const SpatialField& psi, const SubdomainMask& omega, double lambda) {
    if (static_cast<int>(psi.size()) != grid.nodes()) throw DimensionError("psi does not match grid");
    WeightSpec w;
    w.lambda = lambda;
    w.psi = psi;
    // A discrete critical point: an interior node that is a local extremum along every axis.
    for (int n = 0; n < grid.nodes(); ++n) {
        if (grid.on_boundary(n) || omega.contains(n)) continue;
        bool extremum = true;
        for (int a = 0; a < grid.dim() && extremum; ++a) {
            const int s = a == 0 ? 1 : grid.nx(0);
            const double l = psi[static_cast<std::size_t>(n - s)], c = psi[static_cast<std::size_t>(n)],
                         r = psi[static_cast<std::size_t>(n + s)];
            extremum = (c >= l && c >= r) || (c <= l && c <= r);
        }
        if (extremum) {
            std::ostringstream msg;
            msg << "psi has a critical point outside the observation region near x=" << grid.x(n, 0)
                << "; audit validity reduced";
            w.warnings.push_back(msg.str());
            break;
        }
    }
    finish_weight(w, grid);
    return w;
}

SpatialField normal_coordinate(const Grid& grid, const SubdomainMask& region, std::array<double, 2> nu) {
    SpatialField xi(static_cast<std::size_t>(grid.nodes()), 0.0);
    double mn = HUGE_VAL;
    for (int n = 0; n < grid.nodes(); ++n) {
        double d = 0.0;
        for (int a = 0; a < grid.dim(); ++a) d += grid.x(n, a) * nu[static_cast<std::size_t>(a)];
        xi[static_cast<std::size_t>(n)] = d;
        if (region.contains(n)) mn = std::min(mn, d);
    }
    for (double& v : xi) v -= mn;
    return xi;
}

LocalWeight build_local_weight(const Grid& grid, const SubdomainMask& omega, double s) {
    if (omega.gamma.empty()) throw PreconditionError("local weight needs a nonempty gamma");
    LocalWeight lw;
    lw.phi0 = normal_coordinate(grid, omega, outward_normal(grid, omega.gamma.front()));
    lw.theta = grid.theta();
    lw.s = s;
    return lw;
}

bool CarlemanSides::degenerate() const {
    return log_lhs == -HUGE_VAL && log_rhs_obs == -HUGE_VAL && log_rhs_src == -HUGE_VAL;
}

double CarlemanSides::log_ratio() const {
    double denom = logaddexp(log_rhs_obs, log_rhs_src);
    if (denom == -HUGE_VAL) return log_lhs == -HUGE_VAL ? std::numeric_limits<double>::quiet_NaN() : HUGE_VAL;
    return log_lhs - denom;
}

double CarlemanSides::ratio() const { return std::exp(log_ratio()); }

namespace {

struct Derivs {
    SpaceTimeField dt, lap;
    std::array<SpaceTimeField, 2> grad;
};

Derivs derivs(const Grid& grid, const SpaceTimeField& f) {
    Derivs d;
    d.dt = dt_centered(grid, f);
    d.lap = laplacian(grid, f);
    for (int a = 0; a < grid.dim(); ++a) d.grad[static_cast<std::size_t>(a)] = d1(grid, f, a);
    return d;
}

// Weighted left-hand side: int (s rho)^{power} e^{-2 s eta} (|dt|^2 + |lap|^2 + (s rho)^2 |grad|^2 + (s rho)^4 |.|^2).
void weighted_lhs(const Grid& grid, const WeightSpec& w, double power, const std::vector<const SpaceTimeField*>& comps,
                  CarlemanSides& out) {
    std::vector<Derivs> ds;
    ds.reserve(comps.size());
    for (const auto* c : comps) ds.push_back(derivs(grid, *c));
    const auto ws = spatial_weights(grid, nullptr);
    const auto wt = time_weights(grid, TimeWindow::full(grid));
    LogSum total;
    out.log_lhs_by_level.assign(static_cast<std::size_t>(grid.levels()), -HUGE_VAL);
    for (int k = 0; k < grid.levels(); ++k) {
        const double t = grid.time(k);
        if (!w.inside(t)) continue;
        const double sr = w.s * w.rho(t);
        const double log_pref = std::log(wt[static_cast<std::size_t>(k)]) + power * std::log(sr);
        LogSum level;
        for (int n = 0; n < grid.nodes(); ++n) {
            const double wn = ws[static_cast<std::size_t>(n)];
            if (wn == 0.0) continue;
            double integrand = 0.0;
            for (std::size_t c = 0; c < comps.size(); ++c) {
                const auto& d = ds[c];
                const double val = (*comps[c])(k, n);
                double g2 = 0.0;
                for (int a = 0; a < grid.dim(); ++a) {
                    const double g = d.grad[static_cast<std::size_t>(a)](k, n);
                    g2 += g * g;
                }
                integrand += d.dt(k, n) * d.dt(k, n) + d.lap(k, n) * d.lap(k, n) + sr * sr * g2 +
                             sr * sr * sr * sr * val * val;
            }
            level.add(log_pref + std::log(wn) + w.log_weight(n, t), integrand);
        }
        out.log_lhs_by_level[static_cast<std::size_t>(k)] = level.log();
        total.add(level.log());
    }
    out.log_lhs = total.log();
}

// int (s rho)^{power} e^{-2 s eta} sum |src|^2 over the whole space-time domain.
double weighted_sources(const Grid& grid, const WeightSpec& w, double power,
                        const std::vector<const SpaceTimeField*>& srcs) {
    const auto ws = spatial_weights(grid, nullptr);
    const auto wt = time_weights(grid, TimeWindow::full(grid));
    LogSum total;
    for (int k = 0; k < grid.levels(); ++k) {
        const double t = grid.time(k);
        if (!w.inside(t)) continue;
        const double log_pref = std::log(wt[static_cast<std::size_t>(k)]) + power * std::log(w.s * w.rho(t));
        for (int n = 0; n < grid.nodes(); ++n) {
            const double wn = ws[static_cast<std::size_t>(n)];
            if (wn == 0.0) continue;
            double v = 0.0;
            for (const auto* s : srcs)
                if (!s->empty()) v += (*s)(k, n) * (*s)(k, n);
            total.add(log_pref + std::log(wn) + w.log_weight(n, t), v);
        }
    }
    return total.log();
}

void fill_values(CarlemanSides& s) {
    s.lhs = std::exp(s.log_lhs);
    s.rhs_obs = std::exp(s.log_rhs_obs);
    s.rhs_src = std::exp(s.log_rhs_src);
}

void check_solution(double residual, double scale, double tol) {
    if (residual > tol * scale) {
        std::ostringstream msg;
        msg << "fields do not solve the system: discrete residual " << residual << " exceeds " << tol * scale;
        throw NotASolutionError(msg.str());
    }
}

double residual_scale(const Grid& grid, const std::vector<const SpaceTimeField*>& fields) {
    double m = 0.0;
    for (const auto* f : fields)
        if (!f->empty()) m = std::max(m, f->max_abs());
    return 1.0 + m / grid.dt();
}

}  // namespace

CarlemanSides carleman_sides_2x2(const Grid& grid, const CoefficientSet2x2& coeffs, const SpaceTimeField& u,
                                 const SpaceTimeField& v, const SpaceTimeField& f, const SpaceTimeField& g,
                                 const WeightSpec& weight, const SubdomainMask& omega, const CarlemanOptions& options) {
    for (const auto* x : {&u, &v, &f, &g})
        if (!x->matches(grid)) throw DimensionError("Carleman input field does not match grid");
    ParabolicSolver solver(grid, SystemOperator::from(coeffs));
    ProblemData data;
    data.sources = {f, g};
    data.initial = {u.level(0), v.level(0)};
    data.boundary = {u, v};
    check_solution(solver.residual({u, v}, data), residual_scale(grid, {&u, &v, &f, &g}), options.residual_tol);

    CarlemanSides out;
    weighted_lhs(grid, weight, weight.tau - 1.0, {&u, &v}, out);
    const TimeWindow full = TimeWindow::full(grid);
    const double obs = std::pow(w21_norm(grid, u, &omega, full), 2) + std::pow(l2_norm(grid, f, &omega, full), 2);
    out.log_rhs_obs = obs > 0.0 ? std::log(obs) : -HUGE_VAL;
    out.log_rhs_src = weighted_sources(grid, weight, weight.tau, {&f, &g});
    fill_values(out);
    return out;
}

CarlemanSides carleman_sides_3x3(const Grid& grid, const CoefficientSet3x3& coeffs, const SpaceTimeField& u,
                                 const SpaceTimeField& v, const SpaceTimeField& w, const SpaceTimeField& f,
                                 const SpaceTimeField& g, const SpaceTimeField& h, const WeightSpec& weight,
                                 const SubdomainMask& omega, const CarlemanOptions& options) {
    for (const auto* x : {&u, &v, &w, &f, &g, &h})
        if (!x->matches(grid)) throw DimensionError("Carleman input field does not match grid");
    check_a13_floor(grid, coeffs, options.tol_nu);
    if (!omega.gamma.empty()) {
        NormalCheck nc = check_assumption_normal(grid, normal_condition_field_3x3(grid, coeffs), omega.gamma, options.tol_nu);
        if (!nc.ok) {
            std::ostringstream msg;
            msg << "normal component of grad a12 - (a12/a13) grad a13 vanishes on gamma (margin " << nc.margin << ")";
            throw PreconditionError(msg.str());
        }
    }
    ParabolicSolver solver(grid, SystemOperator::from(coeffs));
    ProblemData data;
    data.sources = {f, g, h};
    data.initial = {u.level(0), v.level(0), w.level(0)};
    data.boundary = {u, v, w};
    check_solution(solver.residual({u, v, w}, data), residual_scale(grid, {&u, &v, &w, &f, &g, &h}),
                   options.residual_tol);

    CarlemanSides out;
    weighted_lhs(grid, weight, -1.0, {&u, &v, &w}, out);
    const TimeWindow full = TimeWindow::full(grid);
    double obs = std::pow(w42_norm(grid, u, &omega, full), 2) + std::pow(w21_norm(grid, f, &omega, full), 2) +
                 std::pow(l2_norm(grid, g, &omega, full), 2) + std::pow(l2_norm(grid, h, &omega, full), 2);
    out.log_rhs_obs = obs > 0.0 ? std::log(obs) : -HUGE_VAL;
    out.log_rhs_src = weighted_sources(grid, weight, 0.0, {&f, &g, &h});
    fill_values(out);
    return out;
}

AuditTable audit_ratios(const std::vector<double>& s_grid, const std::vector<std::vector<CarlemanSides>>& sides,
                        double log10_cap) {
    AuditTable table;
    const double ln10 = std::log(10.0);
    std::vector<double> logs;
    table.finite = true;
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        AuditRow row;
        row.s = s_grid[i];
        double best = -HUGE_VAL;
        for (const auto& sd : sides[i]) {
            if (sd.degenerate() || std::isnan(sd.log_ratio())) {
                ++row.degenerate;
                continue;
            }
            ++row.valid;
            best = std::max(best, sd.log_ratio());
        }
        row.log10_max_ratio = row.valid > 0 ? best / ln10 : std::numeric_limits<double>::quiet_NaN();
        row.max_ratio = row.valid > 0 ? std::exp(best) : std::numeric_limits<double>::quiet_NaN();
        if (row.valid > 0 && !std::isfinite(best)) table.finite = false;
        logs.push_back(row.valid > 0 ? best : std::numeric_limits<double>::quiet_NaN());
        table.rows.push_back(row);
    }
    std::vector<std::size_t> valid_idx;
    for (std::size_t i = 0; i < logs.size(); ++i)
        if (!std::isnan(logs[i])) valid_idx.push_back(i);
    if (valid_idx.empty()) {
        table.finite = false;
        return table;
    }
    for (std::size_t start = 0; start + 1 < valid_idx.size(); ++start) {
        bool ok = true;
        for (std::size_t j = start + 1; j < valid_idx.size() && ok; ++j) {
            const double prev = logs[valid_idx[j - 1]], cur = logs[valid_idx[j]];
            ok = cur <= prev + 1e-12 * std::max(1.0, std::abs(prev));
        }
        if (ok) {
            table.s0_index = valid_idx[start];
            break;
        }
    }
    table.nonincreasing = table.s0_index.has_value();
    table.bounded = table.finite;
    if (table.s0_index)
        for (std::size_t i = *table.s0_index; i < logs.size(); ++i)
            if (!std::isnan(logs[i]) && logs[i] / ln10 > log10_cap) table.bounded = false;
    table.pass = table.finite && table.nonincreasing && table.bounded;
    return table;
}

AuditTable audit_carleman_2x2(const Grid& grid, const std::vector<Instance2x2>& instances, WeightSpec weight,
                              const SubdomainMask& omega, const std::vector<double>& s_grid, double log10_cap) {
    std::vector<std::vector<CarlemanSides>> sides(s_grid.size());
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        weight.s = s_grid[i];
        for (const auto& inst : instances)
            sides[i].push_back(carleman_sides_2x2(grid, inst.coeffs, inst.u, inst.v, inst.f, inst.g, weight, omega));
    }
    return audit_ratios(s_grid, sides, log10_cap);
}

InequalitySides lemma31_check(const std::vector<double>& g, double T, double s, double kappa0, double exponent_sign) {
    const int n = static_cast<int>(g.size());
    if (n < 3 || n % 2 == 0) throw ConfigError("lemma31 needs an odd number (>= 3) of samples so theta is a node");
    if (!(s > 0.0) || !(kappa0 > 0.0)) throw ConfigError("lemma31 needs s > 0 and kappa0 > 0");
    const double h = T / (n - 1);
    const int mid = (n - 1) / 2;
    const double theta = mid * h;
    std::vector<double> G(static_cast<std::size_t>(n), 0.0);
    for (int i = mid + 1; i < n; ++i)
        G[static_cast<std::size_t>(i)] = G[static_cast<std::size_t>(i - 1)] + 0.5 * h * (g[static_cast<std::size_t>(i - 1)] + g[static_cast<std::size_t>(i)]);
    for (int i = mid - 1; i >= 0; --i)
        G[static_cast<std::size_t>(i)] = G[static_cast<std::size_t>(i + 1)] - 0.5 * h * (g[static_cast<std::size_t>(i + 1)] + g[static_cast<std::size_t>(i)]);
    LogSum lhs, rhs;
    for (int i = 0; i < n; ++i) {
        const double t = i * h;
        const double wq = (i == 0 || i == n - 1) ? 0.5 * h : h;
        const double lw = std::log(wq) + 2.0 * s * exponent_sign * (t - theta) * (t - theta);
        lhs.add(lw, G[static_cast<std::size_t>(i)] * G[static_cast<std::size_t>(i)]);
        rhs.add(lw, g[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(i)]);
    }
    return {lhs.value(), rhs.value() / (4.0 * s * kappa0)};
}

Lemma32Result lemma32_check(const Grid& grid, const SpaceTimeField& q, WeightSpec weight, double s, double delta) {
    if (!q.matches(grid)) throw DimensionError("q does not match grid");
    if (!(delta >= 0.0 && delta < grid.theta())) throw ConfigError("lemma32 delta must lie in [0, theta)");
    weight.s = s;
    weight.delta = delta;
    weight.T = grid.T();
    const SpaceTimeField Q = integrate_from(grid, q, grid.theta_index());
    const auto ws = spatial_weights(grid, nullptr);
    const double dt = grid.dt();
    // Normalise by the largest weight so nothing underflows before the logs are taken.
    LogSum lhs, rhs;
    for (int k = 0; k < grid.levels(); ++k) {
        const double t = grid.time(k);
        if (!weight.inside(t)) continue;
        const double lt = std::log(dt);
        for (int n = 0; n < grid.nodes(); ++n) {
            if (ws[static_cast<std::size_t>(n)] == 0.0) continue;
            const double lw = lt + std::log(ws[static_cast<std::size_t>(n)]) + weight.log_weight(n, t);
            lhs.add(lw, Q(k, n) * Q(k, n));
            rhs.add(lw, q(k, n) * q(k, n));
        }
    }
    Lemma32Result r;
    r.log_lhs = lhs.log();
    r.log_rhs = rhs.log();
    r.lhs = std::exp(r.log_lhs);
    r.rhs = std::exp(r.log_rhs);
    r.kappa17 = r.log_rhs == -HUGE_VAL ? 0.0 : s * std::exp(r.log_lhs - r.log_rhs);
    return r;
}

Lemma23Result lemma23_weighted_estimate(const Grid& grid, const SpaceTimeField& u, const SpaceTimeField& f,
                                        const VectorCoefficient& p, const CoefficientField& q,
                                        const SubdomainMask& omega, const SubdomainMask& omega_prime, double s,
                                        double tol_nu) {
    if (!u.matches(grid) || !f.matches(grid)) throw DimensionError("transport fields do not match grid");
    TransportOptions opt;
    opt.tol_nu = tol_nu;
    const double res = transport_residual(grid, p, q, f, omega, u, opt);
    if (res > 1e-8 * (1.0 + f.max_abs() + u.max_abs())) {
        std::ostringstream msg;
        msg << "u does not solve the transport equation (residual " << res << ")";
        throw NotASolutionError(msg.str());
    }
    const SpatialField xi = normal_coordinate(grid, omega_prime, outward_normal(grid, omega.gamma.front()));
    const auto ws = spatial_weights(grid, &omega_prime);
    const auto wt = time_weights(grid, TimeWindow::full(grid));
    LogSum lhs, rhs;
    for (int k = 0; k < grid.levels(); ++k)
        for (int n = 0; n < grid.nodes(); ++n) {
            const double w = ws[static_cast<std::size_t>(n)] * wt[static_cast<std::size_t>(k)];
            if (w == 0.0) continue;
            const double lw = std::log(w) + 2.0 * s * xi[static_cast<std::size_t>(n)];
            lhs.add(lw, u(k, n) * u(k, n));
            rhs.add(lw, f(k, n) * f(k, n));
        }
    Lemma23Result r;
    r.lhs = s * s * lhs.value();
    r.rhs = rhs.value();
    r.kappa = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
    return r;
}

double transport_estimate_ratio(const Grid& grid, const SpaceTimeField& u, const SpaceTimeField& f,
                                const SubdomainMask& omega_prime) {
    const TimeWindow full = TimeWindow::full(grid);
    const double nf = l2_norm(grid, f, &omega_prime, full);
    if (nf == 0.0) return 0.0;
    return l2_norm(grid, u, &omega_prime, full) / nf;
}

}  // namespace pinv
