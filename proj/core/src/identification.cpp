#include "pinv/identification.hpp"

#include "pinv/calculus.hpp"
#include "pinv/errors.hpp"
#include "pinv/forward.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace pinv {

namespace {

using Mat = Eigen::MatrixXd;

struct NodalRows {
    int n_unknowns = 0;
    std::vector<SpatialField> U, V;
    std::vector<std::array<SpatialField, 2>> gU, gV;
};

NodalRows gather(const Grid& grid, const std::vector<std::pair<SpatialField, SpatialField>>& snaps) {
    NodalRows r;
    r.n_unknowns = 2 * grid.dim() + 2;
    for (const auto& [u, v] : snaps) {
        if (u.size() != static_cast<std::size_t>(grid.nodes()) || v.size() != static_cast<std::size_t>(grid.nodes()))
            throw DimensionError("snapshot does not match grid");
        r.U.push_back(u);
        r.V.push_back(v);
        std::array<SpatialField, 2> gu, gv;
        for (int a = 0; a < grid.dim(); ++a) {
            gu[static_cast<std::size_t>(a)] = d1(grid, u, a);
            gv[static_cast<std::size_t>(a)] = d1(grid, v, a);
        }
        r.gU.push_back(std::move(gu));
        r.gV.push_back(std::move(gv));
    }
    return r;
}

Mat nodal_matrix(const Grid& grid, const NodalRows& r, int n) {
    const auto i = static_cast<std::size_t>(n);
    const int m = static_cast<int>(r.U.size());
    const int dim = grid.dim();
    Mat M(m, r.n_unknowns);
    for (int j = 0; j < m; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        M(j, 0) = r.U[uj][i];
        M(j, 1) = r.V[uj][i];
        for (int a = 0; a < dim; ++a) {
            M(j, 2 + a) = r.gU[uj][static_cast<std::size_t>(a)][i];
            M(j, 2 + dim + a) = r.gV[uj][static_cast<std::size_t>(a)][i];
        }
    }
    return M;
}

double row_norm_product(const Mat& M) {
    double p = 1.0;
    for (int j = 0; j < M.rows(); ++j) p *= M.row(j).norm();
    return p;
}

}  // namespace

CoefficientDifferences CoefficientDifferences::zero(const Grid& grid) {
    const auto N = static_cast<std::size_t>(grid.nodes());
    CoefficientDifferences d;
    for (SpatialField* f : {&d.a, &d.b, &d.c, &d.d}) f->assign(N, 0.0);
    for (auto* v : {&d.A, &d.B, &d.C, &d.D})
        for (int a = 0; a < grid.dim(); ++a) (*v)[static_cast<std::size_t>(a)].assign(N, 0.0);
    return d;
}

CoefficientSet2x2 CoefficientDifferences::as_coefficients(const Grid& grid) const {
    CoefficientSet2x2 s;
    s.a = CoefficientField::spatial(a);
    s.b = CoefficientField::spatial(b);
    s.c = CoefficientField::spatial(c);
    s.d = CoefficientField::spatial(d);
    auto vec = [&](const std::array<SpatialField, 2>& f) {
        VectorCoefficient v;
        for (int ax = 0; ax < grid.dim(); ++ax)
            v.comp[static_cast<std::size_t>(ax)] = CoefficientField::spatial(f[static_cast<std::size_t>(ax)]);
        return v;
    };
    s.A = vec(A);
    s.B = vec(B);
    s.C = vec(C);
    s.D = vec(D);
    return s;
}

DeterminantResult determinant_check(const Grid& grid, const std::vector<std::pair<SpatialField, SpatialField>>& snapshots,
                                    const SubdomainMask& omega1, double tol_det) {
    DeterminantResult out;
    out.det.assign(static_cast<std::size_t>(grid.nodes()), 0.0);
    const int need = 2 * grid.dim() + 2;
    if (static_cast<int>(snapshots.size()) != need) {
        out.pass = false;
        return out;
    }
    NodalRows rows = gather(grid, snapshots);
    out.min_abs = HUGE_VAL;
    bool any = false;
    for (int n = 0; n < grid.nodes(); ++n) {
        if (omega1.contains(n)) continue;
        Mat M = nodal_matrix(grid, rows, n);
        double d4 = M.determinant();
        double det = d4 * d4;
        out.det[static_cast<std::size_t>(n)] = det;
        double rp = row_norm_product(M);
        double tol = tol_det > 0.0 ? tol_det : 1e-8 * rp * rp;
        if (!(std::abs(det) >= tol) || rp == 0.0) ++out.failing_nodes;
        out.min_abs = std::min(out.min_abs, std::abs(det));
        any = true;
    }
    if (!any) out.min_abs = 0.0;
    out.pass = any && out.failing_nodes == 0;
    return out;
}

IdentificationResult full_identification(const Grid& grid, const std::vector<IdentificationExperiment>& experiments,
                                         const SubdomainMask& omega1, const IdentificationOptions& options) {
    const int dim = grid.dim();
    const int need = 2 * dim + 2;
    if (static_cast<int>(experiments.size()) < need)
        throw RankDeficiencyError("full identification needs " + std::to_string(need) + " experiments, got " +
                                  std::to_string(experiments.size()));
    const auto N = static_cast<std::size_t>(grid.nodes());
    std::vector<std::pair<SpatialField, SpatialField>> snaps;
    for (const auto& e : experiments) {
        if (e.dUdt.size() != N || e.dVdt.size() != N) throw DimensionError("experiment does not match grid");
        snaps.emplace_back(e.U_theta, e.V_theta);
    }

    IdentificationResult res;
    res.diff = CoefficientDifferences::zero(grid);
    if (static_cast<int>(snaps.size()) == need) res.det = determinant_check(grid, snaps, omega1, options.tol_det);
    NodalRows rows = gather(grid, snaps);
    const int m = static_cast<int>(experiments.size());

    std::vector<char> flagged(N, 0);
    auto store = [&](int n, const Eigen::VectorXd& xu, const Eigen::VectorXd& xv) {
        const auto i = static_cast<std::size_t>(n);
        res.diff.a[i] = xu(0);
        res.diff.b[i] = xu(1);
        res.diff.c[i] = xv(0);
        res.diff.d[i] = xv(1);
        for (int a = 0; a < dim; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            res.diff.A[ua][i] = xu(2 + a);
            res.diff.B[ua][i] = xu(2 + dim + a);
            res.diff.C[ua][i] = xv(2 + a);
            res.diff.D[ua][i] = xv(2 + dim + a);
        }
    };

    for (int n = 0; n < grid.nodes(); ++n) {
        if (omega1.contains(n)) continue;
        const auto i = static_cast<std::size_t>(n);
        Mat M = nodal_matrix(grid, rows, n);
        Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        double smax = sv(0), smin = sv(sv.size() - 1);
        if (!(smin > 0.0) || smax / smin > options.condition_cap || sv.size() < need) {
            flagged[i] = 1;
            res.flagged_nodes.push_back(n);
            continue;
        }
        Eigen::VectorXd ru(m), rv(m);
        for (int j = 0; j < m; ++j) {
            ru(j) = experiments[static_cast<std::size_t>(j)].dUdt[i];
            rv(j) = experiments[static_cast<std::size_t>(j)].dVdt[i];
        }
        store(n, svd.solve(ru), svd.solve(rv));
    }

    // Fill flagged nodes from solved neighbours, sweeping until nothing changes.
    std::vector<SpatialField*> fields = {&res.diff.a, &res.diff.b, &res.diff.c, &res.diff.d};
    for (auto* v : {&res.diff.A, &res.diff.B, &res.diff.C, &res.diff.D})
        for (int a = 0; a < dim; ++a) fields.push_back(&(*v)[static_cast<std::size_t>(a)]);
    bool progress = true;
    while (progress) {
        progress = false;
        for (int n : res.flagged_nodes) {
            const auto i = static_cast<std::size_t>(n);
            if (!flagged[i]) continue;
            std::vector<int> nb;
            for (int a = 0; a < dim; ++a) {
                int stride = a == 0 ? 1 : grid.nx(0);
                int c = grid.coord(n, a);
                if (c > 0) nb.push_back(n - stride);
                if (c < grid.nx(a) - 1) nb.push_back(n + stride);
            }
            std::vector<int> good;
            for (int q : nb)
                if (!flagged[static_cast<std::size_t>(q)]) good.push_back(q);
            if (good.empty()) continue;
            for (auto* f : fields) {
                double s = 0.0;
                for (int q : good) s += (*f)[static_cast<std::size_t>(q)];
                (*f)[i] = s / static_cast<double>(good.size());
            }
            flagged[i] = 0;
            progress = true;
        }
    }
    return res;
}

std::vector<std::pair<SpatialField, SpatialField>> example_references(const Grid& grid) {
    const auto N = static_cast<std::size_t>(grid.nodes());
    SpatialField one(N, 1.0), zero(N, 0.0);
    std::vector<std::pair<SpatialField, SpatialField>> refs = {{one, zero}, {zero, one}};
    for (int a = 0; a < grid.dim(); ++a) {
        SpatialField x(N);
        for (int n = 0; n < grid.nodes(); ++n) x[static_cast<std::size_t>(n)] = grid.x(n, a);
        refs.emplace_back(x, zero);
    }
    for (int a = 0; a < grid.dim(); ++a) {
        SpatialField x(N);
        for (int n = 0; n < grid.nodes(); ++n) x[static_cast<std::size_t>(n)] = grid.x(n, a);
        refs.emplace_back(zero, x);
    }
    return refs;
}

CoefficientSet2x2 add_coefficients(const CoefficientSet2x2& x, const CoefficientSet2x2& y, const Grid& grid) {
    CoefficientSet2x2 s;
    s.a = x.a.plus(y.a, grid);
    s.b = x.b.plus(y.b, grid);
    s.c = x.c.plus(y.c, grid);
    s.d = x.d.plus(y.d, grid);
    auto vec = [&](const VectorCoefficient& p, const VectorCoefficient& q) {
        VectorCoefficient v;
        for (std::size_t a = 0; a < 2; ++a) v.comp[a] = p.comp[a].plus(q.comp[a], grid);
        return v;
    };
    s.A = vec(x.A, y.A);
    s.B = vec(x.B, y.B);
    s.C = vec(x.C, y.C);
    s.D = vec(x.D, y.D);
    return s;
}

std::vector<IdentificationExperiment> simulate_experiments(const Grid& grid, const CoefficientSet2x2& tilde,
                                                           const CoefficientSet2x2& diff,
                                                           const std::vector<std::pair<SpatialField, SpatialField>>& refs,
                                                           const RateOptions& rate) {
    if (tilde.time_dependent() || diff.time_dependent())
        throw PreconditionError("experiments use time-independent coefficients");
    const CoefficientSet2x2 truth = add_coefficients(tilde, diff, grid);
    const SystemOperator op_true = SystemOperator::from(truth);
    const ParabolicSolver solver_tilde(grid, SystemOperator::from(tilde));
    const ParabolicSolver solver_true(grid, op_true);

    std::vector<IdentificationExperiment> out;
    for (const auto& [p, q] : refs) {
        std::vector<SpatialField> state = {p, q};
        auto Lt = solver_tilde.apply_operator(state, 0);
        auto Lx = solver_true.apply_operator(state, 0);
        FieldSet sources = {SpaceTimeField(grid), SpaceTimeField(grid)};
        for (int c = 0; c < 2; ++c)
            for (int k = 0; k <= grid.nt(); ++k)
                for (int n = 0; n < grid.nodes(); ++n) {
                    const auto i = static_cast<std::size_t>(n);
                    const auto uc = static_cast<std::size_t>(c);
                    sources[uc](k, n) = Lx[uc][i] - Lt[uc][i];
                }
        auto rates = matched_difference_rate(grid, op_true, sources, rate);
        out.push_back({p, q, std::move(rates[0]), std::move(rates[1])});
    }
    return out;
}

}  // namespace pinv
