#include "pinv/forward.hpp"

#include "pinv/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <mutex>
#include <sstream>

namespace pinv {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using LU = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;

struct ParabolicSolver::Impl {
    bool time_dependent = false;
    SpMat fixed;
    SpMat fixed_t;
    std::unique_ptr<LU> lu;
    std::unique_ptr<LU> lu_t;
    std::once_flag lu_once;
    std::once_flag lu_t_once;
};

namespace {

struct Assembler {
    const Grid& grid;
    const SystemOperator& op;

    int size() const { return op.ncomp * grid.nodes(); }
    int row(int c, int n) const { return c * grid.nodes() + n; }

    // M = I/dt - L_h on interior rows, identity on boundary rows.
    SpMat build(int k) const {
        std::vector<Eigen::Triplet<double>> trip;
        const int N = grid.nodes();
        const double inv_dt = 1.0 / grid.dt();
        trip.reserve(static_cast<std::size_t>(size()) * (1 + 2 * grid.dim()) * static_cast<std::size_t>(op.ncomp));
        for (int c = 0; c < op.ncomp; ++c) {
            for (int n = 0; n < N; ++n) {
                const int r = row(c, n);
                if (grid.on_boundary(n)) {
                    trip.emplace_back(r, r, 1.0);
                    continue;
                }
                double diag = inv_dt;
                for (int a = 0; a < grid.dim(); ++a) {
                    const int s = a == 0 ? 1 : grid.nx(0);
                    const double h = grid.dx(a);
                    diag += 2.0 / (h * h);
                    trip.emplace_back(r, row(c, n + s), -1.0 / (h * h));
                    trip.emplace_back(r, row(c, n - s), -1.0 / (h * h));
                }
                trip.emplace_back(r, r, diag);
                for (int e = 0; e < op.ncomp; ++e) {
                    const auto& react = op.reaction[static_cast<std::size_t>(c)][static_cast<std::size_t>(e)];
                    if (!react.is_zero()) trip.emplace_back(r, row(e, n), -react.at(k, n));
                    const auto& conv = op.convection[static_cast<std::size_t>(c)][static_cast<std::size_t>(e)];
                    for (int a = 0; a < grid.dim(); ++a) {
                        const auto& comp = conv.comp[static_cast<std::size_t>(a)];
                        if (comp.is_zero()) continue;
                        const int s = a == 0 ? 1 : grid.nx(0);
                        const double h = grid.dx(a);
                        const double p = comp.at(k, n);
                        double wm = 0.0, w0 = 0.0, wp = 0.0;
                        if (c == e && std::abs(p) * h > 2.0) {
                            if (p > 0.0) {
                                wp = p / h;
                                w0 = -p / h;
                            } else {
                                w0 = p / h;
                                wm = -p / h;
                            }
                        } else {
                            wp = p / (2.0 * h);
                            wm = -p / (2.0 * h);
                        }
                        trip.emplace_back(r, row(e, n - s), -wm);
                        trip.emplace_back(r, row(e, n), -w0);
                        trip.emplace_back(r, row(e, n + s), -wp);
                    }
                }
            }
        }
        SpMat m(size(), size());
        m.setFromTriplets(trip.begin(), trip.end());
        m.makeCompressed();
        return m;
    }
};

void factor(LU& lu, const SpMat& m, bool analyze) {
    if (analyze) lu.analyzePattern(m);
    lu.factorize(m);
    if (lu.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "sparse LU factorization failed (" << m.rows() << " unknowns): " << lu.lastErrorMessage();
        throw SolverError(msg.str());
    }
}

Vec checked_solve(const LU& lu, const Vec& rhs, int level) {
    Vec x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite()) {
        std::ostringstream msg;
        msg << "linear solve failed at time level " << level;
        throw SolverError(msg.str());
    }
    return x;
}

void check_data(const Grid& grid, int ncomp, const ProblemData& data) {
    if (static_cast<int>(data.initial.size()) != ncomp)
        throw DimensionError("initial data must have one field per component");
    for (const auto& f : data.initial)
        if (static_cast<int>(f.size()) != grid.nodes()) throw DimensionError("initial data does not match grid");
    for (const auto* group : {&data.sources, &data.boundary}) {
        if (group->size() > static_cast<std::size_t>(ncomp)) throw DimensionError("too many data fields");
        for (const auto& f : *group)
            if (!f.empty() && !f.matches(grid)) throw DimensionError("source or boundary field does not match grid");
    }
}

double data_at(const std::vector<SpaceTimeField>& group, int c, int k, int n) {
    if (static_cast<std::size_t>(c) >= group.size() || group[static_cast<std::size_t>(c)].empty()) return 0.0;
    return group[static_cast<std::size_t>(c)](k, n);
}

}  // namespace

ParabolicSolver::ParabolicSolver(const Grid& grid, SystemOperator op)
    : grid_(grid), op_(std::move(op)), impl_(std::make_unique<Impl>()) {
    for (const auto& row : op_.reaction)
        for (const auto& f : row)
            if (!f.matches(grid_)) throw DimensionError("reaction coefficient does not match grid");
    for (const auto& row : op_.convection)
        for (const auto& v : row)
            for (const auto& f : v.comp)
                if (!f.matches(grid_)) throw DimensionError("convection coefficient does not match grid");
    impl_->time_dependent = op_.time_dependent();
    if (!impl_->time_dependent) {
        Assembler as{grid_, op_};
        impl_->fixed = as.build(0);
        impl_->fixed_t = SpMat(impl_->fixed.transpose());
    }
}

ParabolicSolver::~ParabolicSolver() = default;
ParabolicSolver::ParabolicSolver(ParabolicSolver&&) noexcept = default;
ParabolicSolver& ParabolicSolver::operator=(ParabolicSolver&&) noexcept = default;

FieldSet ParabolicSolver::solve(const ProblemData& data, int k_start) const {
    check_data(grid_, op_.ncomp, data);
    const int N = grid_.nodes();
    const int nc = op_.ncomp;
    const double inv_dt = 1.0 / grid_.dt();
    FieldSet out(static_cast<std::size_t>(nc), SpaceTimeField(grid_));
    for (int c = 0; c < nc; ++c) out[static_cast<std::size_t>(c)].set_level(k_start, data.initial[static_cast<std::size_t>(c)]);

    Assembler as{grid_, op_};
    LU step_lu;
    const LU* lu = nullptr;
    if (!impl_->time_dependent) {
        std::call_once(impl_->lu_once, [this] {
            impl_->lu = std::make_unique<LU>();
            factor(*impl_->lu, impl_->fixed, true);
        });
        lu = impl_->lu.get();
    }
    bool analyzed = false;
    Vec rhs(as.size());
    for (int k = k_start + 1; k <= grid_.nt(); ++k) {
        if (impl_->time_dependent) {
            SpMat m = as.build(k);
            factor(step_lu, m, !analyzed);
            analyzed = true;
            lu = &step_lu;
        }
        for (int c = 0; c < nc; ++c) {
            const auto& prev = out[static_cast<std::size_t>(c)];
            for (int n = 0; n < N; ++n) {
                const int r = as.row(c, n);
                if (grid_.on_boundary(n))
                    rhs[r] = data_at(data.boundary, c, k, n);
                else
                    rhs[r] = prev(k - 1, n) * inv_dt + data_at(data.sources, c, k, n);
            }
        }
        Vec x = checked_solve(*lu, rhs, k);
        for (int c = 0; c < nc; ++c)
            for (int n = 0; n < N; ++n) out[static_cast<std::size_t>(c)](k, n) = x[as.row(c, n)];
    }
    return out;
}

FieldSet ParabolicSolver::adjoint(const std::vector<SpatialField>& terminal, const FieldSet& sources,
                                  int k_start) const {
    const int N = grid_.nodes();
    const int nc = op_.ncomp;
    const double inv_dt = 1.0 / grid_.dt();
    for (const auto& f : terminal)
        if (!f.empty() && static_cast<int>(f.size()) != N) throw DimensionError("terminal data does not match grid");
    for (const auto& f : sources)
        if (!f.empty() && !f.matches(grid_)) throw DimensionError("adjoint source does not match grid");

    Assembler as{grid_, op_};
    LU step_lu;
    const LU* lu = nullptr;
    if (!impl_->time_dependent) {
        std::call_once(impl_->lu_t_once, [this] {
            impl_->lu_t = std::make_unique<LU>();
            factor(*impl_->lu_t, impl_->fixed_t, true);
        });
        lu = impl_->lu_t.get();
    }
    bool analyzed = false;

    FieldSet out(static_cast<std::size_t>(nc), SpaceTimeField(grid_));
    Vec next = Vec::Zero(as.size());
    for (int c = 0; c < nc; ++c)
        if (static_cast<std::size_t>(c) < terminal.size() && !terminal[static_cast<std::size_t>(c)].empty())
            for (int n = 0; n < N; ++n) next[as.row(c, n)] = terminal[static_cast<std::size_t>(c)][static_cast<std::size_t>(n)];

    Vec rhs(as.size());
    for (int k = grid_.nt(); k > k_start; --k) {
        if (impl_->time_dependent) {
            SpMat mt = SpMat(as.build(k).transpose());
            factor(step_lu, mt, !analyzed);
            analyzed = true;
            lu = &step_lu;
        }
        for (int c = 0; c < nc; ++c)
            for (int n = 0; n < N; ++n) {
                const int r = as.row(c, n);
                double v = data_at(sources, c, k, n);
                if (!grid_.on_boundary(n)) v += next[r] * inv_dt;
                rhs[r] = v;
            }
        next = checked_solve(*lu, rhs, k);
        for (int c = 0; c < nc; ++c)
            for (int n = 0; n < N; ++n) out[static_cast<std::size_t>(c)](k, n) = next[as.row(c, n)];
    }
    for (int c = 0; c < nc; ++c)
        for (int n = 0; n < N; ++n)
            out[static_cast<std::size_t>(c)](k_start, n) = grid_.on_boundary(n) ? 0.0 : next[as.row(c, n)] * inv_dt;
    return out;
}

double ParabolicSolver::residual(const FieldSet& state, const ProblemData& data, int k_start) const {
    if (static_cast<int>(state.size()) != op_.ncomp) throw DimensionError("state must have one field per component");
    for (const auto& f : state)
        if (!f.matches(grid_)) throw DimensionError("state does not match grid");
    const int N = grid_.nodes();
    const double inv_dt = 1.0 / grid_.dt();
    Assembler as{grid_, op_};
    double worst = 0.0;
    Vec x(as.size());
    for (int k = k_start + 1; k <= grid_.nt(); ++k) {
        SpMat m = impl_->time_dependent ? as.build(k) : impl_->fixed;
        for (int c = 0; c < op_.ncomp; ++c)
            for (int n = 0; n < N; ++n) x[as.row(c, n)] = state[static_cast<std::size_t>(c)](k, n);
        Vec mx = m * x;
        for (int c = 0; c < op_.ncomp; ++c)
            for (int n = 0; n < N; ++n) {
                const int r = as.row(c, n);
                double expect = grid_.on_boundary(n)
                                    ? data_at(data.boundary, c, k, n)
                                    : state[static_cast<std::size_t>(c)](k - 1, n) * inv_dt + data_at(data.sources, c, k, n);
                worst = std::max(worst, std::abs(mx[r] - expect));
            }
    }
    return worst;
}

std::vector<SpatialField> ParabolicSolver::apply_operator(const std::vector<SpatialField>& state, int k) const {
    Assembler as{grid_, op_};
    const int N = grid_.nodes();
    SpMat m = impl_->time_dependent ? as.build(k) : impl_->fixed;
    Vec x(as.size());
    for (int c = 0; c < op_.ncomp; ++c)
        for (int n = 0; n < N; ++n) x[as.row(c, n)] = state[static_cast<std::size_t>(c)][static_cast<std::size_t>(n)];
    Vec mx = m * x;
    const double inv_dt = 1.0 / grid_.dt();
    std::vector<SpatialField> out(static_cast<std::size_t>(op_.ncomp), SpatialField(static_cast<std::size_t>(N), 0.0));
    for (int c = 0; c < op_.ncomp; ++c)
        for (int n = 0; n < N; ++n)
            if (!grid_.on_boundary(n))
                out[static_cast<std::size_t>(c)][static_cast<std::size_t>(n)] = x[as.row(c, n)] * inv_dt - mx[as.row(c, n)];
    return out;
}

FieldSet solve_system(const SystemOperator& op, const ProblemData& data, const Grid& grid, int k_start) {
    ParabolicSolver solver(grid, op);
    return solver.solve(data, k_start);
}

std::pair<SpaceTimeField, SpaceTimeField> solve_2x2(const CoefficientSet2x2& coeffs, const ProblemData& data,
                                                    const Grid& grid) {
    coeffs.check_grid(grid);
    FieldSet out = solve_system(SystemOperator::from(coeffs), data, grid);
    return {std::move(out[0]), std::move(out[1])};
}

std::array<SpaceTimeField, 3> solve_3x3(const CoefficientSet3x3& coeffs, const ProblemData& data, const Grid& grid) {
    coeffs.check_grid(grid);
    FieldSet out = solve_system(SystemOperator::from(coeffs), data, grid);
    return {std::move(out[0]), std::move(out[1]), std::move(out[2])};
}

std::pair<SpaceTimeField, SpaceTimeField> solve_adjoint_2x2(const CoefficientSet2x2& coeffs,
                                                            const std::pair<SpatialField, SpatialField>& terminal,
                                                            const Grid& grid,
                                                            const std::pair<SpaceTimeField, SpaceTimeField>& sources) {
    coeffs.check_grid(grid);
    ParabolicSolver solver(grid, SystemOperator::from(coeffs));
    FieldSet out = solver.adjoint({terminal.first, terminal.second}, {sources.first, sources.second});
    return {std::move(out[0]), std::move(out[1])};
}

CoefficientSet2x2 reversed_adjoint_coefficients(const CoefficientSet2x2& c) {
    CoefficientSet2x2 r;
    r.a = c.a;
    r.b = c.c;
    r.c = c.b;
    r.d = c.d;
    r.A = c.A.scaled(-1.0);
    r.B = c.C.scaled(-1.0);
    r.C = c.B.scaled(-1.0);
    r.D = c.D.scaled(-1.0);
    return r;
}

}  // namespace pinv
