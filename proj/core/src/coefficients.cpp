#include "pinv/coefficients.hpp"

#include "pinv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pinv {

CoefficientField CoefficientField::constant(const Grid& grid, double value) {
    return spatial(SpatialField(static_cast<std::size_t>(grid.nodes()), value));
}

CoefficientField CoefficientField::spatial(SpatialField values) {
    CoefficientField f;
    f.nodes_ = static_cast<int>(values.size());
    f.levels_ = 1;
    f.values_ = std::move(values);
    return f;
}

CoefficientField CoefficientField::spacetime(const SpaceTimeField& values) {
    CoefficientField f;
    f.nodes_ = values.nodes();
    f.levels_ = values.levels();
    f.values_ = values.data();
    return f;
}

CoefficientField CoefficientField::from_function(const Grid& grid,
                                                 const std::function<double(double, double)>& fn) {
    SpatialField v(static_cast<std::size_t>(grid.nodes()));
    for (int n = 0; n < grid.nodes(); ++n)
        v[static_cast<std::size_t>(n)] = fn(grid.x(n, 0), grid.dim() == 2 ? grid.x(n, 1) : 0.0);
    return spatial(std::move(v));
}

CoefficientField CoefficientField::from_function_t(
    const Grid& grid, const std::function<double(double, double, double)>& fn) {
    SpaceTimeField v(grid);
    for (int k = 0; k < grid.levels(); ++k)
        for (int n = 0; n < grid.nodes(); ++n)
            v(k, n) = fn(grid.x(n, 0), grid.dim() == 2 ? grid.x(n, 1) : 0.0, grid.time(k));
    return spacetime(v);
}

SpatialField CoefficientField::level(int k) const {
    SpatialField out(static_cast<std::size_t>(nodes_), 0.0);
    for (int n = 0; n < nodes_; ++n) out[static_cast<std::size_t>(n)] = at(k, n);
    return out;
}

SpaceTimeField CoefficientField::expand(const Grid& grid) const {
    SpaceTimeField out(grid);
    if (is_zero()) return out;
    for (int k = 0; k < grid.levels(); ++k)
        for (int n = 0; n < grid.nodes(); ++n) out(k, n) = at(k, n);
    return out;
}

double CoefficientField::sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool CoefficientField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

bool CoefficientField::matches(const Grid& grid) const {
    if (is_zero()) return true;
    return nodes_ == grid.nodes() && (levels_ == 1 || levels_ == grid.levels());
}

CoefficientField CoefficientField::scaled(double c) const {
    CoefficientField f = *this;
    for (double& v : f.values_) v *= c;
    return f;
}

CoefficientField CoefficientField::plus(const CoefficientField& other, const Grid& grid) const {
    if (other.is_zero()) return *this;
    if (is_zero()) return other;
    if (!time_dependent() && !other.time_dependent()) {
        SpatialField v = level(0);
        for (int n = 0; n < nodes_; ++n) v[static_cast<std::size_t>(n)] += other.at(0, n);
        return spatial(std::move(v));
    }
    SpaceTimeField v = expand(grid);
    v += other.expand(grid);
    return spacetime(v);
}

double VectorCoefficient::sup_norm() const { return std::max(comp[0].sup_norm(), comp[1].sup_norm()); }

VectorCoefficient VectorCoefficient::uniform(const Grid& grid, std::array<double, 2> value) {
    VectorCoefficient v;
    for (int a = 0; a < grid.dim(); ++a)
        if (value[static_cast<std::size_t>(a)] != 0.0) v.comp[static_cast<std::size_t>(a)] = CoefficientField::constant(grid, value[static_cast<std::size_t>(a)]);
    return v;
}

bool CoefficientSet2x2::time_dependent() const {
    return a.time_dependent() || b.time_dependent() || c.time_dependent() || d.time_dependent() ||
           A.time_dependent() || B.time_dependent() || C.time_dependent() || D.time_dependent();
}

double CoefficientSet2x2::sup_norm() const {
    return std::max({a.sup_norm(), b.sup_norm(), c.sup_norm(), d.sup_norm(), A.sup_norm(), B.sup_norm(),
                     C.sup_norm(), D.sup_norm()});
}

void CoefficientSet2x2::check_bound(double M) const {
    const std::pair<const char*, const CoefficientField*> scalars[] = {{"a", &a}, {"b", &b}, {"c", &c}, {"d", &d}};
    for (auto& [name, f] : scalars) {
        if (!f->all_finite()) throw ConfigError(std::string("coefficient ") + name + " is not finite");
        if (f->sup_norm() > M) {
            std::ostringstream msg;
            msg << "coefficient " << name << " has sup norm " << f->sup_norm() << " above bound M=" << M;
            throw ConfigError(msg.str());
        }
    }
    const std::pair<const char*, const VectorCoefficient*> vectors[] = {{"A", &A}, {"B", &B}, {"C", &C}, {"D", &D}};
    for (auto& [name, f] : vectors) {
        if (!f->comp[0].all_finite() || !f->comp[1].all_finite())
            throw ConfigError(std::string("coefficient ") + name + " is not finite");
        if (f->sup_norm() > M) {
            std::ostringstream msg;
            msg << "coefficient " << name << " has sup norm " << f->sup_norm() << " above bound M=" << M;
            throw ConfigError(msg.str());
        }
    }
}

void CoefficientSet2x2::check_grid(const Grid& grid) const {
    for (const CoefficientField* f : {&a, &b, &c, &d})
        if (!f->matches(grid)) throw DimensionError("reaction coefficient does not match grid");
    for (const VectorCoefficient* v : {&A, &B, &C, &D})
        for (const auto& f : v->comp)
            if (!f.matches(grid)) throw DimensionError("convection coefficient does not match grid");
}

bool CoefficientSet3x3::time_dependent() const {
    for (const auto& row : a)
        for (const auto& f : row)
            if (f.time_dependent()) return true;
    return false;
}

double CoefficientSet3x3::sup_norm() const {
    double m = 0.0;
    for (const auto& row : a)
        for (const auto& f : row) m = std::max(m, f.sup_norm());
    return m;
}

void CoefficientSet3x3::check_grid(const Grid& grid) const {
    for (const auto& row : a)
        for (const auto& f : row)
            if (!f.matches(grid)) throw DimensionError("reaction coefficient does not match grid");
}

CoefficientSet3x3 CoefficientSet3x3::transposed() const {
    CoefficientSet3x3 t;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) t.a[i][j] = a[j][i];
    return t;
}

ProblemData ProblemData::zero(const Grid& grid, int components) {
    ProblemData d;
    d.sources.resize(static_cast<std::size_t>(components));
    d.boundary.resize(static_cast<std::size_t>(components));
    d.initial.assign(static_cast<std::size_t>(components), SpatialField(static_cast<std::size_t>(grid.nodes()), 0.0));
    return d;
}

std::vector<std::string> ProblemData::compatibility_warnings(const Grid& grid, double tol) const {
    std::vector<std::string> out;
    for (std::size_t c = 0; c < initial.size(); ++c) {
        double worst = 0.0;
        for (int n = 0; n < grid.nodes(); ++n) {
            if (!grid.on_boundary(n)) continue;
            double bc = (c < boundary.size() && !boundary[c].empty()) ? boundary[c](0, n) : 0.0;
            worst = std::max(worst, std::abs(bc - initial[c][static_cast<std::size_t>(n)]));
        }
        if (worst > tol) {
            std::ostringstream msg;
            msg << "component " << c << ": boundary data differs from initial state at t=0 by " << worst;
            out.push_back(msg.str());
        }
    }
    return out;
}

SystemOperator::SystemOperator(int n)
    : ncomp(n),
      reaction(static_cast<std::size_t>(n), std::vector<CoefficientField>(static_cast<std::size_t>(n))),
      convection(static_cast<std::size_t>(n), std::vector<VectorCoefficient>(static_cast<std::size_t>(n))) {}

SystemOperator SystemOperator::from(const CoefficientSet2x2& c) {
    SystemOperator op(2);
    op.reaction[0][0] = c.a;
    op.reaction[0][1] = c.b;
    op.reaction[1][0] = c.c;
    op.reaction[1][1] = c.d;
    op.convection[0][0] = c.A;
    op.convection[0][1] = c.B;
    op.convection[1][0] = c.C;
    op.convection[1][1] = c.D;
    return op;
}

SystemOperator SystemOperator::from(const CoefficientSet3x3& c) {
    SystemOperator op(3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) op.reaction[i][j] = c.a[i][j];
    return op;
}

bool SystemOperator::time_dependent() const {
    for (int i = 0; i < ncomp; ++i)
        for (int j = 0; j < ncomp; ++j)
            if (reaction[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].time_dependent() ||
                convection[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].time_dependent())
                return true;
    return false;
}

}  // namespace pinv
