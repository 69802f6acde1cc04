#include "pinv/geometry.hpp"

#include "pinv/calculus.hpp"
#include "pinv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pinv {

namespace {

int snap_theta(double T, int nt, double theta) {
    if (!(theta > 0.0 && theta < T)) {
        std::ostringstream msg;
        msg << "theta=" << theta << " must lie strictly inside (0, " << T << ")";
        throw ConfigError(msg.str());
    }
    int k = static_cast<int>(std::lround(theta / (T / nt)));
    return std::clamp(k, 1, nt - 1);
}

void check_time(double T, int nt) {
    if (!(T > 0.0)) throw ConfigError("grid.T must be positive");
    if (nt < 8) throw ConfigError("grid.nt must be at least 8");
}

}  // namespace

Grid Grid::make_1d(double x0, double x1, int nx, double T, int nt, double theta) {
    if (nx < 8) throw ConfigError("grid.nx must be at least 8");
    if (!(x1 > x0)) throw ConfigError("grid.extent must be an increasing interval");
    check_time(T, nt);
    Grid g;
    g.dim_ = 1;
    g.lo_ = {x0, 0.0};
    g.hi_ = {x1, 0.0};
    g.nx_ = {nx, 1};
    g.dx_ = {(x1 - x0) / (nx - 1), 1.0};
    g.nodes_ = nx;
    g.T_ = T;
    g.nt_ = nt;
    g.theta_index_ = snap_theta(T, nt, theta);
    return g;
}

Grid Grid::make_2d(std::array<double, 2> lo, std::array<double, 2> hi, std::array<int, 2> nx,
                   double T, int nt, double theta) {
    for (int a = 0; a < 2; ++a) {
        if (nx[a] < 8) throw ConfigError("grid.nx must be at least 8 on every axis");
        if (!(hi[a] > lo[a])) throw ConfigError("grid.extent must be increasing on every axis");
    }
    check_time(T, nt);
    Grid g;
    g.dim_ = 2;
    g.lo_ = lo;
    g.hi_ = hi;
    g.nx_ = nx;
    g.dx_ = {(hi[0] - lo[0]) / (nx[0] - 1), (hi[1] - lo[1]) / (nx[1] - 1)};
    g.nodes_ = nx[0] * nx[1];
    g.T_ = T;
    g.nt_ = nt;
    g.theta_index_ = snap_theta(T, nt, theta);
    return g;
}

bool Grid::on_boundary(int node) const {
    for (int a = 0; a < dim_; ++a) {
        int c = coord(node, a);
        if (c == 0 || c == nx_[a] - 1) return true;
    }
    return false;
}

Grid Grid::with_time(double T, int nt, double theta) const {
    Grid g = *this;
    check_time(T, nt);
    g.T_ = T;
    g.nt_ = nt;
    g.theta_index_ = snap_theta(T, nt, theta);
    return g;
}

Grid Grid::refined() const {
    if (dim_ == 1) return make_1d(lo_[0], hi_[0], 2 * nx_[0] - 1, T_, 2 * nt_, theta());
    return make_2d(lo_, hi_, {2 * nx_[0] - 1, 2 * nx_[1] - 1}, T_, 2 * nt_, theta());
}

bool Grid::same_space(const Grid& o) const {
    return dim_ == o.dim_ && nx_ == o.nx_ && lo_ == o.lo_ && hi_ == o.hi_;
}

bool Grid::operator==(const Grid& o) const {
    return same_space(o) && T_ == o.T_ && nt_ == o.nt_ && theta_index_ == o.theta_index_;
}

int SubdomainMask::count() const {
    return static_cast<int>(std::count(inside.begin(), inside.end(), char{1}));
}

bool SubdomainMask::subset_of(const SubdomainMask& other) const {
    if (inside.size() != other.inside.size()) return false;
    for (std::size_t i = 0; i < inside.size(); ++i)
        if (inside[i] && !other.inside[i]) return false;
    return true;
}

namespace {

void fill_gamma(const Grid& grid, SubdomainMask& m) {
    m.gamma.clear();
    for (int n = 0; n < grid.nodes(); ++n)
        if (m.inside[static_cast<std::size_t>(n)] && grid.on_boundary(n)) m.gamma.push_back(n);
}

}  // namespace

SubdomainMask box_mask(const Grid& grid, const std::string& name, std::array<double, 2> lo,
                       std::array<double, 2> hi) {
    SubdomainMask m;
    m.name = name;
    m.inside.assign(static_cast<std::size_t>(grid.nodes()), 0);
    const double eps = 1e-9;
    for (int n = 0; n < grid.nodes(); ++n) {
        bool in = true;
        for (int a = 0; a < grid.dim(); ++a) {
            double x = grid.x(n, a);
            double tol = eps * grid.dx(a);
            if (x < lo[a] - tol || x > hi[a] + tol) in = false;
        }
        m.inside[static_cast<std::size_t>(n)] = in ? 1 : 0;
    }
    fill_gamma(grid, m);
    return m;
}

SubdomainMask whole_domain(const Grid& grid) {
    SubdomainMask m;
    m.name = "domain";
    m.inside.assign(static_cast<std::size_t>(grid.nodes()), 1);
    fill_gamma(grid, m);
    return m;
}

SubdomainMask complement(const Grid& grid, const SubdomainMask& mask, const std::string& name) {
    SubdomainMask m;
    m.name = name;
    m.inside.resize(mask.inside.size());
    for (std::size_t i = 0; i < mask.inside.size(); ++i) m.inside[i] = mask.inside[i] ? 0 : 1;
    fill_gamma(grid, m);
    return m;
}

std::array<double, 2> outward_normal(const Grid& grid, int node) {
    for (int a = 0; a < grid.dim(); ++a) {
        int c = grid.coord(node, a);
        std::array<double, 2> nu{0.0, 0.0};
        if (c == 0) {
            nu[a] = -1.0;
            return nu;
        }
        if (c == grid.nx(a) - 1) {
            nu[a] = 1.0;
            return nu;
        }
    }
    return {0.0, 0.0};
}

SpaceTimeField::SpaceTimeField(const Grid& grid, double value)
    : SpaceTimeField(grid.nodes(), grid.levels(), value) {}

SpaceTimeField::SpaceTimeField(int nodes, int levels, double value)
    : nodes_(nodes), levels_(levels),
      data_(static_cast<std::size_t>(nodes) * static_cast<std::size_t>(levels), value) {}

SpatialField SpaceTimeField::level(int k) const {
    auto first = data_.begin() + static_cast<std::ptrdiff_t>(k) * nodes_;
    return SpatialField(first, first + nodes_);
}

void SpaceTimeField::set_level(int k, const SpatialField& values) {
    if (static_cast<int>(values.size()) != nodes_) throw DimensionError("level size does not match field");
    std::copy(values.begin(), values.end(), data_.begin() + static_cast<std::ptrdiff_t>(k) * nodes_);
}

bool SpaceTimeField::matches(const Grid& grid) const {
    return nodes_ == grid.nodes() && levels_ == grid.levels();
}

double SpaceTimeField::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

SpaceTimeField& SpaceTimeField::operator+=(const SpaceTimeField& o) {
    if (o.nodes_ != nodes_ || o.levels_ != levels_) throw DimensionError("field shapes differ");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

SpaceTimeField& SpaceTimeField::operator-=(const SpaceTimeField& o) {
    if (o.nodes_ != nodes_ || o.levels_ != levels_) throw DimensionError("field shapes differ");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

SpaceTimeField& SpaceTimeField::operator*=(double c) {
    for (double& v : data_) v *= c;
    return *this;
}

SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b) { return a += b; }
SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b) { return a -= b; }
SpaceTimeField operator*(double c, SpaceTimeField a) { return a *= c; }

std::vector<double> spatial_weights(const Grid& grid, const SubdomainMask* region) {
    std::vector<double> w(static_cast<std::size_t>(grid.nodes()), 0.0);
    if (region && static_cast<int>(region->inside.size()) != grid.nodes())
        throw DimensionError("mask size does not match grid");
    auto in = [&](int n) { return region == nullptr || region->contains(n); };
    for (int n = 0; n < grid.nodes(); ++n) {
        if (!in(n)) continue;
        double weight = 1.0;
        for (int a = 0; a < grid.dim(); ++a) {
            int c = grid.coord(n, a);
            int stride = a == 0 ? 1 : grid.nx(0);
            double axis_w = 0.0;
            if (c > 0 && in(n - stride)) axis_w += 0.5 * grid.dx(a);
            if (c < grid.nx(a) - 1 && in(n + stride)) axis_w += 0.5 * grid.dx(a);
            weight *= axis_w;
        }
        w[static_cast<std::size_t>(n)] = weight;
    }
    return w;
}

std::vector<double> time_weights(const Grid& grid, TimeWindow window) {
    if (window.k0 < 0 || window.k1 > grid.nt() || window.k0 > window.k1)
        throw DimensionError("time window outside grid");
    std::vector<double> w(static_cast<std::size_t>(grid.levels()), 0.0);
    for (int k = window.k0; k < window.k1; ++k) {
        w[static_cast<std::size_t>(k)] += 0.5 * grid.dt();
        w[static_cast<std::size_t>(k + 1)] += 0.5 * grid.dt();
    }
    return w;
}

double l2_norm(const Grid& grid, const SpaceTimeField& field, const SubdomainMask* region,
               TimeWindow window) {
    if (!field.matches(grid)) throw DimensionError("field does not match grid");
    auto ws = spatial_weights(grid, region);
    auto wt = time_weights(grid, window);
    double sum = 0.0;
    for (int k = window.k0; k <= window.k1; ++k) {
        double wk = wt[static_cast<std::size_t>(k)];
        if (wk == 0.0) continue;
        double level = 0.0;
        for (int n = 0; n < grid.nodes(); ++n) {
            double v = field(k, n);
            level += ws[static_cast<std::size_t>(n)] * v * v;
        }
        sum += wk * level;
    }
    return std::sqrt(sum);
}

double l2_norm(const Grid& grid, const SpaceTimeField& field) {
    return l2_norm(grid, field, nullptr, TimeWindow::full(grid));
}

double l2_norm_spatial(const Grid& grid, const SpatialField& field, const SubdomainMask* region) {
    if (static_cast<int>(field.size()) != grid.nodes()) throw DimensionError("field does not match grid");
    auto ws = spatial_weights(grid, region);
    double sum = 0.0;
    for (std::size_t n = 0; n < field.size(); ++n) sum += ws[n] * field[n] * field[n];
    return std::sqrt(sum);
}

namespace {

void check_stencil(const Grid& grid, const SubdomainMask* region, TimeWindow window, int order) {
    int need = order + 1;
    for (int a = 0; a < grid.dim(); ++a) {
        int lo = grid.nx(a), hi = -1;
        for (int n = 0; n < grid.nodes(); ++n) {
            if (region && !region->contains(n)) continue;
            lo = std::min(lo, grid.coord(n, a));
            hi = std::max(hi, grid.coord(n, a));
        }
        if (hi - lo + 1 < need) {
            std::ostringstream msg;
            msg << "region '" << (region ? region->name : std::string("domain")) << "' spans "
                << std::max(0, hi - lo + 1) << " nodes on axis " << a << ", order-" << order
                << " norm needs " << need;
            throw StencilError(msg.str());
        }
    }
    int time_order = order / 2;
    if (time_order > 0 && window.k1 - window.k0 + 1 < 2 * time_order + 1)
        throw StencilError("time window too short for the time derivatives of the norm");
}

SpaceTimeField spatial_derivative(const Grid& grid, const SpaceTimeField& f, int ax, int ay) {
    SpaceTimeField out(f.nodes(), f.levels());
    for (int k = 0; k < f.levels(); ++k) {
        SpatialField s = f.level(k);
        if (ax > 0) s = dn(grid, s, 0, ax);
        if (ay > 0) s = dn(grid, s, 1, ay);
        out.set_level(k, s);
    }
    return out;
}

}  // namespace

double wm_norm(const Grid& grid, const SpaceTimeField& field, const SubdomainMask* region,
               TimeWindow window, int order) {
    if (!field.matches(grid)) throw DimensionError("field does not match grid");
    check_stencil(grid, region, window, order);
    double total = 0.0;
    SpaceTimeField time_deriv = field;
    for (int at = 0; 2 * at <= order; ++at) {
        if (at > 0) time_deriv = dt_centered(grid, time_deriv);
        int spatial = order - 2 * at;
        for (int s = 0; s <= spatial; ++s) {
            int ymax = grid.dim() == 2 ? s : 0;
            for (int ay = 0; ay <= ymax; ++ay) {
                int ax = s - ay;
                if (grid.dim() == 1 && ay > 0) continue;
                SpaceTimeField d = (ax == 0 && ay == 0) ? time_deriv
                                                        : spatial_derivative(grid, time_deriv, ax, ay);
                total += l2_norm(grid, d, region, window);
            }
        }
    }
    return total;
}

double w21_norm(const Grid& grid, const SpaceTimeField& field, const SubdomainMask* region,
                TimeWindow window) {
    return wm_norm(grid, field, region, window, 2);
}

double w42_norm(const Grid& grid, const SpaceTimeField& field, const SubdomainMask* region,
                TimeWindow window) {
    return wm_norm(grid, field, region, window, 4);
}

}  // namespace pinv
