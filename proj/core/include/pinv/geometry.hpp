#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace pinv {

/// Uniform tensor grid over an interval or rectangle times [0, T].
///
/// Spatial nodes are numbered row-major with the first axis fastest:
/// node = i + nx[0] * j. Time levels run from 0 to nt inclusive, so a
/// space-time field holds (nt + 1) * nodes() values.
class Grid {
public:
    static Grid make_1d(double x0, double x1, int nx, double T, int nt, double theta);
    static Grid make_2d(std::array<double, 2> lo, std::array<double, 2> hi,
                        std::array<int, 2> nx, double T, int nt, double theta);

    int dim() const { return dim_; }
    int nx(int axis) const { return nx_[axis]; }
    double lo(int axis) const { return lo_[axis]; }
    double hi(int axis) const { return hi_[axis]; }
    double dx(int axis) const { return dx_[axis]; }
    int nodes() const { return nodes_; }

    double T() const { return T_; }
    int nt() const { return nt_; }
    int levels() const { return nt_ + 1; }
    double dt() const { return T_ / nt_; }
    double time(int k) const { return k * dt(); }

    /// Observation time, snapped to the nearest time node at construction.
    double theta() const { return time(theta_index_); }
    int theta_index() const { return theta_index_; }

    int index(int i, int j = 0) const { return i + nx_[0] * j; }
    int coord(int node, int axis) const { return axis == 0 ? node % nx_[0] : node / nx_[0]; }
    double x(int node, int axis = 0) const { return lo_[axis] + coord(node, axis) * dx_[axis]; }
    bool on_boundary(int node) const;

    /// Same spatial layout with a different time discretization.
    Grid with_time(double T, int nt, double theta) const;
    /// Halve the spacing: nx -> 2 nx - 1 per axis and nt -> 2 nt.
    Grid refined() const;

    bool same_space(const Grid& other) const;
    bool operator==(const Grid& other) const;

private:
    int dim_ = 1;
    std::array<double, 2> lo_{0.0, 0.0};
    std::array<double, 2> hi_{1.0, 1.0};
    std::array<int, 2> nx_{1, 1};
    std::array<double, 2> dx_{1.0, 1.0};
    int nodes_ = 0;
    double T_ = 1.0;
    int nt_ = 1;
    int theta_index_ = 0;
};

using SpatialField = std::vector<double>;

/// Boolean indicator over spatial nodes plus the nodes where the region meets the outer boundary.
struct SubdomainMask {
    std::string name;
    std::vector<char> inside;
    std::vector<int> gamma;

    bool contains(int node) const { return inside[static_cast<std::size_t>(node)] != 0; }
    int count() const;
    bool subset_of(const SubdomainMask& other) const;
};

/// Axis-aligned box region [lo, hi] (inclusive, per axis). Gamma is filled automatically.
SubdomainMask box_mask(const Grid& grid, const std::string& name,
                       std::array<double, 2> lo, std::array<double, 2> hi);
SubdomainMask whole_domain(const Grid& grid);
SubdomainMask complement(const Grid& grid, const SubdomainMask& mask, const std::string& name);

/// Outward unit normal of the outer rectangle at a boundary node. Corners take the first axis.
std::array<double, 2> outward_normal(const Grid& grid, int node);

/// Scalar field over every spatial node and every time level.
class SpaceTimeField {
public:
    SpaceTimeField() = default;
    explicit SpaceTimeField(const Grid& grid, double value = 0.0);
    SpaceTimeField(int nodes, int levels, double value = 0.0);

    int nodes() const { return nodes_; }
    int levels() const { return levels_; }

    double& operator()(int k, int node) { return data_[static_cast<std::size_t>(k) * nodes_ + node]; }
    double operator()(int k, int node) const { return data_[static_cast<std::size_t>(k) * nodes_ + node]; }

    SpatialField level(int k) const;
    void set_level(int k, const SpatialField& values);

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }
    bool empty() const { return data_.empty(); }
    bool matches(const Grid& grid) const;
    double max_abs() const;

    SpaceTimeField& operator+=(const SpaceTimeField& other);
    SpaceTimeField& operator-=(const SpaceTimeField& other);
    SpaceTimeField& operator*=(double c);

private:
    int nodes_ = 0;
    int levels_ = 0;
    std::vector<double> data_;
};

SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b);
SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b);
SpaceTimeField operator*(double c, SpaceTimeField a);

/// Inclusive range of time levels.
struct TimeWindow {
    int k0 = 0;
    int k1 = 0;
    static TimeWindow full(const Grid& grid) { return {0, grid.nt()}; }
};

/// Trapezoid weight of each masked node: half a cell toward every neighbour that is also masked.
std::vector<double> spatial_weights(const Grid& grid, const SubdomainMask* region);
/// Trapezoid weights over the levels of a time window.
std::vector<double> time_weights(const Grid& grid, TimeWindow window);

double l2_norm(const Grid& grid, const SpaceTimeField& field, const SubdomainMask* region,
               TimeWindow window);
double l2_norm(const Grid& grid, const SpaceTimeField& field);
double l2_norm_spatial(const Grid& grid, const SpatialField& field, const SubdomainMask* region = nullptr);

/// Parabolic Sobolev norm: sum of L2 norms of all derivatives with |alpha| + 2 alpha_t <= order.
double wm_norm(const Grid& grid, const SpaceTimeField& field, const SubdomainMask* region,
               TimeWindow window, int order);
double w21_norm(const Grid& grid, const SpaceTimeField& field, const SubdomainMask* region,
                TimeWindow window);
double w42_norm(const Grid& grid, const SpaceTimeField& field, const SubdomainMask* region,
                TimeWindow window);

}  // namespace pinv
