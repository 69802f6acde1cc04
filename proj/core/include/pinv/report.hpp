#pragma once

#include "pinv/geometry.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pinv {

/// Write a space-time field as CSV with header x[,y],t,value, rows ordered by time level then node.
void write_field_csv(std::ostream& os, const Grid& grid, const SpaceTimeField& field);
/// Spatial field at a single time t.
void write_spatial_csv(std::ostream& os, const Grid& grid, const SpatialField& field, double t);
std::string field_csv(const Grid& grid, const SpaceTimeField& field);
std::string spatial_csv(const Grid& grid, const SpatialField& field, double t);

/// Read a field written by write_field_csv (or a spatial one with a single t) back onto the grid.
SpaceTimeField read_field_csv(std::istream& is, const Grid& grid);
SpatialField read_spatial_csv(std::istream& is, const Grid& grid);

/// Shortest round-trip decimal form used in every text artifact.
std::string format_double(double v);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = true;
    bool line = true;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    /// When set, fit a straight line to the first series in the plotted coordinates and print its slope.
    bool annotate_slope = false;
    int width = 640;
    int height = 420;
};

/// Least-squares slope of log10(y) against log10(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Render a static SVG; returns nullopt (and nothing to write) when every series is empty.
std::optional<std::string> render_plot(const std::vector<PlotSeries>& series, const PlotSpec& spec);

/// Render and write the SVG to path. Returns false with a warning on stderr for empty tables.
bool emit_plot(const std::string& path, const std::vector<PlotSeries>& series, const PlotSpec& spec);

}  // namespace pinv
