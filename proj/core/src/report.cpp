#include "pinv/report.hpp"

#include "pinv/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace pinv {

std::string format_double(double v) {
    if (v == 0.0) return "0";
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

void header(std::ostream& os, const Grid& grid) {
    os << (grid.dim() == 2 ? "x,y,t,value\n" : "x,t,value\n");
}

void row(std::ostream& os, const Grid& grid, int n, double t, double v) {
    os << format_double(grid.x(n, 0)) << ',';
    if (grid.dim() == 2) os << format_double(grid.x(n, 1)) << ',';
    os << format_double(t) << ',' << format_double(v) << '\n';
}

std::vector<std::vector<double>> parse_rows(std::istream& is, std::size_t columns) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("field CSV is empty");
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != columns) throw ConfigError("field CSV row has " + std::to_string(vals.size()) + " columns");
        rows.push_back(std::move(vals));
    }
    return rows;
}

}  // namespace

void write_field_csv(std::ostream& os, const Grid& grid, const SpaceTimeField& field) {
    if (!field.matches(grid)) throw DimensionError("field does not match grid");
    header(os, grid);
    for (int k = 0; k <= grid.nt(); ++k)
        for (int n = 0; n < grid.nodes(); ++n) row(os, grid, n, grid.time(k), field(k, n));
}

void write_spatial_csv(std::ostream& os, const Grid& grid, const SpatialField& field, double t) {
    if (field.size() != static_cast<std::size_t>(grid.nodes())) throw DimensionError("field does not match grid");
    header(os, grid);
    for (int n = 0; n < grid.nodes(); ++n) row(os, grid, n, t, field[static_cast<std::size_t>(n)]);
}

std::string field_csv(const Grid& grid, const SpaceTimeField& field) {
    std::ostringstream os;
    write_field_csv(os, grid, field);
    return os.str();
}

std::string spatial_csv(const Grid& grid, const SpatialField& field, double t) {
    std::ostringstream os;
    write_spatial_csv(os, grid, field, t);
    return os.str();
}

SpaceTimeField read_field_csv(std::istream& is, const Grid& grid) {
    auto rows = parse_rows(is, grid.dim() == 2 ? 4u : 3u);
    if (rows.size() != static_cast<std::size_t>(grid.levels()) * static_cast<std::size_t>(grid.nodes()))
        throw DimensionError("field CSV has " + std::to_string(rows.size()) + " rows, grid needs " +
                             std::to_string(grid.levels() * grid.nodes()));
    SpaceTimeField f(grid);
    for (std::size_t i = 0; i < rows.size(); ++i) f.data()[i] = rows[i].back();
    return f;
}

SpatialField read_spatial_csv(std::istream& is, const Grid& grid) {
    auto rows = parse_rows(is, grid.dim() == 2 ? 4u : 3u);
    if (rows.size() != static_cast<std::size_t>(grid.nodes()))
        throw DimensionError("spatial CSV has " + std::to_string(rows.size()) + " rows, grid needs " +
                             std::to_string(grid.nodes()));
    SpatialField f(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) f[i] = rows[i].back();
    return f;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
        double lx = std::log10(x[i]), ly = std::log10(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 2) return 0.0;
    double den = m * sxx - sx * sx;
    return den == 0.0 ? 0.0 : (m * sxy - sx * sy) / den;
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

}  // namespace

std::optional<std::string> render_plot(const std::vector<PlotSeries>& series, const PlotSpec& spec) {
    auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
    auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0.0) && (!spec.log_y || y > 0.0);
    };

    double xmin = HUGE_VAL, xmax = -HUGE_VAL, ymin = HUGE_VAL, ymax = -HUGE_VAL;
    int points = 0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            xmin = std::min(xmin, tx(s.x[i]));
            xmax = std::max(xmax, tx(s.x[i]));
            ymin = std::min(ymin, ty(s.y[i]));
            ymax = std::max(ymax, ty(s.y[i]));
            ++points;
        }
    if (points == 0) return std::nullopt;
    if (xmax == xmin) { xmin -= 0.5; xmax += 0.5; }
    if (ymax == ymin) { ymin -= 0.5; ymax += 0.5; }
    const double padx = 0.05 * (xmax - xmin), pady = 0.05 * (ymax - ymin);
    xmin -= padx; xmax += padx; ymin -= pady; ymax += pady;

    const double W = spec.width, H = spec.height;
    const double left = 70, right = 20, top = 40, bottom = 55;
    auto px = [&](double v) { return left + (tx(v) - xmin) / (xmax - xmin) * (W - left - right); };
    auto py = [&](double v) { return H - bottom - (ty(v) - ymin) / (ymax - ymin) * (H - top - bottom); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
       << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << num(W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
       << escape(spec.title) << "</text>\n";
    os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(W - left - right) << "\" height=\""
       << num(H - top - bottom) << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 4; ++i) {
        double fx = xmin + (xmax - xmin) * i / 4.0;
        double fy = ymin + (ymax - ymin) * i / 4.0;
        double gx = left + (W - left - right) * i / 4.0;
        double gy = H - bottom - (H - top - bottom) * i / 4.0;
        double vx = spec.log_x ? std::pow(10.0, fx) : fx;
        double vy = spec.log_y ? std::pow(10.0, fy) : fy;
        os << "<line x1=\"" << num(gx) << "\" y1=\"" << num(H - bottom) << "\" x2=\"" << num(gx) << "\" y2=\""
           << num(H - bottom + 5) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << num(gx) << "\" y=\"" << num(H - bottom + 18)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << tick_label(vx) << "</text>\n";
        os << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(gy) << "\" x2=\"" << num(left) << "\" y2=\"" << num(gy)
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << num(left - 8) << "\" y=\"" << num(gy + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick_label(vy) << "</text>\n";
    }
    os << "<text x=\"" << num(left + (W - left - right) / 2) << "\" y=\"" << num(H - 12)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(spec.x_label)
       << (spec.log_x ? " (log)" : "") << "</text>\n";
    os << "<text x=\"16\" y=\"" << num(top + (H - top - bottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << num(top + (H - top - bottom) / 2) << ")\" font-family=\"sans-serif\" font-size=\"12\">" << escape(spec.y_label)
       << (spec.log_y ? " (log)" : "") << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& ser = series[s];
        const char* color = palette[s % (sizeof palette / sizeof palette[0])];
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < std::min(ser.x.size(), ser.y.size()); ++i)
            if (usable(ser.x[i], ser.y[i])) pts.emplace_back(px(ser.x[i]), py(ser.y[i]));
        if (ser.line && pts.size() > 1) {
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < pts.size(); ++i) os << (i ? " " : "") << num(pts[i].first) << ',' << num(pts[i].second);
            os << "\"/>\n";
        }
        if (ser.markers || pts.size() == 1)
            for (const auto& [x, y] : pts)
                os << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        if (!ser.label.empty())
            os << "<text x=\"" << num(W - right - 8) << "\" y=\"" << num(top + 16 + 15.0 * static_cast<double>(s))
               << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">"
               << escape(ser.label) << "</text>\n";
    }

    if (spec.annotate_slope && !series.empty()) {
        double slope = 0.0;
        if (spec.log_x && spec.log_y) slope = loglog_slope(series[0].x, series[0].y);
        else {
            std::vector<double> ex, ey;
            for (std::size_t i = 0; i < std::min(series[0].x.size(), series[0].y.size()); ++i) {
                ex.push_back(std::pow(10.0, tx(series[0].x[i])));
                ey.push_back(std::pow(10.0, ty(series[0].y[i])));
            }
            slope = loglog_slope(ex, ey);
        }
        char buf[48];
        std::snprintf(buf, sizeof buf, "slope = %.2f", slope);
        os << "<text x=\"" << num(left + 10) << "\" y=\"" << num(top + 18)
           << "\" font-family=\"sans-serif\" font-size=\"12\">" << buf << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

bool emit_plot(const std::string& path, const std::vector<PlotSeries>& series, const PlotSpec& spec) {
    auto svg = render_plot(series, spec);
    if (!svg) {
        std::cerr << "warning: empty table, no plot written to " << path << '\n';
        return false;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << *svg;
    return true;
}

}  // namespace pinv
