#include "pinv/transport.hpp"

#include "pinv/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <sstream>
#include <unordered_map>

namespace pinv {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

struct Stencil {
    double sigma = 1.0;
    double tol = 0.0;
};

Stencil orient(const Grid& grid, const VectorCoefficient& p, const SubdomainMask& region,
               const TransportOptions& options) {
    if (region.gamma.empty()) throw PreconditionError("region has no boundary portion gamma");
    Stencil st;
    st.tol = options.tol_nu >= 0.0 ? options.tol_nu : 1e-8 * p.sup_norm();
    double sum = 0.0;
    const int levels = std::max(p.comp[0].levels(), p.comp[1].levels());
    for (int k = 0; k < std::max(levels, 1); ++k) {
        for (int n : region.gamma) {
            auto nu = outward_normal(grid, n);
            double pn = 0.0;
            for (int a = 0; a < grid.dim(); ++a) pn += p.comp[static_cast<std::size_t>(a)].at(k, n) * nu[static_cast<std::size_t>(a)];
            if (std::abs(pn) < st.tol || pn == 0.0) {
                std::ostringstream msg;
                msg << "transport field is tangent to gamma at node " << n << " (|p.nu|=" << std::abs(pn)
                    << " < " << st.tol << ")";
                throw DegeneracyError(msg.str());
            }
            sum += pn;
        }
    }
    st.sigma = sum >= 0.0 ? 1.0 : -1.0;
    return st;
}

// Coefficients of the discrete operator row at node n: pairs (node, weight).
void row_entries(const Grid& grid, const VectorCoefficient& p, const CoefficientField& q, const SubdomainMask& region,
                 double sigma, int k, int n, std::vector<std::pair<int, double>>& out) {
    out.clear();
    out.emplace_back(n, q.at(k, n));
    for (int a = 0; a < grid.dim(); ++a) {
        double pa = p.comp[static_cast<std::size_t>(a)].at(k, n);
        if (pa == 0.0) continue;
        const int stride = a == 0 ? 1 : grid.nx(0);
        const int c = grid.coord(n, a);
        const double h = grid.dx(a);
        // Direction e = -sigma p; the difference uses the neighbour at n - sign(e) along this axis.
        int s = (-sigma * pa) > 0.0 ? 1 : -1;
        auto usable = [&](int dir) {
            int cc = c - dir;
            return cc >= 0 && cc < grid.nx(a) && region.contains(n - dir * stride);
        };
        if (!usable(s)) s = -s;
        if (!usable(s)) throw StencilError("region is one node thick along an axis with nonzero transport field");
        int nb = n - s * stride;
        out.emplace_back(n, pa * s / h);
        out.emplace_back(nb, -pa * s / h);
    }
}

}  // namespace

SpaceTimeField solve_transport(const Grid& grid, const VectorCoefficient& p, const CoefficientField& q,
                               const SpaceTimeField& rhs, const SubdomainMask& region,
                               const TransportOptions& options) {
    if (!rhs.matches(grid)) throw DimensionError("transport right-hand side does not match grid");
    if (static_cast<int>(region.inside.size()) != grid.nodes()) throw DimensionError("mask does not match grid");
    Stencil st = orient(grid, p, region, options);

    std::vector<int> nodes;
    std::unordered_map<int, int> local;
    for (int n = 0; n < grid.nodes(); ++n)
        if (region.contains(n)) {
            local[n] = static_cast<int>(nodes.size());
            nodes.push_back(n);
        }
    std::vector<char> on_gamma(static_cast<std::size_t>(grid.nodes()), 0);
    for (int n : region.gamma) on_gamma[static_cast<std::size_t>(n)] = 1;

    const bool varying = p.time_dependent() || q.time_dependent();
    SpaceTimeField u(grid);
    Eigen::SparseLU<SpMat> lu;
    std::vector<std::pair<int, double>> entries;
    const int m = static_cast<int>(nodes.size());
    for (int k = 0; k < grid.levels(); ++k) {
        if (k == 0 || varying) {
            std::vector<Eigen::Triplet<double>> trip;
            for (int i = 0; i < m; ++i) {
                int n = nodes[static_cast<std::size_t>(i)];
                if (on_gamma[static_cast<std::size_t>(n)]) {
                    trip.emplace_back(i, i, 1.0);
                    continue;
                }
                row_entries(grid, p, q, region, st.sigma, k, n, entries);
                for (auto& [node, w] : entries) trip.emplace_back(i, local.at(node), w);
            }
            SpMat A(m, m);
            A.setFromTriplets(trip.begin(), trip.end());
            A.makeCompressed();
            lu.compute(A);
            if (lu.info() != Eigen::Success) throw SolverError("transport system is singular");
        }
        Eigen::VectorXd b(m);
        for (int i = 0; i < m; ++i) {
            int n = nodes[static_cast<std::size_t>(i)];
            b[i] = on_gamma[static_cast<std::size_t>(n)] ? 0.0 : rhs(k, n);
        }
        Eigen::VectorXd x = lu.solve(b);
        if (!x.allFinite()) throw SolverError("transport solve produced non-finite values");
        for (int i = 0; i < m; ++i) u(k, nodes[static_cast<std::size_t>(i)]) = x[i];
    }
    return u;
}

double transport_residual(const Grid& grid, const VectorCoefficient& p, const CoefficientField& q,
                          const SpaceTimeField& rhs, const SubdomainMask& region, const SpaceTimeField& u,
                          const TransportOptions& options) {
    Stencil st = orient(grid, p, region, options);
    std::vector<char> on_gamma(static_cast<std::size_t>(grid.nodes()), 0);
    for (int n : region.gamma) on_gamma[static_cast<std::size_t>(n)] = 1;
    std::vector<std::pair<int, double>> entries;
    double worst = 0.0;
    for (int k = 0; k < grid.levels(); ++k)
        for (int n = 0; n < grid.nodes(); ++n) {
            if (!region.contains(n)) continue;
            if (on_gamma[static_cast<std::size_t>(n)]) {
                worst = std::max(worst, std::abs(u(k, n)));
                continue;
            }
            row_entries(grid, p, q, region, st.sigma, k, n, entries);
            double r = -rhs(k, n);
            for (auto& [node, w] : entries) r += w * u(k, node);
            worst = std::max(worst, std::abs(r));
        }
    return worst;
}

}  // namespace pinv
