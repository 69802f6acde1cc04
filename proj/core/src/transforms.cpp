#include "pinv/transforms.hpp"

#include "pinv/calculus.hpp"
#include "pinv/errors.hpp"

#include <cmath>
#include <sstream>

namespace pinv {

namespace {

void require(const Grid& grid, const SpaceTimeField& f, const char* name) {
    if (!f.matches(grid)) throw DimensionError(std::string(name) + " does not match grid");
}

[[noreturn]] void floor_violation(const Grid& grid, const char* name, int k, int n, double value, double floor) {
    std::ostringstream msg;
    msg << "|" << name << "| = " << std::abs(value) << " below floor " << floor << " at node " << n << " (x="
        << grid.x(n, 0);
    if (grid.dim() == 2) msg << ", y=" << grid.x(n, 1);
    msg << ", t=" << grid.time(k) << ")";
    throw DegeneracyError(msg.str());
}

void check_floor(const Grid& grid, const SpaceTimeField& f, const char* name, double floor) {
    for (int k = 0; k < f.levels(); ++k)
        for (int n = 0; n < f.nodes(); ++n)
            if (!(std::abs(f(k, n)) >= floor)) floor_violation(grid, name, k, n, f(k, n), floor);
}

VectorField gradient(const Grid& grid, const SpaceTimeField& f) {
    VectorField g{SpaceTimeField(grid), SpaceTimeField(grid)};
    for (int a = 0; a < grid.dim(); ++a) g[static_cast<std::size_t>(a)] = d1(grid, f, a);
    return g;
}

SpaceTimeField expand(const Grid& grid, const CoefficientField& c) { return c.expand(grid); }

double dot_at(const Grid& grid, const VectorCoefficient& v, const VectorField& g, int k, int n) {
    double s = 0.0;
    for (int a = 0; a < grid.dim(); ++a) s += v.comp[static_cast<std::size_t>(a)].at(k, n) * g[static_cast<std::size_t>(a)](k, n);
    return s;
}

double dot_at(const Grid& grid, const VectorField& v, const VectorField& g, int k, int n) {
    double s = 0.0;
    for (int a = 0; a < grid.dim(); ++a) s += v[static_cast<std::size_t>(a)](k, n) * g[static_cast<std::size_t>(a)](k, n);
    return s;
}

}  // namespace

double default_delta0(const SpaceTimeField& Utilde) { return 1e-3 * Utilde.max_abs(); }

std::pair<SpaceTimeField, SpaceTimeField> quotient_fields(const Grid& grid, const SpaceTimeField& u,
                                                          const SpaceTimeField& v, const SpaceTimeField& Utilde,
                                                          const SpaceTimeField& Vtilde, double delta0) {
    require(grid, u, "u");
    require(grid, v, "v");
    require(grid, Utilde, "U~");
    require(grid, Vtilde, "V~");
    check_floor(grid, Vtilde, "V~", delta0);
    check_floor(grid, Utilde, "U~", delta0);
    SpaceTimeField ut(grid), vt(grid);
    for (std::size_t i = 0; i < u.data().size(); ++i) {
        ut.data()[i] = u.data()[i] / Vtilde.data()[i];
        vt.data()[i] = v.data()[i] / Utilde.data()[i];
    }
    return {std::move(ut), std::move(vt)};
}

DerivedCoeffs2x2 derive_coeffs_2x2(const Grid& grid, const CoefficientSet2x2& c, const SpaceTimeField& Ut,
                                   const SpaceTimeField& Vt, double delta0) {
    require(grid, Ut, "U~");
    require(grid, Vt, "V~");
    c.check_grid(grid);
    check_floor(grid, Vt, "V~", delta0);
    check_floor(grid, Ut, "U~", delta0);

    const SpaceTimeField dtU = dt_backward(grid, Ut), dtV = dt_backward(grid, Vt);
    const SpaceTimeField lapU = laplacian(grid, Ut), lapV = laplacian(grid, Vt);
    const VectorField gU = gradient(grid, Ut), gV = gradient(grid, Vt);

    DerivedCoeffs2x2 d;
    for (SpaceTimeField* f : {&d.a11, &d.a12, &d.a21, &d.a22, &d.W, &d.W1, &d.b1, &d.b2}) *f = SpaceTimeField(grid);
    for (VectorField* v : {&d.A13, &d.A14, &d.A23, &d.A24}) *v = {SpaceTimeField(grid), SpaceTimeField(grid)};

    for (int k = 0; k < grid.levels(); ++k)
        for (int n = 0; n < grid.nodes(); ++n) {
            const double U = Ut(k, n), V = Vt(k, n);
            d.a11(k, n) = c.a.at(k, n) - dtV(k, n) / V + lapV(k, n) / V + dot_at(grid, c.A, gV, k, n) / V;
            d.a12(k, n) = c.b.at(k, n) * U / V + dot_at(grid, c.B, gU, k, n) / V;
            d.a21(k, n) = c.c.at(k, n) * V / U + dot_at(grid, c.C, gV, k, n) / U;
            d.a22(k, n) = c.d.at(k, n) - dtU(k, n) / U + lapU(k, n) / U + dot_at(grid, c.D, gU, k, n) / U;
            d.W(k, n) = U / V;
            for (int a = 0; a < grid.dim(); ++a) {
                const auto ua = static_cast<std::size_t>(a);
                d.A13[ua](k, n) = c.A.comp[ua].at(k, n) + 2.0 * gV[ua](k, n) / V;
                d.A14[ua](k, n) = c.B.comp[ua].at(k, n) * U / V;
                d.A23[ua](k, n) = c.C.comp[ua].at(k, n) * V / U;
                d.A24[ua](k, n) = c.D.comp[ua].at(k, n) + 2.0 * gU[ua](k, n) / U;
            }
        }
    const SpaceTimeField dtW = dt_backward(grid, d.W);
    const SpaceTimeField dta12 = dt_backward(grid, d.a12);
    for (int k = 0; k < grid.levels(); ++k)
        for (int n = 0; n < grid.nodes(); ++n) {
            const double W = d.W(k, n);
            d.W1(k, n) = dtW(k, n) / W;
            d.b1(k, n) = d.a12(k, n) / W;
            d.b2(k, n) = dta12(k, n) / W;
        }
    return d;
}

namespace {

double quotient_residual(const Grid& grid, const SpaceTimeField& first, const SpaceTimeField& other,
                         const SpaceTimeField& self_coeff, const SpaceTimeField& cross_coeff, const VectorField& self_conv,
                         const VectorField& cross_conv, const SpatialField& src, bool first_is_self) {
    const SpaceTimeField& self = first_is_self ? first : other;
    const SpaceTimeField& cross = first_is_self ? other : first;
    const SpaceTimeField dts = dt_backward(grid, self);
    const SpaceTimeField lap = laplacian(grid, self);
    const VectorField gs = gradient(grid, self), gc = gradient(grid, cross);
    double worst = 0.0;
    for (int k = 1; k < grid.levels(); ++k)
        for (int n = 0; n < grid.nodes(); ++n) {
            if (grid.on_boundary(n)) continue;
            double r = dts(k, n) - lap(k, n) - self_coeff(k, n) * self(k, n) - cross_coeff(k, n) * cross(k, n) -
                       dot_at(grid, self_conv, gs, k, n) - dot_at(grid, cross_conv, gc, k, n) -
                       src[static_cast<std::size_t>(n)];
            worst = std::max(worst, std::abs(r));
        }
    return worst;
}

}  // namespace

double quotient_residual_first(const Grid& grid, const DerivedCoeffs2x2& dc, const SpaceTimeField& ut,
                               const SpaceTimeField& vt, const SpatialField& f) {
    return quotient_residual(grid, ut, vt, dc.a11, dc.a12, dc.A13, dc.A14, f, true);
}

double quotient_residual_second(const Grid& grid, const DerivedCoeffs2x2& dc, const SpaceTimeField& ut,
                                const SpaceTimeField& vt, const SpatialField& g) {
    return quotient_residual(grid, ut, vt, dc.a22, dc.a21, dc.A24, dc.A23, g, false);
}

std::pair<SpaceTimeField, SpaceTimeField> time_derivative_pair(const Grid& grid, const SpaceTimeField& ut,
                                                               const SpaceTimeField& vt, double tol) {
    require(grid, ut, "u~");
    require(grid, vt, "v~");
    const int kt = grid.theta_index();
    for (int n = 0; n < grid.nodes(); ++n) {
        double worst = std::max(std::abs(ut(kt, n)), std::abs(vt(kt, n)));
        if (worst > tol) {
            std::ostringstream msg;
            msg << "snapshot at theta is not zero (|value| = " << worst << " at node " << n << ")";
            throw PreconditionError(msg.str());
        }
    }
    return {dt_centered(grid, ut), dt_centered(grid, vt)};
}

SpaceTimeField w_transform(const Grid& grid, const SpaceTimeField& z, const SpaceTimeField& W1) {
    require(grid, z, "z");
    require(grid, W1, "W1");
    SpaceTimeField w = integrate_from(grid, z, grid.theta_index());
    for (std::size_t i = 0; i < w.data().size(); ++i) w.data()[i] = z.data()[i] + W1.data()[i] * w.data()[i];
    return w;
}

SpaceTimeField reduced_z(const Grid& grid, const CoefficientSet3x3& c, const SpaceTimeField& v,
                         const SpaceTimeField& w) {
    SpaceTimeField z(grid);
    for (int k = 0; k < grid.levels(); ++k)
        for (int n = 0; n < grid.nodes(); ++n) z(k, n) = c.a[0][1].at(k, n) * v(k, n) + c.a[0][2].at(k, n) * w(k, n);
    return z;
}

void check_a13_floor(const Grid& grid, const CoefficientSet3x3& c, double tol13) {
    const auto& a13 = c.a[0][2];
    for (int k = 0; k < std::max(1, a13.levels()); ++k)
        for (int n = 0; n < grid.nodes(); ++n)
            if (!(std::abs(a13.at(k, n)) >= tol13)) floor_violation(grid, "a13", k, n, a13.at(k, n), tol13);
}

Reduced3x3Coeffs reduce_3x3(const Grid& grid, const CoefficientSet3x3& c, const SpaceTimeField& g,
                            const SpaceTimeField& h, double tol13) {
    c.check_grid(grid);
    check_a13_floor(grid, c, tol13);
    auto at = [&](int i, int j) { return expand(grid, c.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]); };
    const SpaceTimeField a12 = at(0, 1), a13 = at(0, 2), a21 = at(1, 0), a22 = at(1, 1), a23 = at(1, 2);
    const SpaceTimeField a31 = at(2, 0), a32 = at(2, 1), a33 = at(2, 2);
    const VectorField g12 = gradient(grid, a12), g13 = gradient(grid, a13);
    const SpaceTimeField l12 = laplacian(grid, a12), l13 = laplacian(grid, a13);
    const SpaceTimeField t12 = dt_backward(grid, a12), t13 = dt_backward(grid, a13);
    SpaceTimeField ratio(grid);
    for (std::size_t i = 0; i < ratio.data().size(); ++i) ratio.data()[i] = a12.data()[i] / a13.data()[i];
    const VectorField gratio = gradient(grid, ratio);

    Reduced3x3Coeffs r;
    for (SpaceTimeField* f : {&r.a, &r.b, &r.c, &r.d, &r.e, &r.G}) *f = SpaceTimeField(grid);
    r.A = {SpaceTimeField(grid), SpaceTimeField(grid)};
    r.B = {SpaceTimeField(grid), SpaceTimeField(grid)};
    for (int k = 0; k < grid.levels(); ++k)
        for (int n = 0; n < grid.nodes(); ++n) {
            const double A12 = a12(k, n), A13 = a13(k, n);
            double grad13_sq = 0.0, cross = 0.0;
            for (int ax = 0; ax < grid.dim(); ++ax) {
                const auto ua = static_cast<std::size_t>(ax);
                r.A[ua](k, n) = -2.0 * g13[ua](k, n) / A13;
                r.B[ua](k, n) = -2.0 * g12[ua](k, n) + 2.0 * A12 / A13 * g13[ua](k, n);
                grad13_sq += g13[ua](k, n) * g13[ua](k, n);
                cross += g13[ua](k, n) * gratio[ua](k, n);
            }
            const double common = A12 * a23(k, n) + t13(k, n) - l13(k, n);
            r.a(k, n) = 2.0 * grad13_sq / (A13 * A13) + a33(k, n) + common / A13;
            r.b(k, n) = A12 * a22(k, n) + A13 * a32(k, n) + t12(k, n) - l12(k, n) + 2.0 * cross -
                        A12 / A13 * (A12 * a23(k, n) + A13 * a33(k, n) + t13(k, n) - l13(k, n));
            r.c(k, n) = a23(k, n) / A13;
            r.d(k, n) = a22(k, n) - A12 * a23(k, n) / A13;
            r.e(k, n) = a21(k, n) * A12 + a31(k, n) * A13;
            const double gv = g.empty() ? 0.0 : g(k, n);
            const double hv = h.empty() ? 0.0 : h(k, n);
            r.G(k, n) = A12 * gv + A13 * hv;
        }
    return r;
}

double reduced_residual(const Grid& grid, const CoefficientSet3x3& c, const Reduced3x3Coeffs& rc,
                        const SpaceTimeField& u, const SpaceTimeField& v, const SpaceTimeField& w,
                        const SpaceTimeField& f, const SpaceTimeField& g) {
    const SpaceTimeField z = reduced_z(grid, c, v, w);
    const SpaceTimeField dtu = dt_backward(grid, u), dtz = dt_backward(grid, z), dtv = dt_backward(grid, v);
    const SpaceTimeField lu = laplacian(grid, u), lz = laplacian(grid, z), lv = laplacian(grid, v);
    const VectorField gz = gradient(grid, z), gv = gradient(grid, v);
    double worst = 0.0;
    for (int k = 1; k < grid.levels(); ++k)
        for (int n = 0; n < grid.nodes(); ++n) {
            if (grid.on_boundary(n)) continue;
            const double fv = f.empty() ? 0.0 : f(k, n);
            const double gvv = g.empty() ? 0.0 : g(k, n);
            double r1 = dtu(k, n) - lu(k, n) - c.a[0][0].at(k, n) * u(k, n) - z(k, n) - fv;
            double r2 = dtz(k, n) - lz(k, n) - dot_at(grid, rc.A, gz, k, n) - rc.a(k, n) * z(k, n) -
                        rc.e(k, n) * u(k, n) - dot_at(grid, rc.B, gv, k, n) - rc.b(k, n) * v(k, n) - rc.G(k, n);
            double r3 = dtv(k, n) - lv(k, n) - c.a[1][0].at(k, n) * u(k, n) - rc.d(k, n) * v(k, n) -
                        rc.c(k, n) * z(k, n) - gvv;
            worst = std::max({worst, std::abs(r1), std::abs(r2), std::abs(r3)});
        }
    return worst;
}

VectorCoefficient normal_condition_field_3x3(const Grid& grid, const CoefficientSet3x3& c) {
    const SpaceTimeField a12 = expand(grid, c.a[0][1]), a13 = expand(grid, c.a[0][2]);
    const VectorField g12 = gradient(grid, a12), g13 = gradient(grid, a13);
    const bool td = c.a[0][1].time_dependent() || c.a[0][2].time_dependent();
    VectorCoefficient out;
    for (int ax = 0; ax < grid.dim(); ++ax) {
        const auto ua = static_cast<std::size_t>(ax);
        SpaceTimeField comp(grid);
        for (int k = 0; k < grid.levels(); ++k)
            for (int n = 0; n < grid.nodes(); ++n)
                comp(k, n) = g12[ua](k, n) - a12(k, n) / a13(k, n) * g13[ua](k, n);
        out.comp[ua] = td ? CoefficientField::spacetime(comp) : CoefficientField::spatial(comp.level(0));
    }
    return out;
}

NormalCheck check_assumption_normal(const Grid& grid, const VectorCoefficient& field, const std::vector<int>& gamma,
                                    double tol_nu) {
    if (gamma.empty()) throw PreconditionError("gamma is empty; the normal-component condition needs boundary nodes");
    const int levels = std::max({1, field.comp[0].levels(), field.comp[1].levels()});
    double margin = HUGE_VAL;
    for (int k = 0; k < levels; ++k)
        for (int n : gamma) {
            auto nu = outward_normal(grid, n);
            double dot = 0.0;
            for (int a = 0; a < grid.dim(); ++a)
                dot += field.comp[static_cast<std::size_t>(a)].at(k, n) * nu[static_cast<std::size_t>(a)];
            margin = std::min(margin, std::abs(dot));
        }
    return {margin >= tol_nu, margin};
}

}  // namespace pinv
