#ifndef CANAL_SWE_HPP
#define CANAL_SWE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace canal {

/// Gravity constant bundle. The default value can be overridden per run.
struct PhysicalConstants {
    double g = 9.81;  // gravitational acceleration [m/s^2]
};

/// Conserved pair of the 1D shallow-water equations in one cell:
/// water height h [m] and discharge per unit width q = h*v [m^2/s].
struct State {
    double h = 0.0;
    double q = 0.0;

    double velocity() const { return q / h; }
};

/// Characteristic speeds, ordered lambda1 <= lambda2.
struct WavePair {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

using FluxVector = std::array<double, 2>;

/// Depth below which a state counts as dry. Wet subcritical flow is assumed
/// throughout; anything at or under the floor is rejected.
inline constexpr double depth_floor = 1e-12;

class DryStateError : public std::runtime_error {
public:
    explicit DryStateError(const std::string& what) : std::runtime_error(what) {}
};

class NoConvergenceError : public std::runtime_error {
public:
    explicit NoConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Physical flux f(U) = (h v, h v^2 + g h^2 / 2).
inline FluxVector flux(const State& u, const PhysicalConstants& c) {
    const double v = u.q / u.h;
    return {u.q, u.q * v + 0.5 * c.g * u.h * u.h};
}

/// Eigenvalues (v - sqrt(gh), v + sqrt(gh)) of the flux Jacobian.
inline WavePair eigenvalues(const State& u, const PhysicalConstants& c) {
    const double v = u.q / u.h;
    const double a = std::sqrt(c.g * u.h);
    return {v - a, v + a};
}

inline double froude(const State& u, const PhysicalConstants& c) {
    return std::abs(u.q / u.h) / std::sqrt(c.g * u.h);
}

/// Strict test |v| < sqrt(gh). The critical boundary Fr = 1 is not subcritical.
inline bool is_subcritical(const State& u, const PhysicalConstants& c) {
    return std::abs(u.q / u.h) < std::sqrt(c.g * u.h);
}

/// Left wave curve: velocity reachable from u_l through an entropic 1-wave
/// ending at height h. Rarefaction branch for h <= h_l, shock branch above.
inline double phi_l(double h, const State& ul, const PhysicalConstants& c) {
    if (!(h > 0.0))
        throw DryStateError("phi_l: nonpositive height " + std::to_string(h));
    const double vl = ul.q / ul.h;
    if (h <= ul.h)
        return vl - 2.0 * (std::sqrt(c.g * h) - std::sqrt(c.g * ul.h));
    return vl - (h - ul.h) * std::sqrt(c.g * (h + ul.h) / (2.0 * h * ul.h));
}

/// Right wave curve, mirror of phi_l with flipped signs.
inline double phi_r(double h, const State& ur, const PhysicalConstants& c) {
    if (!(h > 0.0))
        throw DryStateError("phi_r: nonpositive height " + std::to_string(h));
    const double vr = ur.q / ur.h;
    if (h <= ur.h)
        return vr + 2.0 * (std::sqrt(c.g * h) - std::sqrt(c.g * ur.h));
    return vr + (h - ur.h) * std::sqrt(c.g * (h + ur.h) / (2.0 * h * ur.h));
}

/// d(phi_l)/dh. The curve is C^1 at the branch point; the rarefaction
/// expression is used for h == h_l.
inline double phi_l_deriv(double h, const State& ul, const PhysicalConstants& c) {
    if (!(h > 0.0))
        throw DryStateError("phi_l_deriv: nonpositive height");
    if (h <= ul.h)
        return -std::sqrt(c.g / h);
    const double s = std::sqrt(c.g * (h + ul.h) / (2.0 * h * ul.h));
    return -s + c.g * (h - ul.h) / (4.0 * s * h * h);
}

inline double phi_r_deriv(double h, const State& ur, const PhysicalConstants& c) {
    if (!(h > 0.0))
        throw DryStateError("phi_r_deriv: nonpositive height");
    if (h <= ur.h)
        return std::sqrt(c.g / h);
    const double s = std::sqrt(c.g * (h + ur.h) / (2.0 * h * ur.h));
    return s - c.g * (h - ur.h) / (4.0 * s * h * h);
}

namespace detail {

/// Intermediate height of the standard Riemann problem, found as the root of
/// phi_l(h; U_l) - phi_r(h; U_r). Newton iteration started from the
/// two-rarefaction estimate (switched to the two-shock estimate when that
/// lands above both data heights), safeguarded by a bracket grown
/// geometrically so termination is guaranteed on the monotone curve.
/// guess_scale perturbs the initial estimate; the root must not depend on it.
inline double riemann_star_height(const State& ul, const State& ur,
                                  const PhysicalConstants& c,
                                  double guess_scale = 1.0) {
    const double vl = ul.q / ul.h, vr = ur.q / ur.h;
    const double cl = std::sqrt(c.g * ul.h), cr = std::sqrt(c.g * ur.h);

    // Depth positivity: phi_l and phi_r intersect at positive height only if
    // the data do not pull apart faster than the rarefactions can fill.
    if (vr - vl >= 2.0 * (cl + cr))
        throw DryStateError("solve_riemann: vacuum forms between the states");

    auto f = [&](double h) { return phi_l(h, ul, c) - phi_r(h, ur, c); };
    auto fp = [&](double h) { return phi_l_deriv(h, ul, c) - phi_r_deriv(h, ur, c); };

    double h0 = std::pow(0.5 * (cl + cr) - 0.25 * (vr - vl), 2) / c.g;
    if (h0 > std::min(ul.h, ur.h)) {
        const double gl = std::sqrt(0.5 * c.g * (h0 + ul.h) / (h0 * ul.h));
        const double gr = std::sqrt(0.5 * c.g * (h0 + ur.h) / (h0 * ur.h));
        h0 = (gl * ul.h + gr * ur.h - (vr - vl)) / (gl + gr);
    }
    h0 *= guess_scale;

    double lo = depth_floor;
    if (f(lo) <= 0.0)
        throw DryStateError("solve_riemann: intersection below the depth floor");
    double hi = std::max({ul.h, ur.h, h0});
    for (int k = 0; f(hi) > 0.0; ++k) {
        if (k > 200)
            throw NoConvergenceError("solve_riemann: failed to bracket the root");
        hi *= 2.0;
    }

    constexpr double tol_velocity = 1e-12;
    double h = std::clamp(h0, lo, hi);
    for (int it = 0; it < 200; ++it) {
        const double fh = f(h);
        if (std::abs(fh) <= tol_velocity)
            return h;
        (fh > 0.0 ? lo : hi) = h;
        double hn = h - fh / fp(h);
        if (!(hn > lo && hn < hi))
            hn = 0.5 * (lo + hi);
        h = hn;
    }
    throw NoConvergenceError("solve_riemann: iteration cap reached");
}

}  // namespace detail

/// Intermediate state of the Riemann problem (U_l, U_r): the intersection of
/// the two wave curves, with residual below 1e-12 in velocity units.
inline State solve_riemann(const State& ul, const State& ur, const PhysicalConstants& c) {
    if (!(ul.h > 0.0) || !(ur.h > 0.0))
        throw DryStateError("solve_riemann: dry input state");
    if (ul.h == ur.h && ul.q == ur.q)
        return ul;  // constant data short-circuits, bitwise
    const double h = detail::riemann_star_height(ul, ur, c);
    if (h <= depth_floor)
        throw DryStateError("solve_riemann: intermediate state below depth floor");
    const double v = 0.5 * (phi_l(h, ul, c) + phi_r(h, ur, c));
    return {h, h * v};
}

/// Exact Riemann solution sampled on the interface ray x/t = 0, covering the
/// full wave fan: left/right shocks, rarefactions and the transonic branches.
inline State sample_interface_state(const State& ul, const State& ur,
                                    const PhysicalConstants& c) {
    if (ul.h == ur.h && ul.q == ur.q)
        return ul;
    const State star = solve_riemann(ul, ur, c);
    const double hs = star.h, vs = star.q / star.h;
    const double cs = std::sqrt(c.g * hs);

    if (vs >= 0.0) {
        // Interface lies left of the middle state: the 1-wave decides.
        const double vl = ul.q / ul.h, cl = std::sqrt(c.g * ul.h);
        if (hs > ul.h) {
            const double speed = vl - cl * std::sqrt(0.5 * (hs + ul.h) * hs / (ul.h * ul.h));
            return speed >= 0.0 ? ul : star;
        }
        if (vl - cl >= 0.0)
            return ul;
        if (vs - cs <= 0.0)
            return star;
        // Sonic point inside the left fan.
        const double a = (vl + 2.0 * cl) / 3.0;
        return {a * a / c.g, a * a * a / c.g};
    }

    const double vr = ur.q / ur.h, cr = std::sqrt(c.g * ur.h);
    if (hs > ur.h) {
        const double speed = vr + cr * std::sqrt(0.5 * (hs + ur.h) * hs / (ur.h * ur.h));
        return speed <= 0.0 ? ur : star;
    }
    if (vr + cr <= 0.0)
        return ur;
    if (vs + cs >= 0.0)
        return star;
    const double a = (2.0 * cr - vr) / 3.0;
    return {a * a / c.g, -a * a * a / c.g};
}

/// Godunov numerical flux: physical flux of the interface sample.
/// Consistent by construction, godunov_flux(U, U) = flux(U).
inline FluxVector godunov_flux(const State& ul, const State& ur, const PhysicalConstants& c) {
    return flux(sample_interface_state(ul, ur, c), c);
}

}  // namespace canal

#endif  // CANAL_SWE_HPP
