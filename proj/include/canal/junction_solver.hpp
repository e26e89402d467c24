#ifndef CANAL_JUNCTION_SOLVER_HPP
#define CANAL_JUNCTION_SOLVER_HPP

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "canal/junction_geometry.hpp"
#include "canal/swe.hpp"

namespace canal {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

class SupercriticalError : public std::runtime_error {
public:
    explicit SupercriticalError(const std::string& what) : std::runtime_error(what) {}
};

/// States facing the junction from inside the three canals, ordered
/// (h1, h2, h3, v1, v2, v3). Canal 1 enters, canals 2 and 3 leave.
struct JunctionTrace {
    std::array<double, 3> h{};
    std::array<double, 3> v{};

    static JunctionTrace from_states(const State& u1, const State& u2, const State& u3) {
        return {{u1.h, u2.h, u3.h}, {u1.q / u1.h, u2.q / u2.h, u3.q / u3.h}};
    }

    State state(int k) const { return {h[k], h[k] * v[k]}; }

    Vec6 as_vector() const {
        Vec6 x;
        x << h[0], h[1], h[2], v[0], v[1], v[2];
        return x;
    }
};

struct NewtonOptions {
    double tol = 1e-10;     // residual tolerance in scaled units
    int max_iter = 50;
    double damping = 0.5;   // backtracking factor
    double min_step = 1e-4; // smallest damping multiplier before giving up
};

struct JunctionSolution {
    Vec6 x;                    // (h1, h2, h3, v1, v2, v3) at the junction faces
    double residual_norm = 0;  // scaled max-norm of the residual at x
    int iterations = 0;

    State state(int k) const { return {x[k], x[k] * x[k + 3]}; }
};

// The six-equation system couples the triangle conservation laws (rows 1-3)
// with one wave-curve relation per canal (rows 4-6): the face state of the
// incoming canal lies on the left curve of its trace, the outgoing faces on
// the right curves.

/// Residual of the angle-dependent junction system. Rows 1-3 are mass,
/// x-momentum and y-momentum balance over the junction triangle; rows 4-6
/// are v_k minus the wave-curve velocity at h_k.
inline Vec6 junction_residual(const Vec6& x, const JunctionTrace& t,
                              const JunctionGeometry& g, const PhysicalConstants& c) {
    const double h1 = x[0], h2 = x[1], h3 = x[2];
    const double v1 = x[3], v2 = x[4], v3 = x[5];
    if (!(h1 > 0.0 && h2 > 0.0 && h3 > 0.0))
        throw DryStateError("junction residual: nonpositive height");
    const double cph = std::cos(g.shape.phi), sph = std::sin(g.shape.phi);
    const double cth = std::cos(g.shape.theta), sth = std::sin(g.shape.theta);
    const double gg = c.g;

    Vec6 r;
    r[0] = g.alpha1 * h1 * v1 + g.gamma2 * h2 * v2 + g.gamma3 * h3 * v3;
    r[1] = g.alpha1 * (h1 * v1 * v1 + 0.5 * gg * h1 * h1) +
           g.gamma2 * h2 * v2 * v2 * cph + 0.5 * gg * g.alpha2 * h2 * h2 +
           g.gamma3 * h3 * v3 * v3 * cth + 0.5 * gg * g.alpha3 * h3 * h3;
    r[2] = 0.5 * gg * g.beta1 * h1 * h1 +
           g.gamma2 * h2 * v2 * v2 * sph + 0.5 * gg * g.beta2 * h2 * h2 +
           g.gamma3 * h3 * v3 * v3 * sth + 0.5 * gg * g.beta3 * h3 * h3;
    r[3] = v1 - phi_l(h1, t.state(0), c);
    r[4] = v2 - phi_r(h2, t.state(1), c);
    r[5] = v3 - phi_r(h3, t.state(2), c);
    return r;
}

/// Analytic Jacobian of junction_residual with respect to x. Wave-curve rows
/// pick the branch from the current h_k against the trace height; at the
/// branch point the rarefaction-side derivative applies (the curve is C^1).
inline Mat6 junction_jacobian(const Vec6& x, const JunctionTrace& t,
                              const JunctionGeometry& g, const PhysicalConstants& c) {
    const double h1 = x[0], h2 = x[1], h3 = x[2];
    const double v1 = x[3], v2 = x[4], v3 = x[5];
    if (!(h1 > 0.0 && h2 > 0.0 && h3 > 0.0))
        throw DryStateError("junction jacobian: nonpositive height");
    const double cph = std::cos(g.shape.phi), sph = std::sin(g.shape.phi);
    const double cth = std::cos(g.shape.theta), sth = std::sin(g.shape.theta);
    const double gg = c.g;

    Mat6 J = Mat6::Zero();
    // mass
    J(0, 0) = g.alpha1 * v1;
    J(0, 1) = g.gamma2 * v2;
    J(0, 2) = g.gamma3 * v3;
    J(0, 3) = g.alpha1 * h1;
    J(0, 4) = g.gamma2 * h2;
    J(0, 5) = g.gamma3 * h3;
    // x momentum
    J(1, 0) = g.alpha1 * (v1 * v1 + gg * h1);
    J(1, 1) = g.gamma2 * v2 * v2 * cph + gg * g.alpha2 * h2;
    J(1, 2) = g.gamma3 * v3 * v3 * cth + gg * g.alpha3 * h3;
    J(1, 3) = 2.0 * g.alpha1 * h1 * v1;
    J(1, 4) = 2.0 * g.gamma2 * h2 * v2 * cph;
    J(1, 5) = 2.0 * g.gamma3 * h3 * v3 * cth;
    // y momentum (canal 1 contributes pressure only; its velocity is x-aligned)
    J(2, 0) = gg * g.beta1 * h1;
    J(2, 1) = g.gamma2 * v2 * v2 * sph + gg * g.beta2 * h2;
    J(2, 2) = g.gamma3 * v3 * v3 * sth + gg * g.beta3 * h3;
    J(2, 4) = 2.0 * g.gamma2 * h2 * v2 * sph;
    J(2, 5) = 2.0 * g.gamma3 * h3 * v3 * sth;
    // wave curves
    J(3, 0) = -phi_l_deriv(h1, t.state(0), c);
    J(3, 3) = 1.0;
    J(4, 1) = -phi_r_deriv(h2, t.state(1), c);
    J(4, 4) = 1.0;
    J(5, 2) = -phi_r_deriv(h3, t.state(2), c);
    J(5, 5) = 1.0;
    return J;
}

/// Residual of the classical equal-energy closure: width-weighted mass
/// balance plus continuity of q^2/h + g h^2 / 2 across the junction, again
/// coupled to the wave-curve rows. Coincides with the momentum system
/// exactly when the shape is orthogonal.
inline Vec6 equal_energy_residual(const Vec6& x, const JunctionTrace& t,
                                  double s1, double s2, double s3,
                                  const PhysicalConstants& c) {
    const double h1 = x[0], h2 = x[1], h3 = x[2];
    const double v1 = x[3], v2 = x[4], v3 = x[5];
    if (!(h1 > 0.0 && h2 > 0.0 && h3 > 0.0))
        throw DryStateError("equal-energy residual: nonpositive height");
    auto head = [&](double h, double v) { return h * v * v + 0.5 * c.g * h * h; };

    Vec6 r;
    r[0] = s1 * h1 * v1 - s2 * h2 * v2 - s3 * h3 * v3;
    r[1] = head(h1, v1) - head(h2, v2);
    r[2] = head(h1, v1) - head(h3, v3);
    r[3] = v1 - phi_l(h1, t.state(0), c);
    r[4] = v2 - phi_r(h2, t.state(1), c);
    r[5] = v3 - phi_r(h3, t.state(2), c);
    return r;
}

inline Mat6 equal_energy_jacobian(const Vec6& x, const JunctionTrace& t,
                                  double s1, double s2, double s3,
                                  const PhysicalConstants& c) {
    const double h1 = x[0], h2 = x[1], h3 = x[2];
    const double v1 = x[3], v2 = x[4], v3 = x[5];
    if (!(h1 > 0.0 && h2 > 0.0 && h3 > 0.0))
        throw DryStateError("equal-energy jacobian: nonpositive height");
    const double gg = c.g;

    Mat6 J = Mat6::Zero();
    J(0, 0) = s1 * v1;
    J(0, 1) = -s2 * v2;
    J(0, 2) = -s3 * v3;
    J(0, 3) = s1 * h1;
    J(0, 4) = -s2 * h2;
    J(0, 5) = -s3 * h3;
    J(1, 0) = v1 * v1 + gg * h1;
    J(1, 1) = -(v2 * v2 + gg * h2);
    J(1, 3) = 2.0 * h1 * v1;
    J(1, 4) = -2.0 * h2 * v2;
    J(2, 0) = v1 * v1 + gg * h1;
    J(2, 2) = -(v3 * v3 + gg * h3);
    J(2, 3) = 2.0 * h1 * v1;
    J(2, 5) = -2.0 * h3 * v3;
    J(3, 0) = -phi_l_deriv(h1, t.state(0), c);
    J(3, 3) = 1.0;
    J(4, 1) = -phi_r_deriv(h2, t.state(1), c);
    J(4, 4) = 1.0;
    J(5, 2) = -phi_r_deriv(h3, t.state(2), c);
    J(5, 5) = 1.0;
    return J;
}

/// Determinant of the momentum-system Jacobian. A value near zero flags a
/// junction state where local solvability degrades.
inline double existence_diagnostic(const Vec6& x, const JunctionTrace& t,
                                   const JunctionGeometry& g, const PhysicalConstants& c) {
    return junction_jacobian(x, t, g, c).determinant();
}

/// Determinant of the equal-energy Jacobian. For orthogonal shapes on
/// rarefaction branches this is the product
/// lambda1 lambda2 lambda3 (s1 l2 l3 - s2 l1 l3 - s3 l1 l2), strictly
/// negative on subcritical states.
inline double existence_diagnostic_equal_energy(const Vec6& x, const JunctionTrace& t,
                                                double s1, double s2, double s3,
                                                const PhysicalConstants& c) {
    return equal_energy_jacobian(x, t, s1, s2, s3, c).determinant();
}

namespace solver_detail {

struct RowScales {
    Vec6 w;  // multiplicative weight per residual row

    double norm(const Vec6& r) const { return (w.asDiagonal() * r).cwiseAbs().maxCoeff(); }
};

/// Rows carry mixed units (mass flux, momentum flux, velocity); scale each
/// family so the convergence test is dimensionless. h_bar is the mean trace
/// height, s_bar the mean half-width.
inline RowScales make_scales(const JunctionTrace& t, double s1, double s2, double s3,
                             const PhysicalConstants& c) {
    const double h_bar = (t.h[0] + t.h[1] + t.h[2]) / 3.0;
    const double s_bar = (s1 + s2 + s3) / 3.0;
    const double wave = std::sqrt(c.g * h_bar);
    RowScales s;
    s.w[0] = 1.0 / (s_bar * h_bar * wave);
    s.w[1] = s.w[2] = 1.0 / (c.g * s_bar * h_bar * h_bar);
    s.w[3] = s.w[4] = s.w[5] = 1.0 / wave;
    return s;
}

template <typename Residual, typename Jacobian>
std::optional<JunctionSolution> newton_attempt(Vec6 x, const Residual& residual,
                                               const Jacobian& jacobian,
                                               const RowScales& scales,
                                               const NewtonOptions& opts) {
    Vec6 r = residual(x);
    double rnorm = scales.norm(r);
    for (int it = 0; it <= opts.max_iter; ++it) {
        if (rnorm <= opts.tol)
            return JunctionSolution{x, rnorm, it};
        if (it == opts.max_iter)
            break;
        const Mat6 J = jacobian(x);
        const Vec6 dx = J.partialPivLu().solve(-r);
        if (!dx.allFinite())
            return std::nullopt;

        // Backtrack until the step keeps all heights above the floor and
        // shrinks the scaled residual.
        double step = 1.0;
        bool accepted = false;
        while (step >= opts.min_step) {
            const Vec6 xn = x + step * dx;
            if (xn[0] > depth_floor && xn[1] > depth_floor && xn[2] > depth_floor) {
                const Vec6 rn = residual(xn);
                const double rn_norm = scales.norm(rn);
                if (rn_norm < rnorm) {
                    x = xn;
                    r = rn;
                    rnorm = rn_norm;
                    accepted = true;
                    break;
                }
            }
            step *= opts.damping;
        }
        if (!accepted)
            return std::nullopt;
    }
    return std::nullopt;
}

template <typename Residual, typename Jacobian>
JunctionSolution solve_system(const JunctionTrace& t, const Residual& residual,
                              const Jacobian& jacobian, const RowScales& scales,
                              const NewtonOptions& opts, const PhysicalConstants& c,
                              const Vec6* warm_start) {
    for (int k = 0; k < 3; ++k) {
        if (!(t.h[k] > depth_floor))
            throw DryStateError("junction solve: dry trace in canal " + std::to_string(k + 1));
        if (!is_subcritical(t.state(k), c)) {
            std::ostringstream msg;
            msg << "junction solve: trace of canal " << k + 1 << " is not subcritical (h="
                << t.h[k] << ", v=" << t.v[k] << ")";
            throw SupercriticalError(msg.str());
        }
    }

    auto result = newton_attempt(warm_start ? *warm_start : t.as_vector(), residual,
                                 jacobian, scales, opts);
    if (!result) {
        // One deterministic retry from the lake-at-rest guess.
        const double h_bar = (t.h[0] + t.h[1] + t.h[2]) / 3.0;
        Vec6 rest;
        rest << h_bar, h_bar, h_bar, 0.0, 0.0, 0.0;
        result = newton_attempt(rest, residual, jacobian, scales, opts);
    }
    if (!result)
        throw NoConvergenceError("junction solve: Newton iteration failed to converge");

    for (int k = 0; k < 3; ++k) {
        const State uk = result->state(k);
        if (!(uk.h > depth_floor))
            throw DryStateError("junction solve: dry face state in canal " + std::to_string(k + 1));
        if (!is_subcritical(uk, c)) {
            std::ostringstream msg;
            msg << "junction solve: face state of canal " << k + 1
                << " violates the fluvial assumption (h=" << uk.h << ", v=" << uk.q / uk.h << ")";
            throw SupercriticalError(msg.str());
        }
    }
    return *result;
}

}  // namespace solver_detail

/// Solve the angle-dependent junction system by damped Newton iteration.
/// The warm start (typically the previous time step's solution) is tried
/// first, then the trace itself, with one fallback from lake at rest.
inline JunctionSolution solve_junction(const JunctionTrace& t, const JunctionGeometry& g,
                                       const NewtonOptions& opts, const PhysicalConstants& c,
                                       const Vec6* warm_start = nullptr) {
    const auto scales =
        solver_detail::make_scales(t, g.shape.s1, g.shape.s2, g.shape.s3, c);
    return solver_detail::solve_system(
        t, [&](const Vec6& x) { return junction_residual(x, t, g, c); },
        [&](const Vec6& x) { return junction_jacobian(x, t, g, c); }, scales, opts, c,
        warm_start);
}

/// Solve the equal-energy variant of the junction system.
inline JunctionSolution solve_junction_equal_energy(const JunctionTrace& t, double s1,
                                                    double s2, double s3,
                                                    const NewtonOptions& opts,
                                                    const PhysicalConstants& c,
                                                    const Vec6* warm_start = nullptr) {
    const auto scales = solver_detail::make_scales(t, s1, s2, s3, c);
    // Energy rows carry no width factor; drop s_bar from their weight.
    auto scaled = scales;
    const double h_bar = (t.h[0] + t.h[1] + t.h[2]) / 3.0;
    scaled.w[1] = scaled.w[2] = 1.0 / (c.g * h_bar * h_bar);
    return solver_detail::solve_system(
        t, [&](const Vec6& x) { return equal_energy_residual(x, t, s1, s2, s3, c); },
        [&](const Vec6& x) { return equal_energy_jacobian(x, t, s1, s2, s3, c); }, scaled,
        opts, c, warm_start);
}

}  // namespace canal

#endif  // CANAL_JUNCTION_SOLVER_HPP
