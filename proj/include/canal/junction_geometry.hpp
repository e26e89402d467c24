#ifndef CANAL_JUNCTION_GEOMETRY_HPP
#define CANAL_JUNCTION_GEOMETRY_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace canal {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double a) const { return {a * x, a * y}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

/// Skeleton of a three-canal junction. Canal 1 lies along the x axis and
/// enters the junction; canal 3 leaves at angle theta >= 0 and canal 2 at
/// angle phi <= 0. Each canal has width 2*s_k.
struct JunctionShape {
    double theta = 0.0;  // angle of canal 3 [rad], in [0, pi/2]
    double phi = 0.0;    // angle of canal 2 [rad], in [-pi/2, 0]
    double s1 = 1.0;
    double s2 = 1.0;
    double s3 = 1.0;
};

/// Triangle spanned by the pairwise intersections of the canal wall lines,
/// with edge lengths, unit outward normals, and the projection coefficients
///   alpha_k = l_k n_k.x,  beta_k = l_k n_k.y,
///   gamma_k = l_k (canal direction_k . n_k)   (gamma_1 coincides with alpha_1).
struct JunctionGeometry {
    JunctionShape shape;
    Vec2 p12, p13, p23;
    double l1 = 0.0, l2 = 0.0, l3 = 0.0;
    Vec2 n1, n2, n3;
    double alpha1 = 0.0, alpha2 = 0.0, alpha3 = 0.0;
    double beta1 = 0.0, beta2 = 0.0, beta3 = 0.0;
    double gamma2 = 0.0, gamma3 = 0.0;
};

class InvalidShapeError : public std::runtime_error {
public:
    explicit InvalidShapeError(const std::string& what) : std::runtime_error(what) {}
};

class DegenerateTriangleError : public std::runtime_error {
public:
    explicit DegenerateTriangleError(const std::string& what) : std::runtime_error(what) {}
};

namespace geom_detail {

/// Angles this close to the special values 0, pi/2 are snapped onto them;
/// the generic vertex formulas divide by sin(theta), sin(phi), sin(theta-phi).
inline constexpr double angle_eps = 1e-12;

inline bool near(double a, double b) { return std::abs(a - b) < angle_eps; }

inline void validate(const JunctionShape& s) {
    if (!(std::isfinite(s.theta) && std::isfinite(s.phi)))
        throw InvalidShapeError("junction shape: non-finite angle");
    if (!(s.theta >= -angle_eps && s.theta <= 0.5 * M_PI + angle_eps))
        throw InvalidShapeError("junction shape: theta outside [0, pi/2]");
    if (!(s.phi <= angle_eps && s.phi >= -0.5 * M_PI - angle_eps))
        throw InvalidShapeError("junction shape: phi outside [-pi/2, 0]");
    for (double w : {s.s1, s.s2, s.s3})
        if (!(w > 0.0) || !std::isfinite(w))
            throw InvalidShapeError("junction shape: half-widths must be positive");
}

}  // namespace geom_detail

/// Left-hand side of the collinearity condition for the generic wall
/// intersection points. Homogeneous of degree 2 in the widths.
inline double degeneracy_expression(const JunctionShape& s) {
    const double a = s.s1 * std::sin(s.theta - s.phi) + s.s3 * std::sin(s.phi) -
                     s.s2 * std::sin(s.theta);
    return a * a + 4.0 * s.s2 * s.s3 * std::sin(s.phi) * std::sin(s.theta);
}

/// True when the three wall intersection points are collinear. Only
/// meaningful on the generic angle path; the special constructions for
/// theta = 0, phi = 0 and the T-junction make their own (always valid)
/// triangles and bypass this test.
inline bool is_degenerate(const JunctionShape& s) {
    geom_detail::validate(s);
    const double sum = s.s1 + s.s2 + s.s3;
    return std::abs(degeneracy_expression(s)) <= 1e-12 * sum * sum;
}

/// True when every canal meets its triangle edge at a right angle. In that
/// configuration the momentum conditions reduce to the classical equal-energy
/// closure and the edge lengths equal the canal widths.
inline bool is_orthogonal(const JunctionShape& s) {
    geom_detail::validate(s);
    const double scale = std::max({s.s1, s.s2, s.s3});
    const double r1 = s.s2 * std::sin(s.phi) + s.s3 * std::sin(s.theta);
    const double r2 = s.s1 - (s.s2 * std::cos(s.phi) + s.s3 * std::cos(s.theta));
    return std::abs(r1) <= 1e-12 * scale && std::abs(r2) <= 1e-12 * scale;
}

/// Construct the junction triangle: vertices, edge lengths, outward normals
/// and projection coefficients. Normals are derived from the vertices (edge
/// vector rotated a quarter turn and oriented away from the centroid), which
/// covers the special-case vertex lists with the same code.
inline JunctionGeometry build(const JunctionShape& s) {
    geom_detail::validate(s);
    using geom_detail::near;

    const bool theta_zero = near(s.theta, 0.0);
    const bool phi_zero = near(s.phi, 0.0);
    const bool tee = near(s.theta, 0.5 * M_PI) && near(s.phi, -0.5 * M_PI);

    JunctionGeometry g;
    g.shape = s;

    if (theta_zero && phi_zero) {
        // Straight channel, possibly with varying cross-section. The x
        // coordinate of P23 is fixed to s1.
        g.p12 = {0.0, -s.s1};
        g.p13 = {0.0, s.s1};
        g.p23 = {s.s1, 0.0};
    } else if (tee) {
        g.p12 = {-s.s2, -s.s1};
        g.p13 = {-s.s3, s.s1};
        g.p23 = {std::min(s.s2, s.s3), 0.0};
    } else {
        if (theta_zero) {
            if (std::abs(s.s1 - s.s3) > 1e-12 * std::max(s.s1, s.s3))
                throw InvalidShapeError("junction shape: theta = 0 requires s1 = s3");
            g.p13 = {0.0, s.s1};
        } else {
            g.p13 = {(s.s1 * std::cos(s.theta) - s.s3) / std::sin(s.theta), s.s1};
        }
        if (phi_zero) {
            if (std::abs(s.s1 - s.s2) > 1e-12 * std::max(s.s1, s.s2))
                throw InvalidShapeError("junction shape: phi = 0 requires s1 = s2");
            g.p12 = {0.0, -s.s1};
        } else {
            g.p12 = {(-s.s1 * std::cos(s.phi) + s.s2) / std::sin(s.phi), -s.s1};
        }
        const double sd = std::sin(s.theta - s.phi);
        g.p23 = {(s.s3 * std::cos(s.phi) + s.s2 * std::cos(s.theta)) / sd,
                 (s.s3 * std::sin(s.phi) + s.s2 * std::sin(s.theta)) / sd};
        if (!theta_zero && !phi_zero) {
            if (is_degenerate(s))
                throw DegenerateTriangleError(
                    "junction triangle: wall intersections are collinear");
            // P23 must lie opposite canal 1; otherwise the walls bound an
            // inverted triangle and no junction region exists.
            if (cross(g.p13 - g.p12, g.p23 - g.p12) > 0.0)
                throw DegenerateTriangleError(
                    "junction triangle: wall intersections bound an inverted region");
        }
    }

    const double area2 = std::abs(cross(g.p13 - g.p12, g.p23 - g.p12));
    const double sum = s.s1 + s.s2 + s.s3;
    if (area2 <= 1e-14 * sum * sum)
        throw DegenerateTriangleError("junction triangle: vanishing area");

    g.l1 = (g.p13 - g.p12).norm();
    g.l2 = (g.p23 - g.p12).norm();
    g.l3 = (g.p23 - g.p13).norm();

    const Vec2 centroid = (g.p12 + g.p13 + g.p23) * (1.0 / 3.0);
    // Length-weighted outward normal l_k n_k, kept unnormalized so the
    // projection coefficients are exact rotations of the edge vectors
    // (alpha_1 = -2 s_1 without rounding).
    auto scaled_normal = [&](const Vec2& a, const Vec2& b) {
        const Vec2 e = b - a;
        Vec2 n{e.y, -e.x};
        const Vec2 mid = (a + b) * 0.5;
        if (n.dot(mid - centroid) < 0.0)
            n = n * -1.0;
        return n;
    };
    const Vec2 ln1 = scaled_normal(g.p12, g.p13);  // edge facing canal 1
    const Vec2 ln2 = scaled_normal(g.p12, g.p23);  // edge facing canal 2
    const Vec2 ln3 = scaled_normal(g.p13, g.p23);  // edge facing canal 3
    g.n1 = ln1 * (1.0 / g.l1);
    g.n2 = ln2 * (1.0 / g.l2);
    g.n3 = ln3 * (1.0 / g.l3);

    g.alpha1 = ln1.x;
    g.alpha2 = ln2.x;
    g.alpha3 = ln3.x;
    g.beta1 = ln1.y;
    g.beta2 = ln2.y;
    g.beta3 = ln3.y;
    g.gamma2 = g.alpha2 * std::cos(s.phi) + g.beta2 * std::sin(s.phi);
    g.gamma3 = g.alpha3 * std::cos(s.theta) + g.beta3 * std::sin(s.theta);
    return g;
}

}  // namespace canal

#endif  // CANAL_JUNCTION_GEOMETRY_HPP
