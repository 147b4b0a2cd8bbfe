#include "cmsar/geometry.hpp"

#include "cmsar/error.hpp"

#include <algorithm>
#include <numbers>
#include <string>

namespace cmsar {

SlowTime::SlowTime(double s) : s_(s) {
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw DomainError("slow time must be strictly positive, got " + std::to_string(s));
    }
}

double bistatic_range(SlowTime s, double h, GroundPoint x) {
    if (!(h > 0.0)) throw DomainError("platform height must be positive");
    return bistatic_range_raw(s.value(), h, x.x1, x.x2);
}

double phase(SlowTime s, double t, GroundPoint x, double omega, double h) {
    return omega * (t - bistatic_range(s, h, x));
}

ProlateCoords to_prolate(GroundPoint x, SlowTime st, double h, double midpoint_tol) {
    if (!(h > 0.0)) throw DomainError("platform height must be positive");
    if (std::hypot(x.x1, x.x2) < midpoint_tol) {
        throw DomainError("prolate coordinates are degenerate at the common midpoint");
    }
    const double s = st.value();
    const Legs l = bistatic_legs(s, h, x.x1, x.x2);
    // A = s (cosh rho - cos phi), B = s (cosh rho + cos phi)
    const double cosh_rho = (l.to_transmitter + l.to_receiver) / (2.0 * s);
    const double cos_phi = std::clamp((l.to_receiver - l.to_transmitter) / (2.0 * s), -1.0, 1.0);

    ProlateCoords p;
    p.rho = std::acosh(std::max(cosh_rho, 1.0));
    p.phi = std::acos(cos_phi);
    // x3 = 0 forces sin(theta) = -h / (s sinh rho sin phi) < 0 and the
    // transverse radius s sinh rho sin phi equals sqrt(x2^2 + h^2).
    double theta = std::atan2(-h, x.x2);
    if (theta < 0.0) theta += 2.0 * std::numbers::pi;
    p.theta = theta;
    return p;
}

GroundPoint from_prolate(const ProlateCoords& p, SlowTime st, double h, double tol) {
    const double s = st.value();
    const double radial = s * std::sinh(p.rho) * std::sin(p.phi);
    const double x3 = h + radial * std::sin(p.theta);
    if (std::abs(x3) > tol * std::max(1.0, h)) {
        throw DomainError("prolate triple does not lie on the ground plane (x3 = " +
                          std::to_string(x3) + ")");
    }
    return {s * std::cosh(p.rho) * std::cos(p.phi), radial * std::cos(p.theta)};
}

IsorangeEllipse isorange_ellipse(SlowTime st, double t, double h) {
    if (!(h > 0.0)) throw DomainError("platform height must be positive");
    const double s = st.value();
    const double t2 = t * t;
    const double gap = t2 - 4.0 * (s * s + h * h);
    if (!(t > 0.0) || !(gap > 0.0)) {
        throw DomainError("isorange locus is empty or degenerate: t must exceed 2 sqrt(s^2 + h^2)");
    }
    IsorangeEllipse e{s, t, h, 0.0, 0.0};
    e.semi_axis_x1 = std::sqrt(t2 * gap / (4.0 * (t2 - 4.0 * s * s)));
    e.semi_axis_x2 = std::sqrt(gap / 4.0);
    return e;
}

}  // namespace cmsar
