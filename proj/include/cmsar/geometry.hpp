#pragma once

// Common-midpoint acquisition geometry.
//
// The transmitter sits at (s, 0, h) and the receiver at (-s, 0, h); the
// scene lives in the ground plane x3 = 0.  Everything here is a pure
// function and safe to call concurrently.

#include <cmath>

namespace cmsar {

struct GroundPoint {
    double x1 = 0.0;
    double x2 = 0.0;

    friend bool operator==(const GroundPoint&, const GroundPoint&) = default;
};

// Half-separation of transmitter and receiver.  Always strictly positive.
class SlowTime {
public:
    explicit SlowTime(double s);
    double value() const noexcept { return s_; }

private:
    double s_;
};

// Distances from a ground point to the transmitter and the receiver.
struct Legs {
    double to_transmitter;  // |x - gamma_T(s)|
    double to_receiver;     // |x - gamma_R(s)|
};

inline Legs bistatic_legs(double s, double h, double x1, double x2) noexcept {
    const double dm = x1 - s;
    const double dp = x1 + s;
    const double c = x2 * x2 + h * h;
    return {std::sqrt(dm * dm + c), std::sqrt(dp * dp + c)};
}

// Sum of the two legs, evaluated as sqrt(..) + sqrt(..) in a fixed order so
// that mirror-image points (x1 -> -x1, x2 -> -x2) produce bit-identical
// values.  Operators rely on this.
inline double bistatic_range_raw(double s, double h, double x1, double x2) noexcept {
    const Legs l = bistatic_legs(s, h, x1, x2);
    return l.to_transmitter + l.to_receiver;
}

double bistatic_range(SlowTime s, double h, GroundPoint x);

// omega * (t - R(s, x)).
double phase(SlowTime s, double t, GroundPoint x, double omega, double h);

// Prolate spheroidal coordinates with foci at (+-s, 0, h), restricted to
// the slice x3 = 0.
struct ProlateCoords {
    double rho = 0.0;
    double phi = 0.0;    // [0, pi]
    double theta = 0.0;  // [0, 2 pi)
};

// Points closer than this to the common midpoint are rejected by to_prolate.
inline constexpr double kMidpointTolerance = 1e-9;

ProlateCoords to_prolate(GroundPoint x, SlowTime s, double h,
                         double midpoint_tol = kMidpointTolerance);

// Inverse of to_prolate.  Throws DomainError when the x3 = 0 constraint
// h + s sinh(rho) sin(phi) sin(theta) = 0 is violated by more than tol
// (relative to h).
GroundPoint from_prolate(const ProlateCoords& p, SlowTime s, double h, double tol = 1e-9);

// Ground-plane level set R(s, x) = t, written
// (4t^2 - 16s^2) x1^2 + 4t^2 x2^2 = t^4 - 4t^2 (s^2 + h^2).
struct IsorangeEllipse {
    double s;
    double t;
    double h;
    double semi_axis_x1;
    double semi_axis_x2;

    // Point at angle u along the ellipse.
    GroundPoint point_at(double u) const noexcept {
        return {semi_axis_x1 * std::cos(u), semi_axis_x2 * std::sin(u)};
    }
};

IsorangeEllipse isorange_ellipse(SlowTime s, double t, double h);

}  // namespace cmsar
