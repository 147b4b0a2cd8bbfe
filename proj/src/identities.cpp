#include "cmsar/identities.hpp"

#include "cmsar/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

namespace cmsar {

KernelPhasePoint KernelPhasePoint::make(GroundPoint x, GroundPoint y, double s, double omega, double h) {
    if (!(s > 0.0)) throw DomainError("s must be positive");
    if (!(h > 0.0)) throw DomainError("platform height must be positive");
    if (omega == 0.0) throw DomainError("omega must be nonzero");
    KernelPhasePoint p{x, y, s, omega, h};
    const Legs lx = bistatic_legs(s, h, x.x1, x.x2);
    const Legs ly = bistatic_legs(s, h, y.x1, y.x2);
    p.X1 = lx.to_transmitter;
    p.X2 = lx.to_receiver;
    p.Y1 = ly.to_transmitter;
    p.Y2 = ly.to_receiver;
    return p;
}

PhaseDerivs kernel_phase_derivs(const KernelPhasePoint& p) noexcept {
    const double s = p.s;
    const double dw = p.Y1 + p.Y2 - p.X1 - p.X2;
    const double dy = (p.y.x1 + s) / p.Y2 - (p.y.x1 - s) / p.Y1;
    const double dx = (p.x.x1 + s) / p.X2 - (p.x.x1 - s) / p.X1;
    return {p.omega * dw, p.omega * (dy - dx), dw};
}

Covectors kernel_covectors(const KernelPhasePoint& p) noexcept {
    const double w = p.omega, s = p.s;
    const auto& x = p.x;
    const auto& y = p.y;
    return {-w * ((x.x1 - s) / p.X1 + (x.x1 + s) / p.X2), -w * x.x2 * (1.0 / p.X1 + 1.0 / p.X2),
            -w * ((y.x1 - s) / p.Y1 + (y.x1 + s) / p.Y2), -w * y.x2 * (1.0 / p.Y1 + 1.0 / p.Y2)};
}

double generator_eval(Generator g, const KernelPhasePoint& p, const Covectors& c) noexcept {
    const double x1 = p.x.x1, x2 = p.x.x2, y1 = p.y.x1, y2 = p.y.x2;
    switch (g) {
        case Generator::P1: return x1 - y1;
        case Generator::P2: return x2 * x2 - y2 * y2;
        case Generator::P3: return c.xi1 - c.eta1;
        case Generator::P4: return (x2 + y2) * (c.xi2 - c.eta2);
        case Generator::P5: return (x2 - y2) * (c.xi2 + c.eta2);
        case Generator::P6: return c.xi2 * c.xi2 - c.eta2 * c.eta2;
        case Generator::R1: return x1 + y1;
        case Generator::R2: return c.xi1 + c.eta1;
    }
    return 0.0;
}

namespace {

// alpha u + beta v.
struct Form {
    double a = 0.0;
    double b = 0.0;

    Form operator+(Form o) const { return {a + o.a, b + o.b}; }
    Form operator-(Form o) const { return {a - o.a, b - o.b}; }
    friend Form operator*(double k, Form f) { return {k * f.a, k * f.b}; }
};

struct Prolate {
    double c, cp;  // cosh rho, cos phi at x
    double C, Cp;  // the same at y
    double den0;   // c^2 - cp^2
    double den;    // C^2 - Cp^2
};

Prolate prolate(const KernelPhasePoint& p) {
    const double s2 = 2.0 * p.s;
    const double c = (p.X1 + p.X2) / s2, cp = (p.X2 - p.X1) / s2;
    const double C = (p.Y1 + p.Y2) / s2, Cp = (p.Y2 - p.Y1) / s2;
    return {c, cp, C, Cp, c * c - cp * cp, C * C - Cp * Cp};
}

// cos phi - cos phi' and cosh rho - cosh rho'.
Form diff_cos(const Prolate& q, double s) {
    const double cc1 = q.c * q.C - 1.0;
    const double sum = q.cp + q.Cp;
    const double num = (q.c * q.C - q.cp * q.cp * q.Cp * q.Cp) - q.cp * q.cp * cc1;
    return {q.den * q.den0 / (2.0 * q.c * cc1 * sum), num / (2.0 * s * q.c * cc1 * sum)};
}

Form diff_cosh(double s) { return {0.0, -1.0 / (2.0 * s)}; }

struct Chain {
    Prolate q;
    Form dc, dh;
    Form a2;      // x2^2 - y2^2
    Form handy;   // K - K'
    double K, Kp; // cosh rho / den0, cosh rho' / den
};

Chain chain(const KernelPhasePoint& p) {
    Chain ch;
    ch.q = prolate(p);
    const Prolate& q = ch.q;
    const double s = p.s;
    ch.dc = diff_cos(q, s);
    ch.dh = diff_cosh(s);
    ch.a2 = (s * s) * ((q.c + q.C) * (1.0 - q.cp * q.cp) * ch.dh - (q.cp + q.Cp) * (q.C * q.C - 1.0) * ch.dc);
    const double dd = q.den * q.den0;
    ch.handy = (1.0 / dd) * ((-(q.c * q.C + q.cp * q.cp)) * ch.dh + (q.c * (q.cp + q.Cp)) * ch.dc);
    ch.K = q.c / q.den0;
    ch.Kp = q.C / q.den;
    return ch;
}

}  // namespace

bool admissible(const KernelPhasePoint& p, const AdmissibilityOptions& opts) noexcept {
    if (!(p.x.x1 * p.y.x1 > 0.0)) return false;
    const Prolate q = prolate(p);
    return std::abs(q.cp + q.Cp) > opts.cos_sum_floor && q.c * q.C - 1.0 > opts.cosh_prod_floor;
}

std::pair<double, double> identity_coefficients(int index, const KernelPhasePoint& p) {
    const Chain ch = chain(p);
    const Prolate& q = ch.q;
    const double s = p.s;
    const double x2 = p.x.x2, y2 = p.y.x2;
    Form f;
    switch (index) {
        case 1:
            f = (s * q.c) * ch.dc + (s * q.Cp) * ch.dh;
            break;
        case 2:
            f = ch.a2;
            break;
        case 3: {
            const double C2m1 = q.C * q.C - 1.0;
            const double P = -C2m1 * (q.C * q.C + q.cp * q.Cp);
            const double Q = (q.c + q.C) * (q.Cp * (q.cp * q.Cp - 1.0) + q.C * q.C * (q.Cp - q.cp));
            f = (2.0 / (q.den0 * q.den)) * (P * ch.dc + Q * ch.dh);
            break;
        }
        case 4:
            f = (-2.0 / s) * ((x2 * x2 + x2 * y2) * ch.handy + ch.Kp * ch.a2);
            break;
        case 5:
            f = (-2.0 / s) * ((x2 * x2 - x2 * y2) * ch.handy + ch.Kp * ch.a2);
            break;
        case 6:
            f = (4.0 / (s * s)) * ((x2 * x2 * (ch.K + ch.Kp)) * ch.handy + (ch.Kp * ch.Kp) * ch.a2);
            break;
        default:
            throw DomainError("identity index must be in 1..6");
    }
    return {f.a, f.b};
}

std::pair<double, double> identity1_cartesian_coefficients(const KernelPhasePoint& p) {
    const double s = p.s;
    const double x1 = p.x.x1, y1 = p.y.x1;
    const double ex = 0.5 * (p.X1 + p.X2);
    const double ey = 0.5 * (p.Y1 + p.Y2);
    const double prod = (ey / s) * (ex / s);
    const double den = 2.0 * (prod - 1.0) * (x1 / ex + y1 / ey);
    const double f11 = s * (p.Y1 * p.Y2 / (s * s)) * (p.X1 * p.X2 / (s * s)) / den;
    const double ratio = x1 * x1 * y1 * y1 / (ex * ex * ey * ey);
    const double f12 = ((prod - ratio) - x1 * x1 / (ex * ex) * (prod - 1.0)) / den - y1 / (p.Y1 + p.Y2);
    return {f11, f12};
}

IdentityResidual verify_identity(int index, const KernelPhasePoint& p, const AdmissibilityOptions& opts) {
    if (index < 1 || index > 6) throw DomainError("identity index must be in 1..6");
    IdentityResidual r;
    r.index = index;
    r.admissible = admissible(p, opts);
    if (!r.admissible) return r;

    static const Generator gens[6] = {Generator::P1, Generator::P2, Generator::P3,
                                      Generator::P4, Generator::P5, Generator::P6};
    r.lhs = generator_eval(gens[index - 1], p, kernel_covectors(p));

    const PhaseDerivs d = kernel_phase_derivs(p);
    const double u = d.d_s / p.omega, v = d.d_omega;
    const auto [f1, f2] = index == 1 ? identity1_cartesian_coefficients(p) : identity_coefficients(index, p);
    const double scale = index <= 2 ? 1.0 : index <= 5 ? p.omega : p.omega * p.omega;
    r.rhs = scale * (f1 * u + f2 * v);
    r.residual = std::abs(r.lhs - r.rhs) / std::max(1.0, std::abs(r.lhs));
    return r;
}

CutoffConstantReport cutoff_constant_check(double s, double h, double epsilon) {
    if (!(s > 0.0) || !(h > 0.0) || !(epsilon > 0.0)) {
        throw DomainError("s, h and epsilon must be positive");
    }
    CutoffConstantReport r;
    r.s = s;
    r.h = h;
    r.epsilon = epsilon;
    const double base = 2.0 * std::sqrt(s * s + h * h);
    r.t = std::sqrt(4.0 * (s * s + h * h) + 36.0 * epsilon * epsilon);
    r.semi_axis_x2 = isorange_ellipse(SlowTime(s), r.t, h).semi_axis_x2;
    r.through_point_residual = std::abs(bistatic_range(SlowTime(s), h, {0.0, 3.0 * epsilon}) - r.t) / r.t;
    const double t2 = r.t * r.t, x2 = 3.0 * epsilon;
    r.ellipse_equation_residual = std::abs(4.0 * t2 * x2 * x2 - (t2 * t2 - 4.0 * t2 * (s * s + h * h))) / (t2 * t2);
    // r.t - base without cancellation.
    r.margin = 36.0 * epsilon * epsilon / (r.t + base);
    r.margin_ratio = r.margin * h / (epsilon * epsilon);
    r.below_18 = r.margin_ratio < 18.0;
    r.band_contains_margin = r.margin < r.band_constant * epsilon * epsilon / h;
    return r;
}

void write_identity_csv(std::ostream& os, const std::vector<IdentityResidual>& rows) {
    os << "identity,admissible,lhs,rhs,residual\n" << std::setprecision(17);
    for (const auto& r : rows) {
        os << r.index << ',' << (r.admissible ? 1 : 0) << ',' << r.lhs << ',' << r.rhs << ','
           << r.residual << '\n';
    }
}

}  // namespace cmsar
