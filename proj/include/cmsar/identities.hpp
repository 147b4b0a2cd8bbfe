#pragma once

// Numerical checks of the algebraic identities behind the decomposition of
// the normal operator, and of the g-band constant.
//
// With u = d_s Phi / omega and v = d_omega Phi, each generator is written as
// a combination alpha u + beta v with coefficients depending on (x, y, s).

#include "cmsar/geometry.hpp"

#include <ostream>
#include <utility>
#include <vector>

namespace cmsar {

struct KernelPhasePoint {
    GroundPoint x;
    GroundPoint y;
    double s = 1.0;
    double omega = 1.0;
    double h = 1.0;
    double X1 = 0.0, X2 = 0.0;  // |x - gamma_T|, |x - gamma_R|
    double Y1 = 0.0, Y2 = 0.0;  // |y - gamma_T|, |y - gamma_R|

    // Throws DomainError for s <= 0, h <= 0 or omega == 0.
    static KernelPhasePoint make(GroundPoint x, GroundPoint y, double s, double omega, double h);
};

struct PhaseDerivs {
    double phi = 0.0;      // omega (Y1 + Y2 - X1 - X2)
    double d_s = 0.0;
    double d_omega = 0.0;
};

PhaseDerivs kernel_phase_derivs(const KernelPhasePoint& p) noexcept;

// xi at x and eta at y from the canonical parameterization at (s, omega).
struct Covectors {
    double xi1 = 0.0, xi2 = 0.0;
    double eta1 = 0.0, eta2 = 0.0;
};

Covectors kernel_covectors(const KernelPhasePoint& p) noexcept;

enum class Generator { P1, P2, P3, P4, P5, P6, R1, R2 };

// p1 = x1 - y1, p2 = x2^2 - y2^2, p3 = xi1 - eta1, p4 = (x2 + y2)(xi2 - eta2),
// p5 = (x2 - y2)(xi2 + eta2), p6 = xi2^2 - eta2^2, r1 = x1 + y1, r2 = xi1 + eta1.
double generator_eval(Generator g, const KernelPhasePoint& p, const Covectors& c) noexcept;

struct AdmissibilityOptions {
    double cos_sum_floor = 1e-3;   // |cos phi + cos phi'|
    double cosh_prod_floor = 1e-3; // cosh rho cosh rho' - 1
};

bool admissible(const KernelPhasePoint& p, const AdmissibilityOptions& opts = {}) noexcept;

// Coefficients (f_i1, f_i2) such that generator i equals
//   omega^k (f_i1 u + f_i2 v),  k = 0 for i = 1, 2;  1 for i = 3, 4, 5;  2 for i = 6.
// Built from the prolate-coordinate chain.  Undefined off the admissible set.
std::pair<double, double> identity_coefficients(int index, const KernelPhasePoint& p);

// Identity 1 coefficients from the explicit Cartesian expression.
std::pair<double, double> identity1_cartesian_coefficients(const KernelPhasePoint& p);

struct IdentityResidual {
    int index = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;  // |lhs - rhs| / max(1, |lhs|)
    bool admissible = false;
};

// Identity 1 uses the Cartesian coefficients, 2..6 the prolate chain.
// Inadmissible points are flagged and left unevaluated.
IdentityResidual verify_identity(int index, const KernelPhasePoint& p,
                                 const AdmissibilityOptions& opts = {});

struct CutoffConstantReport {
    double s = 0.0, h = 0.0, epsilon = 0.0;
    double t = 0.0;                  // t^2 = 4 (s^2 + h^2) + 36 eps^2
    double semi_axis_x2 = 0.0;
    double through_point_residual = 0.0;  // |R(s, (0, 3 eps)) - t| / t
    double ellipse_equation_residual = 0.0;  // ellipse equation at (0, 3 eps), relative to t^4
    double margin = 0.0;             // t - 2 sqrt(s^2 + h^2)
    double margin_ratio = 0.0;       // margin h / eps^2
    double band_constant = 20.0;
    bool below_18 = false;
    bool band_contains_margin = false;  // margin < band_constant eps^2 / h
};

CutoffConstantReport cutoff_constant_check(double s, double h, double epsilon);

void write_identity_csv(std::ostream& os, const std::vector<IdentityResidual>& rows);

}  // namespace cmsar
