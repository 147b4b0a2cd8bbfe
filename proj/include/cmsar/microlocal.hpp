#pragma once

// Canonical relation of the forward operator and its two projections.
//
// C is parameterized globally by (x1, x2, s, omega).  Jacobians are laid
// out with columns in that order; rows are (s, t, sigma, tau) for pi_L and
// (x1, x2, xi1, xi2) for pi_R.

#include "cmsar/geometry.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace cmsar {

struct CanonicalPoint {
    double s = 1.0;
    GroundPoint x;
    double omega = 1.0;
    double h = 1.0;

    double t = 0.0;
    double sigma = 0.0;
    double tau = 0.0;
    double xi1 = 0.0;
    double xi2 = 0.0;
};

// Throws DomainError for x at the common midpoint, omega == 0 or h <= 0.
CanonicalPoint canonical_point(SlowTime s, GroundPoint x, double omega, double h);

// pi_L = (s, t, sigma, tau) and pi_R = (x1, x2, xi1, xi2) as functions of
// the parameters, without the midpoint check.
std::array<double, 4> left_projection(double x1, double x2, double s, double omega, double h);
std::array<double, 4> right_projection(double x1, double x2, double s, double omega, double h);

Eigen::Matrix4d left_jacobian_matrix(const CanonicalPoint& p);
Eigen::Matrix4d right_jacobian_matrix(const CanonicalPoint& p);

// 4 x1 x2 s omega / (A^2 B^2) * (1 + (x1^2 - s^2 + x2^2 + h^2) / (A B)).
double det_closed_form(double x1, double x2, double s, double omega, double h);
// Gradient of det_closed_form in (x1, x2, s, omega).
Eigen::Vector4d det_closed_form_gradient(double x1, double x2, double s, double omega, double h);

enum class Projection { Left, Right };
enum class SigmaSet { None, Sigma1, Sigma2 };
enum class Verdict { FullRank, Fold, Blowdown, Unclassified };

const char* to_string(Projection p) noexcept;
const char* to_string(SigmaSet s) noexcept;
const char* to_string(Verdict v) noexcept;

struct ClassifyOptions {
    double rank_tol = 1e-8;       // relative singular values below this are zero
    double band_upper = 1e-6;     // [rank_tol, band_upper] is ambiguous
    double sigma_tol = 1e-10;     // |x2| (or |x1|) below this puts the point on Sigma
    double epsilon_prime = 0.0125; // away distance from the origin along Sigma
    double angle_tol = 1e-8;      // kernel transversality / tangency
    double vanishing_tol = 1e-8;  // first-order det vanishing, relative to |grad det|
};

struct ProjectionDiagnostics {
    Projection which = Projection::Left;
    CanonicalPoint point;
    Eigen::Matrix4d jacobian = Eigen::Matrix4d::Zero();
    // Determinant of the Jacobian, oriented to agree with the closed form.
    double det = 0.0;
    double closed_form_det = 0.0;
    Eigen::Vector4d singular_values = Eigen::Vector4d::Zero();
    int numerical_rank = 4;
    Eigen::Vector4d kernel_dir = Eigen::Vector4d::Zero();  // meaningful when rank == 3
    SigmaSet on_sigma = SigmaSet::None;
    Verdict verdict = Verdict::FullRank;
    std::string note;
};

SigmaSet sigma_membership(GroundPoint x, const ClassifyOptions& opts = {}) noexcept;

ProjectionDiagnostics jacobian_left(const CanonicalPoint& p, const ClassifyOptions& opts = {});
ProjectionDiagnostics jacobian_right(const CanonicalPoint& p, const ClassifyOptions& opts = {});

struct NonvanishingReport {
    double value = 0.0;               // 1 + (x1^2 - s^2 + x2^2 + h^2) / (A B)
    double identity_residual = 0.0;   // |(AB)^2 - N^2 - 4 s^2 (x2^2 + h^2)| / (AB)^2
};

NonvanishingReport nonvanishing_check(double s, GroundPoint x, double h);

// Every y with R(s, y) = R(s, x) and dR/ds(s, y) = dR/ds(s, x), found by
// holding rho fixed and taking phi' in {phi, -phi, pi - phi, pi + phi}.
// Coincident solutions are merged.
std::vector<GroundPoint> solve_composition(GroundPoint x, SlowTime s, double h);

struct GridSearchResult {
    std::vector<GroundPoint> clusters;  // centroids of the accepted nodes
    std::size_t hits = 0;
    double pitch = 0.0;
};

// Exhaustive search over an n x n grid on [-half_extent, half_extent]^2 for
// nodes where both the range and the Doppler mismatch are within one pitch
// times the local gradient.  Accepted nodes closer than cluster_cells
// pitches are merged.
GridSearchResult composition_grid_search(GroundPoint x, SlowTime s, double h,
                                         double half_extent = 5.0, std::size_t n = 2001,
                                         double cluster_cells = 6.0);

enum class LagrangianLabel { Delta, C1, C2, C3 };

const char* to_string(LagrangianLabel l) noexcept;

// Graph of (x, xi) -> (y, eta) = diag(signs) (x, xi), coordinates (x1, x2, xi1, xi2).
struct LagrangianGraph {
    LagrangianLabel label = LagrangianLabel::Delta;
    std::array<int, 4> signs{1, 1, 1, 1};

    static LagrangianGraph of(LagrangianLabel l) noexcept;
    Eigen::Matrix4d map() const;
};

struct LagrangianIntersection {
    bool empty = false;
    int dimension = 0;     // of the intersection as a linear subspace
    int codimension = 0;   // inside either Lagrangian (dimension 4)
    std::vector<std::string> conditions;  // coordinates of (x, xi) forced to zero
};

// Throws DomainError when the labels coincide.
LagrangianIntersection intersect_lagrangians(const LagrangianGraph& a, const LagrangianGraph& b);

enum class SampleKind { Sigma1, Sigma2, OffSigma };

struct SampleRanges {
    double h = 1.0;
    double s_min = 0.2, s_max = 3.0;
    double x_min = 0.05, x_max = 3.0;      // magnitude of each nonzero coordinate
    double omega_min = 0.5, omega_max = 4.0;  // magnitude; sign is random
};

// Deterministic pseudo-random canonical points of the requested kind.
std::vector<CanonicalPoint> sample_points(SampleKind kind, std::size_t n, std::uint64_t seed,
                                          const SampleRanges& r = {});

void write_diagnostics_csv(std::ostream& os, const std::vector<ProjectionDiagnostics>& rows);

}  // namespace cmsar
