#include "cmsar/microlocal.hpp"

#include "cmsar/error.hpp"
#include "cmsar/scene_io.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>

namespace cmsar {

namespace {

struct LegTerms {
    double A, B;
    double dm, dp;  // x1 - s, x1 + s
    double c;       // x2^2 + h^2
};

LegTerms legs(double x1, double x2, double s, double h) {
    const Legs l = bistatic_legs(s, h, x1, x2);
    return {l.to_transmitter, l.to_receiver, x1 - s, x1 + s, x2 * x2 + h * h};
}

}  // namespace

std::array<double, 4> left_projection(double x1, double x2, double s, double omega, double h) {
    const LegTerms g = legs(x1, x2, s, h);
    return {s, g.A + g.B, -omega * (g.dm / g.A - g.dp / g.B), -omega};
}

std::array<double, 4> right_projection(double x1, double x2, double s, double omega, double h) {
    const LegTerms g = legs(x1, x2, s, h);
    return {x1, x2, -omega * (g.dm / g.A + g.dp / g.B), -omega * x2 * (1.0 / g.A + 1.0 / g.B)};
}

CanonicalPoint canonical_point(SlowTime s, GroundPoint x, double omega, double h) {
    if (std::hypot(x.x1, x.x2) < kMidpointTolerance) {
        throw DomainError("the common midpoint cannot be imaged");
    }
    if (omega == 0.0 || !std::isfinite(omega)) throw DomainError("omega must be nonzero");
    if (!(h > 0.0)) throw DomainError("platform height must be positive");
    CanonicalPoint p;
    p.s = s.value();
    p.x = x;
    p.omega = omega;
    p.h = h;
    const auto l = left_projection(x.x1, x.x2, p.s, omega, h);
    const auto r = right_projection(x.x1, x.x2, p.s, omega, h);
    p.t = l[1];
    p.sigma = l[2];
    p.tau = l[3];
    p.xi1 = r[2];
    p.xi2 = r[3];
    return p;
}

Eigen::Matrix4d left_jacobian_matrix(const CanonicalPoint& p) {
    const double x1 = p.x.x1, x2 = p.x.x2, w = p.omega;
    const LegTerms g = legs(x1, x2, p.s, p.h);
    const double A3 = g.A * g.A * g.A, B3 = g.B * g.B * g.B;

    Eigen::Matrix4d j = Eigen::Matrix4d::Zero();
    j(0, 2) = 1.0;
    j(1, 0) = g.dm / g.A + g.dp / g.B;
    j(1, 1) = x2 / g.A + x2 / g.B;
    j(1, 2) = -g.dm / g.A + g.dp / g.B;
    j(2, 0) = -w * g.c * (1.0 / A3 - 1.0 / B3);
    j(2, 1) = w * (g.dm * x2 / A3 - g.dp * x2 / B3);
    j(2, 2) = w * g.c * (1.0 / A3 + 1.0 / B3);
    j(2, 3) = -(g.dm / g.A - g.dp / g.B);
    j(3, 3) = -1.0;
    return j;
}

Eigen::Matrix4d right_jacobian_matrix(const CanonicalPoint& p) {
    const double x1 = p.x.x1, x2 = p.x.x2, w = p.omega;
    const LegTerms g = legs(x1, x2, p.s, p.h);
    const double A3 = g.A * g.A * g.A, B3 = g.B * g.B * g.B;

    Eigen::Matrix4d j = Eigen::Matrix4d::Zero();
    j(0, 0) = 1.0;
    j(1, 1) = 1.0;
    j(2, 0) = -w * g.c * (1.0 / A3 + 1.0 / B3);
    j(2, 1) = w * x2 * (g.dm / A3 + g.dp / B3);
    j(2, 2) = w * g.c * (1.0 / A3 - 1.0 / B3);
    j(2, 3) = -(g.dm / g.A + g.dp / g.B);
    j(3, 0) = w * x2 * (g.dm / A3 + g.dp / B3);
    j(3, 1) = -w * (1.0 / g.A + 1.0 / g.B) + w * x2 * x2 * (1.0 / A3 + 1.0 / B3);
    j(3, 2) = -w * x2 * (g.dm / A3 - g.dp / B3);
    j(3, 3) = -x2 * (1.0 / g.A + 1.0 / g.B);
    return j;
}

double det_closed_form(double x1, double x2, double s, double omega, double h) {
    const LegTerms g = legs(x1, x2, s, h);
    const double ab = g.A * g.B;
    const double n = x1 * x1 - s * s + x2 * x2 + h * h;
    return 4.0 * x1 * x2 * s * omega / (ab * ab) * (1.0 + n / ab);
}

Eigen::Vector4d det_closed_form_gradient(double x1, double x2, double s, double omega, double h) {
    const LegTerms g = legs(x1, x2, s, h);
    const double A = g.A, B = g.B, ab = A * B;
    const double n = x1 * x1 - s * s + x2 * x2 + h * h;

    // Partials in (x1, x2, s, omega).
    const Eigen::Vector4d dA(g.dm / A, x2 / A, -g.dm / A, 0.0);
    const Eigen::Vector4d dB(g.dp / B, x2 / B, g.dp / B, 0.0);
    const Eigen::Vector4d dm(x2 * s * omega, x1 * s * omega, x1 * x2 * omega, x1 * x2 * s);
    const Eigen::Vector4d dn(2.0 * x1, 2.0 * x2, -2.0 * s, 0.0);

    const double m = x1 * x2 * s * omega;
    const double G = 4.0 / (ab * ab);
    const Eigen::Vector4d dG = G * (-2.0 * dA / A - 2.0 * dB / B);
    const double P = m * G;
    const Eigen::Vector4d dP = dm * G + m * dG;
    const double L = 1.0 + n / ab;
    const Eigen::Vector4d dL = dn / ab - n * (dA * B + A * dB) / (ab * ab);
    return dP * L + P * dL;
}

const char* to_string(Projection p) noexcept { return p == Projection::Left ? "left" : "right"; }

const char* to_string(SigmaSet s) noexcept {
    switch (s) {
        case SigmaSet::Sigma1: return "sigma1";
        case SigmaSet::Sigma2: return "sigma2";
        case SigmaSet::None: break;
    }
    return "none";
}

const char* to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::FullRank: return "full-rank";
        case Verdict::Fold: return "fold";
        case Verdict::Blowdown: return "blowdown";
        case Verdict::Unclassified: break;
    }
    return "unclassified";
}

SigmaSet sigma_membership(GroundPoint x, const ClassifyOptions& opts) noexcept {
    if (std::abs(x.x2) < opts.sigma_tol && std::abs(x.x1) > opts.epsilon_prime) return SigmaSet::Sigma1;
    if (std::abs(x.x1) < opts.sigma_tol && std::abs(x.x2) > opts.epsilon_prime) return SigmaSet::Sigma2;
    return SigmaSet::None;
}

namespace {

ProjectionDiagnostics classify(Projection which, const CanonicalPoint& p, Eigen::Matrix4d j,
                               const ClassifyOptions& opts) {
    ProjectionDiagnostics d;
    d.which = which;
    d.point = p;
    d.jacobian = j;
    // Column order (x1, x2, s, omega) against these row orders yields the
    // opposite orientation to the closed form; flip once here.
    d.det = -j.determinant();
    d.closed_form_det = det_closed_form(p.x.x1, p.x.x2, p.s, p.omega, p.h);
    d.on_sigma = sigma_membership(p.x, opts);

    const Eigen::JacobiSVD<Eigen::Matrix4d> svd(j, Eigen::ComputeFullV);
    d.singular_values = svd.singularValues();
    const double top = d.singular_values(0);
    int rank = 0;
    bool ambiguous = false;
    for (int k = 0; k < 4; ++k) {
        const double rel = top > 0.0 ? d.singular_values(k) / top : 0.0;
        if (rel > opts.rank_tol) ++rank;
        if (rel >= opts.rank_tol && rel <= opts.band_upper) ambiguous = true;
    }
    d.numerical_rank = rank;
    d.kernel_dir = svd.matrixV().col(3);

    if (ambiguous) {
        d.verdict = Verdict::Unclassified;
        d.note = "singular value inside the ambiguity band";
        return d;
    }
    if (rank == 4) {
        d.verdict = Verdict::FullRank;
        if (d.on_sigma != SigmaSet::None) d.note = "full rank on the critical set";
        return d;
    }
    if (rank < 3) {
        d.verdict = Verdict::Unclassified;
        d.note = "corank exceeds one";
        return d;
    }

    // Rank 3 from here on.  Off the sampled critical set there is no
    // reference hypersurface to test against.
    if (d.on_sigma == SigmaSet::None) {
        d.verdict = Verdict::Unclassified;
        d.note = "rank drop away from sigma";
        return d;
    }
    const Eigen::Vector4d normal =
        d.on_sigma == SigmaSet::Sigma1 ? Eigen::Vector4d::UnitY() : Eigen::Vector4d::UnitX();
    const Eigen::Vector4d grad = det_closed_form_gradient(p.x.x1, p.x.x2, p.s, p.omega, p.h);
    const double gscale = std::max(grad.norm(), std::numeric_limits<double>::min());
    const double transversality = std::abs(d.kernel_dir.dot(normal));

    if (transversality > opts.angle_tol) {
        const double along_kernel = std::abs(grad.dot(d.kernel_dir)) / gscale;
        if (along_kernel > opts.vanishing_tol) {
            d.verdict = Verdict::Fold;
        } else {
            d.verdict = Verdict::Unclassified;
            d.note = "det vanishes to higher order along the kernel";
        }
    } else {
        const double across = std::abs(grad.dot(normal)) / gscale;
        if (across > opts.vanishing_tol) {
            d.verdict = Verdict::Blowdown;
        } else {
            d.verdict = Verdict::Unclassified;
            d.note = "det vanishes to higher order across sigma";
        }
    }
    return d;
}

}  // namespace

ProjectionDiagnostics jacobian_left(const CanonicalPoint& p, const ClassifyOptions& opts) {
    return classify(Projection::Left, p, left_jacobian_matrix(p), opts);
}

ProjectionDiagnostics jacobian_right(const CanonicalPoint& p, const ClassifyOptions& opts) {
    return classify(Projection::Right, p, right_jacobian_matrix(p), opts);
}

NonvanishingReport nonvanishing_check(double s, GroundPoint x, double h) {
    const Legs l = bistatic_legs(s, h, x.x1, x.x2);
    const double ab = l.to_transmitter * l.to_receiver;
    const double n = x.x1 * x.x1 - s * s + x.x2 * x.x2 + h * h;
    const double lhs = ab * ab - n * n;
    const double rhs = 4.0 * s * s * (x.x2 * x.x2 + h * h);
    return {1.0 + n / ab, std::abs(lhs - rhs) / (ab * ab)};
}

std::vector<GroundPoint> solve_composition(GroundPoint x, SlowTime s, double h) {
    const ProlateCoords p = to_prolate(x, s, h);
    const double sv = s.value();
    const double pi = std::numbers::pi;
    const double cos_theta = std::cos(p.theta);

    std::vector<GroundPoint> out;
    const double tol = 1e-9 * (1.0 + std::hypot(x.x1, x.x2));
    for (double phi : {p.phi, -p.phi, pi - p.phi, pi + p.phi}) {
        const GroundPoint y{sv * std::cosh(p.rho) * std::cos(phi),
                            sv * std::sinh(p.rho) * std::sin(phi) * cos_theta};
        const bool seen = std::any_of(out.begin(), out.end(), [&](const GroundPoint& q) {
            return std::abs(q.x1 - y.x1) <= tol && std::abs(q.x2 - y.x2) <= tol;
        });
        if (!seen) out.push_back(y);
    }
    return out;
}

namespace {

// R and dR/ds at y together with their gradient norms in y.
struct RangeDoppler {
    double r, d, grad_r, grad_d;
};

RangeDoppler range_doppler(double s, double h, double y1, double y2) {
    const LegTerms g = legs(y1, y2, s, h);
    const double A3 = g.A * g.A * g.A, B3 = g.B * g.B * g.B;
    const double r1 = g.dm / g.A + g.dp / g.B, r2 = y2 / g.A + y2 / g.B;
    const double d = -g.dm / g.A + g.dp / g.B;
    const double d1 = -g.c / A3 + g.c / B3;
    const double d2 = g.dm * y2 / A3 - g.dp * y2 / B3;
    return {g.A + g.B, d, std::hypot(r1, r2), std::hypot(d1, d2)};
}

}  // namespace

GridSearchResult composition_grid_search(GroundPoint x, SlowTime s, double h, double half_extent,
                                         std::size_t n, double cluster_cells) {
    const double sv = s.value();
    const RangeDoppler ref = range_doppler(sv, h, x.x1, x.x2);
    GridSearchResult res;
    const GridAxis axis(-half_extent, half_extent, n);
    res.pitch = axis.step();

    std::vector<GroundPoint> hits;
    for (std::size_t j = 0; j < n; ++j) {
        const double y2 = axis.node(j);
        for (std::size_t i = 0; i < n; ++i) {
            const double y1 = axis.node(i);
            const RangeDoppler q = range_doppler(sv, h, y1, y2);
            if (std::abs(q.r - ref.r) > q.grad_r * res.pitch) continue;
            if (std::abs(q.d - ref.d) > q.grad_d * res.pitch) continue;
            hits.push_back({y1, y2});
        }
    }
    res.hits = hits.size();

    // Single-linkage clustering by union-find.
    std::vector<std::size_t> parent(hits.size());
    for (std::size_t k = 0; k < parent.size(); ++k) parent[k] = k;
    auto root = [&](std::size_t k) {
        while (parent[k] != k) k = parent[k] = parent[parent[k]];
        return k;
    };
    const double join = cluster_cells * res.pitch;
    for (std::size_t a = 0; a < hits.size(); ++a) {
        for (std::size_t b = a + 1; b < hits.size(); ++b) {
            if (std::hypot(hits[a].x1 - hits[b].x1, hits[a].x2 - hits[b].x2) <= join) {
                parent[root(a)] = root(b);
            }
        }
    }
    std::vector<std::size_t> label(hits.size(), hits.size());
    std::vector<double> sx, sy, cnt;
    for (std::size_t k = 0; k < hits.size(); ++k) {
        const std::size_t r = root(k);
        if (label[r] == hits.size()) {
            label[r] = sx.size();
            sx.push_back(0.0);
            sy.push_back(0.0);
            cnt.push_back(0.0);
        }
        sx[label[r]] += hits[k].x1;
        sy[label[r]] += hits[k].x2;
        cnt[label[r]] += 1.0;
    }
    for (std::size_t c = 0; c < sx.size(); ++c) res.clusters.push_back({sx[c] / cnt[c], sy[c] / cnt[c]});
    return res;
}

const char* to_string(LagrangianLabel l) noexcept {
    switch (l) {
        case LagrangianLabel::Delta: return "Delta";
        case LagrangianLabel::C1: return "C1";
        case LagrangianLabel::C2: return "C2";
        case LagrangianLabel::C3: return "C3";
    }
    return "?";
}

LagrangianGraph LagrangianGraph::of(LagrangianLabel l) noexcept {
    switch (l) {
        case LagrangianLabel::C1: return {l, {1, -1, 1, -1}};
        case LagrangianLabel::C2: return {l, {-1, 1, -1, 1}};
        case LagrangianLabel::C3: return {l, {-1, -1, -1, -1}};
        case LagrangianLabel::Delta: break;
    }
    return {LagrangianLabel::Delta, {1, 1, 1, 1}};
}

Eigen::Matrix4d LagrangianGraph::map() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    for (int k = 0; k < 4; ++k) m(k, k) = signs[k];
    return m;
}

LagrangianIntersection intersect_lagrangians(const LagrangianGraph& a, const LagrangianGraph& b) {
    if (a.label == b.label) throw DomainError("intersection needs two distinct Lagrangians");

    // (x, xi, Ma z) = (x, xi, Mb z)  <=>  z in ker(Ma - Mb).
    const Eigen::Matrix4d diff = a.map() - b.map();
    const Eigen::FullPivLU<Eigen::Matrix4d> lu(diff);
    const Eigen::MatrixXd kernel = lu.kernel();
    const int dim = lu.dimensionOfKernel();

    static const char* names[4] = {"x1=0", "x2=0", "xi1=0", "xi2=0"};
    LagrangianIntersection r;
    bool xi_free = false;
    for (int k = 0; k < 4; ++k) {
        // Coordinate k is forced to zero when it vanishes on the whole kernel.
        const bool forced = dim == 0 || kernel.row(k).norm() < 1e-12;
        if (forced) {
            r.conditions.emplace_back(names[k]);
        } else if (k >= 2) {
            xi_free = true;
        }
    }
    // The zero section is excluded from phase space.
    r.empty = !xi_free;
    r.dimension = r.empty ? 0 : dim;
    r.codimension = r.empty ? 0 : 4 - dim;
    if (r.empty) r.conditions.clear();
    return r;
}

std::vector<CanonicalPoint> sample_points(SampleKind kind, std::size_t n, std::uint64_t seed,
                                          const SampleRanges& r) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> us(r.s_min, r.s_max);
    std::uniform_real_distribution<double> ux(r.x_min, r.x_max);
    std::uniform_real_distribution<double> uw(r.omega_min, r.omega_max);
    std::bernoulli_distribution coin(0.5);
    auto sign = [&] { return coin(rng) ? 1.0 : -1.0; };

    std::vector<CanonicalPoint> pts;
    pts.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = us(rng);
        const double a = sign() * ux(rng);
        const double b = sign() * ux(rng);
        const double w = sign() * uw(rng);
        GroundPoint x{a, b};
        if (kind == SampleKind::Sigma1) x.x2 = 0.0;
        if (kind == SampleKind::Sigma2) x.x1 = 0.0;
        pts.push_back(canonical_point(SlowTime(s), x, w, r.h));
    }
    return pts;
}

void write_diagnostics_csv(std::ostream& os, const std::vector<ProjectionDiagnostics>& rows) {
    os << "projection,s,x1,x2,omega,det,closed_form_det,rank,sigma,verdict\n";
    os << std::setprecision(17);
    for (const auto& d : rows) {
        os << to_string(d.which) << ',' << d.point.s << ',' << d.point.x.x1 << ',' << d.point.x.x2
           << ',' << d.point.omega << ',' << d.det << ',' << d.closed_form_det << ','
           << d.numerical_rank << ',' << to_string(d.on_sigma) << ',' << to_string(d.verdict) << '\n';
    }
}

}  // namespace cmsar
