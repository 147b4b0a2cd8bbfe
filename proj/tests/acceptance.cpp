// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include "oracles.hpp"

#include "cmsar/backprojection.hpp"
#include "cmsar/forward_model.hpp"
#include "cmsar/identities.hpp"
#include "cmsar/microlocal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace cmsar;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Pinned limits.
constexpr double kAdjointTol = 1e-12;
constexpr double kAdjointSeconds = 10.0;
constexpr double kPeakThreshold = 0.2;
constexpr std::size_t kPeakRadius = 4;
constexpr double kRatioLo = 0.5, kRatioHi = 2.0;
constexpr double kMirrorTol = 1e-10;
constexpr double kPipelineSeconds = 60.0;
constexpr double kFdDetTol = 1e-6;
constexpr double kDetAgreementTol = 1e-12;
constexpr double kClassifySeconds = 5.0;
constexpr double kMatchPitches = 3.0;
constexpr double kNonvanishingTol = 1e-10;
constexpr double kIdentityTol = 1e-8;
constexpr double kGeneratorTol = 1e-12;
constexpr double kEllipseTol = 1e-12;

Outcome ac1_adjoint() {
    const AcquisitionConfig cfg;
    oracle::Rng rng(1001);
    Timer timer;
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        ReflectivityGrid v(cfg.x1, cfg.x2);
        for (double& a : v.values()) a = rng.uniform(-1.0, 1.0);
        Sinogram d(cfg.s, cfg.t);
        for (double& a : d.values()) a = rng.uniform(-1.0, 1.0);
        const Sinogram fv = apply_forward(v, cfg);
        const ReflectivityGrid fd = apply_adjoint(d, cfg);
        worst = std::max(worst, std::abs(inner_product(fv, d) - inner_product(v, fd)) / (norm(fv) * norm(d)));
    }
    const double t = timer.seconds();
    return {worst < kAdjointTol && t < kAdjointSeconds,
            fmt("max defect %.3e over 20 pairs at %zux%zu scene, %zux%zu data, %.2f s (limits %.0e, %.0f s)", worst,
                cfg.x1.size(), cfg.x2.size(), cfg.s.size(), cfg.t.size(), t, kAdjointTol, kAdjointSeconds)};
}

Outcome ac2_artifacts() {
    const AcquisitionConfig cfg;
    const GroundPoint y{0.45, 0.3};
    Timer timer;
    SceneSpec spec;
    spec.points.push_back({y, 1.0});
    const ReflectivityGrid img = apply_normal(rasterize(spec, cfg.x1, cfg.x2), cfg);
    const PeakReport rep = find_peaks(img, kPeakRadius, kPeakThreshold);
    const double t = timer.seconds();

    const GroundPoint targets[4] = {{y.x1, y.x2}, {y.x1, -y.x2}, {-y.x1, y.x2}, {-y.x1, -y.x2}};
    std::vector<int> owner(rep.peaks.size(), -1);
    double worst_cells = 0.0;
    double mags[4] = {0.0, 0.0, 0.0, 0.0};
    bool matched = rep.peaks.size() == 4;
    for (int k = 0; k < 4 && matched; ++k) {
        int best = -1;
        double best_d = 1e300;
        for (std::size_t p = 0; p < rep.peaks.size(); ++p) {
            const double d = std::max(std::abs(rep.peaks[p].location.x1 - targets[k].x1) / cfg.x1.step(),
                                      std::abs(rep.peaks[p].location.x2 - targets[k].x2) / cfg.x2.step());
            if (owner[p] < 0 && d < best_d) {
                best_d = d;
                best = static_cast<int>(p);
            }
        }
        if (best < 0 || best_d > 1.0) {
            matched = false;
            worst_cells = std::max(worst_cells, best_d);
            break;
        }
        owner[best] = k;
        worst_cells = std::max(worst_cells, best_d);
        mags[k] = rep.peaks[best].magnitude;
    }
    double rlo = 1e300, rhi = 0.0, mirror = 1e300;
    if (matched) {
        for (int k = 1; k < 4; ++k) {
            rlo = std::min(rlo, mags[k] / mags[0]);
            rhi = std::max(rhi, mags[k] / mags[0]);
        }
        mirror = std::abs(mags[1] - mags[0]) / mags[0];
    }
    const bool ratios = matched && rlo >= kRatioLo && rhi <= kRatioHi;
    const bool ok = matched && ratios && mirror <= kMirrorTol && t < kPipelineSeconds;
    return {ok, fmt("point (%.2f, %.2f): %zu peaks above %.0f%% (radius %zu), worst offset %.2f cells, "
                    "ratios [%.3f, %.3f], chi1 vs true %.1e, %.2f s (limits 1 cell, [%.1f, %.1f], %.0e, %.0f s)",
                    y.x1, y.x2, rep.peaks.size(), 100.0 * kPeakThreshold, kPeakRadius, worst_cells, rlo, rhi,
                    mirror, t, kRatioLo, kRatioHi, kMirrorTol, kPipelineSeconds)};
}

CanonicalPoint random_point(oracle::Rng& rng, int zero_coord) {
    const double s = rng.uniform(0.2, 3.0), w = rng.sign() * rng.uniform(0.5, 4.0), h = rng.uniform(0.5, 2.0);
    double x1 = rng.sign() * rng.uniform(0.05, 3.0), x2 = rng.sign() * rng.uniform(0.05, 3.0);
    if (zero_coord == 1) x2 = 0.0;
    if (zero_coord == 2) x1 = 0.0;
    return canonical_point(SlowTime(s), {x1, x2}, w, h);
}

Outcome ac3_jacobian() {
    oracle::Rng rng(1003);
    double worst_fd = 0.0, worst_lr = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const CanonicalPoint p = random_point(rng, 0);
        const double h = p.h;
        const auto j = oracle::fd_jacobian([h](const oracle::Vec4& q) { return oracle::left_map(q, h); },
                                           {p.x.x1, p.x.x2, p.s, p.omega}, 1e-5);
        // Same orientation convention as the closed form.
        const double fd = -oracle::det4(j);
        const double cf = det_closed_form(p.x.x1, p.x.x2, p.s, p.omega, p.h);
        worst_fd = std::max(worst_fd, std::abs(fd - cf) / std::abs(cf));
    }
    std::size_t sampled = 0;
    for (int kind = 0; kind < 3; ++kind) {
        for (int k = 0; k < 1000; ++k) {
            const CanonicalPoint p = random_point(rng, kind);
            const double dl = jacobian_left(p).det, dr = jacobian_right(p).det;
            worst_lr = std::max(worst_lr, std::abs(dl - dr) / std::max(1.0, std::abs(dl)));
            ++sampled;
        }
    }
    return {worst_fd < kFdDetTol && worst_lr < kDetAgreementTol,
            fmt("closed form vs central differences: max rel error %.2e over 1000 off-sigma points; "
                "det left vs right: max %.2e over %zu points (limits %.0e, %.0e)",
                worst_fd, worst_lr, sampled, kFdDetTol, kDetAgreementTol)};
}

Outcome ac4_classification() {
    oracle::Rng rng(1004);
    std::vector<CanonicalPoint> sigma, off;
    for (int k = 0; k < 5000; ++k) sigma.push_back(random_point(rng, 1));
    for (int k = 0; k < 5000; ++k) sigma.push_back(random_point(rng, 2));
    for (int k = 0; k < 10000; ++k) off.push_back(random_point(rng, 0));

    ClassifyOptions opts;
    Timer timer;
    std::size_t fold = 0, blowdown = 0;
    double worst_kernel = 0.0;
    std::vector<ProjectionDiagnostics> left;
    left.reserve(sigma.size());
    for (const CanonicalPoint& p : sigma) {
        left.push_back(jacobian_left(p, opts));
        fold += left.back().verdict == Verdict::Fold;
        blowdown += jacobian_right(p, opts).verdict == Verdict::Blowdown;
    }
    const double t = timer.seconds();
    // The reported left kernel must annihilate an independently built Jacobian.
    for (const ProjectionDiagnostics& d : left) {
        const double h = d.point.h;
        const auto j = oracle::fd_jacobian([h](const oracle::Vec4& q) { return oracle::left_map(q, h); },
                                           {d.point.x.x1, d.point.x.x2, d.point.s, d.point.omega}, 1e-6);
        double jk = 0.0, jn = 0.0;
        for (int r = 0; r < 4; ++r) {
            double row = 0.0;
            for (int c = 0; c < 4; ++c) {
                row += j[r][c] * d.kernel_dir(c);
                jn = std::max(jn, std::abs(j[r][c]));
            }
            jk = std::max(jk, std::abs(row));
        }
        worst_kernel = std::max(worst_kernel, jk / jn);
    }
    std::size_t wrong_off = 0;
    for (const CanonicalPoint& p : off) {
        wrong_off += jacobian_left(p, opts).verdict != Verdict::FullRank;
        wrong_off += jacobian_right(p, opts).verdict != Verdict::FullRank;
    }
    const std::size_t n = sigma.size();
    const bool ok = fold == n && blowdown == n && wrong_off == 0 && worst_kernel < 1e-6 && t < kClassifySeconds;
    return {ok, fmt("sigma points: fold %zu/%zu (left), blowdown %zu/%zu (right) in %.2f s; off-sigma "
                    "misclassified %zu of %zu verdicts; left kernel residual vs oracle %.1e (limits 100%%, 0, %.0f s)",
                    fold, n, blowdown, n, t, wrong_off, 2 * off.size(), worst_kernel, kClassifySeconds)};
}

Outcome ac5_composition() {
    oracle::Rng rng(1005);
    const double h = 1.0, half = 5.0;
    const std::size_t nodes = 2001;
    const double pitch = 2.0 * half / static_cast<double>(nodes - 1);
    std::size_t agree = 0, extraneous = 0, missing = 0;
    double set_err = 0.0;
    for (int k = 0; k < 10; ++k) {
        const GroundPoint x{rng.sign() * rng.uniform(0.2, 4.0), rng.sign() * rng.uniform(0.2, 4.0)};
        const double s = rng.uniform(0.2, 3.0);
        const auto sol = solve_composition(x, SlowTime(s), h);
        double err = sol.size() == 4 ? 0.0 : 1.0;
        for (double a : {1.0, -1.0}) {
            for (double b : {1.0, -1.0}) {
                double best = 1e300;
                for (const auto& y : sol) best = std::min(best, std::hypot(y.x1 - a * x.x1, y.x2 - b * x.x2));
                err = std::max(err, best / (1.0 + std::hypot(x.x1, x.x2)));
            }
        }
        set_err = std::max(set_err, err);
        const auto clusters = oracle::composition_brute_force({x.x1, x.x2}, s, h, half, nodes);
        std::size_t ex = 0, mi = 0;
        for (const auto& c : clusters) {
            ex += std::none_of(sol.begin(), sol.end(), [&](const GroundPoint& y) {
                return std::hypot(c.centre.x1 - y.x1, c.centre.x2 - y.x2) <= kMatchPitches * pitch;
            });
        }
        for (const auto& y : sol) {
            mi += std::none_of(clusters.begin(), clusters.end(), [&](const oracle::Cluster& c) {
                return std::hypot(c.centre.x1 - y.x1, c.centre.x2 - y.x2) <= kMatchPitches * pitch;
            });
        }
        extraneous += ex;
        missing += mi;
        agree += ex == 0 && mi == 0 && clusters.size() == sol.size() && err < 1e-12;
    }
    return {agree == 10, fmt("%zu/10 instances agree with the %zux%zu grid search, %zu extraneous, %zu missing; "
                             "output vs {(+-x1, +-x2)} max error %.1e (match radius %.0f pitches)",
                             agree, nodes, nodes, extraneous, missing, set_err, kMatchPitches)};
}

Outcome ac6_nonvanishing() {
    oracle::Rng rng(1006);
    double min_value = 1e300, worst = 0.0, worst_oracle = 0.0;
    for (int k = 0; k < 100000; ++k) {
        const double s = 10.0 - rng.uniform(0.0, 10.0);  // (0, 10]
        const double h = 5.0 - rng.uniform(0.0, 5.0);    // (0, 5]
        const double r = 10.0 * std::sqrt(rng.uniform(0.0, 1.0)), a = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double x1 = r * std::cos(a), x2 = r * std::sin(a);
        const NonvanishingReport rep = nonvanishing_check(s, {x1, x2}, h);
        min_value = std::min(min_value, rep.value);
        worst = std::max(worst, rep.identity_residual);
        const long double A = oracle::leg_t_ld(s, h, x1, x2), B = oracle::leg_r_ld(s, h, x1, x2);
        const long double n = static_cast<long double>(x1) * x1 + static_cast<long double>(x2) * x2 +
                              static_cast<long double>(h) * h - static_cast<long double>(s) * s;
        const long double lhs = (A * B) * (A * B) - n * n;
        const long double rhs = 4.0L * s * s * (static_cast<long double>(x2) * x2 + static_cast<long double>(h) * h);
        worst_oracle = std::max(worst_oracle, static_cast<double>(std::abs(lhs - rhs) / ((A * B) * (A * B))));
    }
    return {min_value > 0.0 && worst < kNonvanishingTol && worst_oracle < kNonvanishingTol,
            fmt("1e5 samples: min quantity %.3e, identity residual %.1e (library), %.1e (oracle) (limit %.0e)",
                min_value, worst, worst_oracle, kNonvanishingTol)};
}

Outcome ac7_identities() {
    oracle::Rng rng(1007);
    double worst[7] = {0.0};
    std::size_t accepted = 0;
    while (accepted < 1000) {
        const double s = rng.uniform(0.2, 3.0), h = rng.uniform(0.5, 2.0);
        const double w = rng.sign() * rng.uniform(0.5, 5.0), sx = rng.sign();
        const GroundPoint x{sx * rng.uniform(0.1, 3.0), rng.uniform(-3.0, 3.0)};
        const GroundPoint y{sx * rng.uniform(0.1, 3.0), rng.uniform(-3.0, 3.0)};
        const auto p = KernelPhasePoint::make(x, y, s, w, h);
        if (!admissible(p)) continue;
        ++accepted;
        // Oracle side: covectors and phase derivatives rebuilt from the legs.
        const double xi1 = -w * oracle::range_dx1(s, h, x.x1, x.x2), xi2 = -w * oracle::range_dx2(s, h, x.x1, x.x2);
        const double eta1 = -w * oracle::range_dx1(s, h, y.x1, y.x2), eta2 = -w * oracle::range_dx2(s, h, y.x1, y.x2);
        const double lhs[7] = {0.0,
                               x.x1 - y.x1,
                               x.x2 * x.x2 - y.x2 * y.x2,
                               xi1 - eta1,
                               (x.x2 + y.x2) * (xi2 - eta2),
                               (x.x2 - y.x2) * (xi2 + eta2),
                               xi2 * xi2 - eta2 * eta2};
        const double u = oracle::range_ds(s, h, y.x1, y.x2) - oracle::range_ds(s, h, x.x1, x.x2);
        const double v = oracle::range(s, h, y.x1, y.x2) - oracle::range(s, h, x.x1, x.x2);
        for (int i = 1; i <= 6; ++i) {
            const auto [f1, f2] = i == 1 ? identity1_cartesian_coefficients(p) : identity_coefficients(i, p);
            const double scale = i <= 2 ? 1.0 : i <= 5 ? w : w * w;
            worst[i] = std::max(worst[i], std::abs(lhs[i] - scale * (f1 * u + f2 * v)) / std::max(1.0, std::abs(lhs[i])));
            worst[i] = std::max(worst[i], verify_identity(i, p).residual);
        }
    }
    double gen = 0.0;
    using G = Generator;
    for (int k = 0; k < 1000; ++k) {
        const double s = rng.uniform(0.2, 3.0), h = rng.uniform(0.5, 2.0), w = rng.sign() * rng.uniform(0.5, 5.0);
        const GroundPoint x{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
        const GroundPoint ys[4] = {x, {x.x1, -x.x2}, {-x.x1, x.x2}, {-x.x1, -x.x2}};
        for (int l = 0; l < 4; ++l) {
            const auto p = KernelPhasePoint::make(x, ys[l], s, w, h);
            const auto c = kernel_covectors(p);
            const std::vector<G> gens = l < 2 ? std::vector<G>{G::P1, G::P2, G::P3, G::P4, G::P5, G::P6}
                                              : std::vector<G>{G::R1, G::R2, G::P2, G::P4, G::P5, G::P6};
            for (G g : gens) gen = std::max(gen, std::abs(generator_eval(g, p, c)));
        }
    }
    double top = 0.0;
    for (int i = 1; i <= 6; ++i) top = std::max(top, worst[i]);
    return {top < kIdentityTol && gen <= kGeneratorTol,
            fmt("max residuals over 1000 admissible points: %.1e %.1e %.1e %.1e %.1e %.1e; generators on "
                "their Lagrangians max |value| %.1e (limits %.0e, %.0e)",
                worst[1], worst[2], worst[3], worst[4], worst[5], worst[6], gen, kIdentityTol, kGeneratorTol)};
}

Outcome ac8_cutoff() {
    oracle::Rng rng(1008);
    double worst_point = 0.0, worst_eq = 0.0, worst_ratio = 0.0;
    bool contained = true;
    for (int k = 0; k < 1000; ++k) {
        const double s = rng.uniform(0.05, 5.0), h = rng.uniform(0.05, 5.0), e = rng.uniform(0.001, 0.5);
        const CutoffConstantReport r = cutoff_constant_check(s, h, e);
        const double t = std::sqrt(4.0 * (s * s + h * h) + 36.0 * e * e);
        worst_point = std::max(worst_point, std::abs(oracle::range(s, h, 0.0, 3.0 * e) - t) / t);
        worst_point = std::max(worst_point, r.through_point_residual);
        worst_eq = std::max(worst_eq, r.ellipse_equation_residual);
        const double ratio = static_cast<double>(oracle::cutoff_margin(s, h, e)) * h / (e * e);
        worst_ratio = std::max({worst_ratio, ratio, r.margin_ratio});
        contained = contained && r.band_contains_margin && ratio < 20.0;
    }
    return {worst_point < kEllipseTol && worst_eq < kEllipseTol && worst_ratio < 18.0 && contained,
            fmt("1000 samples: through (0, 3 eps) max rel residual %.1e, ellipse equation %.1e; max margin ratio "
                "%.4f < 18 < 20 (limit %.0e)",
                worst_point, worst_eq, worst_ratio, kEllipseTol)};
}

Outcome ac9_lagrangians() {
    using L = LagrangianLabel;
    struct Row {
        L a, b;
        bool empty;
        std::set<std::string> conditions;
    };
    const Row table[] = {
        {L::Delta, L::C1, false, {"x2=0", "xi2=0"}}, {L::Delta, L::C2, false, {"x1=0", "xi1=0"}},
        {L::C1, L::C3, false, {"x1=0", "xi1=0"}},    {L::C2, L::C3, false, {"x2=0", "xi2=0"}},
        {L::Delta, L::C3, true, {}},                 {L::C1, L::C2, true, {}},
    };
    std::size_t ok = 0;
    std::ostringstream rows;
    for (const Row& r : table) {
        const auto res = intersect_lagrangians(LagrangianGraph::of(r.a), LagrangianGraph::of(r.b));
        const bool good = res.empty == r.empty &&
                          (r.empty || (res.codimension == 2 &&
                                       std::set<std::string>(res.conditions.begin(), res.conditions.end()) ==
                                           r.conditions));
        ok += good;
        rows << " (" << to_string(r.a) << "," << to_string(r.b) << ")=";
        if (res.empty) {
            rows << "empty";
        } else {
            rows << "codim" << res.codimension;
            for (const auto& c : res.conditions) rows << ' ' << c;
        }
    }
    return {ok == 6, fmt("%zu/6 pairs:", ok) + rows.str()};
}

}  // namespace

int main() {
    struct Criterion {
        const char* id;
        const char* name;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {"AC1", "adjoint exactness", ac1_adjoint},
        {"AC2", "artifact reproduction", ac2_artifacts},
        {"AC3", "Jacobian fidelity", ac3_jacobian},
        {"AC4", "singularity classification", ac4_classification},
        {"AC5", "composition oracle", ac5_composition},
        {"AC6", "nonvanishing quantity", ac6_nonvanishing},
        {"AC7", "kernel identities", ac7_identities},
        {"AC8", "g-band constant", ac8_cutoff},
        {"AC9", "Lagrangian intersections", ac9_lagrangians},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %s %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
    return failed == 0 ? 0 : 1;
}
