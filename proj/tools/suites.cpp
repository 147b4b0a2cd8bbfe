#include "suites.hpp"

#include "cmsar/backprojection.hpp"
#include "cmsar/error.hpp"
#include "cmsar/forward_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

namespace cmsar::cli {

bool SuiteResult::pass() const {
    return std::all_of(lines.begin(), lines.end(), [](const CheckLine& l) { return l.pass; });
}

void SuiteResult::add(std::string name, bool ok, std::string detail) {
    lines.push_back({std::move(name), ok, std::move(detail)});
}

void SuiteResult::print(std::ostream& os) const {
    for (const auto& l : lines) {
        os << (l.pass ? "PASS " : "FAIL ") << l.name << ": " << l.detail << '\n';
    }
}

namespace {

std::string sci(double v) {
    std::ostringstream ss;
    ss << std::scientific << std::setprecision(3) << v;
    return ss.str();
}

std::ofstream open_csv(const std::filesystem::path& dir, const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw IoError("cannot write " + (dir / name).string());
    f << std::setprecision(17);
    return f;
}

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); }
    double sign() { return std::bernoulli_distribution(0.5)(gen) ? 1.0 : -1.0; }
};

}  // namespace

SuiteResult run_diagnose(const AcquisitionConfig& cfg, const DiagnoseOptions& opts,
                         const std::filesystem::path& out) {
    ClassifyOptions copts;
    copts.epsilon_prime = cfg.epsilon / 4.0;
    SampleRanges ranges;
    ranges.h = cfg.h;

    SuiteResult res;
    std::vector<ProjectionDiagnostics> rows;
    const struct {
        SampleKind kind;
        const char* name;
        Verdict left, right;
    } kinds[] = {{SampleKind::Sigma1, "sigma1", Verdict::Fold, Verdict::Blowdown},
                 {SampleKind::Sigma2, "sigma2", Verdict::Fold, Verdict::Blowdown},
                 {SampleKind::OffSigma, "off-sigma", Verdict::FullRank, Verdict::FullRank}};

    std::uint64_t seed = opts.seed;
    for (const auto& k : kinds) {
        const auto pts = sample_points(k.kind, opts.samples, seed++, ranges);
        std::size_t ok_left = 0, ok_right = 0;
        double det_err = 0.0;
        for (const auto& p : pts) {
            const auto l = jacobian_left(p, copts);
            const auto r = jacobian_right(p, copts);
            ok_left += l.verdict == k.left;
            ok_right += r.verdict == k.right;
            if (k.kind == SampleKind::OffSigma) {
                det_err = std::max(det_err, std::abs(l.det - l.closed_form_det) / std::abs(l.closed_form_det));
            }
            rows.push_back(l);
            rows.push_back(r);
        }
        const std::size_t n = pts.size();
        res.add(std::string(k.name) + " left " + to_string(k.left), ok_left == n,
                std::to_string(ok_left) + "/" + std::to_string(n));
        res.add(std::string(k.name) + " right " + to_string(k.right), ok_right == n,
                std::to_string(ok_right) + "/" + std::to_string(n));
        if (k.kind == SampleKind::OffSigma) {
            res.add("off-sigma det vs closed form", det_err < 1e-10, "max rel err " + sci(det_err));
        }
    }
    if (!out.empty()) {
        auto f = open_csv(out, "diagnostics.csv");
        write_diagnostics_csv(f, rows);
    }
    return res;
}

namespace {

void identity_suite(const VerifyOptions& opts, SuiteResult& res, const std::filesystem::path& out) {
    Rng rng(opts.seed);
    std::vector<IdentityResidual> rows;
    double worst[7] = {0.0};
    std::size_t accepted = 0, drawn = 0;
    while (accepted < opts.identity_samples && drawn < 100 * opts.identity_samples) {
        ++drawn;
        const double s = rng.uniform(0.2, 3.0), h = rng.uniform(0.5, 2.0);
        const double w = rng.sign() * rng.uniform(0.5, 5.0);
        const double sx = rng.sign();
        const GroundPoint x{sx * rng.uniform(0.1, 3.0), rng.uniform(-3.0, 3.0)};
        const GroundPoint y{sx * rng.uniform(0.1, 3.0), rng.uniform(-3.0, 3.0)};
        const auto p = KernelPhasePoint::make(x, y, s, w, h);
        if (!admissible(p)) continue;
        ++accepted;
        for (int i = 1; i <= 6; ++i) {
            const auto r = verify_identity(i, p);
            worst[i] = std::max(worst[i], r.residual);
            rows.push_back(r);
        }
    }
    for (int i = 1; i <= 6; ++i) {
        res.add("identity " + std::to_string(i), accepted == opts.identity_samples && worst[i] < 1e-8,
                "max residual " + sci(worst[i]) + " over " + std::to_string(accepted) + " points");
    }
    if (!out.empty()) {
        auto f = open_csv(out, "identity_residuals.csv");
        write_identity_csv(f, rows);
    }
}

std::string generator_name(Generator g) {
    static const char* names[] = {"p1", "p2", "p3", "p4", "p5", "p6", "r1", "r2"};
    return names[static_cast<int>(g)];
}

void generator_suite(const VerifyOptions& opts, SuiteResult& res, const std::filesystem::path& out) {
    using G = Generator;
    const std::vector<G> on_delta_c1 = {G::P1, G::P2, G::P3, G::P4, G::P5, G::P6};
    const std::vector<G> on_c2_c3 = {G::R1, G::R2, G::P2, G::P4, G::P5, G::P6};
    const LagrangianLabel labels[] = {LagrangianLabel::Delta, LagrangianLabel::C1, LagrangianLabel::C2,
                                      LagrangianLabel::C3};
    Rng rng(opts.seed + 101);
    std::ofstream csv;
    if (!out.empty()) {
        csv = open_csv(out, "generators.csv");
        csv << "lagrangian,generator,max_abs\n";
    }
    for (LagrangianLabel label : labels) {
        const auto graph = LagrangianGraph::of(label);
        const auto& gens = (label == LagrangianLabel::Delta || label == LagrangianLabel::C1) ? on_delta_c1
                                                                                               : on_c2_c3;
        std::vector<double> worst(gens.size(), 0.0);
        for (std::size_t k = 0; k < opts.generator_samples; ++k) {
            const double s = rng.uniform(0.2, 3.0), h = rng.uniform(0.5, 2.0);
            const double w = rng.sign() * rng.uniform(0.5, 5.0);
            const GroundPoint x{rng.sign() * rng.uniform(0.05, 3.0), rng.uniform(-3.0, 3.0)};
            const GroundPoint y{graph.signs[0] * x.x1, graph.signs[1] * x.x2};
            const auto p = KernelPhasePoint::make(x, y, s, w, h);
            const auto c = kernel_covectors(p);
            for (std::size_t g = 0; g < gens.size(); ++g) {
                worst[g] = std::max(worst[g], std::abs(generator_eval(gens[g], p, c)));
            }
        }
        double m = 0.0;
        for (std::size_t g = 0; g < gens.size(); ++g) {
            m = std::max(m, worst[g]);
            if (csv.is_open()) csv << to_string(label) << ',' << generator_name(gens[g]) << ',' << worst[g] << '\n';
        }
        res.add(std::string("generators vanish on ") + to_string(label), m <= 1e-12, "max |value| " + sci(m));
    }
}

void composition_suite(const AcquisitionConfig& cfg, const VerifyOptions& opts, SuiteResult& res,
                       const std::filesystem::path& out) {
    Rng rng(opts.seed + 202);
    std::ofstream csv;
    if (!out.empty()) {
        csv = open_csv(out, "composition.csv");
        csv << "instance,x1,x2,s,solutions,clusters,extraneous,missing,set_error\n";
    }
    std::size_t bad = 0, extraneous_total = 0;
    for (std::size_t k = 0; k < opts.composition_instances; ++k) {
        const GroundPoint x{rng.sign() * rng.uniform(0.2, 4.0), rng.sign() * rng.uniform(0.2, 4.0)};
        const double s = rng.uniform(0.2, 3.0);
        const auto sol = solve_composition(x, SlowTime(s), cfg.h);

        // Returned set against {(+-x1, +-x2)}.
        double set_err = sol.size() == 4 ? 0.0 : 1.0;
        for (double a : {1.0, -1.0}) {
            for (double b : {1.0, -1.0}) {
                double best = 1e300;
                for (const auto& y : sol) best = std::min(best, std::max(std::abs(y.x1 - a * x.x1), std::abs(y.x2 - b * x.x2)));
                set_err = std::max(set_err, best / (1.0 + std::hypot(x.x1, x.x2)));
            }
        }

        const auto grid = composition_grid_search(x, SlowTime(s), cfg.h, 5.0, opts.grid_nodes);
        const double match = 3.0 * grid.pitch;
        std::size_t extraneous = 0, missing = 0;
        for (const auto& c : grid.clusters) {
            const bool near = std::any_of(sol.begin(), sol.end(), [&](const GroundPoint& y) {
                return std::hypot(c.x1 - y.x1, c.x2 - y.x2) <= match;
            });
            extraneous += !near;
        }
        for (const auto& y : sol) {
            const bool near = std::any_of(grid.clusters.begin(), grid.clusters.end(), [&](const GroundPoint& c) {
                return std::hypot(c.x1 - y.x1, c.x2 - y.x2) <= match;
            });
            missing += !near;
        }
        extraneous_total += extraneous;
        const bool ok = extraneous == 0 && missing == 0 && set_err < 1e-12;
        bad += !ok;
        if (csv.is_open()) {
            csv << k << ',' << x.x1 << ',' << x.x2 << ',' << s << ',' << sol.size() << ','
                << grid.clusters.size() << ',' << extraneous << ',' << missing << ',' << set_err << '\n';
        }
    }
    res.add("composition oracle", bad == 0,
            std::to_string(opts.composition_instances - bad) + "/" + std::to_string(opts.composition_instances) +
                " instances agree, " + std::to_string(extraneous_total) + " extraneous solutions");
}

void nonvanishing_suite(const VerifyOptions& opts, SuiteResult& res) {
    Rng rng(opts.seed + 303);
    double min_value = 1e300, worst = 0.0;
    for (std::size_t k = 0; k < opts.nonvanishing_samples; ++k) {
        double s = rng.uniform(0.0, 10.0);
        if (s == 0.0) s = 10.0;
        double h = rng.uniform(0.0, 5.0);
        if (h == 0.0) h = 5.0;
        const double r = 10.0 * std::sqrt(rng.uniform(0.0, 1.0));
        const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const auto rep = nonvanishing_check(s, {r * std::cos(a), r * std::sin(a)}, h);
        min_value = std::min(min_value, rep.value);
        worst = std::max(worst, rep.identity_residual);
    }
    res.add("nonvanishing quantity positive", min_value > 0.0, "min " + sci(min_value));
    res.add("nonvanishing polynomial identity", worst < 1e-10, "max rel residual " + sci(worst));
}

void cutoff_suite(const VerifyOptions& opts, SuiteResult& res, const std::filesystem::path& out) {
    Rng rng(opts.seed + 404);
    std::ofstream csv;
    if (!out.empty()) {
        csv = open_csv(out, "cutoff.csv");
        csv << "s,h,epsilon,t,semi_axis_x2,through_point_residual,ellipse_equation_residual,margin,margin_ratio\n";
    }
    double worst_point = 0.0, worst_eq = 0.0, worst_ratio = 0.0;
    bool contained = true;
    for (std::size_t k = 0; k < opts.cutoff_samples; ++k) {
        const double s = rng.uniform(0.05, 5.0), h = rng.uniform(0.05, 5.0), e = rng.uniform(0.001, 0.5);
        const auto r = cutoff_constant_check(s, h, e);
        worst_point = std::max(worst_point, r.through_point_residual);
        worst_eq = std::max(worst_eq, r.ellipse_equation_residual);
        worst_ratio = std::max(worst_ratio, r.margin_ratio);
        contained = contained && r.below_18 && r.band_contains_margin;
        if (csv.is_open()) {
            csv << s << ',' << h << ',' << e << ',' << r.t << ',' << r.semi_axis_x2 << ','
                << r.through_point_residual << ',' << r.ellipse_equation_residual << ',' << r.margin << ',' << r.margin_ratio << '\n';
        }
    }
    res.add("ellipse through (0, 3 eps)", worst_point < 1e-12 && worst_eq < 1e-12,
            "max range residual " + sci(worst_point) + ", max equation residual " + sci(worst_eq));
    res.add("margin ratio < 18 < 20", contained && worst_ratio < 18.0, "max ratio " + sci(worst_ratio));
}

void lagrangian_suite(SuiteResult& res, const std::filesystem::path& out) {
    using L = LagrangianLabel;
    const struct {
        L a, b;
        bool empty;
        std::vector<std::string> conditions;
    } table[] = {{L::Delta, L::C1, false, {"x2=0", "xi2=0"}}, {L::Delta, L::C2, false, {"x1=0", "xi1=0"}},
                 {L::C1, L::C3, false, {"x1=0", "xi1=0"}},    {L::C2, L::C3, false, {"x2=0", "xi2=0"}},
                 {L::Delta, L::C3, true, {}},                  {L::C1, L::C2, true, {}}};
    std::ofstream csv;
    if (!out.empty()) {
        csv = open_csv(out, "lagrangians.csv");
        csv << "a,b,empty,dimension,codimension,conditions\n";
    }
    std::size_t ok = 0;
    for (const auto& row : table) {
        const auto r = intersect_lagrangians(LagrangianGraph::of(row.a), LagrangianGraph::of(row.b));
        const bool good = r.empty == row.empty && r.conditions == row.conditions &&
                          (row.empty || r.codimension == 2);
        ok += good;
        if (csv.is_open()) {
            csv << to_string(row.a) << ',' << to_string(row.b) << ',' << r.empty << ',' << r.dimension << ','
                << r.codimension << ',';
            for (std::size_t k = 0; k < r.conditions.size(); ++k) csv << (k ? ";" : "") << r.conditions[k];
            csv << '\n';
        }
    }
    res.add("lagrangian intersection table", ok == std::size(table),
            std::to_string(ok) + "/" + std::to_string(std::size(table)) + " pairs");
}

}  // namespace

SuiteResult run_verify(const AcquisitionConfig& cfg, const VerifyOptions& opts,
                       const std::filesystem::path& out) {
    SuiteResult res;
    identity_suite(opts, res, out);
    generator_suite(opts, res, out);
    composition_suite(cfg, opts, res, out);
    nonvanishing_suite(opts, res);
    cutoff_suite(opts, res, out);
    lagrangian_suite(res, out);
    return res;
}

double adjoint_defect(const AcquisitionConfig& cfg, std::size_t pairs, std::uint64_t seed, unsigned workers) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < pairs; ++k) {
        ReflectivityGrid v(cfg.x1, cfg.x2);
        for (double& a : v.values()) a = u(gen);
        Sinogram d(cfg.s, cfg.t);
        for (double& a : d.values()) a = u(gen);
        const Sinogram fv = apply_forward(v, cfg, workers);
        const ReflectivityGrid fd = apply_adjoint(d, cfg, workers);
        const double lhs = inner_product(fv, d), rhs = inner_product(v, fd);
        worst = std::max(worst, std::abs(lhs - rhs) / (norm(fv) * norm(d)));
    }
    return worst;
}

}  // namespace cmsar::cli
