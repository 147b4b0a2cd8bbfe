#include "suites.hpp"

#include "cmsar/backprojection.hpp"
#include "cmsar/config.hpp"
#include "cmsar/error.hpp"
#include "cmsar/forward_model.hpp"
#include "cmsar/scene_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace cmsar;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitError = 2;

struct Common {
    std::string config;
    std::vector<std::string> overrides;
    std::string out = "out";
    std::uint64_t seed = 1;
    unsigned workers = 0;
    bool emit_pgm = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "Acquisition config (JSON)");
    cmd->add_option("--set", c.overrides, "Config override key=value (repeatable)");
    cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
    cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd->add_option("--workers", c.workers, "Worker threads (0: CMSAR_WORKERS or all cores)");
    cmd->add_flag("--emit-pgm", c.emit_pgm, "Also write PGM previews");
}

AcquisitionConfig resolve_config(const Common& c) {
    AcquisitionConfig cfg = c.config.empty() ? AcquisitionConfig{} : load_acquisition(c.config);
    for (const auto& o : c.overrides) apply_override(cfg, o);
    cfg.validate();
    return cfg;
}

fs::path prepare_out(const Common& c) {
    fs::path out(c.out);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create output directory " + out.string());
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << text)) throw IoError("cannot write " + path.string());
}

ReflectivityGrid sinogram_preview(const Sinogram& d) {
    // t across, s down.
    return ReflectivityGrid(d.t(), d.s(), std::vector<double>(d.values().begin(), d.values().end()),
                            GridKind::Image);
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string scene;
    std::size_t random_points = 0;
    bool self_test = false;
};

int simulate(const Common& c, const SimulateArgs& a) {
    const AcquisitionConfig cfg = resolve_config(c);
    SceneSpec spec;
    if (!a.scene.empty()) spec = load_scene(a.scene);
    if (a.random_points > 0) {
        std::mt19937_64 gen(c.seed);
        std::uniform_real_distribution<double> u1(cfg.x1.min(), cfg.x1.max()), u2(cfg.x2.min(), cfg.x2.max());
        for (std::size_t k = 0; k < a.random_points; ++k) spec.points.push_back({{u1(gen), u2(gen)}, 1.0});
    }
    if (a.scene.empty() && a.random_points == 0) {
        throw ConfigError("simulate needs --scene or --random-points");
    }

    const fs::path out = prepare_out(c);
    const ReflectivityGrid v = rasterize(spec, cfg.x1, cfg.x2);
    const Sinogram d = apply_forward(v, cfg, c.workers);
    save_grid(v, out / "scene.cmsar");
    save_sinogram(d, out / "sinogram.cmsar");
    write_text(out / "scene.json", scene_to_json(spec));
    write_text(out / "config.json", acquisition_to_json(cfg));
    if (c.emit_pgm) export_image(sinogram_preview(d), out / "sinogram.pgm");

    // Support and g-band statistics.
    std::size_t nonzero = 0, band = 0;
    double band_max = 0.0, peak = 0.0, t_lo = cfg.t.max(), t_hi = cfg.t.min();
    for (std::size_t i = 0; i < d.ns(); ++i) {
        const double edge = 2.0 * std::sqrt(cfg.s.node(i) * cfg.s.node(i) + cfg.h * cfg.h);
        for (std::size_t j = 0; j < d.nt(); ++j) {
            const double v = std::abs(d.at(i, j));
            const double t = cfg.t.node(j);
            if (std::abs(t - edge) < cfg.g_band()) {
                ++band;
                band_max = std::max(band_max, v);
            }
            if (v != 0.0) {
                ++nonzero;
                t_lo = std::min(t_lo, t);
                t_hi = std::max(t_hi, t);
            }
            peak = std::max(peak, v);
        }
    }
    std::cout << "sinogram " << d.ns() << "x" << d.nt() << " written to " << (out / "sinogram.cmsar").string() << '\n'
              << "nonzero samples: " << nonzero << " of " << d.values().size();
    if (nonzero) std::cout << ", t support [" << t_lo << ", " << t_hi << "]";
    std::cout << "\npeak |d|: " << peak << '\n'
              << "g-band half-width " << cfg.g_band() << ": " << band << " samples, max |d| " << band_max << '\n';

    int status = band_max == 0.0 ? 0 : kExitCheckFailed;
    if (band_max != 0.0) std::cout << "FAIL g-band is not annihilated\n";

    if (a.self_test) {
        if (spec.points.size() != 1 || !spec.rects.empty()) {
            std::cout << "FAIL self-test needs a scene with exactly one point scatterer\n";
            return kExitCheckFailed;
        }
        const GroundPoint y0 = spec.points.front().at;
        const detail::KernelRows rows(cfg);
        const auto taper = rows.taper();
        // Ricker main lobe; side lobes stay below half the peak under any taper <= 1.
        const double lobe = 1.0 / (std::sqrt(2.0) * std::numbers::pi * cfg.peak_frequency);
        std::size_t checked = 0, good = 0;
        for (std::size_t i = 0; i < d.ns(); ++i) {
            const double s = cfg.s.node(i);
            const double r = bistatic_range(SlowTime(s), cfg.h, y0);
            const double k = cfg.t.index_of(r);
            if (k < 0.0 || k > static_cast<double>(d.nt() - 1)) continue;
            // Only rows where the main lobe sits in the flat part of f g.
            bool flat = true;
            for (std::size_t j = 0; j < d.nt(); ++j) {
                if (std::abs(cfg.t.node(j) - r) <= lobe && taper[i * d.nt() + j] != 1.0) flat = false;
            }
            if (!flat) continue;
            std::size_t arg = 0;
            for (std::size_t j = 1; j < d.nt(); ++j) {
                if (std::abs(d.at(i, j)) > std::abs(d.at(i, arg))) arg = j;
            }
            ++checked;
            good += std::abs(static_cast<double>(arg) - k) <= 1.0;
        }
        const bool ok = checked > 0 && good == checked;
        std::cout << (ok ? "PASS" : "FAIL") << " self-test: per-s peak within one t-sample of R(s, y0) in "
                  << good << "/" << checked << " rows\n";
        if (!ok) status = kExitCheckFailed;
    }
    return status;
}

// -------------------------------------------------------------- reconstruct

struct ReconstructArgs {
    std::string sinogram;
    std::string scene;
    std::size_t radius = 4;
    double threshold = 0.2;
    bool adjoint_test = false;
    std::size_t adjoint_pairs = 20;
};

struct Prediction {
    GroundPoint at;
    const char* label;
};

int reconstruct(const Common& c, const ReconstructArgs& a) {
    const AcquisitionConfig cfg = resolve_config(c);
    const fs::path out = prepare_out(c);
    int status = 0;

    if (a.adjoint_test) {
        const double defect = cli::adjoint_defect(cfg, a.adjoint_pairs, c.seed, c.workers);
        const bool ok = defect < 1e-12;
        std::cout << (ok ? "PASS" : "FAIL") << " adjoint test: max relative defect " << std::scientific
                  << std::setprecision(3) << defect << std::defaultfloat << " over " << a.adjoint_pairs
                  << " pairs\n";
        if (!ok) status = kExitCheckFailed;
    }

    const fs::path sino_path = a.sinogram.empty() ? out / "sinogram.cmsar" : fs::path(a.sinogram);
    const Sinogram d = load_sinogram(sino_path);
    const ReflectivityGrid img = apply_adjoint(d, cfg, c.workers);
    save_grid(img, out / "image.cmsar");
    export_image(img, out / "image.pgm");

    const PeakReport rep = find_peaks(img, a.radius, a.threshold);

    std::vector<GroundPoint> sources;
    if (!a.scene.empty()) {
        for (const auto& p : load_scene(a.scene).points) sources.push_back(p.at);
    } else if (!rep.peaks.empty()) {
        sources.push_back(rep.peaks.front().location);
    }
    std::vector<Prediction> preds;
    for (const auto& src : sources) {
        const ArtifactPrediction ap = predict_artifacts(src);
        preds.push_back({ap.source, "source"});
        preds.push_back({ap.chi1, "chi1"});
        preds.push_back({ap.chi2, "chi2"});
        preds.push_back({ap.chi3, "chi3"});
    }

    const double cell1 = cfg.x1.step(), cell2 = cfg.x2.step();
    std::ofstream csv(out / "peaks.csv");
    if (!csv) throw IoError("cannot write peaks.csv");
    csv << "rank,x1,x2,i1,i2,magnitude,relative,label,predicted_x1,predicted_x2,offset_cells\n"
        << std::setprecision(17);
    std::vector<bool> claimed(preds.size(), false);
    std::size_t matched = 0;
    const double top = rep.peaks.empty() ? 1.0 : rep.peaks.front().magnitude;
    for (std::size_t k = 0; k < rep.peaks.size(); ++k) {
        const Peak& p = rep.peaks[k];
        std::size_t best = preds.size();
        double best_off = 1e300;
        for (std::size_t q = 0; q < preds.size(); ++q) {
            const double off = std::max(std::abs(p.location.x1 - preds[q].at.x1) / cell1,
                                        std::abs(p.location.x2 - preds[q].at.x2) / cell2);
            if (off < best_off) {
                best_off = off;
                best = q;
            }
        }
        const bool hit = best < preds.size() && best_off <= 1.0 && !claimed[best];
        if (hit) {
            claimed[best] = true;
            ++matched;
        }
        csv << k << ',' << p.location.x1 << ',' << p.location.x2 << ',' << p.i1 << ',' << p.i2 << ','
            << p.magnitude << ',' << p.magnitude / top << ',' << (hit ? preds[best].label : "unmatched") << ',';
        if (best < preds.size()) {
            csv << preds[best].at.x1 << ',' << preds[best].at.x2 << ',' << best_off << '\n';
        } else {
            csv << ",,\n";
        }
    }

    std::cout << "image written to " << (out / "image.cmsar").string() << '\n'
              << rep.peaks.size() << " peaks above " << a.threshold << " of max (radius " << a.radius
              << "), " << matched << " matched to predicted locations\n";
    if (!a.scene.empty()) {
        const bool ok = rep.peaks.size() == preds.size() && matched == preds.size();
        std::cout << (ok ? "PASS" : "FAIL") << " artifact check: expected " << preds.size()
                  << " peaks at the predicted locations\n";
        if (!ok) status = kExitCheckFailed;
    }
    return status;
}

// --------------------------------------------------------- diagnose / verify

int diagnose(const Common& c, std::size_t samples) {
    const AcquisitionConfig cfg = resolve_config(c);
    const fs::path out = prepare_out(c);
    const auto res = cli::run_diagnose(cfg, {samples, c.seed}, out);
    res.print(std::cout);
    std::cout << "diagnostics written to " << (out / "diagnostics.csv").string() << '\n';
    return res.pass() ? 0 : kExitCheckFailed;
}

int verify(const Common& c, const cli::VerifyOptions& base) {
    const AcquisitionConfig cfg = resolve_config(c);
    const fs::path out = prepare_out(c);
    cli::VerifyOptions opts = base;
    opts.seed = c.seed;
    const auto res = cli::run_verify(cfg, opts, out);
    res.print(std::cout);
    return res.pass() ? 0 : kExitCheckFailed;
}

int selftest(const Common& c) {
    AcquisitionConfig small;
    small.x1 = GridAxis(-1.0, 1.0, 32);
    small.x2 = GridAxis(-1.0, 1.0, 32);
    small.s = GridAxis(0.3, 2.5, 48);
    small.t = GridAxis(2.0, 6.0, 192);
    small.peak_frequency = 6.0;

    cli::SuiteResult res;
    const double defect = cli::adjoint_defect(small, 3, c.seed, c.workers);
    std::ostringstream msg;
    msg << "max defect " << std::scientific << std::setprecision(3) << defect;
    res.add("adjoint (small grid)", defect < 1e-12, msg.str());
    auto diag = cli::run_diagnose(AcquisitionConfig{}, {200, c.seed}, {});
    cli::VerifyOptions vopts;
    vopts.identity_samples = 100;
    vopts.generator_samples = 100;
    vopts.composition_instances = 2;
    vopts.grid_nodes = 801;
    vopts.nonvanishing_samples = 1000;
    vopts.cutoff_samples = 100;
    vopts.seed = c.seed;
    auto ver = cli::run_verify(AcquisitionConfig{}, vopts, {});
    res.lines.insert(res.lines.end(), diag.lines.begin(), diag.lines.end());
    res.lines.insert(res.lines.end(), ver.lines.begin(), ver.lines.end());
    res.print(std::cout);
    return res.pass() ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Common-midpoint SAR numerical laboratory"};
    app.require_subcommand(1);

    Common c_sim, c_rec, c_dia, c_ver, c_self;

    SimulateArgs sim;
    auto* s_cmd = app.add_subcommand("simulate", "Rasterize a scene and apply the forward operator");
    add_common(s_cmd, c_sim);
    s_cmd->add_option("--scene", sim.scene, "Scene spec (JSON)");
    s_cmd->add_option("--random-points", sim.random_points, "Add N seeded random unit point scatterers");
    s_cmd->add_flag("--self-test", sim.self_test, "Check per-s peak times against R(s, y0)");

    ReconstructArgs rec;
    auto* r_cmd = app.add_subcommand("reconstruct", "Backproject a sinogram and report peaks");
    add_common(r_cmd, c_rec);
    r_cmd->add_option("--sinogram", rec.sinogram, "Input sinogram (default: OUT/sinogram.cmsar)");
    r_cmd->add_option("--scene", rec.scene, "Scene spec used to predict artifact locations");
    r_cmd->add_option("--radius", rec.radius, "Peak detection radius in cells")->capture_default_str();
    r_cmd->add_option("--threshold", rec.threshold, "Peak threshold relative to max")->capture_default_str();
    r_cmd->add_flag("--adjoint-test", rec.adjoint_test, "Run the dot-product test first");
    r_cmd->add_option("--adjoint-pairs", rec.adjoint_pairs, "Random pairs for --adjoint-test")->capture_default_str();

    std::size_t dia_samples = 1000;
    auto* d_cmd = app.add_subcommand("diagnose", "Classify projections of the canonical relation");
    add_common(d_cmd, c_dia);
    d_cmd->add_option("--samples", dia_samples, "Samples per point kind")->capture_default_str();

    cli::VerifyOptions vopts;
    auto* v_cmd = app.add_subcommand("verify", "Identity, generator, composition and cutoff checks");
    add_common(v_cmd, c_ver);
    v_cmd->add_option("--samples", vopts.identity_samples, "Identity sample points")->capture_default_str();
    v_cmd->add_option("--instances", vopts.composition_instances, "Composition oracle instances")
        ->capture_default_str();

    auto* t_cmd = app.add_subcommand("selftest", "Quick end-to-end consistency checks");
    add_common(t_cmd, c_self);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitError;
    }

    try {
        if (*s_cmd) return simulate(c_sim, sim);
        if (*r_cmd) return reconstruct(c_rec, rec);
        if (*d_cmd) return diagnose(c_dia, dia_samples);
        if (*v_cmd) return verify(c_ver, vopts);
        if (*t_cmd) return selftest(c_self);
    } catch (const cmsar::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
