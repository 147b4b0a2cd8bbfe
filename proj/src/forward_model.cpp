#include "cmsar/forward_model.hpp"

#include "cmsar/error.hpp"
#include "cmsar/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace cmsar {

void AcquisitionConfig::validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("h must be positive");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be positive");
    if (!(peak_frequency > 0.0)) throw ConfigError("pulse peak frequency must be positive");
    if (!(taper_fraction >= 0.0 && taper_fraction < 0.5)) {
        throw ConfigError("taper fraction must lie in [0, 0.5)");
    }
    if (!(band_constant > 0.0)) throw ConfigError("g-band constant must be positive");
    if (!(s.min() > 0.0)) throw ConfigError("s-range must be strictly positive");
    if (!(t.min() > 0.0)) throw ConfigError("t-range must be strictly positive");
    const double needed = 2.0 * std::sqrt(s.max() * s.max() + h * h) + g_band();
    if (t.max() < needed) {
        throw ConfigError("t-range ends at " + std::to_string(t.max()) +
                          " but must reach 2 sqrt(s^2 + h^2) + g-band = " + std::to_string(needed));
    }
}

Pulse Pulse::ricker(double peak_frequency) {
    if (!(peak_frequency > 0.0)) throw DomainError("pulse peak frequency must be positive");
    // |p| < 2e-7 beyond 1.4 / f0
    return {peak_frequency, 1.4 / peak_frequency};
}

double pulse_eval(const Pulse& p, double u) noexcept {
    if (std::abs(u) > p.half_width) return 0.0;
    const double a = std::numbers::pi * std::numbers::pi * p.peak_frequency * p.peak_frequency;
    const double au2 = a * u * u;
    return (1.0 - 2.0 * au2) * std::exp(-au2);
}

double amplitude_weight(SlowTime s, GroundPoint x, double h) {
    if (!(h > 0.0)) throw DomainError("platform height must be positive");
    return amplitude_weight_raw(s.value(), h, x.x1, x.x2);
}

CutoffBank CutoffBank::from(const AcquisitionConfig& cfg) {
    return {cfg.epsilon, cfg.h, cfg.band_constant, cfg.taper_fraction, cfg.s, cfg.t};
}

double smooth_step(double u) noexcept {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / u);
    const double b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

namespace {

double edge_taper(double v, const GridAxis& axis, double fraction) {
    if (v <= axis.min() || v >= axis.max()) return 0.0;
    if (fraction <= 0.0) return 1.0;
    const double w = fraction * (axis.max() - axis.min());
    return smooth_step((v - axis.min()) / w) * smooth_step((axis.max() - v) / w);
}

}  // namespace

double cutoff_eval(const CutoffBank& bank, Cutoff which, double a, double b) noexcept {
    const double eps = bank.epsilon;
    switch (which) {
        case Cutoff::F:
            return edge_taper(a, bank.s, bank.taper_fraction) * edge_taper(b, bank.t, bank.taper_fraction);
        case Cutoff::G: {
            const double delta = bank.band_constant * eps * eps / bank.h;
            const double gap = std::abs(b - 2.0 * std::sqrt(a * a + bank.h * bank.h));
            return smooth_step((gap - delta) / delta);
        }
        case Cutoff::Psi1:
            return 1.0 - smooth_step((std::abs(b) - eps) / eps);
        case Cutoff::Psi2:
            return 1.0 - smooth_step((std::abs(a) - eps) / eps);
        case Cutoff::Psi3:
            return smooth_step((a - 0.25 * eps) / (0.25 * eps));
    }
    return 0.0;
}

Pulse pulse_for(const AcquisitionConfig& cfg) { return Pulse::ricker(cfg.peak_frequency); }

namespace detail {

KernelRows::KernelRows(const AcquisitionConfig& cfg) : t_(cfg.t) {
    const Pulse p = pulse_for(cfg);
    a_ = std::numbers::pi * std::numbers::pi * p.peak_frequency * p.peak_frequency;
    half_width_ = p.half_width;
    const double dt = t_.step();
    q_ = std::exp(-2.0 * a_ * dt * dt);
    max_window_ = static_cast<std::size_t>(std::floor(2.0 * half_width_ / dt)) + 2;

    const CutoffBank bank = CutoffBank::from(cfg);
    taper_.resize(cfg.s.size() * cfg.t.size());
    for (std::size_t i = 0; i < cfg.s.size(); ++i) {
        const double s = cfg.s.node(i);
        for (std::size_t j = 0; j < cfg.t.size(); ++j) {
            const double t = cfg.t.node(j);
            taper_[i * cfg.t.size() + j] =
                cutoff_eval(bank, Cutoff::F, s, t) * cutoff_eval(bank, Cutoff::G, s, t);
        }
    }
}

PulseWindow KernelRows::row(double r, double* out) const noexcept {
    const double lo = std::ceil(t_.index_of(r - half_width_));
    const double hi = std::floor(t_.index_of(r + half_width_));
    const double last = static_cast<double>(t_.size() - 1);
    const double first = std::max(lo, 0.0);
    const double end = std::min(hi, last);
    if (end < first) return {};
    const std::size_t j0 = static_cast<std::size_t>(first);
    const std::size_t n = static_cast<std::size_t>(end) - j0 + 1;

    // Gaussian by recurrence: g_{j+1} = g_j r_j, r_{j+1} = r_j q.
    const double dt = t_.step();
    const double u0 = t_.node(j0) - r;
    double g = std::exp(-a_ * u0 * u0);
    double ratio = std::exp(-a_ * (2.0 * u0 * dt + dt * dt));
    for (std::size_t k = 0; k < n; ++k) {
        const double u = u0 + static_cast<double>(k) * dt;
        out[k] = (1.0 - 2.0 * a_ * u * u) * g;
        g *= ratio;
        ratio *= q_;
    }
    return {j0, n};
}

std::vector<Orbit> mirror_orbits(const GridAxis& x1, const GridAxis& x2) {
    const std::size_t n1 = x1.size(), n2 = x2.size();
    const bool sym1 = x1.symmetric(), sym2 = x2.symmetric();
    const std::size_t e1 = sym1 ? (n1 + 1) / 2 : n1;
    const std::size_t e2 = sym2 ? (n2 + 1) / 2 : n2;
    std::vector<Orbit> orbits;
    orbits.reserve(e1 * e2);
    for (std::size_t i2 = 0; i2 < e2; ++i2) {
        for (std::size_t i1 = 0; i1 < e1; ++i1) {
            Orbit o{x1.node(i1), x2.node(i2), {}, 0};
            auto add = [&](std::size_t a, std::size_t b) {
                const std::size_t cell = b * n1 + a;
                for (unsigned k = 0; k < o.count; ++k) {
                    if (o.cells[k] == cell) return;
                }
                o.cells[o.count++] = cell;
            };
            const std::size_t m1 = sym1 ? n1 - 1 - i1 : i1;
            const std::size_t m2 = sym2 ? n2 - 1 - i2 : i2;
            add(i1, i2);
            add(m1, i2);
            add(i1, m2);
            add(m1, m2);
            orbits.push_back(o);
        }
    }
    return orbits;
}

void check_scene_geometry(const ReflectivityGrid& v, const AcquisitionConfig& cfg) {
    if (!(v.x1() == cfg.x1) || !(v.x2() == cfg.x2)) {
        throw GeometryMismatch("scene grid does not match the acquisition configuration");
    }
}

}  // namespace detail

Sinogram apply_forward(const ReflectivityGrid& v, const AcquisitionConfig& cfg, unsigned workers) {
    cfg.validate();
    detail::check_scene_geometry(v, cfg);

    const detail::KernelRows rows(cfg);
    const std::vector<detail::Orbit> all = detail::mirror_orbits(cfg.x1, cfg.x2);
    const double area = v.cell_area();
    const auto vals = v.values();

    // Orbits with an all-zero sum contribute nothing.
    struct Source {
        double x1, x2, weight;
    };
    std::vector<Source> sources;
    sources.reserve(all.size());
    for (const auto& o : all) {
        double w = 0.0;
        for (unsigned k = 0; k < o.count; ++k) w += vals[o.cells[k]];
        if (w != 0.0) sources.push_back({o.x1, o.x2, w * area});
    }

    Sinogram d(cfg.s, cfg.t);
    const std::size_t nt = cfg.t.size();
    const double h = cfg.h;
    auto out = d.values();
    const auto taper = rows.taper();

    parallel_for(cfg.s.size(), resolve_workers(workers), [&](std::size_t begin, std::size_t end) {
        std::vector<double> window(rows.max_window());
        for (std::size_t i = begin; i < end; ++i) {
            const double s = cfg.s.node(i);
            double* row = out.data() + i * nt;
            for (const Source& src : sources) {
                const double r = bistatic_range_raw(s, h, src.x1, src.x2);
                const double w = amplitude_weight_raw(s, h, src.x1, src.x2) * src.weight;
                const detail::PulseWindow win = rows.row(r, window.data());
                for (std::size_t k = 0; k < win.count; ++k) row[win.first + k] += w * window[k];
            }
            for (std::size_t j = 0; j < nt; ++j) row[j] *= taper[i * nt + j];
        }
    });
    return d;
}

}  // namespace cmsar
