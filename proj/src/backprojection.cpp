#include "cmsar/backprojection.hpp"

#include "cmsar/error.hpp"
#include "cmsar/forward_model.hpp"
#include "cmsar/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace cmsar {

ReflectivityGrid apply_adjoint(const Sinogram& d, const AcquisitionConfig& cfg, unsigned workers) {
    cfg.validate();
    if (!(d.s() == cfg.s) || !(d.t() == cfg.t)) {
        throw GeometryMismatch("sinogram grid does not match the acquisition configuration");
    }

    const detail::KernelRows rows(cfg);
    const std::vector<detail::Orbit> orbits = detail::mirror_orbits(cfg.x1, cfg.x2);
    const std::size_t ns = cfg.s.size(), nt = cfg.t.size();

    std::vector<double> dw(ns * nt);
    const auto dv = d.values();
    const auto taper = rows.taper();
    const double measure = d.cell_measure();
    for (std::size_t k = 0; k < dw.size(); ++k) dw[k] = taper[k] * dv[k] * measure;

    ReflectivityGrid img(cfg.x1, cfg.x2, GridKind::Image);
    auto out = img.values();
    const double h = cfg.h;

    parallel_for(orbits.size(), resolve_workers(workers), [&](std::size_t begin, std::size_t end) {
        std::vector<double> window(rows.max_window());
        for (std::size_t o = begin; o < end; ++o) {
            const detail::Orbit& orb = orbits[o];
            double acc = 0.0;
            for (std::size_t i = 0; i < ns; ++i) {
                const double s = cfg.s.node(i);
                const double r = bistatic_range_raw(s, h, orb.x1, orb.x2);
                const detail::PulseWindow win = rows.row(r, window.data());
                const double* row = dw.data() + i * nt + win.first;
                double dot = 0.0;
                for (std::size_t k = 0; k < win.count; ++k) dot += row[k] * window[k];
                acc += amplitude_weight_raw(s, h, orb.x1, orb.x2) * dot;
            }
            for (unsigned k = 0; k < orb.count; ++k) out[orb.cells[k]] = acc;
        }
    });
    return img;
}

ReflectivityGrid apply_normal(const ReflectivityGrid& v, const AcquisitionConfig& cfg, unsigned workers) {
    return apply_adjoint(apply_forward(v, cfg, workers), cfg, workers);
}

namespace {

double plain_dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
    return acc;
}

}  // namespace

double inner_product(const ReflectivityGrid& u, const ReflectivityGrid& v) {
    if (!u.same_geometry(v)) throw GeometryMismatch("images live on different grids");
    return plain_dot(u.values(), v.values()) * u.cell_area();
}

double inner_product(const Sinogram& u, const Sinogram& v) {
    if (!(u.s() == v.s()) || !(u.t() == v.t())) {
        throw GeometryMismatch("sinograms live on different grids");
    }
    return plain_dot(u.values(), v.values()) * u.cell_measure();
}

double norm(const ReflectivityGrid& u) { return std::sqrt(inner_product(u, u)); }
double norm(const Sinogram& u) { return std::sqrt(inner_product(u, u)); }

ArtifactPrediction predict_artifacts(GroundPoint x) noexcept {
    return {x, {x.x1, -x.x2}, {-x.x1, x.x2}, {-x.x1, -x.x2}};
}

ReflectivityGrid reflect(const ReflectivityGrid& v, Axis axis) {
    const bool flip1 = axis == Axis::X1 || axis == Axis::Origin;
    const bool flip2 = axis == Axis::X2 || axis == Axis::Origin;
    if (flip1 && !v.x1().symmetric()) throw DomainError("x1 extent is not symmetric about 0");
    if (flip2 && !v.x2().symmetric()) throw DomainError("x2 extent is not symmetric about 0");

    ReflectivityGrid out(v.x1(), v.x2(), v.kind());
    const std::size_t n1 = v.n1(), n2 = v.n2();
    for (std::size_t i2 = 0; i2 < n2; ++i2) {
        const std::size_t j2 = flip2 ? n2 - 1 - i2 : i2;
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
            const std::size_t j1 = flip1 ? n1 - 1 - i1 : i1;
            out.at(i1, i2) = v.at(j1, j2);
        }
    }
    return out;
}

namespace {

// Offset of the vertex of a 1D parabola through (-1, a), (0, b), (1, c).
double parabola_vertex(double a, double b, double c) {
    const double curv = a - 2.0 * b + c;
    if (curv >= 0.0) return 0.0;
    return 0.5 * (a - c) / curv;
}

// Peak offset in cells from a least-squares quadratic on the 3x3 patch.
std::pair<double, double> refine(const ReflectivityGrid& img, std::size_t i1, std::size_t i2) {
    if (i1 == 0 || i2 == 0 || i1 + 1 == img.n1() || i2 + 1 == img.n2()) return {0.0, 0.0};

    Eigen::Matrix<double, 9, 6> m;
    Eigen::Matrix<double, 9, 1> f;
    int row = 0;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            m.row(row) << 1.0, dx, dy, dx * dx, dx * dy, dy * dy;
            f(row) = std::abs(img.at(i1 + dx, i2 + dy));
            ++row;
        }
    }
    const Eigen::Matrix<double, 6, 1> c = m.colPivHouseholderQr().solve(f);
    Eigen::Matrix2d hess;
    hess << 2.0 * c(3), c(4), c(4), 2.0 * c(5);
    double ox = 0.0, oy = 0.0;
    if (hess(0, 0) < 0.0 && hess.determinant() > 0.0) {
        const Eigen::Vector2d off = hess.ldlt().solve(Eigen::Vector2d(-c(1), -c(2)));
        ox = off(0);
        oy = off(1);
    } else {
        const double centre = std::abs(img.at(i1, i2));
        ox = parabola_vertex(std::abs(img.at(i1 - 1, i2)), centre, std::abs(img.at(i1 + 1, i2)));
        oy = parabola_vertex(std::abs(img.at(i1, i2 - 1)), centre, std::abs(img.at(i1, i2 + 1)));
    }
    return {std::clamp(ox, -0.5, 0.5), std::clamp(oy, -0.5, 0.5)};
}

}  // namespace

PeakReport find_peaks(const ReflectivityGrid& img, std::size_t radius, double threshold) {
    if (radius < 1) throw DomainError("peak radius must be at least one cell");
    PeakReport rep;
    rep.radius = radius;
    rep.threshold = threshold;

    double peak = 0.0;
    for (double v : img.values()) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) return rep;
    const double floor = threshold * peak;

    const std::size_t n1 = img.n1(), n2 = img.n2();
    for (std::size_t i2 = 0; i2 < n2; ++i2) {
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
            const double v = std::abs(img.at(i1, i2));
            if (v == 0.0 || v < floor) continue;
            const std::size_t a1 = i1 >= radius ? i1 - radius : 0;
            const std::size_t a2 = i2 >= radius ? i2 - radius : 0;
            const std::size_t b1 = std::min(n1 - 1, i1 + radius);
            const std::size_t b2 = std::min(n2 - 1, i2 + radius);
            bool strict = true;
            for (std::size_t j2 = a2; j2 <= b2 && strict; ++j2) {
                for (std::size_t j1 = a1; j1 <= b1; ++j1) {
                    if ((j1 != i1 || j2 != i2) && std::abs(img.at(j1, j2)) >= v) {
                        strict = false;
                        break;
                    }
                }
            }
            if (!strict) continue;
            const auto [ox, oy] = refine(img, i1, i2);
            rep.peaks.push_back({{img.x1().node(i1) + ox * img.x1().step(),
                                  img.x2().node(i2) + oy * img.x2().step()},
                                 v, i1, i2});
        }
    }
    std::stable_sort(rep.peaks.begin(), rep.peaks.end(),
                     [](const Peak& a, const Peak& b) { return a.magnitude > b.magnitude; });
    return rep;
}

}  // namespace cmsar
