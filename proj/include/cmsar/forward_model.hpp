#pragma once

// Discrete linearized forward operator
//
//   d(s, t) = f(s, t) g(s, t) sum_x a(s, x) p(t - R(s, x)) V(x) dA
//
// with the geometric spreading a = 1 / (16 pi^2 |x - gamma_T| |x - gamma_R|)
// and a Ricker pulse p standing in for the omega^2 p(omega) factor.

#include "cmsar/acquisition.hpp"
#include "cmsar/geometry.hpp"
#include "cmsar/scene_io.hpp"

#include <array>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace cmsar {

struct Pulse {
    double peak_frequency = 12.0;
    double half_width = 1.4 / 12.0;  // samples with |u| > half_width are zero

    static Pulse ricker(double peak_frequency);
};

// (1 - 2 pi^2 f0^2 u^2) exp(-pi^2 f0^2 u^2), truncated to |u| <= half_width.
double pulse_eval(const Pulse& p, double u) noexcept;

double amplitude_weight(SlowTime s, GroundPoint x, double h);

inline double amplitude_weight_raw(double s, double h, double x1, double x2) noexcept {
    const Legs l = bistatic_legs(s, h, x1, x2);
    return 1.0 / (16.0 * std::numbers::pi * std::numbers::pi *
                  (l.to_transmitter * l.to_receiver));
}

enum class Cutoff { F, G, Psi1, Psi2, Psi3 };

struct CutoffBank {
    double epsilon = 0.05;
    double h = 1.0;
    double band_constant = 20.0;
    double taper_fraction = 0.05;
    GridAxis s{0.3, 2.5, 2};
    GridAxis t{2.0, 6.0, 2};

    static CutoffBank from(const AcquisitionConfig& cfg);
};

// C-infinity step: 0 for u <= 0, 1 for u >= 1, smooth in between.
double smooth_step(double u) noexcept;

// F and G take (a, b) = (s, t); the psi cutoffs take (a, b) = (x1, x2).
//   g    = 0 on |t - 2 sqrt(s^2+h^2)| <= delta, 1 beyond 2 delta (delta = c eps^2 / h)
//   f    = 1 away from a taper band at each edge of the sinogram ranges, 0 on the edges
//   psi1 = 1 on |x2| <= eps, 0 on |x2| >= 2 eps
//   psi2 = 1 on |x1| <= eps, 0 on |x1| >= 2 eps
//   psi3 = 1 on x1 >= eps / 2, 0 on x1 <= eps / 4
double cutoff_eval(const CutoffBank& bank, Cutoff which, double a, double b) noexcept;

Pulse pulse_for(const AcquisitionConfig& cfg);

Sinogram apply_forward(const ReflectivityGrid& v, const AcquisitionConfig& cfg, unsigned workers = 0);

namespace detail {

// Row of pulse samples p(t_j - R) for the window of t nodes with
// |t_j - R| <= half_width.  Shared by the forward and adjoint operators so
// the two are transposes of each other sample for sample.
struct PulseWindow {
    std::size_t first = 0;
    std::size_t count = 0;
};

class KernelRows {
public:
    explicit KernelRows(const AcquisitionConfig& cfg);

    // Writes the window for range r into out (capacity max_window()).
    PulseWindow row(double r, double* out) const noexcept;
    std::size_t max_window() const noexcept { return max_window_; }

    // f(s_i, t_j) g(s_i, t_j), row-major over (s, t).
    std::span<const double> taper() const noexcept { return taper_; }

private:
    GridAxis t_;
    double a_;          // pi^2 f0^2
    double half_width_;
    double q_;          // exp(-2 a dt^2)
    std::size_t max_window_;
    std::vector<double> taper_;
};

// Cells grouped into mirror orbits {(+-x1, +-x2)}; on symmetric grids the
// kernel of every member is bit-identical, so it is evaluated once.
struct Orbit {
    double x1;
    double x2;
    std::array<std::size_t, 4> cells;
    unsigned count;
};

std::vector<Orbit> mirror_orbits(const GridAxis& x1, const GridAxis& x2);

void check_scene_geometry(const ReflectivityGrid& v, const AcquisitionConfig& cfg);

}  // namespace detail

}  // namespace cmsar
