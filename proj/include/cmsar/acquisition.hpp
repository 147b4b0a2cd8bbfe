#pragma once

#include "cmsar/scene_io.hpp"

namespace cmsar {

// Everything the discrete operators need to know about an experiment.
struct AcquisitionConfig {
    double h = 1.0;                 // platform height
    double epsilon = 0.05;          // half-width of the excluded midpoint region
    double peak_frequency = 12.0;   // Ricker peak frequency (time units of t)
    double taper_fraction = 0.05;   // f(s, t) edge taper, fraction of each range
    double band_constant = 20.0;    // g vanishes on |t - 2 sqrt(s^2 + h^2)| < band_constant eps^2 / h

    GridAxis x1{-1.0, 1.0, 128};
    GridAxis x2{-1.0, 1.0, 128};
    GridAxis s{0.3, 2.5, 192};
    GridAxis t{2.0, 6.0, 512};

    // Half-width of the g-annihilated band around t = 2 sqrt(s^2 + h^2).
    double g_band() const noexcept { return band_constant * epsilon * epsilon / h; }

    // Throws ConfigError when h or epsilon is not positive, the s-range is
    // not strictly positive, or the t-range does not reach past the g-band
    // for the largest s.
    void validate() const;
};

}  // namespace cmsar
