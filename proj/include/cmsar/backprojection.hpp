#pragma once

#include "cmsar/acquisition.hpp"
#include "cmsar/geometry.hpp"
#include "cmsar/scene_io.hpp"

#include <cstddef>
#include <vector>

namespace cmsar {

// Literal transpose of apply_forward under the weighted inner products below.
ReflectivityGrid apply_adjoint(const Sinogram& d, const AcquisitionConfig& cfg, unsigned workers = 0);

// apply_adjoint(apply_forward(v)).
ReflectivityGrid apply_normal(const ReflectivityGrid& v, const AcquisitionConfig& cfg,
                              unsigned workers = 0);

// sum u v dA
double inner_product(const ReflectivityGrid& u, const ReflectivityGrid& v);
// sum u v ds dt
double inner_product(const Sinogram& u, const Sinogram& v);
double norm(const ReflectivityGrid& u);
double norm(const Sinogram& u);

struct ArtifactPrediction {
    GroundPoint source;
    GroundPoint chi1;  // (x1, -x2)
    GroundPoint chi2;  // (-x1, x2)
    GroundPoint chi3;  // (-x1, -x2)
};

ArtifactPrediction predict_artifacts(GroundPoint x) noexcept;

enum class Axis { X1, X2, Origin };

// X1 negates x1, X2 negates x2, Origin negates both.  Throws DomainError
// when an axis that is flipped is not symmetric about zero.
ReflectivityGrid reflect(const ReflectivityGrid& v, Axis axis);

struct Peak {
    GroundPoint location;  // refined
    double magnitude = 0.0;  // |img| at the node
    std::size_t i1 = 0;
    std::size_t i2 = 0;
};

struct PeakReport {
    std::vector<Peak> peaks;  // descending magnitude
    std::size_t radius = 1;
    double threshold = 0.0;
};

// Nodes whose |img| is strictly larger than every other node in the
// (2 radius + 1)^2 window and at least threshold * max|img|.  Locations are
// refined by a least-squares quadratic on the 3x3 neighbourhood.
PeakReport find_peaks(const ReflectivityGrid& img, std::size_t radius, double threshold);

}  // namespace cmsar
