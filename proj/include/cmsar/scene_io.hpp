#pragma once

// Sampling grids, scene specifications and their on-disk formats.
//
// Binary containers use the CMSAR1 layout:
//
//   CMSAR1\n
//   kind=<reflectivity|image|sinogram> axis0=<min>,<max>,<n> axis1=<min>,<max>,<n> endian=little\n
//   <n0 * n1 little-endian IEEE-754 binary64 samples, row-major>
//
// For reflectivity grids axis0 is x1 (fast index) and axis1 is x2 (rows);
// for sinograms axis0 is s (rows) and axis1 is t (fast index).

#include "cmsar/geometry.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace cmsar {

// Uniformly sampled closed interval [min, max] with n >= 2 nodes.
//
// Nodes are placed symmetrically about the interval centre, so an axis
// with min == -max has node(i) == -node(n - 1 - i) bit-exactly.
class GridAxis {
public:
    GridAxis() = default;
    GridAxis(double min, double max, std::size_t n);

    double min() const noexcept { return min_; }
    double max() const noexcept { return max_; }
    std::size_t size() const noexcept { return n_; }
    double step() const noexcept { return step_; }

    double node(std::size_t i) const noexcept {
        return centre_ + (static_cast<double>(i) - half_span_) * step_;
    }
    // Continuous index of coordinate v (node(i) maps to i).
    double index_of(double v) const noexcept { return (v - centre_) / step_ + half_span_; }
    bool contains(double v) const noexcept { return v >= min_ && v <= max_; }
    bool symmetric() const noexcept { return min_ == -max_; }

    friend bool operator==(const GridAxis& a, const GridAxis& b) noexcept {
        return a.min_ == b.min_ && a.max_ == b.max_ && a.n_ == b.n_;
    }

private:
    double min_ = 0.0;
    double max_ = 1.0;
    std::size_t n_ = 2;
    double step_ = 1.0;
    double centre_ = 0.5;
    double half_span_ = 0.5;
};

enum class GridKind { Reflectivity, Image };

// Real samples V(x1, x2) on a regular ground-plane grid.
class ReflectivityGrid {
public:
    ReflectivityGrid(GridAxis x1, GridAxis x2, GridKind kind = GridKind::Reflectivity);
    ReflectivityGrid(GridAxis x1, GridAxis x2, std::vector<double> values,
                     GridKind kind = GridKind::Reflectivity);

    const GridAxis& x1() const noexcept { return x1_; }
    const GridAxis& x2() const noexcept { return x2_; }
    GridKind kind() const noexcept { return kind_; }
    void set_kind(GridKind k) noexcept { kind_ = k; }

    std::size_t n1() const noexcept { return x1_.size(); }
    std::size_t n2() const noexcept { return x2_.size(); }
    std::size_t index(std::size_t i1, std::size_t i2) const noexcept { return i2 * n1() + i1; }
    double cell_area() const noexcept { return x1_.step() * x2_.step(); }

    double& at(std::size_t i1, std::size_t i2) noexcept { return values_[index(i1, i2)]; }
    double at(std::size_t i1, std::size_t i2) const noexcept { return values_[index(i1, i2)]; }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    bool same_geometry(const ReflectivityGrid& o) const noexcept {
        return x1_ == o.x1_ && x2_ == o.x2_;
    }

private:
    GridAxis x1_;
    GridAxis x2_;
    GridKind kind_;
    std::vector<double> values_;
};

// Real samples d(s, t) on a regular data grid.
class Sinogram {
public:
    Sinogram(GridAxis s, GridAxis t);
    Sinogram(GridAxis s, GridAxis t, std::vector<double> values);

    const GridAxis& s() const noexcept { return s_; }
    const GridAxis& t() const noexcept { return t_; }
    std::size_t ns() const noexcept { return s_.size(); }
    std::size_t nt() const noexcept { return t_.size(); }
    std::size_t index(std::size_t is, std::size_t it) const noexcept { return is * nt() + it; }
    double cell_measure() const noexcept { return s_.step() * t_.step(); }

    double& at(std::size_t is, std::size_t it) noexcept { return values_[index(is, it)]; }
    double at(std::size_t is, std::size_t it) const noexcept { return values_[index(is, it)]; }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> row(std::size_t is) const noexcept {
        return std::span<const double>(values_).subspan(is * nt(), nt());
    }

private:
    GridAxis s_;
    GridAxis t_;
    std::vector<double> values_;
};

struct PointScatterer {
    GroundPoint at;
    double amplitude = 1.0;
};

struct RectScatterer {
    double x1_min, x1_max, x2_min, x2_max;
    double amplitude = 1.0;
};

struct SceneSpec {
    std::vector<PointScatterer> points;
    std::vector<RectScatterer> rects;
};

// Deposits the scene on the grid.  Points are splatted bilinearly onto the
// four surrounding nodes (a point on a node lands entirely on that node);
// rectangles add their amplitude to every node inside them.  Linear in the
// amplitudes.  Throws SceneError naming the first entry outside the grid;
// points are indexed first, then rectangles continue the count.
ReflectivityGrid rasterize(const SceneSpec& spec, const GridAxis& x1, const GridAxis& x2);

SceneSpec parse_scene_json(const std::string& text);
std::string scene_to_json(const SceneSpec& spec);
SceneSpec load_scene(const std::filesystem::path& path);
void save_scene(const SceneSpec& spec, const std::filesystem::path& path);

void save_grid(const ReflectivityGrid& g, const std::filesystem::path& path);
ReflectivityGrid load_grid(const std::filesystem::path& path);
void save_sinogram(const Sinogram& d, const std::filesystem::path& path);
Sinogram load_sinogram(const std::filesystem::path& path);

enum class Normalization { Linear, Log };

// 8-bit binary PGM, top row = largest x2.  min -> 0, max -> 255 after the
// chosen normalization; a constant image maps to 128.  Log mode works on
// log10(|v|) floored at 1e-6 of the peak magnitude.
void export_image(const ReflectivityGrid& g, const std::filesystem::path& path,
                  Normalization mode = Normalization::Linear);

// Gray levels export_image would write, row by row.
std::vector<unsigned char> image_pixels(const ReflectivityGrid& g, Normalization mode);

}  // namespace cmsar
