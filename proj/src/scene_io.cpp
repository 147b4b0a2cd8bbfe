#include "cmsar/scene_io.hpp"

#include "cmsar/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace cmsar {

namespace {

constexpr std::string_view kMagic = "CMSAR1\n";
constexpr std::string_view kFamily = "CMSAR";

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw FormatError(std::string(what) + " contains non-finite samples");
    }
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
    double v = 0.0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
        throw FormatError("bad number in header: '" + std::string(token) + "'");
    }
    return v;
}

std::string axis_field(const GridAxis& a) {
    return format_double(a.min()) + "," + format_double(a.max()) + "," + std::to_string(a.size());
}

GridAxis parse_axis(std::string_view field) {
    const auto c1 = field.find(',');
    const auto c2 = field.find(',', c1 == std::string_view::npos ? c1 : c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos) {
        throw FormatError("malformed axis descriptor '" + std::string(field) + "'");
    }
    const double lo = parse_double(field.substr(0, c1));
    const double hi = parse_double(field.substr(c1 + 1, c2 - c1 - 1));
    const std::string_view count = field.substr(c2 + 1);
    std::size_t n = 0;
    auto res = std::from_chars(count.data(), count.data() + count.size(), n);
    if (res.ec != std::errc() || res.ptr != count.data() + count.size()) {
        throw FormatError("bad sample count '" + std::string(count) + "'");
    }
    try {
        return GridAxis(lo, hi, n);
    } catch (const Error& e) {
        throw FormatError(std::string("invalid axis in header: ") + e.what());
    }
}

struct Header {
    std::string kind;
    GridAxis axis0;
    GridAxis axis1;
};

std::uint64_t to_little(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
        return r;
    }
}

void write_container(const std::filesystem::path& path, std::string_view kind, const GridAxis& a0,
                     const GridAxis& a1, std::span<const double> values) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << kMagic << "kind=" << kind << " axis0=" << axis_field(a0) << " axis1=" << axis_field(a1)
        << " endian=little\n";
    std::vector<std::uint64_t> raw(values.size());
    std::transform(values.begin(), values.end(), raw.begin(),
                   [](double v) { return to_little(std::bit_cast<std::uint64_t>(v)); });
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * sizeof(std::uint64_t)));
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<double> read_container(const std::filesystem::path& path, Header& header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");

    std::string magic;
    if (!std::getline(in, magic)) throw FormatError("empty file '" + path.string() + "'");
    magic.push_back('\n');
    if (magic != kMagic) {
        if (magic.starts_with(kFamily) && magic.size() > kFamily.size() + 1 &&
            std::isdigit(static_cast<unsigned char>(magic[kFamily.size()]))) {
            throw VersionError("unsupported container version '" +
                               magic.substr(0, magic.size() - 1) + "'");
        }
        throw FormatError("'" + path.string() + "' is not a CMSAR1 file");
    }

    std::string line;
    if (!std::getline(in, line)) throw FormatError("missing header line");
    std::istringstream fields(line);
    std::string field;
    bool have0 = false, have1 = false, little = false;
    while (fields >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) throw FormatError("malformed header field '" + field + "'");
        const std::string key = field.substr(0, eq);
        const std::string_view val = std::string_view(field).substr(eq + 1);
        if (key == "kind") {
            header.kind = std::string(val);
        } else if (key == "axis0") {
            header.axis0 = parse_axis(val);
            have0 = true;
        } else if (key == "axis1") {
            header.axis1 = parse_axis(val);
            have1 = true;
        } else if (key == "endian") {
            if (val != "little") throw FormatError("unsupported byte order '" + std::string(val) + "'");
            little = true;
        } else {
            throw FormatError("unknown header field '" + key + "'");
        }
    }
    if (header.kind.empty() || !have0 || !have1 || !little) {
        throw FormatError("incomplete header in '" + path.string() + "'");
    }

    const std::size_t count = header.axis0.size() * header.axis1.size();
    std::vector<char> payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (payload.size() != count * sizeof(std::uint64_t)) {
        throw TruncationError("payload holds " + std::to_string(payload.size()) +
                              " bytes, header declares " + std::to_string(count * 8));
    }
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t raw = 0;
        std::memcpy(&raw, payload.data() + i * sizeof raw, sizeof raw);
        values[i] = std::bit_cast<double>(to_little(raw));
    }
    require_finite(values, "payload");
    return values;
}

void check_point_inside(const PointScatterer& p, const GridAxis& x1, const GridAxis& x2,
                        std::size_t index) {
    if (!std::isfinite(p.at.x1) || !std::isfinite(p.at.x2) || !std::isfinite(p.amplitude) ||
        !x1.contains(p.at.x1) || !x2.contains(p.at.x2)) {
        throw SceneError("point scatterer " + std::to_string(index) + " lies outside the grid",
                         index);
    }
}

}  // namespace

GridAxis::GridAxis(double min, double max, std::size_t n)
    : min_(min), max_(max), n_(n) {
    if (n < 2) throw GeometryMismatch("grid axes need at least two samples");
    if (!std::isfinite(min) || !std::isfinite(max) || !(max > min)) {
        throw GeometryMismatch("grid extents must be finite and strictly ordered");
    }
    step_ = (max - min) / static_cast<double>(n - 1);
    centre_ = 0.5 * (min + max);
    half_span_ = 0.5 * static_cast<double>(n - 1);
}

ReflectivityGrid::ReflectivityGrid(GridAxis x1, GridAxis x2, GridKind kind)
    : x1_(x1), x2_(x2), kind_(kind), values_(x1.size() * x2.size(), 0.0) {}

ReflectivityGrid::ReflectivityGrid(GridAxis x1, GridAxis x2, std::vector<double> values,
                                   GridKind kind)
    : x1_(x1), x2_(x2), kind_(kind), values_(std::move(values)) {
    if (values_.size() != x1_.size() * x2_.size()) {
        throw GeometryMismatch("reflectivity sample count does not match the grid");
    }
}

Sinogram::Sinogram(GridAxis s, GridAxis t) : s_(s), t_(t), values_(s.size() * t.size(), 0.0) {
    if (!(s.min() > 0.0)) throw GeometryMismatch("sinogram s-range must be strictly positive");
}

Sinogram::Sinogram(GridAxis s, GridAxis t, std::vector<double> values)
    : s_(s), t_(t), values_(std::move(values)) {
    if (!(s.min() > 0.0)) throw GeometryMismatch("sinogram s-range must be strictly positive");
    if (values_.size() != s_.size() * t_.size()) {
        throw GeometryMismatch("sinogram sample count does not match the grid");
    }
}

ReflectivityGrid rasterize(const SceneSpec& spec, const GridAxis& x1, const GridAxis& x2) {
    ReflectivityGrid g(x1, x2);
    for (std::size_t k = 0; k < spec.points.size(); ++k) {
        const PointScatterer& p = spec.points[k];
        check_point_inside(p, x1, x2, k);
        const double u = std::clamp(x1.index_of(p.at.x1), 0.0, static_cast<double>(x1.size() - 1));
        const double v = std::clamp(x2.index_of(p.at.x2), 0.0, static_cast<double>(x2.size() - 1));
        // Snap to nodes within rounding so an on-node point stays on one node.
        auto split = [](double w, std::size_t n) {
            double base = std::floor(w);
            double frac = w - base;
            if (frac < 1e-9) frac = 0.0;
            if (frac > 1.0 - 1e-9) {
                base += 1.0;
                frac = 0.0;
            }
            std::size_t i = static_cast<std::size_t>(base);
            if (i >= n - 1) {
                i = n - 1;
                frac = 0.0;
            }
            return std::pair{i, frac};
        };
        const auto [i1, f1] = split(u, x1.size());
        const auto [i2, f2] = split(v, x2.size());
        const double a = p.amplitude;
        g.at(i1, i2) += a * (1.0 - f1) * (1.0 - f2);
        if (f1 > 0.0) g.at(i1 + 1, i2) += a * f1 * (1.0 - f2);
        if (f2 > 0.0) g.at(i1, i2 + 1) += a * (1.0 - f1) * f2;
        if (f1 > 0.0 && f2 > 0.0) g.at(i1 + 1, i2 + 1) += a * f1 * f2;
    }
    for (std::size_t k = 0; k < spec.rects.size(); ++k) {
        const RectScatterer& r = spec.rects[k];
        const std::size_t index = spec.points.size() + k;
        const bool ok = std::isfinite(r.amplitude) && r.x1_min <= r.x1_max && r.x2_min <= r.x2_max &&
                        x1.contains(r.x1_min) && x1.contains(r.x1_max) && x2.contains(r.x2_min) &&
                        x2.contains(r.x2_max);
        if (!ok) {
            throw SceneError("rectangle " + std::to_string(k) + " lies outside the grid", index);
        }
        for (std::size_t i2 = 0; i2 < x2.size(); ++i2) {
            const double y = x2.node(i2);
            if (y < r.x2_min || y > r.x2_max) continue;
            for (std::size_t i1 = 0; i1 < x1.size(); ++i1) {
                const double x = x1.node(i1);
                if (x >= r.x1_min && x <= r.x1_max) g.at(i1, i2) += r.amplitude;
            }
        }
    }
    return g;
}

SceneSpec parse_scene_json(const std::string& text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scene file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("scene file must hold a JSON object");
    SceneSpec spec;
    try {
        for (const auto& p : doc.value("points", json::array())) {
            spec.points.push_back({{p.at("x1").get<double>(), p.at("x2").get<double>()},
                                   p.value("amplitude", 1.0)});
        }
        for (const auto& r : doc.value("rects", json::array())) {
            spec.rects.push_back({r.at("x1_min").get<double>(), r.at("x1_max").get<double>(),
                                  r.at("x2_min").get<double>(), r.at("x2_max").get<double>(),
                                  r.value("amplitude", 1.0)});
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed scene entry: ") + e.what());
    }
    return spec;
}

std::string scene_to_json(const SceneSpec& spec) {
    using nlohmann::json;
    json doc = {{"points", json::array()}, {"rects", json::array()}};
    for (const auto& p : spec.points) {
        doc["points"].push_back({{"x1", p.at.x1}, {"x2", p.at.x2}, {"amplitude", p.amplitude}});
    }
    for (const auto& r : spec.rects) {
        doc["rects"].push_back({{"x1_min", r.x1_min},
                                {"x1_max", r.x1_max},
                                {"x2_min", r.x2_min},
                                {"x2_max", r.x2_max},
                                {"amplitude", r.amplitude}});
    }
    return doc.dump(2) + "\n";
}

SceneSpec load_scene(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scene file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scene_json(ss.str());
}

void save_scene(const SceneSpec& spec, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << scene_to_json(spec);
}

void save_grid(const ReflectivityGrid& g, const std::filesystem::path& path) {
    require_finite(g.values(), "grid");
    write_container(path, g.kind() == GridKind::Image ? "image" : "reflectivity", g.x1(), g.x2(),
                    g.values());
}

ReflectivityGrid load_grid(const std::filesystem::path& path) {
    Header h;
    std::vector<double> v = read_container(path, h);
    GridKind kind;
    if (h.kind == "reflectivity") {
        kind = GridKind::Reflectivity;
    } else if (h.kind == "image") {
        kind = GridKind::Image;
    } else {
        throw FormatError("expected a reflectivity or image container, found '" + h.kind + "'");
    }
    return ReflectivityGrid(h.axis0, h.axis1, std::move(v), kind);
}

void save_sinogram(const Sinogram& d, const std::filesystem::path& path) {
    require_finite(d.values(), "sinogram");
    write_container(path, "sinogram", d.s(), d.t(), d.values());
}

Sinogram load_sinogram(const std::filesystem::path& path) {
    Header h;
    std::vector<double> v = read_container(path, h);
    if (h.kind != "sinogram") throw FormatError("expected a sinogram container, found '" + h.kind + "'");
    try {
        return Sinogram(h.axis0, h.axis1, std::move(v));
    } catch (const GeometryMismatch& e) {
        throw FormatError(std::string("invalid sinogram header: ") + e.what());
    }
}

std::vector<unsigned char> image_pixels(const ReflectivityGrid& g, Normalization mode) {
    const std::size_t n1 = g.n1(), n2 = g.n2();
    std::vector<double> w(g.values().begin(), g.values().end());
    if (mode == Normalization::Log) {
        double peak = 0.0;
        for (double v : w) peak = std::max(peak, std::abs(v));
        const double floor = peak > 0.0 ? peak * 1e-6 : 1.0;
        for (double& v : w) v = std::log10(std::max(std::abs(v), floor));
    }
    const auto [lo_it, hi_it] = std::minmax_element(w.begin(), w.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<unsigned char> px(n1 * n2);
    for (std::size_t r = 0; r < n2; ++r) {
        const std::size_t i2 = n2 - 1 - r;
        for (std::size_t c = 0; c < n1; ++c) {
            const double v = w[g.index(c, i2)];
            const double level = hi > lo ? std::round(255.0 * (v - lo) / (hi - lo)) : 128.0;
            px[r * n1 + c] = static_cast<unsigned char>(std::clamp(level, 0.0, 255.0));
        }
    }
    return px;
}

void export_image(const ReflectivityGrid& g, const std::filesystem::path& path, Normalization mode) {
    const auto px = image_pixels(g, mode);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "P5\n" << g.n1() << " " << g.n2() << "\n255\n";
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace cmsar
