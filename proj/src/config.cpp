#include "cmsar/config.hpp"

#include "cmsar/error.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace cmsar {

namespace {

using nlohmann::json;

json axis_json(const GridAxis& a) { return {{"min", a.min()}, {"max", a.max()}, {"n", a.size()}}; }


double* scalar_slot(AcquisitionConfig& c, std::string_view key) {
    if (key == "h") return &c.h;
    if (key == "epsilon") return &c.epsilon;
    if (key == "peak_frequency") return &c.peak_frequency;
    if (key == "taper_fraction") return &c.taper_fraction;
    if (key == "band_constant") return &c.band_constant;
    return nullptr;
}

GridAxis* axis_slot(AcquisitionConfig& c, std::string_view key) {
    if (key == "x1") return &c.x1;
    if (key == "x2") return &c.x2;
    if (key == "s") return &c.s;
    if (key == "t") return &c.t;
    return nullptr;
}

GridAxis merge_axis(const GridAxis& base, const json& j, const std::string& name) {
    if (!j.is_object()) throw ConfigError("axis '" + name + "' must be an object");
    for (const auto& [k, v] : j.items()) {
        if (k != "min" && k != "max" && k != "n") throw ConfigError("unknown key '" + name + "." + k + "'");
    }
    try {
        return GridAxis(j.value("min", base.min()), j.value("max", base.max()),
                        j.value("n", base.size()));
    } catch (const json::exception& e) {
        throw ConfigError("axis '" + name + "': " + e.what());
    } catch (const GeometryMismatch& e) {
        throw ConfigError("axis '" + name + "': " + e.what());
    }
}

}  // namespace

std::string acquisition_to_json(const AcquisitionConfig& cfg) {
    json j = {{"h", cfg.h},
              {"epsilon", cfg.epsilon},
              {"peak_frequency", cfg.peak_frequency},
              {"taper_fraction", cfg.taper_fraction},
              {"band_constant", cfg.band_constant},
              {"x1", axis_json(cfg.x1)},
              {"x2", axis_json(cfg.x2)},
              {"s", axis_json(cfg.s)},
              {"t", axis_json(cfg.t)}};
    return j.dump(2) + "\n";
}

AcquisitionConfig acquisition_from_json(const std::string& text, const AcquisitionConfig& base) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must hold a JSON object");

    AcquisitionConfig cfg = base;
    for (const auto& [key, value] : doc.items()) {
        if (double* d = scalar_slot(cfg, key)) {
            if (!value.is_number()) throw ConfigError("'" + key + "' must be a number");
            *d = value.get<double>();
        } else if (GridAxis* a = axis_slot(cfg, key)) {
            *a = merge_axis(*a, value, key);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    return cfg;
}

AcquisitionConfig load_acquisition(const std::filesystem::path& path, const AcquisitionConfig& base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return acquisition_from_json(ss.str(), base);
}

void apply_override(AcquisitionConfig& cfg, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override must look like key=value");
    const std::string key(assignment.substr(0, eq));
    const std::string_view text = assignment.substr(eq + 1);

    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) {
        throw ConfigError("override '" + key + "' has a non-numeric value");
    }

    json patch;
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
        if (!scalar_slot(cfg, key)) throw ConfigError("unknown config key '" + key + "'");
        patch[key] = value;
    } else {
        const std::string axis = key.substr(0, dot), field = key.substr(dot + 1);
        if (!axis_slot(cfg, axis)) throw ConfigError("unknown config key '" + key + "'");
        if (field == "n") {
            if (value < 2 || value != static_cast<double>(static_cast<std::size_t>(value))) {
                throw ConfigError("'" + key + "' must be an integer >= 2");
            }
            patch[axis][field] = static_cast<std::size_t>(value);
        } else {
            patch[axis][field] = value;
        }
    }
    cfg = acquisition_from_json(patch.dump(), cfg);
}

}  // namespace cmsar
