#pragma once

// JSON form of AcquisitionConfig:
//
//   { "h": 1, "epsilon": 0.05, "peak_frequency": 12, "taper_fraction": 0.05,
//     "band_constant": 20,
//     "x1": {"min": -1, "max": 1, "n": 128}, "x2": {...}, "s": {...}, "t": {...} }
//
// Every key is optional; missing keys keep the base value.  Overrides use
// dotted paths such as "h=1.5" or "s.max=3".

#include "cmsar/acquisition.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace cmsar {

AcquisitionConfig acquisition_from_json(const std::string& text, const AcquisitionConfig& base = {});
AcquisitionConfig load_acquisition(const std::filesystem::path& path, const AcquisitionConfig& base = {});
std::string acquisition_to_json(const AcquisitionConfig& cfg);

// Throws ConfigError on unknown keys or unparseable values.
void apply_override(AcquisitionConfig& cfg, std::string_view assignment);

}  // namespace cmsar
