#pragma once

// Check suites behind the diagnose, verify and selftest subcommands.

#include "cmsar/acquisition.hpp"
#include "cmsar/identities.hpp"
#include "cmsar/microlocal.hpp"

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace cmsar::cli {

struct CheckLine {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct SuiteResult {
    std::vector<CheckLine> lines;
    bool pass() const;
    void add(std::string name, bool ok, std::string detail);
    void print(std::ostream& os) const;
};

struct DiagnoseOptions {
    std::size_t samples = 1000;  // per kind
    std::uint64_t seed = 1;
};

// Writes diagnostics.csv into out (when not empty).
SuiteResult run_diagnose(const AcquisitionConfig& cfg, const DiagnoseOptions& opts,
                         const std::filesystem::path& out);

struct VerifyOptions {
    std::size_t identity_samples = 1000;
    std::size_t generator_samples = 1000;
    std::size_t composition_instances = 10;
    std::size_t grid_nodes = 2001;
    std::size_t nonvanishing_samples = 100000;
    std::size_t cutoff_samples = 1000;
    std::uint64_t seed = 1;
};

// Writes identity_residuals.csv, generators.csv, composition.csv,
// cutoff.csv and lagrangians.csv into out (when not empty).
SuiteResult run_verify(const AcquisitionConfig& cfg, const VerifyOptions& opts,
                       const std::filesystem::path& out);

// Max relative defect of the dot-product test over n random pairs.
double adjoint_defect(const AcquisitionConfig& cfg, std::size_t pairs, std::uint64_t seed,
                      unsigned workers);

}  // namespace cmsar::cli
