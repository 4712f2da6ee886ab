#ifndef QDM_IO_HPP
#define QDM_IO_HPP

#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "qdm/circuit.hpp"
#include "qdm/odmr.hpp"
#include "qdm/raster.hpp"

namespace qdm {

/// Write-temp-then-rename: a crashed run never leaves a truncated file that
/// later parses.
void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer);

// --- QDMR1 raster format: structured-text header (magic, nx, ny, pitch_m,
// origin_m, unit, layout declaration, data count), then nx*ny little-endian
// IEEE float64 in row-major y-outer x-inner order. Round trips bit-exactly.

void write_raster_stream(std::ostream& os, const ScalarRaster& r);
ScalarRaster read_raster_stream(std::istream& is);
void write_raster(const std::filesystem::path& path, const ScalarRaster& r);
ScalarRaster read_raster(const std::filesystem::path& path);

// --- QDMS1 ODMR stack format: header (magic, branch, n_f, frequency list in
// MHz, sweeps_averaged, warnings), then n_f consecutive QDMR1 rasters.

void write_stack(const std::filesystem::path& path, const OdmrStack& s);
OdmrStack read_stack(const std::filesystem::path& path);

// --- CSV (comma-separated, mandatory unit-declaring header row) ---

/// Transect: header "x_m,b_tesla".
void write_transect_csv(const std::filesystem::path& path,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& b);
std::pair<Eigen::VectorXd, Eigen::VectorXd> read_transect_csv(
    const std::filesystem::path& path);

/// External reference currents: header "tap,simulation_A,conventional_A",
/// empty or "-" fields for missing values.
std::map<std::string, ExternalRef> read_refs_csv(
    const std::filesystem::path& path);

/// Comparison report: header
/// "tap,expected_A,simulation_A,conventional_A,qdm_A,
///  pct_error_vs_conventional,pct_error_vs_expected".
void write_report_csv(const std::filesystem::path& path,
                      const std::vector<ComparisonRow>& rows);

/// 64-bit FNV-1a (stable content hash for manifests).
uint64_t fnv1a64(const std::string& data);

}  // namespace qdm

#endif
