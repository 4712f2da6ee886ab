#ifndef QDM_CIRCUIT_HPP
#define QDM_CIRCUIT_HPP

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qdm/errors.hpp"

namespace qdm {

/// Named circuit location carrying m unit-transistor currents.
struct CircuitTap {
  std::string name;
  double multiplier = 1.0;
};

/// Current-mirror topology: input transistor aspect ratio, output implemented
/// as n_parallel unit transistors in parallel.
struct MirrorSpec {
  double wl_input = 1.0;    // (W/L)_1
  double wl_unit = 1.0;     // unit-transistor W/L
  int n_parallel = 1;       // output = n_parallel units
  double i_in = 0.0;        // A
  std::vector<CircuitTap> taps;

  double wl_output() const { return wl_unit * n_parallel; }

  void validate() const {
    require(wl_input > 0.0 && wl_unit > 0.0, "MirrorSpec: aspect ratios must be > 0");
    require(n_parallel >= 1, "MirrorSpec: n_parallel must be >= 1");
    require(std::isfinite(i_in), "MirrorSpec: i_in must be finite");
    for (const auto& t : taps)
      require(t.multiplier >= 1.0, "MirrorSpec: tap multipliers must be >= 1");
  }
};

/// I_tap = I_in * m_tap (the mirror relation I_out = I_in (W/L)_2/(W/L)_1,
/// with the tap multiplier counting the unit transistors feeding it).
double expected_current(const MirrorSpec& spec, const std::string& tap);

struct MirrorRatioFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least-squares line through measured (I_in, I_out) sweep points;
/// the slope is the empirical mirroring ratio.
MirrorRatioFit mirror_ratio(const std::vector<std::pair<double, double>>& points);

/// External reference currents for one tap (never computed here).
struct ExternalRef {
  std::optional<double> simulation;    // A
  std::optional<double> conventional;  // A
};

struct ComparisonRow {
  std::string tap;
  double expected = 0.0;                       // A
  std::optional<double> reference;             // simulation, A
  std::optional<double> conventional;          // A
  double qdm = 0.0;                            // A
  std::optional<double> pct_error_vs_conventional;
  std::optional<double> pct_error_vs_expected;
};

/// Table-style comparison of expected / simulated / conventional / QDM
/// currents per tap. Error columns are omitted when their reference is
/// missing; percentages are 100*|qdm - ref|/ref.
std::vector<ComparisonRow> build_report(
    const MirrorSpec& spec, const std::map<std::string, double>& qdm_results,
    const std::map<std::string, ExternalRef>& external_refs);

/// Plain-text rendering (percentages shown to 1 decimal, "-" for missing).
std::string render_report_text(const std::vector<ComparisonRow>& rows);

}  // namespace qdm

#endif
