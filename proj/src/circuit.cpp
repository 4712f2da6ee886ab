#include "qdm/circuit.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace qdm {

double expected_current(const MirrorSpec& spec, const std::string& tap) {
  spec.validate();
  for (const auto& t : spec.taps)
    if (t.name == tap) return spec.i_in * t.multiplier;
  throw ValidationError("expected_current: unknown tap '" + tap + "'");
}

MirrorRatioFit mirror_ratio(const std::vector<std::pair<double, double>>& points) {
  require(points.size() >= 2, "mirror_ratio: need at least 2 points");
  const double n = static_cast<double>(points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : points) {
    sx += x; sy += y; sxx += x * x; sxy += x * y; syy += y * y;
  }
  const double vxx = sxx - sx * sx / n;
  require(vxx > 0.0, "mirror_ratio: all input currents identical");
  const double vxy = sxy - sx * sy / n;
  const double vyy = syy - sy * sy / n;

  MirrorRatioFit fit;
  fit.slope = vxy / vxx;
  fit.intercept = (sy - fit.slope * sx) / n;
  const double ss_res = vyy - fit.slope * vxy;
  fit.r_squared = vyy > 0.0 ? 1.0 - ss_res / vyy : 1.0;
  return fit;
}

std::vector<ComparisonRow> build_report(
    const MirrorSpec& spec, const std::map<std::string, double>& qdm_results,
    const std::map<std::string, ExternalRef>& external_refs) {
  spec.validate();
  auto pct = [](double qdm, double ref) { return 100.0 * std::abs(qdm - ref) / ref; };

  std::vector<ComparisonRow> rows;
  for (const auto& tap : spec.taps) {
    const auto it = qdm_results.find(tap.name);
    if (it == qdm_results.end()) continue;
    ComparisonRow row;
    row.tap = tap.name;
    row.expected = expected_current(spec, tap.name);
    row.qdm = it->second;
    if (const auto rit = external_refs.find(tap.name); rit != external_refs.end()) {
      row.reference = rit->second.simulation;
      row.conventional = rit->second.conventional;
    }
    if (row.conventional)
      row.pct_error_vs_conventional = pct(row.qdm, *row.conventional);
    if (row.expected != 0.0)
      row.pct_error_vs_expected = pct(row.qdm, row.expected);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string amps(double a) {
  std::ostringstream os;
  os << std::setprecision(4) << std::fixed << a * 1e6 << " uA";
  return os.str();
}

std::string opt_amps(const std::optional<double>& a) {
  return a ? amps(*a) : std::string("-");
}

std::string opt_pct(const std::optional<double>& p) {
  if (!p) return "-";
  std::ostringstream os;
  os << std::setprecision(1) << std::fixed << *p;
  return os.str();
}

}  // namespace

std::string render_report_text(const std::vector<ComparisonRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(6) << "tap" << std::setw(14) << "expected"
     << std::setw(14) << "simulation" << std::setw(14) << "conventional"
     << std::setw(14) << "qdm" << std::setw(10) << "%err(cnv)" << std::setw(10)
     << "%err(exp)" << '\n';
  for (const auto& r : rows) {
    os << std::left << std::setw(6) << r.tap << std::setw(14) << amps(r.expected)
       << std::setw(14) << opt_amps(r.reference) << std::setw(14)
       << opt_amps(r.conventional) << std::setw(14) << amps(r.qdm)
       << std::setw(10) << opt_pct(r.pct_error_vs_conventional) << std::setw(10)
       << opt_pct(r.pct_error_vs_expected) << '\n';
  }
  return os.str();
}

}  // namespace qdm
