#ifndef QDM_SENSOR_HPP
#define QDM_SENSOR_HPP

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "qdm/errors.hpp"

namespace qdm {

/// NV ensemble sensing parameters. Frequencies are MHz and fields mT
/// (matching the usual lab constants); all lengths are meters.
struct NvSensorParams {
  double d_mhz = 2870.0;            // zero-field splitting
  double gamma_mhz_per_mt = 28.0;   // gyromagnetic ratio
  double theta = std::acos(1.0 / std::sqrt(3.0));  // NV-axis polar angle, rad
  double phi = M_PI / 4.0;          // NV-axis azimuthal angle, rad
  double h_nv = 2.5e-6;             // NV layer thickness, m
  double bias_field_mt = 2.0;       // bias field along the NV axis
  double hyperfine_mhz = 3.03;      // hyperfine doublet splitting

  void validate() const {
    require(d_mhz > 0.0, "NvSensorParams: D must be > 0");
    require(gamma_mhz_per_mt > 0.0, "NvSensorParams: gamma must be > 0");
    require(h_nv >= 0.0, "NvSensorParams: h_nv must be >= 0");
    require(hyperfine_mhz >= 0.0, "NvSensorParams: hyperfine must be >= 0");
    require(theta >= 0.0 && theta <= M_PI, "NvSensorParams: theta out of [0, pi]");
    require(phi > -M_PI && phi <= M_PI, "NvSensorParams: phi out of (-pi, pi]");
  }

  /// Unit vector of the NV axis in the sample frame.
  Eigen::Vector3d axis() const {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
            std::cos(theta)};
  }
};

/// Spin resonance pair for a total field b_nv (mT) along the NV axis:
/// f± = D ± gamma * b_nv. Valid below the level anticrossing |gamma*b| < D.
inline std::pair<double, double> resonance_pair(const NvSensorParams& p,
                                                double b_nv_mt) {
  p.validate();
  require(std::isfinite(b_nv_mt), "resonance_pair: field must be finite");
  const double zeeman = p.gamma_mhz_per_mt * b_nv_mt;
  require(std::abs(zeeman) < p.d_mhz,
          "resonance_pair: |gamma*B| >= D (anticrossing regime, out of model)");
  return {p.d_mhz - zeeman, p.d_mhz + zeeman};
}

/// Inverse of resonance_pair: field (mT) from the measured splitting.
inline double field_from_resonances(const NvSensorParams& p, double f_minus_mhz,
                                    double f_plus_mhz) {
  return (f_plus_mhz - f_minus_mhz) / (2.0 * p.gamma_mhz_per_mt);
}

constexpr double kMilliteslaPerTesla = 1e3;

}  // namespace qdm

#endif
