#ifndef QDM_ODMR_HPP
#define QDM_ODMR_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qdm/raster.hpp"
#include "qdm/sensor.hpp"

namespace qdm {

enum class OdmrBranch { FMinus, FPlus };

inline const char* branch_name(OdmrBranch b) {
  return b == OdmrBranch::FMinus ? "f_minus" : "f_plus";
}

/// Per-pixel fluorescence vs microwave frequency for one resonance branch.
/// frames(f, p): spectrum sample f of pixel p, p = ix + nx*iy, so each
/// pixel's spectrum is contiguous.
struct OdmrStack {
  Grid2D grid;
  Eigen::VectorXd freqs_mhz;
  Eigen::ArrayXXd frames;
  OdmrBranch branch = OdmrBranch::FMinus;
  int sweeps_averaged = 1;
  std::vector<std::string> warnings;

  int n_freqs() const { return static_cast<int>(freqs_mhz.size()); }

  void validate() const {
    grid.validate();
    require(n_freqs() >= 5, "OdmrStack: need at least 5 frequency points");
    for (int i = 1; i < n_freqs(); ++i)
      require(freqs_mhz[i] > freqs_mhz[i - 1],
              "OdmrStack: frequencies must be strictly increasing");
    require(frames.rows() == n_freqs() && frames.cols() == grid.npixels(),
            "OdmrStack: frames shape mismatch");
    require(frames.allFinite(), "OdmrStack: fluorescence must be finite");
    require((frames > 0.0).all() && (frames < 2.0).all(),
            "OdmrStack: normalized fluorescence must lie in (0, 2)");
    require(sweeps_averaged >= 1, "OdmrStack: sweeps_averaged must be >= 1");
  }
};

/// Synthesis / acquisition parameters (fit-free knobs of the generative model).
struct AcquisitionParams {
  int n_f = 71;
  double span_mhz = 20.0;
  double contrast = 0.02;        // dip amplitude c
  double linewidth_mhz = 0.8;    // HWHM
  double offset = 0.0;           // generative background offset C
  double noise_sigma = 0.0;      // Gaussian std on the stored (averaged) frames
  uint64_t seed = 0;
  int sweeps_averaged = 110;

  void validate() const {
    require(n_f >= 5, "AcquisitionParams: n_f must be >= 5");
    require(span_mhz > 0.0, "AcquisitionParams: span must be > 0");
    require(contrast > 0.0 && contrast < 1.0, "AcquisitionParams: contrast in (0,1)");
    require(linewidth_mhz > 0.0, "AcquisitionParams: linewidth must be > 0");
    require(noise_sigma >= 0.0, "AcquisitionParams: noise_sigma must be >= 0");
    require(sweeps_averaged >= 1, "AcquisitionParams: sweeps_averaged >= 1");
  }
};

/// Two-dip Lorentzian fit result for one branch (hyperfine doublet).
struct LorentzianFit {
  double c1 = 0.0, c2 = 0.0;          // contrasts
  double delta1 = 0.0, delta2 = 0.0;  // HWHM, MHz
  double f1 = 0.0, f2 = 0.0;          // dip centers, MHz (f1 < f2)
  double offset = 0.0;                // background C
  double branch_center = 0.0;         // (f1 + f2)/2
  double residual_rms = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Doublet model value: 1 + C - sum_k c_k / (1 + ((f - f_k)/d_k)^2).
double lorentzian_doublet(double f, double c1, double d1, double f1, double c2,
                          double d2, double f2, double offset);

/// Synthesize both branch stacks from a total-field map (tesla, along the NV
/// axis). Each pixel gets hyperfine dips at f_branch +- hyperfine/2; the
/// frequency axis spans the branch center of the map-mean field +- span/2.
/// Noise is i.i.d. Gaussian per (pixel, frequency) from per-pixel substreams
/// of acq.seed, so output is bit-identical for any thread count.
std::pair<OdmrStack, OdmrStack> synth_stack(const ScalarRaster& b_total,
                                            const NvSensorParams& params,
                                            const AcquisitionParams& acq,
                                            int threads = 1);

/// Data-driven starting point for fit_pixel (two deepest smoothed minima).
LorentzianFit initial_guess(const Eigen::VectorXd& freqs_mhz,
                            const Eigen::Ref<const Eigen::VectorXd>& values);

struct FitOptions {
  int max_iterations = 200;
  bool tied = false;  // share c and delta between the two hyperfine dips
};

/// Levenberg-Marquardt fit of the two-dip model to one spectrum.
/// Degenerate spectra yield converged = false, never a throw.
LorentzianFit fit_pixel(const Eigen::VectorXd& freqs_mhz,
                        const Eigen::Ref<const Eigen::VectorXd>& values,
                        const LorentzianFit& init, const FitOptions& opts = {});

struct ExtractOptions {
  double max_nonconverged_fraction = 0.10;  // quality gate
  FitOptions fit;
  int threads = 1;
};

struct BnvExtraction {
  ScalarRaster bnv;                  // tesla
  std::vector<long> infilled;        // pixel ids repaired by the median filter
  long n_nonconverged = 0;
  ScalarRaster center_minus;         // MHz branch-center maps (diagnostics)
  ScalarRaster center_plus;
};

/// Per-pixel fit of both branches; B_NV = (f+ - f-) / (2 gamma). Pixels where
/// either branch fails to converge are filled with the 3x3 median of
/// converged neighbors and listed in `infilled`. Throws QualityGateError when
/// the non-converged fraction exceeds the gate.
BnvExtraction extract_bnv_map(const OdmrStack& stack_minus,
                              const OdmrStack& stack_plus,
                              const NvSensorParams& params,
                              const ExtractOptions& opts = {});

/// Pixelwise B_total - B_openckt: removes the bias-field contribution.
ScalarRaster subtract_bias(const ScalarRaster& b_total,
                           const ScalarRaster& b_openckt);

}  // namespace qdm

#endif
