#ifndef QDM_QUADRATURE_HPP
#define QDM_QUADRATURE_HPP

#include <functional>
#include <vector>

#include "qdm/errors.hpp"

namespace qdm {

/// Composite-Simpson nodes and weights on [0, length]; n is rounded up to
/// the next odd count so the rule closes. Weights sum to `length`.
struct SimpsonRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline SimpsonRule simpson_rule(double length, int n) {
  require(n >= 2, "simpson_rule: need at least 2 points");
  if (n % 2 == 0) ++n;
  SimpsonRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double step = length / (n - 1);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = i * step;
    double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    r.weights[i] = w * step / 3.0;
  }
  return r;
}

/// Depth average over the NV layer per the thickness correction
/// B' = (1/h_nv) * integral_0^{h_nv} B(x, l) dl, composite Simpson.
/// For h_nv = 0 this degrades to the surface value B(x, 0).
template <typename FieldFn>
auto layer_average(FieldFn field_fn, double h_nv, int quadrature_n = 33) {
  require(h_nv >= 0.0, "layer_average: h_nv must be >= 0");
  require(quadrature_n >= 2, "layer_average: quadrature_n must be >= 2");
  if (h_nv == 0.0) {
    return std::function<double(double)>(
        [field_fn](double x) { return field_fn(x, 0.0); });
  }
  SimpsonRule rule = simpson_rule(h_nv, quadrature_n);
  return std::function<double(double)>([field_fn, rule, h_nv](double x) {
    double acc = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i)
      acc += rule.weights[i] * field_fn(x, rule.nodes[i]);
    return acc / h_nv;
  });
}

}  // namespace qdm

#endif
