#ifndef QDM_ERRORS_HPP
#define QDM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qdm {

// Invalid inputs, broken invariants, malformed files. CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Data passed validation but failed a quality threshold (e.g. too many
// non-converged pixel fits). CLI maps this to exit code 2.
class QualityGateError : public std::runtime_error {
public:
  explicit QualityGateError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace qdm

#endif
