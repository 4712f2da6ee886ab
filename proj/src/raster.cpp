#include "qdm/raster.hpp"

namespace qdm {

Unit unit_from_name(const std::string& s) {
  if (s == "tesla") return Unit::Tesla;
  if (s == "ampere_per_meter") return Unit::AmperePerMeter;
  if (s == "megahertz") return Unit::Megahertz;
  if (s == "dimensionless") return Unit::Dimensionless;
  throw ValidationError("unknown unit '" + s + "'");
}

}  // namespace qdm
