#include "wavemech/potential.hpp"

namespace wavemech {

namespace {

void check_component(const RealField& f, const GridSpec& grid, const char* name) {
  require(f.grid() == grid, ErrorKind::shape, std::string(name) + " is sampled on a different grid");
  for (double v : f.values()) {
    require(std::isfinite(v), ErrorKind::configuration, std::string(name) + " must be finite on the grid");
  }
}

}  // namespace

void FourPotential::validate(const GridSpec& grid) const {
  if (V) check_component(*V, grid, "V");
  if (chi) check_component(*chi, grid, "chi");
  if (!A.empty()) {
    require(static_cast<int>(A.size()) == grid.dims(), ErrorKind::dimension, "A needs one component per axis");
    for (const auto& c : A) check_component(c, grid, "A");
  }
  require(std::isfinite(charge), ErrorKind::configuration, "charge must be finite");
}

}  // namespace wavemech
