#pragma once

#include "wavemech/grid.hpp"

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace testing {

inline wavemech::GridSpec line(double min, double max, int n, wavemech::Boundary b = wavemech::Boundary::dirichlet_zero,
                               double dt = 0.0) {
  wavemech::GridSpec g;
  g.axes = {wavemech::AxisSpec{min, max, n}};
  g.boundary = b;
  g.dt = dt;
  return g;
}

inline wavemech::GridSpec square(double min, double max, int n, wavemech::Boundary b = wavemech::Boundary::dirichlet_zero,
                                 double dt = 0.0) {
  wavemech::GridSpec g = line(min, max, n, b, dt);
  g.axes.push_back(g.axes.front());
  return g;
}

/// log2 of successive error ratios for a halving sequence of steps.
inline double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("wavemech_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
