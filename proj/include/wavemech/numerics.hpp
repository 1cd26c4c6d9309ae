#pragma once

#include <span>
#include <vector>

#include "wavemech/vec.hpp"

namespace wavemech {

/// Least-squares polynomial fit y ~ sum_k c[k] x^k, degree <= 3.
std::vector<double> polyfit(std::span<const double> x, std::span<const double> y, int degree);

/// Slope of log(y) against log(x); entries with y <= 0 are skipped.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Quasi-uniform unit directions: evenly spaced angles in 2D, a Fibonacci
/// lattice on the sphere in 3D, {-1, +1} in 1D.

std::vector<Vec3> shell_directions(int dims, int count);

}  // namespace wavemech
