#pragma once

#include <vector>

#include "kernels.hpp"

namespace strainlab {

// Discretized state: susceptibles plus per-strain cell-average densities.
// Density values are attached to cell midpoints.
struct GridState {
  double t = 0.0;
  double s = 0.0;
  std::vector<std::vector<double>> x;  // [strain][cell]

  double mass(int k, double da) const {
    double m = 0.0;
    for (double v : x[static_cast<std::size_t>(k)]) m += v;
    return m * da;
  }

  double total_norm(double da) const {
    double m = s;
    for (std::size_t k = 0; k < x.size(); ++k)
      m += mass(static_cast<int>(k), da);
    return m;
  }
};

}  // namespace strainlab
