#pragma once

// Shared fixtures for the test suite.

#include <string>
#include <vector>

#include "strainlab/experiment.hpp"

namespace testutil {

using namespace strainlab;

// Lambda = mu_s = mu0 = 1, one strain with constant kernels.
inline ModelParams one_strain(double beta, double mu = 1.0) {
  ModelParams p;
  p.lambda = 1.0;
  p.mu_s = 1.0;
  p.mu0 = 1.0;
  p.strains.push_back({AgeKernel::constant(beta), AgeKernel::constant(mu)});
  return p;
}

inline ModelParams strains(const std::vector<double>& betas) {
  ModelParams p;
  p.lambda = 1.0;
  p.mu_s = 1.0;
  p.mu0 = 1.0;
  for (double b : betas)
    p.strains.push_back({AgeKernel::constant(b), AgeKernel::constant(1.0)});
  return p;
}

// A_max = 30 so the mu0 = 1 tail is below 1e-12.
inline Grid grid30(double da) {
  Grid g;
  g.da = da;
  g.cells = static_cast<int>(30.0 / da + 0.5);
  g.tail_tol = 1e-12;
  return g;
}

// Loose-tail grid for short-range unit checks.
inline Grid grid(double da, int cells) {
  Grid g;
  g.da = da;
  g.cells = cells;
  g.tail_tol = 1.0;
  return g;
}

inline GridState zero_state(const ModelParams& p, const Grid& g, double s) {
  GridState st;
  st.s = s;
  st.x.assign(static_cast<std::size_t>(p.n()),
              std::vector<double>(static_cast<std::size_t>(g.cells), 0.0));
  return st;
}

// Window density height h on [lo, hi), grid-aligned windows are exact.
inline void set_window(GridState& st, int k, const Grid& g, double lo, double hi,
                       double h) {
  for (int i = 0; i < g.cells; ++i) {
    const double a = g.node(i), b = g.node(i + 1);
    const double ov = std::min(b, hi) - std::max(a, lo);
    if (ov > 0.0)
      st.x[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] =
          h * ov / g.da;
  }
}

}  // namespace testutil
