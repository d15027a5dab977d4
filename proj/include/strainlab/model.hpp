#pragma once

// Full model parameters, validation of the standing assumptions, and the
// block structure of tied reproduction numbers.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "kernels.hpp"

namespace strainlab {

struct StrainParams {
  AgeKernel beta;
  AgeKernel mu;
};

struct ModelParams {
  double lambda = 0.0;  // susceptible inflow
  double mu_s = 0.0;    // susceptible death rate
  double mu0 = 0.0;     // uniform mortality floor
  std::vector<StrainParams> strains;

  int n() const { return static_cast<int>(strains.size()); }
};

struct ValidationIssue {
  int item = 0;     // assumption item (1 or 2)
  int strain = -1;  // original strain index, -1 for global constraints
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool valid() const { return issues.empty(); }
};

inline ValidationReport validate(const ModelParams& p) {
  ValidationReport rep;
  auto fail = [&](int item, int strain, std::string msg) {
    rep.issues.push_back({item, strain, std::move(msg)});
  };
  if (!(p.lambda > 0.0)) fail(1, -1, "Lambda must be positive");
  if (!(p.mu_s > 0.0)) fail(1, -1, "mu_S must be positive");
  if (!(p.mu0 > 0.0)) fail(1, -1, "mu0 must be positive");
  if (p.mu0 > 0.0 && p.mu_s < p.mu0) fail(1, -1, "mu_S must be >= mu0");
  for (int k = 0; k < p.n(); ++k) {
    const auto& s = p.strains[static_cast<std::size_t>(k)];
    if (!s.mu.covers_all_ages())
      fail(1, k, "mu kernel must cover every age");
    if (p.mu0 > 0.0 && s.mu.min_over_all_ages() < p.mu0)
      fail(1, k, "mu kernel must be >= mu0 at every age");
    if (s.beta.identically_zero())
      fail(1, k, "beta kernel must not be identically zero");
    if (!s.beta.positive_on_support_interval())
      fail(2, k, "beta must be positive on [beta_lo, beta_sup)");
  }
  return rep;
}

// Blocks of equal reproduction numbers after a stable descending sort.
// All reported strain indices are original indices; the sort is internal.
struct BlockStructure {
  std::vector<int> order;      // order[p] = original index of p-th sorted strain
  std::vector<int> sigma;      // sigma[0] = 0 < sigma[1] < ... < sigma[n_r] = n
  int n_r = 0;                 // number of distinct R0 values
  int n_gt = 0;                // distinct R0 values > 1
  double tie_tol = 1e-9;
  std::vector<double> r0;      // by original index

  // Original indices of block k (1-based).
  std::vector<int> block_strains(int k) const {
    std::vector<int> out;
    for (int p = sigma[static_cast<std::size_t>(k) - 1];
         p < sigma[static_cast<std::size_t>(k)]; ++p)
      out.push_back(order[static_cast<std::size_t>(p)]);
    return out;
  }

  // Block index (1-based) of an original strain index.
  int block_of(int original) const {
    int p = 0;
    while (order[static_cast<std::size_t>(p)] != original) ++p;
    for (int k = 1; k <= n_r; ++k)
      if (p < sigma[static_cast<std::size_t>(k)]) return k;
    return n_r;
  }

  // R0 of block k (value at the last sorted position of the block).
  double block_r0(int k) const {
    return r0[static_cast<std::size_t>(
        order[static_cast<std::size_t>(sigma[static_cast<std::size_t>(k)] - 1)])];
  }
};

inline BlockStructure blocks(const std::vector<double>& r0, double tie_tol = 1e-9) {
  const int n = static_cast<int>(r0.size());
  BlockStructure b;
  b.tie_tol = tie_tol;
  b.r0 = r0;
  b.order.resize(static_cast<std::size_t>(n));
  std::iota(b.order.begin(), b.order.end(), 0);
  std::stable_sort(b.order.begin(), b.order.end(), [&](int a, int c) {
    return r0[static_cast<std::size_t>(a)] > r0[static_cast<std::size_t>(c)];
  });
  b.sigma.push_back(0);
  int p = 0;
  while (p < n) {
    const double head = r0[static_cast<std::size_t>(b.order[static_cast<std::size_t>(p)])];
    int q = p + 1;
    while (q < n &&
           head - r0[static_cast<std::size_t>(b.order[static_cast<std::size_t>(q)])] <=
               tie_tol * std::max(1.0, std::abs(head)))
      ++q;
    b.sigma.push_back(q);
    if (head > 1.0) ++b.n_gt;
    p = q;
  }
  b.n_r = static_cast<int>(b.sigma.size()) - 1;
  return b;
}

}  // namespace strainlab
