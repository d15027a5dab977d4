#pragma once

// Closed-form equilibria of the model, stationarity residuals and the
// distance from a state to an equilibrium set.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernels.hpp"
#include "model.hpp"
#include "state.hpp"

namespace strainlab {

struct EquilibriumPoint {
  double s_star = 0.0;
  std::vector<std::vector<double>> densities;  // [strain][cell], midpoint values
};

struct EquilibriumSetDescriptor {
  enum class Kind { DiseaseFree, Block };
  Kind kind = Kind::DiseaseFree;
  int block = 0;                         // 1-based, Block kind only
  std::vector<int> survivors;            // original strain indices, nonempty for Block
  std::optional<std::vector<double>> weights;  // fixed alpha on survivors, optional

  static EquilibriumSetDescriptor disease_free() { return {}; }
  static EquilibriumSetDescriptor block_set(int k, std::vector<int> J) {
    EquilibriumSetDescriptor d;
    d.kind = Kind::Block;
    d.block = k;
    d.survivors = std::move(J);
    return d;
  }
  std::string name(int n_strains) const {
    if (kind == Kind::DiseaseFree) return "E0";
    std::string s = "E_" + std::to_string(block) + ",{";
    for (std::size_t i = 0; i < survivors.size(); ++i)
      s += (i ? "," : "") + std::to_string(survivors[i] + 1);
    s += "}";
    (void)n_strains;
    return s;
  }
};

inline EquilibriumPoint disease_free(const ModelParams& p, const Grid& grid) {
  EquilibriumPoint e;
  e.s_star = p.lambda / p.mu_s;
  e.densities.assign(static_cast<std::size_t>(p.n()),
                     std::vector<double>(static_cast<std::size_t>(grid.cells), 0.0));
  return e;
}

// Point of the block-k equilibrium family for simplex weights alpha
// (indexed by original strain, zero outside block k).
inline EquilibriumPoint endemic_point(const ModelParams& p,
                                      const std::vector<DerivedStrain>& derived,
                                      const BlockStructure& b, int k,
                                      const std::vector<double>& alpha,
                                      const Grid& grid) {
  if (k < 1 || k > b.n_gt)
    throw std::invalid_argument("endemic_point: block index must lie in [1, n_>]");
  if (static_cast<int>(alpha.size()) != static_cast<int>(derived.size()))
    throw std::invalid_argument("endemic_point: alpha must have one entry per strain");
  double sum = 0.0;
  for (int j = 0; j < static_cast<int>(alpha.size()); ++j) {
    const double a = alpha[static_cast<std::size_t>(j)];
    if (a < 0.0) throw std::invalid_argument("endemic_point: alpha must be >= 0");
    if (a > 0.0 && b.block_of(j) != k)
      throw std::invalid_argument("endemic_point: alpha supported outside block " +
                                  std::to_string(k));
    sum += a;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("endemic_point: alpha must sum to 1");

  EquilibriumPoint e;
  const int last = b.order[static_cast<std::size_t>(b.sigma[static_cast<std::size_t>(k)]) - 1];
  e.s_star = 1.0 / derived[static_cast<std::size_t>(last)].r;
  e.densities.assign(static_cast<std::size_t>(p.n()),
                     std::vector<double>(static_cast<std::size_t>(grid.cells), 0.0));
  for (int j = 0; j < p.n(); ++j) {
    const double a = alpha[static_cast<std::size_t>(j)];
    if (a == 0.0) continue;
    const auto& d = derived[static_cast<std::size_t>(j)];
    const double c = p.mu_s * (d.r0 - 1.0) / d.r * a;
    auto& row = e.densities[static_cast<std::size_t>(j)];
    for (int i = 0; i < grid.cells; ++i)
      row[static_cast<std::size_t>(i)] = c * d.pi_mid[static_cast<std::size_t>(i)];
  }
  return e;
}

// Stationarity defect of a point on the grid:
//   |Lambda - mu_S S - S sum_k F_k|
//   + sum_k ( |x_k(0) - S F_k| + || d_a x_k + mu_k x_k ||_1 )
// with forward discrete derivatives; O(da) on exact equilibria.
inline double residual(const ModelParams& p,
                       const std::vector<DerivedStrain>& derived,
                       const Grid& grid, const EquilibriumPoint& e) {
  double total = 0.0, fsum = 0.0;
  std::vector<double> F(static_cast<std::size_t>(p.n()), 0.0);
  for (int k = 0; k < p.n(); ++k) {
    const auto& d = derived[static_cast<std::size_t>(k)];
    const auto& row = e.densities[static_cast<std::size_t>(k)];
    double f = 0.0;
    for (int i = 0; i < grid.cells; ++i)
      f += d.beta_mid[static_cast<std::size_t>(i)] * row[static_cast<std::size_t>(i)];
    F[static_cast<std::size_t>(k)] = f * grid.da;
    fsum += F[static_cast<std::size_t>(k)];
  }
  total += std::abs(p.lambda - p.mu_s * e.s_star - e.s_star * fsum);
  for (int k = 0; k < p.n(); ++k) {
    const auto& row = e.densities[static_cast<std::size_t>(k)];
    const auto& mu = p.strains[static_cast<std::size_t>(k)].mu;
    total += std::abs(row[0] - e.s_star * F[static_cast<std::size_t>(k)]);
    double transport = 0.0;
    for (int i = 0; i + 1 < grid.cells; ++i) {
      const double dx = (row[static_cast<std::size_t>(i) + 1] -
                         row[static_cast<std::size_t>(i)]) / grid.da;
      transport += std::abs(dx + mu(grid.mid(i)) * row[static_cast<std::size_t>(i)]);
    }
    total += transport * grid.da;
  }
  return total;
}

struct SetDistance {
  double distance = 0.0;
  std::vector<double> alpha_hat;  // by original strain index, zero off survivors
  bool degenerate = false;        // no mass in the survivor set
};

// Upper bound on the distance to the equilibrium set: project onto the
// simplex by mass ratios, then measure |S - S*| + sum_j ||x_j - x*_{j,ah_j}||_1.
// Exact whenever each density is proportional to pi_j.
inline SetDistance distance_to_set(const GridState& state,
                                   const EquilibriumSetDescriptor& set,
                                   const ModelParams& p,
                                   const std::vector<DerivedStrain>& derived,
                                   const BlockStructure& b, const Grid& grid) {
  SetDistance out;
  out.alpha_hat.assign(static_cast<std::size_t>(p.n()), 0.0);
  if (set.kind == EquilibriumSetDescriptor::Kind::DiseaseFree) {
    out.distance = std::abs(state.s - p.lambda / p.mu_s);
    for (int k = 0; k < p.n(); ++k) out.distance += state.mass(k, grid.da);
    return out;
  }
  if (set.survivors.empty())
    throw std::invalid_argument("distance_to_set: block set needs survivors");
  for (int j : set.survivors)
    if (b.block_of(j) != set.block)
      throw std::invalid_argument("distance_to_set: survivor outside the block");

  if (set.weights) {
    // fixed weights: the set is a single point
    if (set.weights->size() != set.survivors.size())
      throw std::invalid_argument("distance_to_set: weights/survivors size mismatch");
    for (std::size_t i = 0; i < set.survivors.size(); ++i)
      out.alpha_hat[static_cast<std::size_t>(set.survivors[i])] = (*set.weights)[i];
    const auto member = endemic_point(p, derived, b, set.block, out.alpha_hat, grid);
    out.distance = std::abs(state.s - member.s_star);
    for (int k = 0; k < p.n(); ++k) {
      const auto& xs = member.densities[static_cast<std::size_t>(k)];
      const auto& xr = state.x[static_cast<std::size_t>(k)];
      double l1 = 0.0;
      for (int i = 0; i < grid.cells; ++i)
        l1 += std::abs(xr[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(i)]);
      out.distance += l1 * grid.da;
    }
    return out;
  }

  // alpha_hat: per-survivor mass relative to the unit-weight member mass.
  double ahsum = 0.0;
  for (int j : set.survivors) {
    const auto& d = derived[static_cast<std::size_t>(j)];
    const double unit_mass = p.mu_s * (d.r0 - 1.0) / d.r * d.pi_mass_mid;
    double a = state.mass(j, grid.da) / unit_mass;
    a = std::max(a, 0.0);
    out.alpha_hat[static_cast<std::size_t>(j)] = a;
    ahsum += a;
  }
  if (ahsum <= 0.0) {
    out.degenerate = true;
    for (int j : set.survivors)
      out.alpha_hat[static_cast<std::size_t>(j)] =
          1.0 / static_cast<double>(set.survivors.size());
  } else {
    for (int j : set.survivors) out.alpha_hat[static_cast<std::size_t>(j)] /= ahsum;
  }

  const auto member = endemic_point(p, derived, b, set.block, out.alpha_hat, grid);
  out.distance = std::abs(state.s - member.s_star);
  for (int k = 0; k < p.n(); ++k) {
    const auto& xs = member.densities[static_cast<std::size_t>(k)];
    const auto& xr = state.x[static_cast<std::size_t>(k)];
    double l1 = 0.0;
    for (int i = 0; i < grid.cells; ++i)
      l1 += std::abs(xr[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(i)]);
    out.distance += l1 * grid.da;
  }
  return out;
}

}  // namespace strainlab
