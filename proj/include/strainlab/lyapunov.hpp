#pragma once

// The functionals L0 and Lk built from g(x) = x - ln x - 1 and the weight
// Psi_k, their analytic time derivatives, and a monotonicity monitor.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "equilibria.hpp"
#include "kernels.hpp"
#include "model.hpp"
#include "state.hpp"

namespace strainlab {

inline double g(double x) {
  if (!(x > 0.0)) throw std::domain_error("g: argument must be positive");
  return x - std::log(x) - 1.0;
}

struct LyapunovConfig {
  int block = 1;                    // k
  std::vector<double> alpha;        // by original strain index, simplex on block
  std::vector<int> eta;             // eta_j = 1 outside the block or when alpha_j = 0
  double positivity_floor = 1e-300;

  static LyapunovConfig make(const BlockStructure& b, int block,
                             const std::vector<double>& alpha,
                             double positivity_floor = 1e-300) {
    LyapunovConfig cfg;
    cfg.block = block;
    cfg.alpha = alpha;
    cfg.positivity_floor = positivity_floor;
    const int n = static_cast<int>(alpha.size());
    cfg.eta.assign(static_cast<std::size_t>(n), 1);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      const double a = alpha[static_cast<std::size_t>(j)];
      if (a < 0.0) throw std::invalid_argument("LyapunovConfig: alpha must be >= 0");
      if (a > 0.0) {
        if (b.block_of(j) != block)
          throw std::invalid_argument(
              "LyapunovConfig: alpha supported outside block " + std::to_string(block));
        cfg.eta[static_cast<std::size_t>(j)] = 0;
      }
      sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("LyapunovConfig: alpha must sum to 1");
    return cfg;
  }
};

// L0 = S0* g(S / S0*) + sum_k int Psi_k x_k.
inline double l0(const GridState& state, const std::vector<DerivedStrain>& derived,
                 const ModelParams& p, const Grid& grid) {
  if (!(state.s > 0.0)) throw std::domain_error("l0: S must be positive");
  const double s_star = p.lambda / p.mu_s;
  double val = s_star * g(state.s / s_star);
  for (std::size_t k = 0; k < derived.size(); ++k) {
    const auto& psi = derived[k].psi_mid;
    const auto& x = state.x[k];
    double q = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) q += psi[i] * x[i];
    val += q * grid.da;
  }
  return val;
}

// dL0/dt = -(Lambda - mu_S S)^2 / (mu_S S) + sum_k ((R0_k - 1)/r_k) F_k.
inline double l0_dt(const GridState& state,
                    const std::vector<DerivedStrain>& derived,
                    const ModelParams& p, const Grid& grid) {
  if (!(state.s > 0.0)) throw std::domain_error("l0_dt: S must be positive");
  const double d = p.lambda - p.mu_s * state.s;
  double val = -d * d / (p.mu_s * state.s);
  for (std::size_t k = 0; k < derived.size(); ++k) {
    const auto& bm = derived[k].beta_mid;
    const auto& x = state.x[k];
    double f = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) f += bm[i] * x[i];
    val += (derived[k].r0 - 1.0) / derived[k].r * f * grid.da;
  }
  return val;
}

namespace detail {

inline double block_s_star(const std::vector<DerivedStrain>& derived,
                           const BlockStructure& b, int block) {
  const int last =
      b.order[static_cast<std::size_t>(b.sigma[static_cast<std::size_t>(block)]) - 1];
  return 1.0 / derived[static_cast<std::size_t>(last)].r;
}

}  // namespace detail

// Lk = S* g(S/S*) + sum_j eta_j int Psi_j x_j
//    + sum_j (1-eta_j) int Psi_j x*_{j,a_j} g(x_j / x*_{j,a_j}).
// Returns +inf when a g-weighted density vanishes on the support of the
// integrand (the functional takes the value infinity there, it is not an
// error). Densities in (0, floor * x*] signal the state has left the
// region where Lk is defined and raise a domain error.
inline double lk(const GridState& state, const std::vector<DerivedStrain>& derived,
                 const ModelParams& p, const BlockStructure& b, const Grid& grid,
                 const LyapunovConfig& cfg) {
  if (!(state.s > 0.0)) throw std::domain_error("lk: S must be positive");
  const double s_star = detail::block_s_star(derived, b, cfg.block);
  double val = s_star * g(state.s / s_star);
  bool infinite = false;
  for (int j = 0; j < p.n(); ++j) {
    const auto& d = derived[static_cast<std::size_t>(j)];
    const auto& x = state.x[static_cast<std::size_t>(j)];
    const auto& psi = d.psi_mid;
    if (cfg.eta[static_cast<std::size_t>(j)] == 1) {
      double q = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) q += psi[i] * x[i];
      val += q * grid.da;
      continue;
    }
    const double c =
        p.mu_s * (d.r0 - 1.0) / d.r * cfg.alpha[static_cast<std::size_t>(j)];
    double q = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double xs = c * d.pi_mid[i];
      if (xs <= 0.0) {  // beyond truncation: integrand degenerates to Psi x
        q += psi[i] * x[i];
        continue;
      }
      if (x[i] == 0.0) {
        if (psi[i] > 0.0) infinite = true;
        continue;
      }
      if (x[i] <= cfg.positivity_floor * xs)
        throw std::domain_error("lk: strain " + std::to_string(j + 1) +
                                " density below positivity floor at cell " +
                                std::to_string(i));
      q += psi[i] * xs * g(x[i] / xs);
    }
    val += q * grid.da;
  }
  return infinite ? std::numeric_limits<double>::infinity() : val;
}

// dLk/dt, the four-term form:
//   - sum_{j in J*} S* int beta_j x*_j g( x_j F*_j / (x*_j F_j) )
//   - |J*| g(S*/S)
//   - sum_{j: eta_j=1} (1/r_j - S*) F_j
//   - mu_S (S - S*)^2 / S.
inline double lk_dt(const GridState& state,
                    const std::vector<DerivedStrain>& derived,
                    const ModelParams& p, const BlockStructure& b,
                    const Grid& grid, const LyapunovConfig& cfg) {
  if (!(state.s > 0.0)) throw std::domain_error("lk_dt: S must be positive");
  const double s_star = detail::block_s_star(derived, b, cfg.block);
  double val = -p.mu_s / state.s * (state.s - s_star) * (state.s - s_star);
  int jstar = 0;
  for (int j = 0; j < p.n(); ++j) {
    const auto& d = derived[static_cast<std::size_t>(j)];
    const auto& x = state.x[static_cast<std::size_t>(j)];
    double F = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) F += d.beta_mid[i] * x[i];
    F *= grid.da;
    if (cfg.eta[static_cast<std::size_t>(j)] == 1) {
      val -= (1.0 / d.r - s_star) * F;
      continue;
    }
    ++jstar;
    if (!(F > 0.0))
      throw std::domain_error("lk_dt: zero force of infection for strain " +
                              std::to_string(j + 1));
    const double c =
        p.mu_s * (d.r0 - 1.0) / d.r * cfg.alpha[static_cast<std::size_t>(j)];
    double Fstar = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      Fstar += d.beta_mid[i] * c * d.pi_mid[i];
    Fstar *= grid.da;
    double q = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double xs = c * d.pi_mid[i];
      const double w = d.beta_mid[i] * xs;
      if (w <= 0.0) continue;
      q += w * g(x[i] * Fstar / (xs * F));
    }
    val -= s_star * q * grid.da;
  }
  val -= jstar * g(s_star / state.s);
  return val;
}

struct MonotonicityReport {
  double max_increment = 0.0;   // max(L(t_{i+1}) - L(t_i), 0)
  bool violated = false;        // max_increment > tolerance
  double first_violation_time = std::numeric_limits<double>::quiet_NaN();
  double total_decrease = 0.0;  // L(first) - L(last)
};

inline MonotonicityReport monitor_monotonicity(const std::vector<double>& times,
                                               const std::vector<double>& L,
                                               double tolerance) {
  MonotonicityReport rep;
  if (L.size() < 2) return rep;
  for (std::size_t i = 0; i + 1 < L.size(); ++i) {
    const double inc = L[i + 1] - L[i];
    if (inc > rep.max_increment) rep.max_increment = inc;
    if (inc > tolerance && !rep.violated) {
      rep.violated = true;
      rep.first_violation_time = times[i + 1];
    }
  }
  rep.total_decrease = L.front() - L.back();
  return rep;
}

}  // namespace strainlab
