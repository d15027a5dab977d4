#pragma once

// Exact ODE reduction for globally constant kernels. With beta_k and mu_k
// constant on [0, inf) the age structure integrates out:
//   S'   = Lambda - mu_S S - S sum_k beta_k I_k
//   I_k' = S beta_k I_k - mu_k I_k,        I_k = int x_k da.
// Classical RK4 at small fixed step provides the reference trajectory.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "model.hpp"
#include "solver.hpp"

namespace strainlab {

struct NotReducible : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ReducedSystem {
  double lambda = 0.0, mu_s = 0.0;
  std::vector<double> beta, mu;  // per-strain constants

  int n() const { return static_cast<int>(beta.size()); }
};

inline ReducedSystem reduce(const ModelParams& p) {
  ReducedSystem sys;
  sys.lambda = p.lambda;
  sys.mu_s = p.mu_s;
  for (int k = 0; k < p.n(); ++k) {
    const auto& s = p.strains[static_cast<std::size_t>(k)];
    if (!s.beta.is_globally_constant() || !s.mu.is_globally_constant())
      throw NotReducible("reduce: strain " + std::to_string(k + 1) +
                         " kernels are not constant on [0, inf)");
    sys.beta.push_back(s.beta.vals.front());
    sys.mu.push_back(s.mu.vals.front());
  }
  return sys;
}

struct ReferenceTrajectory {
  double dt = 0.0;  // recording interval
  std::vector<double> times;
  std::vector<double> s;
  std::vector<std::vector<double>> mass;  // [strain][record]
};

namespace detail {

inline void reduced_rhs(const ReducedSystem& sys, double S,
                        const std::vector<double>& I, double& dS,
                        std::vector<double>& dI) {
  double fsum = 0.0;
  for (int k = 0; k < sys.n(); ++k)
    fsum += sys.beta[static_cast<std::size_t>(k)] * I[static_cast<std::size_t>(k)];
  dS = sys.lambda - sys.mu_s * S - S * fsum;
  for (int k = 0; k < sys.n(); ++k)
    dI[static_cast<std::size_t>(k)] =
        (S * sys.beta[static_cast<std::size_t>(k)] -
         sys.mu[static_cast<std::size_t>(k)]) *
        I[static_cast<std::size_t>(k)];
}

}  // namespace detail

// RK4 at step h <= h_max, with the substep count chosen so that records
// land exactly on multiples of dt_record (no interpolation error).
inline ReferenceTrajectory integrate(const ReducedSystem& sys, double s0,
                                     const std::vector<double>& i0, double T,
                                     double dt_record, double h_max) {
  const int m = std::max(1, static_cast<int>(std::ceil(dt_record / h_max)));
  const double h = dt_record / m;
  const long nrec = static_cast<long>(std::llround(T / dt_record));
  const std::size_t n = static_cast<std::size_t>(sys.n());

  ReferenceTrajectory out;
  out.dt = dt_record;
  out.mass.assign(n, {});
  double S = s0;
  std::vector<double> I = i0;
  std::vector<double> k1I(n), k2I(n), k3I(n), k4I(n), tmp(n);
  auto record = [&](long i) {
    out.times.push_back(i * dt_record);
    out.s.push_back(S);
    for (std::size_t k = 0; k < n; ++k) out.mass[k].push_back(I[k]);
  };
  record(0);
  for (long rec = 0; rec < nrec; ++rec) {
    for (int sub = 0; sub < m; ++sub) {
      double k1S, k2S, k3S, k4S;
      detail::reduced_rhs(sys, S, I, k1S, k1I);
      for (std::size_t k = 0; k < n; ++k) tmp[k] = I[k] + 0.5 * h * k1I[k];
      detail::reduced_rhs(sys, S + 0.5 * h * k1S, tmp, k2S, k2I);
      for (std::size_t k = 0; k < n; ++k) tmp[k] = I[k] + 0.5 * h * k2I[k];
      detail::reduced_rhs(sys, S + 0.5 * h * k2S, tmp, k3S, k3I);
      for (std::size_t k = 0; k < n; ++k) tmp[k] = I[k] + h * k3I[k];
      detail::reduced_rhs(sys, S + h * k3S, tmp, k4S, k4I);
      S += h / 6.0 * (k1S + 2.0 * k2S + 2.0 * k3S + k4S);
      for (std::size_t k = 0; k < n; ++k)
        I[k] += h / 6.0 * (k1I[k] + 2.0 * k2I[k] + 2.0 * k3I[k] + k4I[k]);
    }
    record(rec + 1);
  }
  return out;
}

struct OracleErrors {
  double s = 0.0;                // sup_t |S_pde - S_ref|
  std::vector<double> mass;      // sup_t |mass_k,pde - I_k,ref|
  double max() const {
    double m = s;
    for (double v : mass) m = std::max(m, v);
    return m;
  }
};

// Sup-norm errors per observable; the two trajectories must share time
// stamps (record at the same cadence).
inline OracleErrors compare(const Trajectory& pde, const ReferenceTrajectory& ref) {
  if (pde.times.size() != ref.times.size())
    throw std::invalid_argument("compare: trajectory horizons do not match");
  for (std::size_t i = 0; i < pde.times.size(); ++i)
    if (std::abs(pde.times[i] - ref.times[i]) > 1e-9 * (1.0 + std::abs(ref.times[i])))
      throw std::invalid_argument("compare: time stamps do not match");
  OracleErrors err;
  err.mass.assign(pde.mass.size(), 0.0);
  for (std::size_t i = 0; i < pde.times.size(); ++i) {
    err.s = std::max(err.s, std::abs(pde.s[i] - ref.s[i]));
    for (std::size_t k = 0; k < pde.mass.size(); ++k)
      err.mass[k] = std::max(err.mass[k], std::abs(pde.mass[k][i] - ref.mass[k][i]));
  }
  return err;
}

}  // namespace strainlab
