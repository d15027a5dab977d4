#pragma once

// Predictor and verifier for the asymptotic behavior: which equilibrium
// set attracts a given initial condition, and whether a simulated
// trajectory actually converged there with the persistence floors intact.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "equilibria.hpp"
#include "kernels.hpp"
#include "lyapunov.hpp"
#include "model.hpp"
#include "solver.hpp"
#include "state.hpp"

namespace strainlab {

struct Membership {
  std::vector<bool> present;        // strain in S_k (mass above threshold)
  std::vector<double> mass;         // int_0^{min(beta_sup, A_max)} x_k
  std::vector<bool> ambiguous;      // mass within rounding of the threshold
  double threshold = 0.0;
};

inline Membership membership(const GridState& init,
                             const std::vector<DerivedStrain>& derived,
                             const Grid& grid, double threshold = -1.0) {
  Membership m;
  if (threshold < 0.0) {
    double total = 0.0;
    for (int k = 0; k < static_cast<int>(init.x.size()); ++k)
      total += init.mass(k, grid.da);
    threshold = 1e-12 * (total + 1.0);
  }
  m.threshold = threshold;
  for (std::size_t k = 0; k < init.x.size(); ++k) {
    const double cut = std::min(derived[k].beta_sup, grid.amax());
    const auto& x = init.x[k];
    double acc = 0.0;
    for (int i = 0; i < grid.cells; ++i) {
      const double lo = grid.node(i), hi = grid.node(i + 1);
      if (lo >= cut) break;
      acc += x[static_cast<std::size_t>(i)] * (std::min(hi, cut) - lo);
    }
    m.mass.push_back(acc);
    m.present.push_back(acc > threshold);
    m.ambiguous.push_back(std::abs(acc - threshold) <= 1e-9 * threshold);
  }
  return m;
}

struct Prediction {
  EquilibriumSetDescriptor target;
  int clause = 1;  // theorem item that fired
  std::string rationale;
};

inline Prediction predict(const ModelParams& p, const BlockStructure& b,
                          const Membership& m) {
  Prediction out;
  for (int k = 1; k <= b.n_gt; ++k) {
    std::vector<int> J;
    for (int j : b.block_strains(k))
      if (m.present[static_cast<std::size_t>(j)]) J.push_back(j);
    if (!J.empty()) {
      out.target = EquilibriumSetDescriptor::block_set(k, J);
      out.clause = 2;
      std::ostringstream os;
      os << "supercritical block " << k << " (R0=" << b.block_r0(k)
         << ") has present strains; survivors";
      for (int j : J) os << ' ' << (j + 1);
      out.rationale = os.str();
      return out;
    }
  }
  out.target = EquilibriumSetDescriptor::disease_free();
  out.clause = 1;
  out.rationale = (b.n_gt == 0)
                      ? "no reproduction number exceeds 1"
                      : "every supercritical strain starts without transmissible mass";
  (void)p;
  return out;
}

struct FloorReport {
  double c_s = 0.0;                  // Lambda / (mu_S + (Lambda/mu0) sum ||beta_k||)
  bool applicable = false;           // warm-up window fits in the horizon
  bool s_floor_ok = true;
  double s_min_after_warmup = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> force_inf;     // inf_{t >= warmup} F_j, surviving strains only
  std::vector<int> force_strains;    // original indices matching force_inf
  bool force_floor_ok = true;
  double warmup = 0.0;
};

struct DecayCheck {
  int strain = 0;
  bool ok = true;
  double max_ratio = 0.0;  // max_t mass(t) / (mass(0) e^{-mu0 t})
};

struct VerifyTols {
  double distance = 1e-3;
  double lyapunov = 1e-6;   // relative to max(1, first recorded L)
  double s_floor = 1e-6;
  double force_floor = 1e-4;
  double warmup = -1.0;     // < 0: max(10/mu0, 4 A_max)
};

struct VerificationReport {
  Prediction prediction;
  bool converged = false;
  double final_distance = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> alpha_hat;
  bool degenerate = false;
  FloorReport floor;
  MonotonicityReport lyap;
  bool lyap_checked = false;
  bool lyap_ok = true;
  std::vector<DecayCheck> decay;
  bool decay_ok = true;
  bool pass = false;

  std::string text() const;
};

inline double default_warmup(const ModelParams& p, const Grid& grid) {
  return std::max(10.0 / p.mu0, 4.0 * grid.amax());
}

// Verify a finished trajectory against a prediction. The Lyapunov series
// in `traj` (l0 or lk), when present, must match the predicted target.
inline VerificationReport verify(const Trajectory& traj,
                                 const GridState& final_state,
                                 const Prediction& pred, const ModelParams& p,
                                 const std::vector<DerivedStrain>& derived,
                                 const BlockStructure& b, const Grid& grid,
                                 const VerifyTols& tols,
                                 const Membership& init_membership) {
  VerificationReport rep;
  rep.prediction = pred;

  const auto dist = distance_to_set(final_state, pred.target, p, derived, b, grid);
  rep.final_distance = dist.distance;
  rep.alpha_hat = dist.alpha_hat;
  rep.degenerate = dist.degenerate;
  rep.converged = dist.distance <= tols.distance;

  const double warmup = tols.warmup >= 0.0 ? tols.warmup : default_warmup(p, grid);
  rep.floor.warmup = warmup;
  double beta_norm_sum = 0.0;
  for (const auto& d : derived) beta_norm_sum += d.beta_norm;
  rep.floor.c_s = p.lambda / (p.mu_s + p.lambda / p.mu0 * beta_norm_sum);
  rep.floor.applicable =
      pred.target.kind == EquilibriumSetDescriptor::Kind::Block &&
      !traj.times.empty() && traj.times.back() > warmup;
  if (rep.floor.applicable) {
    double smin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < traj.times.size(); ++i)
      if (traj.times[i] >= warmup) smin = std::min(smin, traj.s[i]);
    rep.floor.s_min_after_warmup = smin;
    rep.floor.s_floor_ok = smin >= rep.floor.c_s - tols.s_floor;
    for (int j : pred.target.survivors) {
      double finf = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < traj.times.size(); ++i)
        if (traj.times[i] >= warmup)
          finf = std::min(finf, traj.force[static_cast<std::size_t>(j)][i]);
      rep.floor.force_inf.push_back(finf);
      rep.floor.force_strains.push_back(j);
      if (!(finf > tols.force_floor)) rep.floor.force_floor_ok = false;
    }
  }

  // Lyapunov monotonicity on whichever series the run recorded.
  const std::vector<double>* L = nullptr;
  if (!traj.lk.empty()) L = &traj.lk;
  else if (!traj.l0.empty()) L = &traj.l0;
  if (L && L->size() >= 2) {
    rep.lyap_checked = true;
    const std::size_t offset = traj.times.size() - L->size();
    std::vector<double> times(traj.times.begin() + static_cast<long>(offset),
                              traj.times.end());
    const double ref = std::max(1.0, L->front());
    rep.lyap = monitor_monotonicity(times, *L, tols.lyapunov * ref);
    rep.lyap_ok = !rep.lyap.violated;
  }

  // Strains with exactly zero transmissible contact decay at least as
  // fast as e^{-mu0 t}.
  for (int k = 0; k < p.n(); ++k) {
    if (init_membership.mass[static_cast<std::size_t>(k)] != 0.0) continue;
    const double m0 = traj.mass[static_cast<std::size_t>(k)].front();
    DecayCheck dc;
    dc.strain = k;
    if (m0 > 0.0) {
      for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double bound =
            m0 * std::exp(-p.mu0 * traj.times[i]) * (1.0 + 10.0 * traj.dt);
        const double mt = traj.mass[static_cast<std::size_t>(k)][i];
        const double ratio = bound > 0.0 ? mt / bound : (mt > 0.0 ? kInf : 0.0);
        dc.max_ratio = std::max(dc.max_ratio, ratio);
      }
      dc.ok = dc.max_ratio <= 1.0;
    }
    if (!dc.ok) rep.decay_ok = false;
    rep.decay.push_back(dc);
  }

  rep.pass = rep.converged && rep.floor.s_floor_ok && rep.floor.force_floor_ok &&
             rep.lyap_ok && rep.decay_ok;
  return rep;
}

inline std::string VerificationReport::text() const {
  std::ostringstream os;
  os << "target: " << prediction.target.name(static_cast<int>(alpha_hat.size()))
     << "\n";
  os << "clause: " << prediction.clause << " (" << prediction.rationale << ")\n";
  os << "converged: " << (converged ? "yes" : "no")
     << "  final_distance: " << final_distance << "\n";
  if (prediction.target.kind == EquilibriumSetDescriptor::Kind::Block) {
    os << "alpha_hat:";
    for (int j : prediction.target.survivors)
      os << ' ' << alpha_hat[static_cast<std::size_t>(j)];
    if (degenerate) os << "  (degenerate)";
    os << "\n";
  }
  os << "c_S: " << floor.c_s << "  warmup: " << floor.warmup << "\n";
  if (floor.applicable) {
    os << "S_floor: " << (floor.s_floor_ok ? "ok" : "VIOLATED")
       << "  min S after warmup: " << floor.s_min_after_warmup << "\n";
    for (std::size_t i = 0; i < floor.force_inf.size(); ++i)
      os << "force_floor strain " << floor.force_strains[i] + 1 << ": "
         << floor.force_inf[i] << "\n";
  }
  if (lyap_checked)
    os << "lyapunov: " << (lyap_ok ? "monotone" : "VIOLATED")
       << "  max_increment: " << lyap.max_increment
       << "  total_decrease: " << lyap.total_decrease << "\n";
  for (const auto& d : decay)
    os << "decay strain " << d.strain + 1 << ": " << (d.ok ? "ok" : "VIOLATED")
       << "\n";
  os << "pass: " << (pass ? "yes" : "no") << "\n";
  return os.str();
}

}  // namespace strainlab
