#pragma once

// CSV emission. All floats are written with 17 significant digits so that
// files round-trip bit-exactly.

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "equilibria.hpp"
#include "kernels.hpp"
#include "solver.hpp"

namespace strainlab {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

// Header: t,S,mass_1..mass_n,F_1..F_n[,L0][,Lk,dL_analytic]
inline void write_trajectory(const std::string& path, const Trajectory& traj) {
  auto f = open_out(path);
  const std::size_t n = traj.mass.size();
  f << "t,S";
  for (std::size_t k = 0; k < n; ++k) f << ",mass_" << (k + 1);
  for (std::size_t k = 0; k < n; ++k) f << ",F_" << (k + 1);
  const bool has_l0 = !traj.l0.empty(), has_lk = !traj.lk.empty();
  if (has_l0) f << ",L0";
  if (has_lk) f << ",Lk";
  if (!traj.dl_analytic.empty()) f << ",dL_analytic";
  if (!traj.dist.empty()) f << ",dist";
  f << "\n";
  const std::size_t rows = traj.times.size();
  const std::size_t l0_off = rows - traj.l0.size();
  const std::size_t lk_off = rows - traj.lk.size();
  const std::size_t dl_off = rows - traj.dl_analytic.size();
  const std::size_t di_off = rows - traj.dist.size();
  for (std::size_t i = 0; i < rows; ++i) {
    f << fmt17(traj.times[i]) << ',' << fmt17(traj.s[i]);
    for (std::size_t k = 0; k < n; ++k) f << ',' << fmt17(traj.mass[k][i]);
    for (std::size_t k = 0; k < n; ++k) f << ',' << fmt17(traj.force[k][i]);
    if (has_l0) f << ',' << (i >= l0_off ? fmt17(traj.l0[i - l0_off]) : "");
    if (has_lk) f << ',' << (i >= lk_off ? fmt17(traj.lk[i - lk_off]) : "");
    if (!traj.dl_analytic.empty())
      f << ',' << (i >= dl_off ? fmt17(traj.dl_analytic[i - dl_off]) : "");
    if (!traj.dist.empty())
      f << ',' << (i >= di_off ? fmt17(traj.dist[i - di_off]) : "");
    f << "\n";
  }
}

// One file per snapshot: a,x_1..x_n (cell midpoints).
inline void write_snapshots(const std::string& dir, const Trajectory& traj,
                            const Grid& grid) {
  for (const auto& [t, snap] : traj.snapshots) {
    auto f = open_out(dir + "/snapshot_t" + fmt17(t) + ".csv");
    f << "a";
    for (std::size_t k = 0; k < snap.size(); ++k) f << ",x_" << (k + 1);
    f << "\n";
    for (int i = 0; i < grid.cells; ++i) {
      f << fmt17(grid.mid(i));
      for (std::size_t k = 0; k < snap.size(); ++k)
        f << ',' << fmt17(snap[k][static_cast<std::size_t>(i)]);
      f << "\n";
    }
  }
}

// Equilibrium point as age, per-strain density columns.
inline void write_equilibrium(const std::string& path, const EquilibriumPoint& e,
                              const Grid& grid) {
  auto f = open_out(path);
  f << "a";
  for (std::size_t k = 0; k < e.densities.size(); ++k) f << ",x_" << (k + 1);
  f << "\n";
  for (int i = 0; i < grid.cells; ++i) {
    f << fmt17(grid.mid(i));
    for (std::size_t k = 0; k < e.densities.size(); ++k)
      f << ',' << fmt17(e.densities[k][static_cast<std::size_t>(i)]);
    f << "\n";
  }
}

}  // namespace strainlab
