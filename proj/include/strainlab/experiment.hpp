#pragma once

// Experiment orchestration shared by the CLI and the tests: run one
// configured experiment (simulation + optional classification, Lyapunov
// monitoring and ODE cross-check), persist results, and run sweeps.

#include <atomic>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "classify.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "equilibria.hpp"
#include "kernels.hpp"
#include "lyapunov.hpp"
#include "model.hpp"
#include "oracle.hpp"
#include "solver.hpp"

namespace strainlab {

struct ExperimentResult {
  std::vector<DerivedStrain> derived;
  BlockStructure block_structure;
  GridState init;
  Trajectory traj;
  GridState final_state;
  std::optional<Prediction> prediction;
  std::optional<VerificationReport> verification;
  std::optional<OracleErrors> oracle_errors;
};

inline std::vector<DerivedStrain> derive_all(const ModelParams& p, const Grid& grid) {
  std::vector<DerivedStrain> out;
  out.reserve(static_cast<std::size_t>(p.n()));
  for (const auto& s : p.strains)
    out.push_back(derive(s.beta, s.mu, grid, p.lambda, p.mu_s));
  return out;
}

namespace detail {

inline Monitor make_l0_monitor(const ModelParams& p,
                               const std::vector<DerivedStrain>& derived,
                               const Grid& grid) {
  return [&p, &derived, grid](const GridState& st, const std::vector<double>&,
                              Trajectory& traj) {
    traj.l0.push_back(l0(st, derived, p, grid));
    traj.dl_analytic.push_back(l0_dt(st, derived, p, grid));
  };
}

inline Monitor make_lk_monitor(const ModelParams& p,
                               const std::vector<DerivedStrain>& derived,
                               const BlockStructure& b, const Grid& grid,
                               LyapunovConfig cfg, double warmup) {
  return [&p, &derived, &b, grid, cfg, warmup](const GridState& st,
                                               const std::vector<double>&,
                                               Trajectory& traj) {
    if (st.t < warmup) return;
    traj.lk.push_back(lk(st, derived, p, b, grid, cfg));
    traj.dl_analytic.push_back(lk_dt(st, derived, p, b, grid, cfg));
  };
}

}  // namespace detail

inline ExperimentResult run_experiment(const RunConfig& cfg) {
  const auto vrep = validate(cfg.model);
  if (!vrep.valid()) {
    std::ostringstream os;
    os << "model fails validation:";
    for (const auto& iss : vrep.issues) {
      os << " [item " << iss.item;
      if (iss.strain >= 0) os << ", strain " << iss.strain + 1;
      os << "] " << iss.message << ";";
    }
    throw ConfigError(os.str());
  }
  cfg.grid.check(cfg.model.mu0);

  ExperimentResult res;
  res.derived = derive_all(cfg.model, cfg.grid);
  if (cfg.explicit_blocks) {
    res.block_structure = *cfg.explicit_blocks;
    res.block_structure.r0.clear();
    for (const auto& d : res.derived) res.block_structure.r0.push_back(d.r0);
  } else {
    std::vector<double> r0;
    for (const auto& d : res.derived) r0.push_back(d.r0);
    res.block_structure = blocks(r0, cfg.tie_tol);
  }
  res.init = make_init(cfg, res.derived, res.block_structure);

  const auto mem = membership(res.init, res.derived, cfg.grid);
  std::optional<Prediction> pred;
  if (cfg.do_classify || cfg.lyapunov.mode == LyapunovSpec::Mode::Auto)
    pred = predict(cfg.model, res.block_structure, mem);

  // Resolve the Lyapunov plan. A block functional without declared weights
  // needs the empirical limit weights, which requires a preliminary run.
  SimOptions opt;
  opt.t_end = cfg.t_end;
  opt.record_every = cfg.record_every;
  opt.snapshot_times = cfg.snapshot_times;
  const double warmup =
      cfg.tols.warmup >= 0.0 ? cfg.tols.warmup : default_warmup(cfg.model, cfg.grid);

  LyapunovSpec::Mode mode = cfg.lyapunov.mode;
  int lyap_block = cfg.lyapunov.block;
  std::vector<double> lyap_alpha = cfg.lyapunov.alpha;
  if (mode == LyapunovSpec::Mode::Auto) {
    if (pred->target.kind == EquilibriumSetDescriptor::Kind::DiseaseFree) {
      mode = LyapunovSpec::Mode::L0;
    } else {
      mode = LyapunovSpec::Mode::Lk;
      lyap_block = pred->target.block;
      lyap_alpha.clear();
      if (pred->target.survivors.size() == 1) {
        lyap_alpha.assign(static_cast<std::size_t>(cfg.model.n()), 0.0);
        lyap_alpha[static_cast<std::size_t>(pred->target.survivors.front())] = 1.0;
      }
    }
  }
  if (mode == LyapunovSpec::Mode::Lk && lyap_alpha.empty()) {
    // preliminary pass to obtain the empirical weights
    GridState prelim_final;
    SimOptions prelim;
    prelim.t_end = cfg.t_end;
    prelim.record_every = cfg.record_every;
    simulate(cfg.model, res.derived, cfg.grid, res.init, prelim, &prelim_final);
    EquilibriumSetDescriptor target =
        pred ? pred->target
             : EquilibriumSetDescriptor::block_set(
                   lyap_block, res.block_structure.block_strains(lyap_block));
    const auto d = distance_to_set(prelim_final, target, cfg.model, res.derived,
                                   res.block_structure, cfg.grid);
    lyap_alpha = d.alpha_hat;
  }

  if (mode == LyapunovSpec::Mode::L0) {
    opt.monitors.push_back(detail::make_l0_monitor(cfg.model, res.derived, cfg.grid));
  } else if (mode == LyapunovSpec::Mode::Lk) {
    const auto lycfg =
        LyapunovConfig::make(res.block_structure, lyap_block, lyap_alpha);
    opt.monitors.push_back(detail::make_lk_monitor(cfg.model, res.derived,
                                                   res.block_structure, cfg.grid,
                                                   lycfg, warmup));
  }

  if (cfg.do_classify) {
    opt.monitors.push_back([&pred, &cfg, &res](const GridState& st,
                                               const std::vector<double>&,
                                               Trajectory& tr) {
      tr.dist.push_back(distance_to_set(st, pred->target, cfg.model, res.derived,
                                        res.block_structure, cfg.grid)
                            .distance);
    });
  }

  res.traj = simulate(cfg.model, res.derived, cfg.grid, res.init, opt,
                      &res.final_state);

  if (cfg.do_classify) {
    res.prediction = pred;
    res.verification = verify(res.traj, res.final_state, *pred, cfg.model,
                              res.derived, res.block_structure, cfg.grid, cfg.tols,
                              mem);
  }
  if (cfg.do_oracle) {
    const auto sys = reduce(cfg.model);
    std::vector<double> i0;
    for (int k = 0; k < cfg.model.n(); ++k) i0.push_back(res.init.mass(k, cfg.grid.da));
    const double h_max = 1e-4 * std::max(1.0, 1.0 / cfg.model.mu0);
    const auto ref = integrate(sys, res.init.s, i0, cfg.t_end,
                               cfg.record_every * cfg.grid.da, h_max);
    res.oracle_errors = compare(res.traj, ref);
  }
  return res;
}

// ---------------------------------------------------------------------
// Persistence

inline json summary_json(const RunConfig& cfg, const ExperimentResult& res) {
  json s;
  s["config"] = cfg.resolved;
  s["final"]["t"] = res.final_state.t;
  s["final"]["S"] = res.final_state.s;
  s["final"]["mass"] = json::array();
  for (int k = 0; k < cfg.model.n(); ++k)
    s["final"]["mass"].push_back(res.final_state.mass(k, cfg.grid.da));
  s["final"]["total_norm"] = res.final_state.total_norm(cfg.grid.da);
  s["discarded_tail_mass"] = res.traj.discarded_mass;
  s["r0"] = json::array();
  for (const auto& d : res.derived) s["r0"].push_back(d.r0);
  if (res.prediction) {
    s["prediction"]["target"] = res.prediction->target.name(cfg.model.n());
    s["prediction"]["clause"] = res.prediction->clause;
    s["prediction"]["rationale"] = res.prediction->rationale;
  }
  if (res.verification) {
    const auto& v = *res.verification;
    s["verification"]["pass"] = v.pass;
    s["verification"]["converged"] = v.converged;
    s["verification"]["final_distance"] = v.final_distance;
    s["verification"]["alpha_hat"] = v.alpha_hat;
    s["verification"]["c_s"] = v.floor.c_s;
    if (v.lyap_checked) {
      s["verification"]["lyapunov_max_increment"] = v.lyap.max_increment;
      s["verification"]["lyapunov_ok"] = v.lyap_ok;
    }
  }
  if (res.oracle_errors) {
    s["oracle"]["sup_error_s"] = res.oracle_errors->s;
    s["oracle"]["sup_error_mass"] = res.oracle_errors->mass;
  }
  return s;
}

inline void write_outputs(const std::string& out_dir, const RunConfig& cfg,
                          const ExperimentResult& res) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  write_trajectory(out_dir + "/trajectory.csv", res.traj);
  write_snapshots(out_dir, res.traj, cfg.grid);
  auto f = open_out(out_dir + "/summary.json");
  f << summary_json(cfg, res).dump(2) << "\n";
  if (res.verification) {
    auto r = open_out(out_dir + "/report.txt");
    r << res.verification->text();
  }
}

// ---------------------------------------------------------------------
// Sweeps: cartesian product of JSON-pointer axes over a base config.

struct SweepAxis {
  std::string path;  // JSON pointer, e.g. /model/strains/0/beta/value
  std::vector<json> values;
};

struct SweepSpec {
  json base;
  std::vector<SweepAxis> axes;
};

inline SweepSpec load_sweep_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open sweep spec: " + path);
  json doc = json::parse(f);
  SweepSpec spec;
  if (doc.at("base").is_string()) {
    std::ifstream bf(doc["base"].get<std::string>());
    if (!bf) throw ConfigError("cannot open base config: " +
                               doc["base"].get<std::string>());
    spec.base = json::parse(bf);
  } else {
    spec.base = doc["base"];
  }
  for (const auto& ax : doc.value("axes", json::array())) {
    SweepAxis axis;
    axis.path = ax.at("path").get<std::string>();
    for (const auto& v : ax.at("values")) {
      if (std::find(axis.values.begin(), axis.values.end(), v) != axis.values.end())
        continue;  // duplicates collapse to one run
      axis.values.push_back(v);
    }
    spec.axes.push_back(std::move(axis));
  }
  return spec;
}

struct SweepRow {
  int index = 0;
  std::vector<json> values;
  bool ok = false;
  std::string error;
  std::vector<double> r0;
  std::string target;
  bool verified = false;
  double final_distance = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> alpha_hat;
};

inline std::vector<SweepRow> run_sweep(const SweepSpec& spec,
                                       const std::string& out_dir, int jobs) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  // enumerate the cartesian product
  std::vector<std::vector<json>> points{{}};
  for (const auto& axis : spec.axes) {
    std::vector<std::vector<json>> next;
    for (const auto& pt : points)
      for (const auto& v : axis.values) {
        auto q = pt;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }

  std::vector<SweepRow> rows(points.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= points.size()) return;
      SweepRow& row = rows[i];
      row.index = static_cast<int>(i);
      row.values = points[i];
      try {
        json doc = spec.base;
        for (std::size_t a = 0; a < spec.axes.size(); ++a)
          doc[json::json_pointer(spec.axes[a].path)] = points[i][a];
        RunConfig cfg = parse_config(doc);
        if (!cfg.do_classify) cfg.do_classify = true;
        const auto res = run_experiment(cfg);
        const std::string dir = out_dir + "/run_" + std::to_string(i);
        write_outputs(dir, cfg, res);
        for (const auto& d : res.derived) row.r0.push_back(d.r0);
        row.target = res.prediction->target.name(cfg.model.n());
        row.verified = res.verification->pass;
        row.final_distance = res.verification->final_distance;
        row.alpha_hat = res.verification->alpha_hat;
        row.ok = true;
      } catch (const std::exception& e) {
        row.error = e.what();  // partial failures stay in the table
      }
    }
  };
  std::vector<std::thread> pool;
  const int nthreads = std::max(1, jobs);
  for (int t = 0; t < nthreads - 1; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  // aggregate table and manifest, assembled single-threaded in index order
  auto agg = open_out(out_dir + "/results.csv");
  agg << "run";
  for (const auto& axis : spec.axes) agg << ',' << axis.path;
  agg << ",status,r0,target,verified,final_distance,alpha_hat\n";
  auto man = open_out(out_dir + "/manifest.txt");
  for (const auto& row : rows) {
    agg << row.index;
    for (const auto& v : row.values) agg << ',' << v.dump();
    if (!row.ok) {
      agg << ",error,,,,," << '\n';
    } else {
      agg << ",ok,\"";
      for (std::size_t k = 0; k < row.r0.size(); ++k)
        agg << (k ? ";" : "") << fmt17(row.r0[k]);
      agg << "\",\"" << row.target << "\"," << (row.verified ? 1 : 0) << ','
          << fmt17(row.final_distance) << ",\"";
      for (std::size_t k = 0; k < row.alpha_hat.size(); ++k)
        agg << (k ? ";" : "") << fmt17(row.alpha_hat[k]);
      agg << "\"\n";
    }
    man << "run_" << row.index << (row.ok ? "" : "  ERROR: " + row.error) << "\n";
  }
  return rows;
}

}  // namespace strainlab
