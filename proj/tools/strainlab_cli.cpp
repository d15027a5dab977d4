// Command-line front end: simulate, classify, equilibria, lyapunov,
// oracle-check, sweep.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "strainlab/experiment.hpp"

namespace sl = strainlab;

namespace {

struct TolOverrides {
  double distance = -1.0, lyapunov = -1.0, s_floor = -1.0, force_floor = -1.0;
  double warmup = -2.0;

  void apply(sl::RunConfig& cfg) const {
    if (distance >= 0.0) cfg.tols.distance = distance;
    if (lyapunov >= 0.0) cfg.tols.lyapunov = lyapunov;
    if (s_floor >= 0.0) cfg.tols.s_floor = s_floor;
    if (force_floor >= 0.0) cfg.tols.force_floor = force_floor;
    if (warmup >= -1.0) cfg.tols.warmup = warmup;
  }
  void add_flags(CLI::App* app) {
    app->add_option("--tol-distance", distance, "convergence distance tolerance");
    app->add_option("--tol-lyapunov", lyapunov, "Lyapunov increment tolerance");
    app->add_option("--tol-s-floor", s_floor, "susceptible floor tolerance");
    app->add_option("--tol-force-floor", force_floor, "force-of-infection floor");
    app->add_option("--tol-warmup", warmup, "warm-up time for floor checks");
  }
};

std::vector<double> parse_alpha(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-strain infection-age epidemic laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", traj_path, spec_path, out_file;
  int block = 0, jobs = 1;
  std::string alpha_str;
  double oracle_tol = -1.0;
  TolOverrides tols;

  auto* sim = app.add_subcommand("simulate", "run a configured experiment");
  sim->add_option("--config", config_path, "experiment config (JSON)")->required();
  sim->add_option("--out", out_dir, "output directory");
  tols.add_flags(sim);

  auto* cls = app.add_subcommand("classify", "predict and verify the attracting set");
  cls->add_option("--config", config_path)->required();
  cls->add_option("--out", out_dir);
  tols.add_flags(cls);

  auto* eq = app.add_subcommand("equilibria", "print equilibrium points");
  eq->add_option("--config", config_path)->required();
  eq->add_option("--block", block, "block index (0 = disease-free)");
  eq->add_option("--alpha", alpha_str, "comma-separated per-strain weights");
  eq->add_option("--out", out_file, "CSV output path (default stdout)");

  auto* ly = app.add_subcommand("lyapunov",
                                "evaluate L along an existing trajectory file");
  ly->add_option("--config", config_path)->required();
  ly->add_option("--trajectory", traj_path, "trajectory CSV of a previous run")
      ->required();
  ly->add_option("--out", out_file, "output CSV (default <trajectory>_lyapunov.csv)");
  tols.add_flags(ly);

  auto* oc = app.add_subcommand("oracle-check", "compare against the ODE reduction");
  oc->add_option("--config", config_path)->required();
  oc->add_option("--tol-oracle", oracle_tol, "fail when sup error exceeds this");

  auto* sw = app.add_subcommand("sweep", "run a parameter sweep");
  sw->add_option("--spec", spec_path, "sweep spec (JSON)")->required();
  sw->add_option("--out", out_dir, "output directory");
  sw->add_option("--jobs", jobs, "parallel workers");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      auto cfg = sl::load_config(config_path);
      tols.apply(cfg);
      const auto res = sl::run_experiment(cfg);
      sl::write_outputs(out_dir, cfg, res);
      std::cout << "final t=" << sl::fmt17(res.final_state.t)
                << " S=" << sl::fmt17(res.final_state.s) << "\n";
      for (int k = 0; k < cfg.model.n(); ++k)
        std::cout << "mass_" << k + 1 << "="
                  << sl::fmt17(res.final_state.mass(k, cfg.grid.da)) << "\n";
      return 0;
    }
    if (cls->parsed()) {
      auto cfg = sl::load_config(config_path);
      cfg.do_classify = true;
      if (cfg.lyapunov.mode == sl::LyapunovSpec::Mode::Off)
        cfg.lyapunov.mode = sl::LyapunovSpec::Mode::Auto;
      tols.apply(cfg);
      const auto res = sl::run_experiment(cfg);
      sl::write_outputs(out_dir, cfg, res);
      std::cout << res.verification->text();
      return res.verification->pass ? 0 : 1;
    }
    if (eq->parsed()) {
      auto cfg = sl::load_config(config_path);
      const auto res_v = sl::validate(cfg.model);
      if (!res_v.valid()) throw sl::ConfigError("model fails validation");
      const auto derived = sl::derive_all(cfg.model, cfg.grid);
      std::vector<double> r0;
      for (const auto& d : derived) r0.push_back(d.r0);
      const auto b = cfg.explicit_blocks ? *cfg.explicit_blocks
                                         : sl::blocks(r0, cfg.tie_tol);
      sl::EquilibriumPoint e;
      if (block == 0) {
        e = sl::disease_free(cfg.model, cfg.grid);
      } else {
        std::vector<double> alpha = alpha_str.empty()
                                        ? std::vector<double>()
                                        : parse_alpha(alpha_str);
        if (alpha.empty()) {
          // default: uniform weights over the block
          alpha.assign(static_cast<std::size_t>(cfg.model.n()), 0.0);
          const auto js = b.block_strains(block);
          for (int j : js)
            alpha[static_cast<std::size_t>(j)] = 1.0 / static_cast<double>(js.size());
        }
        e = sl::endemic_point(cfg.model, derived, b, block, alpha, cfg.grid);
      }
      std::cout << "S_star=" << sl::fmt17(e.s_star) << "\n";
      const std::string path = out_file.empty() ? "/dev/stdout" : out_file;
      sl::write_equilibrium(path, e, cfg.grid);
      return 0;
    }
    if (ly->parsed()) {
      auto cfg = sl::load_config(config_path);
      tols.apply(cfg);
      if (cfg.lyapunov.mode == sl::LyapunovSpec::Mode::Off)
        cfg.lyapunov.mode = sl::LyapunovSpec::Mode::Auto;
      cfg.do_classify = true;  // auto mode needs the prediction
      const auto res = sl::run_experiment(cfg);
      // the run is deterministic, so the recomputed trajectory must match
      // the given file row for row
      std::ifstream f(traj_path);
      if (!f) throw sl::ConfigError("cannot open trajectory: " + traj_path);
      std::string line;
      std::getline(f, line);  // header
      std::size_t i = 0;
      while (std::getline(f, line) && i < res.traj.times.size()) {
        std::stringstream ss(line);
        std::string t_str, s_str;
        std::getline(ss, t_str, ',');
        std::getline(ss, s_str, ',');
        if (std::abs(std::stod(t_str) - res.traj.times[i]) > 1e-12 ||
            std::abs(std::stod(s_str) - res.traj.s[i]) > 1e-12)
          throw sl::ConfigError(
              "trajectory file does not match a rerun of this config (row " +
              std::to_string(i + 1) + ")");
        ++i;
      }
      const std::string out =
          out_file.empty() ? traj_path.substr(0, traj_path.rfind('.')) +
                                 "_lyapunov.csv"
                           : out_file;
      sl::write_trajectory(out, res.traj);
      std::cout << "wrote " << out << "\n";
      return 0;
    }
    if (oc->parsed()) {
      auto cfg = sl::load_config(config_path);
      cfg.do_oracle = true;
      const auto res = sl::run_experiment(cfg);
      std::cout << "sup_error_S=" << sl::fmt17(res.oracle_errors->s) << "\n";
      for (std::size_t k = 0; k < res.oracle_errors->mass.size(); ++k)
        std::cout << "sup_error_mass_" << k + 1 << "="
                  << sl::fmt17(res.oracle_errors->mass[k]) << "\n";
      if (oracle_tol >= 0.0 && res.oracle_errors->max() > oracle_tol) return 1;
      return 0;
    }
    if (sw->parsed()) {
      const auto spec = sl::load_sweep_spec(spec_path);
      const auto rows = sl::run_sweep(spec, out_dir, jobs);
      int failures = 0;
      for (const auto& r : rows)
        if (!r.ok) ++failures;
      std::cout << rows.size() << " runs, " << failures << " failures; results in "
                << out_dir << "/results.csv\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
