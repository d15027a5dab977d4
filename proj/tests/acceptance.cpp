// Acceptance gate: one line of output per criterion, nonzero exit when
// any criterion fails.

#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"

using namespace strainlab;
namespace tu = testutil;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::vector<DerivedStrain> derive_all_of(const ModelParams& p, const Grid& g) {
  std::vector<DerivedStrain> out;
  for (const auto& s : p.strains)
    out.push_back(derive(s.beta, s.mu, g, p.lambda, p.mu_s));
  return out;
}

// ---------------------------------------------------------------- criterion 1

Outcome criterion_stationarity() {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_e0 = 0.0;
  Grid g = tu::grid(0.01, 3000);
  for (int trial = 0; trial < 20; ++trial) {
    ModelParams p;
    p.lambda = 0.2 + 2.8 * u(rng);
    p.mu0 = 0.5 + u(rng);
    p.mu_s = p.mu0 + 2.0 * u(rng);
    const int n = 1 + static_cast<int>(rng() % 3u);
    for (int k = 0; k < n; ++k) {
      const double bval = 0.1 + 2.9 * u(rng);
      const double w = (trial % 3 == 0) ? kInf : 1.0 + 2.0 * u(rng);
      p.strains.push_back({AgeKernel::constant(bval, 0.0, w),
                           AgeKernel::constant(p.mu0 + u(rng))});
    }
    const auto d = derive_all_of(p, g);
    worst_e0 = std::max(worst_e0, residual(p, d, g, disease_free(p, g)));
  }

  const auto p = tu::one_strain(2.0);
  auto res_at = [&](double da) {
    const auto gg = tu::grid30(da);
    const auto d = derive_all_of(p, gg);
    const auto b = blocks({d[0].r0});
    return residual(p, d, gg, endemic_point(p, d, b, 1, {1.0}, gg));
  };
  const double r1 = res_at(2e-3), r2 = res_at(1e-3);
  const double ratio = r1 / r2;

  Outcome o;
  o.pass = worst_e0 <= 1e-14 && r2 <= 5e-3 && ratio >= 1.7 && ratio <= 2.3;
  std::ostringstream os;
  os << "max disease-free residual " << worst_e0 << ", endemic residual "
     << r2 << " at da=1e-3, halving ratio " << ratio;
  o.detail = os.str();
  return o;
}

// ---------------------------------------------------------------- criterion 2

OracleErrors oracle_errors_at(const ModelParams& p,
                              const std::vector<double>& heights, double da) {
  const auto g = tu::grid30(da);
  const auto d = derive_all_of(p, g);
  auto init = tu::zero_state(p, g, 1.0);
  std::vector<double> i0;
  for (int k = 0; k < p.n(); ++k) {
    tu::set_window(init, k, g, 0.0, 1.0, heights[static_cast<std::size_t>(k)]);
    i0.push_back(init.mass(k, g.da));
  }
  SimOptions opt;
  opt.t_end = 50.0;
  opt.record_every = static_cast<int>(std::llround(0.05 / da));
  const auto traj = simulate(p, d, g, init, opt);
  const auto ref = integrate(reduce(p), 1.0, i0, 50.0, 0.05, 1e-4);
  return compare(traj, ref);
}

Outcome criterion_oracle() {
  struct Case {
    ModelParams p;
    std::vector<double> heights;
    const char* name;
  };
  std::vector<Case> cases{{tu::one_strain(0.5), {0.1}, "R0=0.5"},
                          {tu::one_strain(2.0), {0.1}, "R0=2"},
                          {tu::strains({2.0, 1.5, 0.8}), {0.1, 0.1, 0.1},
                           "R0=(2,1.5,0.8)"}};
  Outcome o;
  o.pass = true;
  std::ostringstream os;
  for (const auto& c : cases) {
    const double e1 = oracle_errors_at(c.p, c.heights, 1e-3).max();
    const double e2 = oracle_errors_at(c.p, c.heights, 2e-3).max();
    const double ratio = e2 / e1;
    const bool ok = e1 <= 1e-3 && ratio >= 1.6 && ratio <= 2.4;
    o.pass = o.pass && ok;
    os << c.name << " sup error " << e1 << " ratio " << ratio << "; ";
  }
  o.detail = os.str();
  return o;
}

// ---------------------------------------------------------------- criterion 3

Outcome criterion_transport() {
  const auto g = tu::grid30(2e-3);
  ModelParams p = tu::strains({2.0, 1.0});
  p.strains[1].beta = AgeKernel::constant(1.0, 0.0, 1.0);
  p.strains[1].mu = AgeKernel::piecewise({0.0, 3.0, kInf}, {1.0, 2.0});
  const auto d = derive_all_of(p, g);

  double worst = 0.0;
  {
    auto init = tu::zero_state(p, g, 1.0);
    tu::set_window(init, 0, g, 0.0, 1.0, 0.5);
    tu::set_window(init, 1, g, 1.0, 2.0, 1.0);
    SimOptions opt;
    opt.t_end = 20.0;
    opt.record_every = 1000;
    opt.snapshot_times = {5.0, 10.0, 15.0};
    const auto traj = simulate(p, d, g, init, opt);
    worst = std::max(worst, duhamel_check(traj, init, p, g).max_deviation);
  }
  {
    auto init = tu::zero_state(p, g, 0.3);
    tu::set_window(init, 0, g, 0.0, 0.5, 2.0);
    SimOptions opt;
    opt.t_end = 12.0;
    opt.record_every = 1000;
    opt.snapshot_times = {4.0, 11.0};
    const auto traj = simulate(p, d, g, init, opt);
    worst = std::max(worst, duhamel_check(traj, init, p, g).max_deviation);
  }
  Outcome o;
  o.pass = worst <= 1e-13;
  o.detail = "max transported-region deviation " + std::to_string(worst);
  std::ostringstream os;
  os << "max transported-region deviation " << worst;
  o.detail = os.str();
  return o;
}

// ----------------------------------------------------- criteria 4, 6 and 7

struct TheoremCase {
  std::string name;
  ExperimentResult res;
  double da = 0.0;
};

RunConfig theorem_config(const std::vector<double>& betas,
                         const std::vector<double>& heights, double t_end) {
  RunConfig cfg;
  cfg.model = tu::strains(betas);
  cfg.grid = tu::grid30(2e-3);
  cfg.init_s = 1.0;
  for (double h : heights) {
    DensitySpec spec;
    if (h > 0.0) {
      spec.kind = DensitySpec::Kind::Window;
      spec.lo = 0.0;
      spec.hi = 1.0;
      spec.height = h;
    }
    cfg.init_density.push_back(spec);
  }
  cfg.t_end = t_end;
  cfg.record_every = 100;
  cfg.do_classify = true;
  cfg.lyapunov.mode = LyapunovSpec::Mode::Auto;
  return cfg;
}

const std::vector<TheoremCase>& theorem_cases() {
  static std::vector<TheoremCase> cases = [] {
    std::vector<TheoremCase> out;
    out.push_back({"subcritical",
                   run_experiment(theorem_config({0.5, 0.9}, {0.1, 0.1}, 100.0)),
                   2e-3});
    out.push_back({"exclusion",
                   run_experiment(theorem_config({2.0, 1.5}, {0.1, 0.1}, 200.0)),
                   2e-3});
    out.push_back({"tie",
                   run_experiment(theorem_config({2.0, 2.0}, {0.1, 0.2}, 200.0)),
                   2e-3});
    out.push_back({"boundary",
                   run_experiment(theorem_config({2.0, 2.0}, {0.0, 0.1}, 200.0)),
                   2e-3});
    return out;
  }();
  return cases;
}

Outcome criterion_lyapunov_monotone() {
  Outcome o;
  o.pass = true;
  std::ostringstream os;
  for (const auto& c : theorem_cases()) {
    const auto& v = *c.res.verification;
    const bool ok = v.lyap_checked && v.lyap_ok;
    o.pass = o.pass && ok;
    os << c.name << " max increment " << v.lyap.max_increment << "; ";
  }
  o.detail = os.str();
  return o;
}

Outcome criterion_theorem() {
  Outcome o;
  o.pass = true;
  std::ostringstream os;
  const auto& cases = theorem_cases();

  {
    const auto& r = cases[0].res;
    const bool ok = r.prediction->clause == 1 && r.verification->converged &&
                    r.verification->final_distance <= 1e-3;
    o.pass = o.pass && ok;
    os << "subcritical dist " << r.verification->final_distance << "; ";
  }
  {
    const auto& r = cases[1].res;
    const bool ok = r.prediction->target.name(2) == "E_1,{1}" &&
                    r.verification->converged &&
                    r.traj.mass[1].back() <= 1e-6;
    o.pass = o.pass && ok;
    os << "exclusion dist " << r.verification->final_distance
       << " losing mass " << r.traj.mass[1].back() << "; ";
  }
  {
    const auto& r = cases[2].res;
    const double asum =
        r.verification->alpha_hat[0] + r.verification->alpha_hat[1];
    const bool ok = r.prediction->target.name(2) == "E_1,{1,2}" &&
                    r.verification->converged && std::abs(asum - 1.0) <= 1e-6;
    o.pass = o.pass && ok;
    os << "tie dist " << r.verification->final_distance << " alpha ("
       << r.verification->alpha_hat[0] << "," << r.verification->alpha_hat[1]
       << "); ";
  }
  {
    const auto& r = cases[3].res;
    bool zero = true;
    for (double v : r.final_state.x[0]) zero = zero && v == 0.0;
    const bool ok = r.prediction->target.name(2) == "E_1,{2}" &&
                    r.verification->converged && zero;
    o.pass = o.pass && ok;
    os << "boundary dist " << r.verification->final_distance
       << (zero ? " absent strain bit-zero" : " ABSENT STRAIN LEAKED");
  }
  o.detail = os.str();
  return o;
}

Outcome criterion_floors() {
  Outcome o;
  o.pass = true;
  std::ostringstream os;
  for (std::size_t i = 1; i < theorem_cases().size(); ++i) {
    const auto& c = theorem_cases()[i];
    const auto& f = c.res.verification->floor;
    const bool ok = f.applicable && f.s_floor_ok && f.force_floor_ok;
    o.pass = o.pass && ok;
    os << c.name << " c_S " << f.c_s << " min S " << f.s_min_after_warmup;
    for (double v : f.force_inf) os << " F_inf " << v;
    os << "; ";
  }
  o.detail = os.str();
  return o;
}

// ---------------------------------------------------------------- criterion 5

Outcome criterion_derivative_identity() {
  Outcome o;
  o.pass = true;
  std::ostringstream os;
  for (const bool use_lk : {false, true}) {
    const auto g = tu::grid30(1e-3);
    const auto p = tu::one_strain(use_lk ? 2.0 : 0.5);
    const auto d = derive_all_of(p, g);
    const auto b = blocks({d[0].r0});
    auto init = tu::zero_state(p, g, 0.8);
    for (int i = 0; i < g.cells; ++i)
      init.x[0][static_cast<std::size_t>(i)] = 0.3 * std::exp(-g.mid(i));

    std::optional<LyapunovConfig> lycfg;
    if (use_lk) lycfg = LyapunovConfig::make(b, 1, {1.0});
    std::vector<double> L, dL;
    SimOptions opt;
    opt.t_end = 15.0;
    opt.record_every = 10;
    opt.monitors.push_back([&](const GridState& st, const std::vector<double>&,
                               Trajectory&) {
      if (use_lk) {
        L.push_back(lk(st, d, p, b, g, *lycfg));
        dL.push_back(lk_dt(st, d, p, b, g, *lycfg));
      } else {
        L.push_back(l0(st, d, p, g));
        dL.push_back(l0_dt(st, d, p, g));
      }
    });
    const auto traj = simulate(p, d, g, init, opt);

    const double h = traj.times[1] - traj.times[0];
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < L.size(); ++i) {
      if (traj.times[i] < 1.0) continue;  // warm-up
      const double fd = (L[i + 1] - L[i - 1]) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - dL[i]) / (std::abs(dL[i]) + 1.0));
    }
    o.pass = o.pass && worst <= 1e-2;
    os << (use_lk ? "Lk" : "L0") << " max relative mismatch " << worst << "; ";
  }
  o.detail = os.str();
  return o;
}

// ---------------------------------------------------------------- criterion 8

Outcome criterion_invariance_fuzz() {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int failures = 0;
  std::string first_failure;
  for (int trial = 0; trial < 200; ++trial) {
    ModelParams p;
    p.lambda = 0.2 + 2.8 * u(rng);
    p.mu0 = 1.0 + u(rng);
    p.mu_s = p.mu0 + 2.0 * u(rng);
    const int n = 1 + static_cast<int>(rng() % 3u);
    for (int k = 0; k < n; ++k) {
      const double bval = 0.2 + 2.8 * u(rng);
      AgeKernel beta = AgeKernel::constant(bval);
      const int form = static_cast<int>(rng() % 3u);
      if (form == 1) beta = AgeKernel::constant(bval, 0.0, 0.5 + 2.5 * u(rng));
      if (form == 2) {
        const double split = 0.5 + 2.0 * u(rng);
        beta = AgeKernel::piecewise({0.0, split, kInf},
                                    {bval, 0.2 + 2.8 * u(rng)});
      }
      AgeKernel mu = (rng() % 2u == 0)
                         ? AgeKernel::constant(p.mu0 + u(rng))
                         : AgeKernel::piecewise({0.0, 1.0 + 2.0 * u(rng), kInf},
                                                {p.mu0 + u(rng), p.mu0 + u(rng)});
      p.strains.push_back({std::move(beta), std::move(mu)});
    }
    Grid g;
    g.da = 0.02 + 0.08 * u(rng);
    g.cells = static_cast<int>(std::ceil(35.0 / g.da));
    g.tail_tol = 1e-12;

    auto fail = [&](const std::string& why) {
      ++failures;
      if (first_failure.empty())
        first_failure = "trial " + std::to_string(trial) + ": " + why;
    };
    try {
      const auto d = derive_all_of(p, g);
      auto init = tu::zero_state(p, g, 2.0 * u(rng));
      std::vector<bool> empty(static_cast<std::size_t>(n));
      for (int k = 0; k < n; ++k) {
        empty[static_cast<std::size_t>(k)] = u(rng) < 0.3;
        if (!empty[static_cast<std::size_t>(k)]) {
          const double lo = 2.0 * u(rng);
          tu::set_window(init, k, g, lo, lo + 0.5 + 1.5 * u(rng),
                         1.5 * u(rng) + 1e-3);
        }
      }
      const double norm0 = init.total_norm(g.da);
      const double bound =
          std::max(p.lambda / p.mu0, norm0) + 10.0 * g.da * p.lambda;
      SimOptions opt;
      opt.t_end = 2.0;
      GridState fin;
      const auto traj = simulate(p, d, g, init, opt, &fin);
      for (std::size_t i = 0; i < traj.times.size(); ++i) {
        double norm = traj.s[i];
        for (const auto& m : traj.mass) norm += m[i];
        if (norm > bound) fail("norm bound exceeded");
        if (traj.s[i] < 0.0) fail("negative susceptibles");
      }
      for (int k = 0; k < n; ++k)
        for (double v : fin.x[static_cast<std::size_t>(k)]) {
          if (v < 0.0) fail("negative density");
          if (empty[static_cast<std::size_t>(k)] && v != 0.0)
            fail("empty strain acquired mass");
        }
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }
  Outcome o;
  o.pass = failures == 0;
  o.detail = "200 random configs, " + std::to_string(failures) + " failures" +
             (failures ? " (" + first_failure + ")" : "");
  return o;
}

// ---------------------------------------------------------------- criterion 9

Outcome criterion_weight_comparison() {
  const auto g = tu::grid30(5e-3);
  const auto p = tu::strains({2.0, 2.0, 2.0});
  const auto d = derive_all_of(p, g);
  const auto b = blocks({d[0].r0, d[1].r0, d[2].r0});
  std::mt19937 rng(11);
  std::exponential_distribution<double> ex(1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto simplex = [&] {
    std::vector<double> w(3);
    double s = 0.0;
    for (auto& v : w) s += (v = ex(rng));
    for (auto& v : w) v /= s;
    return w;
  };
  auto member_state = [&](const std::vector<double>& w) {
    const auto e = endemic_point(p, d, b, 1, w, g);
    GridState st;
    st.s = e.s_star;
    st.x = e.densities;
    return st;
  };

  int violations = 0, infinite_cases = 0;
  for (int draw = 0; draw < 500; ++draw) {
    auto tau = simplex();
    auto tau_p = simplex();
    if (u(rng) < 0.2) {
      // exact extinction in the comparison point
      const std::size_t j = rng() % 3u;
      const double rest = 1.0 - tau_p[j];
      tau_p[j] = 0.0;
      for (auto& v : tau_p) v /= rest;
    }
    std::vector<int> jgt;
    double T = 0.0;
    for (int j = 0; j < 3; ++j)
      if (tau[static_cast<std::size_t>(j)] > tau_p[static_cast<std::size_t>(j)]) {
        jgt.push_back(j);
        T += tau[static_cast<std::size_t>(j)];
      }
    if (jgt.empty()) continue;
    std::vector<double> alpha(3, 0.0);
    for (int j : jgt) alpha[static_cast<std::size_t>(j)] =
        tau[static_cast<std::size_t>(j)] / T;
    const auto cfg = LyapunovConfig::make(b, 1, alpha);
    const double la = lk(member_state(tau), d, p, b, g, cfg);
    const double lb = lk(member_state(tau_p), d, p, b, g, cfg);
    if (std::isinf(lb)) ++infinite_cases;
    if (!(la < lb)) ++violations;
  }
  Outcome o;
  o.pass = violations == 0;
  o.detail = "500 draws, " + std::to_string(violations) + " violations, " +
             std::to_string(infinite_cases) + " infinite comparison points";
  return o;
}

}  // namespace

int main() {
  struct Entry {
    const char* title;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {"criterion 1 (equilibrium stationarity)", criterion_stationarity},
      {"criterion 2 (oracle equivalence)", criterion_oracle},
      {"criterion 3 (transport exactness)", criterion_transport},
      {"criterion 4 (Lyapunov monotonicity)", criterion_lyapunov_monotone},
      {"criterion 5 (derivative identity)", criterion_derivative_identity},
      {"criterion 6 (attractor classification)", criterion_theorem},
      {"criterion 7 (persistence floors)", criterion_floors},
      {"criterion 8 (invariance and dissipativity)", criterion_invariance_fuzz},
      {"criterion 9 (weight comparison inequality)", criterion_weight_comparison},
  };
  int failed = 0;
  for (const auto& e : entries) {
    Outcome o;
    try {
      o = e.fn();
    } catch (const std::exception& ex) {
      o.pass = false;
      o.detail = std::string("exception: ") + ex.what();
    }
    std::printf("%s: %s — %s\n", e.title, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed;
}
