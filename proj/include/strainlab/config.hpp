#pragma once

// Experiment configuration: one JSON document describing model, grid,
// initial condition, run horizon and analysis switches. The parsed form
// keeps the fully resolved document for bit-exact reruns.

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "classify.hpp"
#include "equilibria.hpp"
#include "kernels.hpp"
#include "model.hpp"
#include "state.hpp"

namespace strainlab {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DensitySpec {
  enum class Kind { Zero, Window, Equilibrium, Table };
  Kind kind = Kind::Zero;
  double lo = 0.0, hi = 0.0, height = 0.0;  // window
  int block = 1;                            // equilibrium
  std::vector<double> alpha;                // equilibrium, per strain
  std::string path;                         // table
};

struct LyapunovSpec {
  enum class Mode { Off, L0, Lk, Auto };
  Mode mode = Mode::Off;
  int block = 1;
  std::vector<double> alpha;  // per strain; empty = use empirical alpha_hat
};

struct RunConfig {
  ModelParams model;
  std::optional<BlockStructure> explicit_blocks;  // declared sigma, bypassing detection
  Grid grid;
  double init_s = 0.0;
  std::vector<DensitySpec> init_density;
  double t_end = 0.0;
  int record_every = 1;
  std::vector<double> snapshot_times;
  bool do_classify = false;
  bool do_oracle = false;
  LyapunovSpec lyapunov;
  double tie_tol = 1e-9;
  VerifyTols tols;
  json resolved;  // the full document, with defaults applied
};

namespace detail {

inline double num_or_inf(const json& v, const std::string& where) {
  if (v.is_null()) return kInf;
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return kInf;
    throw ConfigError(where + ": expected number or \"inf\"");
  }
  if (!v.is_number()) throw ConfigError(where + ": expected number");
  return v.get<double>();
}

inline double require_num(const json& o, const std::string& key,
                          const std::string& where) {
  if (!o.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  if (!o[key].is_number()) throw ConfigError(where + "." + key + ": expected number");
  return o[key].get<double>();
}

inline AgeKernel parse_kernel(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected kernel object");
  const std::string form = j.value("form", "constant");
  if (form == "constant") {
    const double value = require_num(j, "value", where);
    double lo = 0.0, hi = kInf;
    if (j.contains("window")) {
      const auto& w = j["window"];
      if (!w.is_array() || w.size() != 2)
        throw ConfigError(where + ".window: expected [lo, hi]");
      lo = num_or_inf(w[0], where + ".window[0]");
      hi = num_or_inf(w[1], where + ".window[1]");
    }
    return AgeKernel::constant(value, lo, hi);
  }
  if (form == "piecewise") {
    if (!j.contains("edges") || !j.contains("values"))
      throw ConfigError(where + ": piecewise kernel needs 'edges' and 'values'");
    std::vector<double> edges, values;
    for (std::size_t i = 0; i < j["edges"].size(); ++i)
      edges.push_back(num_or_inf(j["edges"][i], where + ".edges"));
    for (const auto& v : j["values"]) values.push_back(v.get<double>());
    return AgeKernel::piecewise(std::move(edges), std::move(values));
  }
  throw ConfigError(where + ".form: unknown form '" + form + "'");
}

inline json kernel_to_json(const AgeKernel& k) {
  json j;
  auto edge = [](double e) -> json {
    return std::isinf(e) ? json("inf") : json(e);
  };
  if (k.form == KernelForm::Constant) {
    j["form"] = "constant";
    j["value"] = k.vals.front();
    j["window"] = json::array({edge(k.edges.front()), edge(k.edges.back())});
  } else {
    j["form"] = "piecewise";
    j["edges"] = json::array();
    for (double e : k.edges) j["edges"].push_back(edge(e));
    j["values"] = k.vals;
  }
  return j;
}

}  // namespace detail

inline RunConfig parse_config(const json& doc);

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // translate the byte offset into a line number
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError(path + ":" + std::to_string(line) + ": " + e.what());
  }
  return parse_config(doc);
}

inline RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  if (!doc.contains("model")) throw ConfigError("config: missing 'model' block");
  const auto& m = doc["model"];
  cfg.model.lambda = detail::require_num(m, "lambda", "model");
  cfg.model.mu_s = detail::require_num(m, "mu_s", "model");
  cfg.model.mu0 = detail::require_num(m, "mu0", "model");
  if (!m.contains("strains") || !m["strains"].is_array())
    throw ConfigError("model.strains: expected array");
  for (std::size_t k = 0; k < m["strains"].size(); ++k) {
    const auto& s = m["strains"][k];
    const std::string where = "model.strains[" + std::to_string(k) + "]";
    StrainParams sp{detail::parse_kernel(s.at("beta"), where + ".beta"),
                    detail::parse_kernel(s.at("mu"), where + ".mu")};
    cfg.model.strains.push_back(std::move(sp));
  }

  if (!doc.contains("grid")) throw ConfigError("config: missing 'grid' block");
  const auto& gr = doc["grid"];
  cfg.grid.da = detail::require_num(gr, "da", "grid");
  const double amax = detail::require_num(gr, "a_max", "grid");
  cfg.grid.cells = static_cast<int>(std::llround(amax / cfg.grid.da));
  cfg.grid.tail_tol = gr.value("tail_tol", 1e-12);

  if (!doc.contains("init")) throw ConfigError("config: missing 'init' block");
  const auto& in = doc["init"];
  cfg.init_s = detail::require_num(in, "s", "init");
  if (!in.contains("densities") || !in["densities"].is_array() ||
      in["densities"].size() != cfg.model.strains.size())
    throw ConfigError("init.densities: expected one spec per strain");
  for (std::size_t k = 0; k < in["densities"].size(); ++k) {
    const auto& d = in["densities"][k];
    const std::string where = "init.densities[" + std::to_string(k) + "]";
    DensitySpec spec;
    const std::string kind = d.value("kind", "zero");
    if (kind == "zero") {
      spec.kind = DensitySpec::Kind::Zero;
    } else if (kind == "window") {
      spec.kind = DensitySpec::Kind::Window;
      spec.lo = detail::require_num(d, "lo", where);
      spec.hi = detail::require_num(d, "hi", where);
      spec.height = detail::require_num(d, "height", where);
    } else if (kind == "equilibrium") {
      spec.kind = DensitySpec::Kind::Equilibrium;
      spec.block = static_cast<int>(d.value("block", 1));
      if (!d.contains("alpha") || !d["alpha"].is_array())
        throw ConfigError(where + ": equilibrium init needs per-strain 'alpha'");
      for (const auto& a : d["alpha"]) spec.alpha.push_back(a.get<double>());
    } else if (kind == "table") {
      spec.kind = DensitySpec::Kind::Table;
      if (!d.contains("path")) throw ConfigError(where + ": table init needs 'path'");
      spec.path = d["path"].get<std::string>();
    } else {
      throw ConfigError(where + ".kind: unknown kind '" + kind + "'");
    }
    cfg.init_density.push_back(std::move(spec));
  }

  if (!doc.contains("run")) throw ConfigError("config: missing 'run' block");
  const auto& run = doc["run"];
  cfg.t_end = detail::require_num(run, "t_end", "run");
  cfg.record_every = static_cast<int>(run.value("record_every", 1));
  if (cfg.record_every < 1) throw ConfigError("run.record_every: must be >= 1");
  if (run.contains("snapshot_times"))
    for (const auto& t : run["snapshot_times"])
      cfg.snapshot_times.push_back(t.get<double>());

  if (doc.contains("analysis")) {
    const auto& an = doc["analysis"];
    cfg.do_classify = an.value("classify", false);
    cfg.do_oracle = an.value("oracle", false);
    cfg.tie_tol = an.value("tie_tol", 1e-9);
    if (an.contains("lyapunov") && an["lyapunov"].is_object()) {
      const auto& ly = an["lyapunov"];
      const std::string mode = ly.value("mode", "off");
      if (mode == "off") cfg.lyapunov.mode = LyapunovSpec::Mode::Off;
      else if (mode == "l0") cfg.lyapunov.mode = LyapunovSpec::Mode::L0;
      else if (mode == "lk") cfg.lyapunov.mode = LyapunovSpec::Mode::Lk;
      else if (mode == "auto") cfg.lyapunov.mode = LyapunovSpec::Mode::Auto;
      else throw ConfigError("analysis.lyapunov.mode: unknown mode '" + mode + "'");
      cfg.lyapunov.block = static_cast<int>(ly.value("block", 1));
      if (ly.contains("alpha"))
        for (const auto& a : ly["alpha"]) cfg.lyapunov.alpha.push_back(a.get<double>());
    }
    if (an.contains("tolerances")) {
      const auto& t = an["tolerances"];
      cfg.tols.distance = t.value("distance", cfg.tols.distance);
      cfg.tols.lyapunov = t.value("lyapunov", cfg.tols.lyapunov);
      cfg.tols.s_floor = t.value("s_floor", cfg.tols.s_floor);
      cfg.tols.force_floor = t.value("force_floor", cfg.tols.force_floor);
      cfg.tols.warmup = t.value("warmup", cfg.tols.warmup);
    }
  }

  if (m.contains("blocks")) {
    // explicitly declared block structure, bypassing tie detection
    const auto& bj = m["blocks"];
    BlockStructure b;
    b.sigma.push_back(0);
    for (const auto& s : bj.at("sigma")) b.sigma.push_back(s.get<int>());
    b.n_r = static_cast<int>(b.sigma.size()) - 1;
    b.n_gt = bj.at("n_gt").get<int>();
    if (b.sigma.back() != cfg.model.n())
      throw ConfigError("model.blocks.sigma: must end at the strain count");
    b.order.resize(static_cast<std::size_t>(cfg.model.n()));
    for (int i = 0; i < cfg.model.n(); ++i) b.order[static_cast<std::size_t>(i)] = i;
    cfg.explicit_blocks = std::move(b);
  }

  cfg.resolved = doc;  // keep the document for round-trip reruns
  return cfg;
}

// Materialize the initial grid state (equilibrium specs need derived data).
inline GridState make_init(const RunConfig& cfg,
                           const std::vector<DerivedStrain>& derived,
                           const BlockStructure& b) {
  GridState st;
  st.t = 0.0;
  st.s = cfg.init_s;
  st.x.assign(static_cast<std::size_t>(cfg.model.n()),
              std::vector<double>(static_cast<std::size_t>(cfg.grid.cells), 0.0));
  for (int k = 0; k < cfg.model.n(); ++k) {
    const auto& spec = cfg.init_density[static_cast<std::size_t>(k)];
    auto& x = st.x[static_cast<std::size_t>(k)];
    switch (spec.kind) {
      case DensitySpec::Kind::Zero:
        break;
      case DensitySpec::Kind::Window:
        for (int i = 0; i < cfg.grid.cells; ++i) {
          const double lo = cfg.grid.node(i), hi = cfg.grid.node(i + 1);
          const double ov = std::min(hi, spec.hi) - std::max(lo, spec.lo);
          if (ov > 0.0)
            x[static_cast<std::size_t>(i)] = spec.height * ov / cfg.grid.da;
        }
        break;
      case DensitySpec::Kind::Equilibrium: {
        const auto e = endemic_point(cfg.model, derived, b, spec.block, spec.alpha,
                                     cfg.grid);
        st.s = e.s_star;
        x = e.densities[static_cast<std::size_t>(k)];
        break;
      }
      case DensitySpec::Kind::Table: {
        std::ifstream f(spec.path);
        if (!f) throw ConfigError("init table not readable: " + spec.path);
        std::string line;
        std::getline(f, line);  // header
        int i = 0;
        while (std::getline(f, line) && i < cfg.grid.cells) {
          const auto comma = line.find(',');
          if (comma == std::string::npos)
            throw ConfigError("init table: expected 'a,value' rows in " + spec.path);
          x[static_cast<std::size_t>(i)] = std::stod(line.substr(comma + 1));
          ++i;
        }
        break;
      }
    }
  }
  return st;
}

}  // namespace strainlab
