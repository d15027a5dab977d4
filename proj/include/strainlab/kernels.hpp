#pragma once

// Age-dependent rate kernels (transmission beta, mortality mu) and the
// per-strain quantities derived from them: survival pi, reproduction
// integral r, basic reproduction number R0 and the weight function Psi.
//
// Kernels are piecewise constant so that every cell integral has a closed
// form; quadrature error is confined to the time stepping.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace strainlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class KernelForm { Constant, Piecewise };

struct AgeKernel {
  KernelForm form = KernelForm::Constant;
  // Internal representation is always a breakpoint list: value vals[i] on
  // [edges[i], edges[i+1]), zero outside [edges.front(), edges.back()).
  // edges.back() may be +inf.
  std::vector<double> edges;
  std::vector<double> vals;

  static AgeKernel constant(double value, double lo = 0.0, double hi = kInf) {
    if (!(lo >= 0.0) || !(hi > lo))
      throw std::invalid_argument("AgeKernel: window must satisfy 0 <= lo < hi");
    if (!(value >= 0.0) || std::isnan(value) || std::isinf(value))
      throw std::invalid_argument("AgeKernel: value must be finite and >= 0");
    AgeKernel k;
    k.form = KernelForm::Constant;
    k.edges = {lo, hi};
    k.vals = {value};
    return k;
  }

  static AgeKernel piecewise(std::vector<double> e, std::vector<double> v) {
    if (e.size() < 2 || v.size() + 1 != e.size())
      throw std::invalid_argument("AgeKernel: need m+1 edges for m values");
    if (!(e.front() >= 0.0))
      throw std::invalid_argument("AgeKernel: edges must start at age >= 0");
    for (std::size_t i = 0; i + 1 < e.size(); ++i)
      if (!(e[i] < e[i + 1]))
        throw std::invalid_argument("AgeKernel: edges must be strictly increasing");
    for (double x : v)
      if (!(x >= 0.0) || std::isnan(x) || std::isinf(x))
        throw std::invalid_argument("AgeKernel: values must be finite and >= 0");
    AgeKernel k;
    k.form = KernelForm::Piecewise;
    k.edges = std::move(e);
    k.vals = std::move(v);
    return k;
  }

  // Right-continuous evaluation; zero outside the window.
  double operator()(double a) const {
    if (a < 0.0) throw std::invalid_argument("AgeKernel::eval: negative age");
    if (a < edges.front() || a >= edges.back()) return 0.0;
    auto it = std::upper_bound(edges.begin(), edges.end(), a);
    return vals[static_cast<std::size_t>(it - edges.begin()) - 1];
  }

  // Exact integral over [lo, hi].
  double integral(double lo, double hi) const {
    if (hi <= lo) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double u = std::max(lo, edges[i]);
      const double v = std::min(hi, edges[i + 1]);
      if (v > u) acc += vals[i] * (v - u);
    }
    return acc;
  }

  double sup() const { return *std::max_element(vals.begin(), vals.end()); }

  // sup(supp): last age below which the kernel is positive (beta_bar).
  double support_sup() const {
    for (std::size_t i = vals.size(); i-- > 0;)
      if (vals[i] > 0.0) return edges[i + 1];
    return 0.0;
  }

  // inf(supp) (underline beta).
  double support_lo() const {
    for (std::size_t i = 0; i < vals.size(); ++i)
      if (vals[i] > 0.0) return edges[i];
    return edges.back();
  }

  bool identically_zero() const {
    return std::all_of(vals.begin(), vals.end(), [](double v) { return v == 0.0; });
  }

  // True when the kernel takes one single value on all of [0, inf).
  bool is_globally_constant() const {
    if (edges.front() != 0.0 || !std::isinf(edges.back())) return false;
    for (double v : vals)
      if (v != vals.front()) return false;
    return true;
  }

  // True when every age in [0, inf) is covered by some piece (mu kernels).
  bool covers_all_ages() const {
    return edges.front() == 0.0 && std::isinf(edges.back());
  }

  // Minimum value over [0, inf), counting the implicit zero outside the window.
  double min_over_all_ages() const {
    double m = covers_all_ages() ? kInf : 0.0;
    for (double v : vals) m = std::min(m, v);
    return m;
  }

  // True when the kernel is positive a.e. on [support_lo, support_sup).
  bool positive_on_support_interval() const {
    bool inside = false;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (vals[i] > 0.0) inside = true;
      else if (inside) {
        // a zero gap strictly between positive pieces violates Assumption 1.2
        for (std::size_t j = i + 1; j < vals.size(); ++j)
          if (vals[j] > 0.0) return false;
      }
    }
    return true;
  }

  void breakpoints_into(std::vector<double>& out, double amax) const {
    for (double e : edges)
      if (e > 0.0 && e < amax) out.push_back(e);
  }
};

// -------------------------------------------------------------------------
// Age grid. dt = da always (characteristic alignment is a solver invariant).

struct Grid {
  double da = 0.0;
  int cells = 0;
  double tail_tol = 1e-12;

  double amax() const { return da * cells; }
  double node(int i) const { return da * i; }
  double mid(int i) const { return da * i + 0.5 * da; }

  void check(double mu0) const {
    if (!(da > 0.0) || cells <= 0)
      throw std::invalid_argument("Grid: need da > 0 and cells > 0");
    if (std::exp(-mu0 * amax()) > tail_tol) {
      const double need = std::log(1.0 / tail_tol) / mu0;
      throw std::invalid_argument("Grid: age truncation too short, need A_max >= " +
                                  std::to_string(need));
    }
  }
};

namespace detail {

// Merged breakpoints of two kernels on [lo, hi], endpoints included.
inline std::vector<double> merged_breaks(const AgeKernel& a, const AgeKernel& b,
                                         double lo, double hi) {
  std::vector<double> pts{lo, hi};
  a.breakpoints_into(pts, hi);
  b.breakpoints_into(pts, hi);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::remove_if(pts.begin(), pts.end(),
                           [&](double p) { return p < lo || p > hi; }),
            pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// Exact integral over [lo, hi] of beta(s) * exp(-int_lo^s mu), both kernels
// piecewise constant.
inline double convolved_integral(const AgeKernel& beta, const AgeKernel& mu,
                                 double lo, double hi) {
  if (hi <= lo) return 0.0;
  const auto pts = merged_breaks(beta, mu, lo, hi);
  double acc = 0.0, M = 0.0;  // M = int_lo^u mu
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double u = pts[i], v = pts[i + 1], h = v - u;
    const double b = beta(u), m = mu(u);
    if (b > 0.0) {
      const double piece = (m > 0.0) ? b * (1.0 - std::exp(-m * h)) / m : b * h;
      acc += std::exp(-M) * piece;
    }
    M += m * h;
  }
  return acc;
}

}  // namespace detail

// -------------------------------------------------------------------------
// Standalone operations (spec contracts); derive() below bundles them.

// Survival pi(a_i) = exp(-int_0^{a_i} mu) on grid nodes; pi(0) = 1.
inline std::vector<double> survival(const AgeKernel& mu, const Grid& grid) {
  if (grid.cells <= 0) throw std::invalid_argument("survival: empty grid");
  std::vector<double> pi(static_cast<std::size_t>(grid.cells) + 1);
  double M = 0.0;
  pi[0] = 1.0;
  for (int i = 0; i < grid.cells; ++i) {
    M += mu.integral(grid.node(i), grid.node(i + 1));
    pi[static_cast<std::size_t>(i) + 1] = std::exp(-M);
  }
  return pi;
}

struct Reproduction {
  double r = 0.0;        // truncated integral of beta*pi on [0, A_max]
  double r0 = 0.0;       // Lambda * r / mu_S
  double tail_bound = 0.0;
};

// r = int_0^inf beta*pi, exact on [0, A_max] with analytic tail bound.
inline Reproduction reproduction(const AgeKernel& beta, const AgeKernel& mu,
                                 const Grid& grid, double lambda, double mu_s) {
  const double amax = grid.amax();
  const double mu0 = mu.min_over_all_ages();
  Reproduction out;
  out.r = detail::convolved_integral(beta, mu, 0.0, amax);
  if (beta.support_sup() > amax) {
    // int_amax^inf beta*pi <= ||beta|| * pi(amax) / mu0
    const double pi_amax = std::exp(-mu.integral(0.0, amax));
    out.tail_bound = beta.sup() * pi_amax / std::max(mu0, 1e-300);
    if (std::exp(-mu0 * amax) * beta.sup() / mu0 >= grid.tail_tol) {
      const double need = std::log(beta.sup() / (mu0 * grid.tail_tol)) / mu0;
      throw std::invalid_argument(
          "reproduction: tail tolerance violated, need A_max >= " +
          std::to_string(need));
    }
  }
  out.r0 = lambda * out.r / mu_s;
  return out;
}

// Psi(a_i) = (1/r) int_{a_i}^inf beta(s) exp(-int_{a_i}^s mu) ds on grid
// nodes, by exact backward recursion. Tail beyond A_max is bounded, not
// integrated; the bound at A_max is returned through *tail_bound.
inline std::vector<double> psi(const AgeKernel& beta, const AgeKernel& mu,
                               double r, const Grid& grid,
                               double* tail_bound = nullptr) {
  if (!(r > 0.0)) throw std::invalid_argument("psi: need r > 0");
  const int N = grid.cells;
  std::vector<double> out(static_cast<std::size_t>(N) + 1);
  double tail = 0.0;
  if (beta.support_sup() > grid.amax()) {
    const double mu0 = std::max(mu.min_over_all_ages(), 1e-300);
    tail = beta.sup() / (r * mu0);
  }
  if (tail_bound) *tail_bound = tail;
  out[static_cast<std::size_t>(N)] = 0.0;
  for (int i = N - 1; i >= 0; --i) {
    const double u = grid.node(i), v = grid.node(i + 1);
    const double decay = std::exp(-mu.integral(u, v));
    out[static_cast<std::size_t>(i)] =
        decay * out[static_cast<std::size_t>(i) + 1] +
        detail::convolved_integral(beta, mu, u, v) / r;
  }
  return out;
}

// -------------------------------------------------------------------------
// Everything the solver and the functionals need about one strain,
// precomputed on the grid. Immutable after construction.

struct DerivedStrain {
  double r = 0.0;
  double r0 = 0.0;
  double r_tail = 0.0;
  double beta_lo = 0.0;   // underline beta
  double beta_sup = 0.0;  // bar beta (may be inf)
  double beta_norm = 0.0; // ||beta||_inf
  double psi_tail = 0.0;  // Psi tail bound at A_max

  std::vector<double> pi_node;        // N+1 nodes
  std::vector<double> pi_mid;         // N cell midpoints
  std::vector<double> psi_node;       // N+1
  std::vector<double> psi_mid;        // N
  std::vector<double> beta_mid;       // beta at cell midpoints (quadrature)
  std::vector<double> cell_survival;  // exp(-int_cell mu), N
  double boundary_factor = 1.0;       // cell-average survival on cell 0
  double pi_mass_mid = 0.0;           // sum(pi_mid) * da
};

inline DerivedStrain derive(const AgeKernel& beta, const AgeKernel& mu,
                            const Grid& grid, double lambda, double mu_s) {
  const int N = grid.cells;
  DerivedStrain d;
  const auto rep = reproduction(beta, mu, grid, lambda, mu_s);
  d.r = rep.r;
  d.r0 = rep.r0;
  d.r_tail = rep.tail_bound;
  d.beta_lo = beta.support_lo();
  d.beta_sup = beta.support_sup();
  d.beta_norm = beta.sup();

  d.pi_node.assign(static_cast<std::size_t>(N) + 1, 0.0);
  d.pi_mid.assign(static_cast<std::size_t>(N), 0.0);
  d.pi_node[0] = 1.0;
  double M = 0.0;
  for (int i = 0; i < N; ++i) {
    const double mhalf = mu.integral(grid.node(i), grid.mid(i));
    d.pi_mid[static_cast<std::size_t>(i)] = std::exp(-(M + mhalf));
    M += mu.integral(grid.node(i), grid.node(i + 1));
    d.pi_node[static_cast<std::size_t>(i) + 1] = std::exp(-M);
  }

  // Psi on nodes and midpoints by one backward recursion over half-cells.
  d.psi_node.assign(static_cast<std::size_t>(N) + 1, 0.0);
  d.psi_mid.assign(static_cast<std::size_t>(N), 0.0);
  if (beta.support_sup() > grid.amax()) {
    const double mu0 = std::max(mu.min_over_all_ages(), 1e-300);
    d.psi_tail = beta.sup() / (d.r * mu0);
  }
  double acc = 0.0;  // Psi at current point
  for (int h = 2 * N - 1; h >= 0; --h) {
    const double u = 0.5 * grid.da * h, v = 0.5 * grid.da * (h + 1);
    acc = std::exp(-mu.integral(u, v)) * acc +
          detail::convolved_integral(beta, mu, u, v) / d.r;
    if (h % 2 == 0)
      d.psi_node[static_cast<std::size_t>(h / 2)] = acc;
    else
      d.psi_mid[static_cast<std::size_t>(h / 2)] = acc;
  }

  d.beta_mid.assign(static_cast<std::size_t>(N), 0.0);
  d.cell_survival.assign(static_cast<std::size_t>(N), 0.0);
  for (int i = 0; i < N; ++i) {
    d.beta_mid[static_cast<std::size_t>(i)] = beta(grid.mid(i));
    d.cell_survival[static_cast<std::size_t>(i)] =
        std::exp(-mu.integral(grid.node(i), grid.node(i + 1)));
  }

  // Cell-average survival over [0, da]: (1/da) int_0^da exp(-int_0^a mu).
  {
    const auto pts = detail::merged_breaks(beta, mu, 0.0, grid.da);
    double avg = 0.0, Macc = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double u = pts[i], v = pts[i + 1], m = mu(u), h = v - u;
      avg += (m > 0.0) ? std::exp(-Macc) * (1.0 - std::exp(-m * h)) / m
                       : std::exp(-Macc) * h;
      Macc += m * h;
    }
    d.boundary_factor = avg / grid.da;
  }

  d.pi_mass_mid = 0.0;
  for (double v : d.pi_mid) d.pi_mass_mid += v;
  d.pi_mass_mid *= grid.da;
  return d;
}

}  // namespace strainlab
