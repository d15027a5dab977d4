#include <catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"

using namespace strainlab;
using Catch::Approx;

TEST_CASE("reduce extracts constant kernels") {
  const auto p = testutil::one_strain(2.0);
  const auto sys = reduce(p);
  CHECK(sys.beta == std::vector<double>{2.0});
  CHECK(sys.mu == std::vector<double>{1.0});
  CHECK(sys.lambda == 1.0);
}

TEST_CASE("reduce rejects windowed kernels") {
  auto p = testutil::one_strain(2.0);
  p.strains[0].beta = AgeKernel::constant(2.0, 0.0, 1.0);
  CHECK_THROWS_AS(reduce(p), NotReducible);
}

TEST_CASE("reduce of an empty model is the pure susceptible equation") {
  ModelParams p;
  p.lambda = 1.0;
  p.mu_s = 1.0;
  p.mu0 = 1.0;
  const auto sys = reduce(p);
  CHECK(sys.n() == 0);
  const auto ref = integrate(sys, 0.0, {}, 1.0, 0.1, 1e-4);
  CHECK(ref.s.back() == Approx(1.0 - std::exp(-1.0)).margin(1e-9));
}

TEST_CASE("reference trajectory reaches the endemic fixed point") {
  ReducedSystem sys{1.0, 1.0, {2.0}, {1.0}};
  const auto ref = integrate(sys, 1.0, {0.1}, 200.0, 1.0, 1e-3);
  CHECK(ref.s.back() == Approx(0.5).margin(1e-6));
  CHECK(ref.mass[0].back() == Approx(0.5).margin(1e-6));
}

TEST_CASE("subcritical reference decays monotonically to the disease-free state") {
  ReducedSystem sys{1.0, 1.0, {0.5}, {1.0}};
  const auto ref = integrate(sys, 1.0, {0.1}, 60.0, 0.5, 1e-3);
  for (std::size_t i = 0; i + 1 < ref.mass[0].size(); ++i)
    CHECK(ref.mass[0][i + 1] <= ref.mass[0][i] + 1e-15);
  CHECK(ref.mass[0].back() <= 1e-6);
  CHECK(ref.s.back() == Approx(1.0).margin(1e-6));
}

TEST_CASE("reference is self-consistent under step halving") {
  ReducedSystem sys{1.0, 1.0, {2.0}, {1.0}};
  const auto a = integrate(sys, 1.0, {0.1}, 50.0, 0.5, 1e-4);
  const auto b = integrate(sys, 1.0, {0.1}, 50.0, 0.5, 5e-5);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.s.size(); ++i) {
    diff = std::max(diff, std::abs(a.s[i] - b.s[i]));
    diff = std::max(diff, std::abs(a.mass[0][i] - b.mass[0][i]));
  }
  CHECK(diff < 1e-10);
}

TEST_CASE("compare returns zero against an identical trajectory") {
  ReducedSystem sys{1.0, 1.0, {2.0}, {1.0}};
  const auto ref = integrate(sys, 1.0, {0.1}, 10.0, 0.5, 1e-3);
  Trajectory pde;
  pde.times = ref.times;
  pde.s = ref.s;
  pde.mass = ref.mass;
  const auto err = compare(pde, ref);
  CHECK(err.s == 0.0);
  CHECK(err.mass[0] == 0.0);
  CHECK(err.max() == 0.0);
}

TEST_CASE("compare rejects mismatched horizons") {
  ReducedSystem sys{1.0, 1.0, {2.0}, {1.0}};
  const auto ref = integrate(sys, 1.0, {0.1}, 10.0, 0.5, 1e-3);
  Trajectory pde;
  pde.times = {0.0, 0.5};
  pde.s = {1.0, 1.0};
  pde.mass = {{0.1, 0.1}};
  CHECK_THROWS_AS(compare(pde, ref), std::invalid_argument);
}
