#include <cmath>
#include <random>

#include "doctest.h"
#include "difflab/ergodic.hpp"
#include "difflab/error.hpp"

using namespace difflab;

namespace {

Comb integers(double lo, double hi, double spacing = 1.0) {
  auto c = Comb::from_patch(model_set(CutProjectScheme::lattice(), Window(-0.5, 0.5), {lo / spacing, hi / spacing}));
  for (auto& x : c.positions) x *= spacing;
  c.region = {lo, hi};
  c.tags.clear();
  c.finalize();
  return c;
}

}  // namespace

TEST_CASE("weight laws against Monte Carlo") {
  std::mt19937_64 rng(7);
  for (const auto& law : {WeightLaw::bernoulli(0.3), WeightLaw::two_point(-1.0, 2.0, 0.25), WeightLaw::uniform_complex(2.0)}) {
    const auto c = sample({BaseSet::lattice(), law}, rng(), {0, 199999});
    complex m = 0.0;
    for (const auto& w : c.weights) m += w;
    m /= static_cast<double>(c.size());
    double v = 0.0;
    for (const auto& w : c.weights) v += std::norm(w - m);
    v /= static_cast<double>(c.size());
    const double sigma = std::sqrt(law.variance() / static_cast<double>(c.size()));
    CHECK(std::abs(m - law.mean()) < 4.0 * sigma + 1e-12);
    CHECK(v == doctest::Approx(law.variance()).epsilon(0.02));
  }
  CHECK(WeightLaw::uniform_complex(2.0).variance() == doctest::Approx(2.0));  // r^2 / 2
  CHECK(WeightLaw::two_point(-1.0, 2.0, 0.25).mean().real() == doctest::Approx(-0.25));
}

TEST_CASE("sampling") {
  const auto ones = sample({BaseSet::lattice(), WeightLaw::bernoulli(1.0)}, 1, {-20, 20});
  CHECK(ones.size() == 41);
  for (const auto& w : ones.weights) CHECK(w == complex(1.0));
  const auto zeros = sample({BaseSet::lattice(), WeightLaw::bernoulli(0.0)}, 1, {-20, 20});
  for (const auto& w : zeros.weights) CHECK(w == complex(0.0));

  const auto half = sample({BaseSet::lattice(), WeightLaw::bernoulli(0.5)}, 42, {0, 99999});
  double mean = 0.0;
  for (const auto& w : half.weights) mean += w.real();
  mean /= static_cast<double>(half.size());
  CHECK(mean >= 0.495);
  CHECK(mean <= 0.505);

  // Weights depend only on (seed, tag): restriction commutes with sampling.
  const RandomWeightModel fib{BaseSet::fibonacci(), WeightLaw::uniform_complex(1.0)};
  const auto big = sample(fib, 5, {-100, 100});
  const auto small = sample(fib, 5, {-10, 10});
  const auto cut = restrict(big, {-10, 10.000001});
  REQUIRE(cut.size() == small.size());
  for (std::size_t i = 0; i < small.size(); ++i) CHECK(cut.weights[i] == small.weights[i]);
  CHECK(point_hash(5, {1, 2}) != point_hash(6, {1, 2}));
}

TEST_CASE("decomposition of deterministic and Bernoulli combs") {
  const RandomWeightModel det{BaseSet::lattice(), WeightLaw::bernoulli(1.0)};
  const auto c = sample(det, 3, {-50, 50});
  const auto d = decompose(c, det);
  CHECK(identical(d.pure_point, c));
  for (const auto& w : d.continuous.weights) CHECK(w == complex(0.0));
  CHECK(exactly_additive(c, d));

  const RandomWeightModel half{BaseSet::lattice(), WeightLaw::bernoulli(0.5)};
  const auto b = sample(half, 3, {-50, 50});
  const auto db = decompose(b, half);
  CHECK(exactly_additive(b, db));
  for (const auto& w : db.pure_point.weights) CHECK(w == complex(0.5));
  for (const auto& w : db.continuous.weights) CHECK(std::fabs(w.real()) == 0.5);

  // Oracle: empirical per-point average over 10^4 independent samples.
  std::vector<double> avg(11, 0.0);
  const int samples = 10000;
  for (int s = 0; s < samples; ++s) {
    const auto x = sample(half, 1000 + s, {-5, 5});
    for (std::size_t i = 0; i < x.size(); ++i) avg[i] += x.weights[i].real() / samples;
  }
  const double sigma = 0.5 / std::sqrt(static_cast<double>(samples));
  for (double a : avg) CHECK(std::fabs(a - db.pure_point.weights[0].real()) < 3.0 * sigma + 1e-3);
}

TEST_CASE("Fibonacci two-point decomposition keeps the model set support") {
  const RandomWeightModel m{BaseSet::fibonacci(), WeightLaw::two_point(0.0, 1.0, 0.5)};
  const auto c = sample(m, 8, {-300, 300});
  const auto d = decompose(c, m);
  const auto patch = model_set(CutProjectScheme::fibonacci(), Window::fibonacci(), {-300, 300});
  REQUIRE(d.pure_point.tags == patch.tags);
  REQUIRE(d.continuous.tags == patch.tags);
  for (const auto& w : d.pure_point.weights) CHECK(w == complex(0.5));
  CHECK(support_violations(d.pure_point, m.base) == 0);
  CHECK(support_violations(d.continuous, m.base) == 0);
  CHECK(exactly_additive(c, d));

  auto foreign = c;
  foreign.tags[3] = CpsPoint{1, 0};  // 1 has internal coordinate 1, outside W
  foreign.weights[3] = 1.0;
  CHECK(support_violations(foreign, m.base) == 1);
  CHECK_THROWS_AS(decompose(foreign, m), Error);
}

TEST_CASE("decomposition report of a deterministic lattice") {
  const RandomWeightModel det{BaseSet::lattice(), WeightLaw::bernoulli(1.0)};
  SpectralOptions opt;
  opt.scan = false;
  const auto r = verify_decomposition(det, 1, {-4000, 4000}, VanHoveSequence({500, 1000, 2000}),
                                      {0, 1, 2}, {0.05, 2.0, 0.05}, opt);
  CHECK(r.bitwise_additive);
  CHECK(r.pp_purity < 1e-6);
  CHECK(r.gamma_hat_c.max_abs_density() < 1e-12);
  REQUIRE(r.gamma_hat_p.atom_near(1.0));
  CHECK(r.gamma_hat_p.atom_near(1.0)->intensity == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.additivity_gap < 1e-3);
}

TEST_CASE("seed consistency") {
  const RandomWeightModel half{BaseSet::lattice(), WeightLaw::bernoulli(0.5)};
  SpectralOptions opt;
  opt.scan = false;
  const auto reports = verify_decomposition(half, {1, 2, 3}, {-40000, 40000},
                                            VanHoveSequence({1000, 2000, 4000}), {0, 1}, {0.1, 1.0, 0.1}, opt);
  REQUIRE(reports.size() == 3);
  const auto c = check_seed_consistency(reports);
  CHECK(c.consistent);
  CHECK(c.atom_spread < 0.05);
}

TEST_CASE("Birkhoff averages on the integers") {
  const auto z = integers(-110, 110);
  const Interval a{-100, 100};
  CHECK(birkhoff_average(z, Observable::constant(), a).real() == doctest::Approx(1.0));
  // Area of a tent of half-width 1/2 per unit period.
  CHECK(birkhoff_average(z, Observable::tent(0.5), a).real() == doctest::Approx(0.5).epsilon(1e-3));
  // Covered fraction: window width 1/2 per unit period.
  CHECK(birkhoff_average(z, Observable::support_indicator(0.25), a).real() == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("support density by interval union") {
  const VanHoveSequence seq({1000});
  CHECK(support_density(integers(-1001, 1001, 2.0), 1.0, seq, 0) == 0.5);
  CHECK(support_density(integers(-1001, 1001), 1.0, seq, 0) == 1.0);
  CHECK(support_density(integers(-1001, 1001), 0.01, seq, 0) == doctest::Approx(0.01).epsilon(1e-6));

  const RandomWeightModel half{BaseSet::lattice(), WeightLaw::bernoulli(0.5)};
  const auto b = sample(half, 4, {-1001, 1001});
  CHECK(support_density(decompose(b, half).pure_point, 1.0, seq, 0) == 1.0);
  CHECK(support_density(b, 1.0, seq, 0) < 1.0);
}
