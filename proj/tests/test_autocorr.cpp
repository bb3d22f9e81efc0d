#include <cmath>

#include "doctest.h"
#include "difflab/autocorr.hpp"
#include "difflab/ergodic.hpp"
#include "difflab/error.hpp"

using namespace difflab;

namespace {

Comb integers(double lo, double hi) {
  return Comb::from_patch(model_set(CutProjectScheme::lattice(), Window(-0.5, 0.5), {lo, hi}));
}

Autocorr hand_built(std::vector<std::pair<double, complex>> atoms) {
  Autocorr g;
  g.comb = merge_atoms(std::move(atoms), {-10, 10});
  g.volume = 1e6;
  return g;
}

}  // namespace

TEST_CASE("Van Hove sequence") {
  const auto seq = VanHoveSequence::linear(50, {1, 10});
  CHECK(seq.volume(0) == 100.0);
  CHECK(van_hove_defect(seq, 0, 1.0) == doctest::Approx(0.02));
  CHECK(van_hove_defect(seq, 1, 1.0) == doctest::Approx(0.002));
  CHECK(van_hove_defect(seq, 1, 1.0) < van_hove_defect(seq, 0, 1.0));
  CHECK_THROWS_AS(VanHoveSequence({10, 5}), Error);

  const auto blocks = van_hove_blocks(VanHoveSequence({10}), 0, {-50, 50});
  CHECK(blocks.size() == 5);
  for (std::size_t i = 1; i < blocks.size(); ++i) CHECK(blocks[i].lo == blocks[i - 1].hi);
}

TEST_CASE("truncated autocorrelation of the integers") {
  const auto z = integers(-10, 10);
  const auto g = truncated_autocorr(z, VanHoveSequence({2.5}), 0);
  REQUIRE(g.comb.size() == 9);
  for (std::size_t i = 0; i < g.comb.size(); ++i) {
    CHECK(g.comb.positions[i] == static_cast<double>(i) - 4.0);
    CHECK(g.comb.weights[i].real() == doctest::Approx((5.0 - std::fabs(g.comb.positions[i])) / 5.0));
  }
  CHECK(hermitian_defect(g.comb) == 0.0);
}

TEST_CASE("one atom and empty comb") {
  Comb c;
  c.positions = {0.0};
  c.weights = {complex(0, 3)};
  c.region = {-5, 5};
  c.finalize();
  const auto g = truncated_autocorr(c, VanHoveSequence({2.0}), 0);
  REQUIRE(g.comb.size() == 1);
  CHECK(g.comb.weights[0].real() == doctest::Approx(9.0 / 4.0));

  Comb empty;
  empty.region = {-5, 5};
  CHECK(truncated_autocorr(empty, VanHoveSequence({2.0}), 0).comb.empty());
}

TEST_CASE("windowed autocorrelation agrees with the full convolution") {
  const auto b = sample({BaseSet::fibonacci(), WeightLaw::uniform_complex(1.0)}, 9, {-60, 60});
  const VanHoveSequence seq({40});
  const auto full = truncated_autocorr(b, seq, 0);
  const auto win = windowed_autocorr(b, seq.window(0), 6.0);
  for (std::size_t i = 0; i < full.comb.size(); ++i) {
    const double z = full.comb.positions[i];
    if (std::fabs(z) > 6.0) continue;
    const auto it = std::lower_bound(win.comb.positions.begin(), win.comb.positions.end(), z - 1e-9);
    REQUIRE(it != win.comb.positions.end());
    CHECK(*it == doctest::Approx(z));
    CHECK(std::abs(win.comb.weights[it - win.comb.positions.begin()] - full.comb.weights[i]) < 1e-12);
  }
}

TEST_CASE("convergence table on the integers") {
  const auto z = integers(-40, 40);
  std::vector<TestFunction> phis;
  for (int k = -2; k <= 2; ++k) phis.push_back(TestFunction::tent(k, 0.4));
  const auto table = autocorr_convergence(z, VanHoveSequence({4, 8, 16, 32}), phis);
  REQUIRE(table.rows.size() == 4);
  for (const auto& row : table.rows)
    for (int k = -2; k <= 2; ++k)
      CHECK(row.values[k + 2].real() ==
            doctest::Approx((2.0 * row.half_length - std::abs(k)) / (2.0 * row.half_length)));
  CHECK(table.residuals_decreasing);

  Comb zero = z;
  for (auto& w : zero.weights) w = 0.0;
  for (const auto& row : autocorr_convergence(zero, VanHoveSequence({4, 8}), phis).rows)
    for (const auto& v : row.values) CHECK(v == complex(0.0));
}

TEST_CASE("Bernoulli autocorrelation at zero") {
  // Law of large numbers: gamma({0}) = mean |w|^2 = p.
  const auto b = sample({BaseSet::lattice(), WeightLaw::bernoulli(0.5)}, 4, {-20000, 20000});
  const auto g = windowed_autocorr(b, Interval::centered(20000), 0.5);
  const double at0 = integrate(g, TestFunction::tent(0, 0.4)).real();
  CHECK(std::fabs(at0 - 0.5) < 3.0 * 0.5 / std::sqrt(40000.0));
}

TEST_CASE("positive definiteness") {
  const auto b = sample({BaseSet::lattice(), WeightLaw::bernoulli(0.3)}, 2, {-50, 50});
  const auto g = truncated_autocorr(b, VanHoveSequence({50}), 0);
  CHECK(check_positive_definite(g, standard_test_battery()).pass);

  const auto anti = check_positive_definite(hand_built({{1.0, 1.0}, {-1.0, -1.0}}), standard_test_battery());
  CHECK_FALSE(anti.pass);
  CHECK_FALSE(anti.hermitian);

  // delta_0 - 0.6 (delta_1 + delta_-1) has Fourier transform 1 - 1.2 cos(2 pi w),
  // negative near w = 0; a wide tent sees it.
  const auto bad = hand_built({{-1.0, -0.6}, {0.0, 1.0}, {1.0, -0.6}});
  const auto phi = TestFunction::tent(0, 3.0);
  // Closed-form tent self-correlation: h (2/3 - z^2/h^2 + |z|^3/(2 h^3)) for |z| <= h.
  const double h = 3.0;
  auto tt = [h](double z) { return h * (2.0 / 3.0 - z * z / (h * h) + std::fabs(z * z * z) / (2 * h * h * h)); };
  const double oracle = tt(0.0) - 1.2 * tt(1.0);
  REQUIRE(oracle < 0.0);
  const auto v = check_positive_definite(bad, {phi});
  CHECK(v.hermitian);
  CHECK_FALSE(v.pass);
  CHECK(v.worst_value <= oracle + 1e-12);
  CHECK_FALSE(v.violation.empty());
  CHECK(check_positive_definite(bad, standard_test_battery()).hermitian);
}

TEST_CASE("block autocorrelation averages translates") {
  const auto z = integers(-100, 100);
  const auto g = block_autocorr(z, VanHoveSequence({10}), 0, 3.0);
  CHECK(g.blocks == 9);  // A + 20 j for |j| <= 4
  for (std::size_t i = 0; i < g.comb.size(); ++i)
    CHECK(g.debiased(i).real() == doctest::Approx(1.0));
}
