#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "difflab/error.hpp"
#include "difflab/exact_cps.hpp"

using namespace difflab;

namespace {

const double kTau = (1.0 + std::sqrt(5.0)) / 2.0;

// Brute-force model set: every (m, n) in a box, window membership in long double.
std::vector<double> brute_model_set(double lo, double hi, double wlo, double whi, int box) {
  const long double tau = (1.0L + std::sqrt(5.0L)) / 2.0L;
  std::vector<double> pts;
  for (int m = -box; m <= box; ++m)
    for (int n = -box; n <= box; ++n) {
      const long double x = m + n * tau;
      const long double s = m + n * (1.0L - tau);
      if (x >= lo && x <= hi && s >= wlo && s < whi) pts.push_back(static_cast<double>(x));
    }
  std::sort(pts.begin(), pts.end());
  return pts;
}

}  // namespace

TEST_CASE("golden field signs are exact") {
  const auto f = QuadraticField::golden();
  CHECK(f.sign_physical(0, 0) == 0);
  CHECK(f.sign_physical(-1, 1) == 1);   // tau - 1 > 0
  CHECK(f.sign_internal(-1, 1) == -1);  // tau' - 1 < 0
  // Consecutive Fibonacci numbers: F_{k+1} - F_k tau is tiny but nonzero.
  CHECK(f.sign_physical(832040, -514229) != 0);
  CHECK(f.sign_physical(832040, -514229) == (832040.0L - 514229.0L * kTau > 0 ? 1 : -1));
}

TEST_CASE("star map is additive") {
  const auto s = CutProjectScheme::fibonacci();
  const CpsPoint p{3, -7}, q{-11, 5};
  CHECK(s.internal(p + q) == doctest::Approx(s.internal(p) + s.internal(q)).epsilon(1e-14));
  CHECK(s.physical(p + q) == doctest::Approx(s.physical(p) + s.physical(q)).epsilon(1e-14));
  CHECK(s.covolume() == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("lattice scheme gives the integers") {
  const auto patch = model_set(CutProjectScheme::lattice(), Window(-0.5, 0.5), {0.0, 4.0});
  CHECK(patch.points == std::vector<double>{0, 1, 2, 3, 4});
}

TEST_CASE("Fibonacci model set on [0,5] matches brute force") {
  const auto patch = model_set(CutProjectScheme::fibonacci(), Window::fibonacci(), {0.0, 5.0});
  const auto expected = brute_model_set(0.0, 5.0, -1.0, kTau - 1.0, 20);
  REQUIRE(patch.points.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    CHECK(patch.points[i] == doctest::Approx(expected[i]).epsilon(1e-14));
  CHECK(patch.exact());
  CHECK(patch.warnings.empty());
}

TEST_CASE("Fibonacci density from direct count") {
  const auto patch = model_set(CutProjectScheme::fibonacci(), Window::fibonacci(), {0.0, 1e4});
  const double oracle = 1.0 / std::sqrt(5.0) * kTau;  // |W| / covolume
  CHECK(std::fabs(static_cast<double>(patch.size()) / 1e4 - oracle) < 1e-3);
}

TEST_CASE("invalid window") {
  CHECK_THROWS_AS(Window(1.0, 1.0), Error);
  try {
    Window(2.0, 1.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidWindow);
  }
}

TEST_CASE("uniform discreteness") {
  const auto z = model_set(CutProjectScheme::lattice(), Window(-0.5, 0.5), {0.0, 100.0});
  CHECK(check_uniformly_discrete(z, 0.5).pass);

  PointPatch p;
  p.points = {0.0, 0.3, 1.0};
  p.region = {0.0, 1.0};
  const auto v = check_uniformly_discrete(p, 0.5);
  CHECK_FALSE(v.pass);
  REQUIRE(v.counterexample);
  CHECK(v.counterexample->first == 0.0);
  CHECK(v.counterexample->second == 0.3);

  const auto fib = model_set(CutProjectScheme::fibonacci(), Window::fibonacci(), {0.0, 100.0});
  double min_gap = 1e9;
  for (std::size_t i = 1; i < fib.size(); ++i) min_gap = std::min(min_gap, fib.points[i] - fib.points[i - 1]);
  CHECK(min_gap == doctest::Approx(1.0));
  const auto fv = check_uniformly_discrete(fib, 0.9);
  CHECK(fv.pass);
  CHECK(fv.min_gap == doctest::Approx(min_gap));
}

TEST_CASE("difference patches") {
  const auto z = model_set(CutProjectScheme::lattice(), Window(-0.5, 0.5), {-10.0, 10.0});
  CHECK(difference_patch(z, 3.0).points == std::vector<double>{-3, -2, -1, 0, 1, 2, 3});

  PointPatch two;
  two.points = {0.0, kTau};
  two.region = {0.0, kTau};
  const auto d = difference_patch(two, 5.0);
  REQUIRE(d.size() == 3);
  CHECK(d.points[0] == doctest::Approx(-kTau));
  CHECK(d.points[1] == 0.0);
  CHECK(d.points[2] == doctest::Approx(kTau));

  const auto scheme = CutProjectScheme::fibonacci();
  const auto fib = model_set(scheme, Window::fibonacci(), {0.0, 200.0});
  const auto fd = difference_patch(fib, 10.0);
  REQUIRE(fd.tags.size() == fd.size());
  std::set<double> brute;
  for (double a : fib.points)
    for (double b : fib.points)
      if (std::fabs(a - b) <= 10.0) brute.insert(std::round((a - b) * 1e8) / 1e8);
  CHECK(brute.size() == fd.size());
  for (std::size_t i = 0; i < fd.size(); ++i) {
    CHECK(scheme.physical(fd.tags[i]) == doctest::Approx(fd.points[i]).epsilon(1e-13));
    CHECK(std::abs(fd.tags[i].m) <= 20);
    CHECK(std::abs(fd.tags[i].n) <= 20);
  }
}

TEST_CASE("Meyer checks") {
  const auto z = model_set(CutProjectScheme::lattice(), Window(-0.5, 0.5), {-100.0, 100.0});
  const auto v = check_meyer(z, 0.5, 1.5, 5.0);
  CHECK(v.status == MeyerVerdict::Status::Consistent);
  CHECK(v.r_prime == doctest::Approx(1.0));
  CHECK(v.finite_patch_evidence);

  const auto fib = model_set(CutProjectScheme::fibonacci(), Window::fibonacci(), {-500.0, 500.0});
  CHECK(check_meyer(fib, 0.9, kTau + 0.1, 10.0).status == MeyerVerdict::Status::Consistent);

  PointPatch s;
  for (int n = -12; n <= 12; ++n) s.points.push_back(n + std::pow(4.0, -std::abs(n)));
  std::sort(s.points.begin(), s.points.end());
  s.region = {s.points.front(), s.points.back()};
  const auto bad = check_meyer(s, 0.2, 2.0, 3.0);
  CHECK(bad.status == MeyerVerdict::Status::Failure);
  CHECK(bad.r_prime < 1e-4);
}

TEST_CASE("torus parametrization") {
  const auto scheme = CutProjectScheme::fibonacci();
  const auto w = Window::fibonacci();
  const auto patch = model_set(scheme, w, {-200.0, 200.0});
  const auto c = torus_parametrize(patch, scheme, w);
  CHECK(c.t == 0.0);
  CHECK(c.w_lo <= 0.0);
  CHECK(c.w_hi >= 0.0);
  CHECK(c.width < 1e-2);

  const auto moved = translate(patch, scheme, CpsPoint{1, 1});
  const auto cm = torus_parametrize(moved, scheme, w);
  // Lambda + g has class [w, t + g], which the lift identifies with [w + g*, t].
  const CpsPoint g{1, 1};
  const auto a = torus_coordinates(scheme, c.w, c.t + scheme.physical(g));
  const auto b = torus_coordinates(scheme, cm.w, cm.t);
  CHECK(torus_distance(a, b) < 1e-2);
  CHECK(cm.w == doctest::Approx(c.w + scheme.internal(g)).epsilon(1e-2));

  const auto shifted_w = w.shifted(scheme, InternalValue{1, 0, 10});
  const auto shifted = model_set(scheme, shifted_w, {-200.0, 200.0});
  const auto cs = torus_parametrize(shifted, scheme, w);
  CHECK(cs.width < 1e-2);
  CHECK(std::fabs(cs.w - 0.1) <= cs.width / 2 + 1e-12);

  // Independent scan over a w grid: admissible offsets keep every patch
  // point's internal coordinate inside W + w.
  double lo = 1e9, hi = -1e9;
  for (int k = -2000; k <= 2000; ++k) {
    const double cand = 0.1 + k * 1e-5;
    bool ok = true;
    for (const auto& tag : shifted.tags) {
      const double s = scheme.internal(tag);
      if (!(s >= w.lo() + cand && s < w.hi() + cand)) { ok = false; break; }
    }
    if (ok) { lo = std::min(lo, cand); hi = std::max(hi, cand); }
  }
  CHECK(lo <= cs.w);
  CHECK(hi >= cs.w);
  CHECK(std::fabs((hi - lo) - cs.width) < 3e-5);
}

TEST_CASE("dual frequencies of the lattice are integers") {
  CHECK(dual_frequencies(CutProjectScheme::lattice(), {0.0, 3.0}, 8) == std::vector<double>{0, 1, 2, 3});
  const auto f = dual_frequencies(CutProjectScheme::fibonacci(), {0.0, 3.0}, 3);
  CHECK(std::is_sorted(f.begin(), f.end()));
  CHECK(std::find(f.begin(), f.end(), 0.0) != f.end());
}
