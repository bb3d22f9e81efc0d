#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "difflab/error.hpp"
#include "difflab/io.hpp"

using namespace difflab;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "difflab_test_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("doubles round trip") {
  for (double x : {0.1, 1.0 / 3.0, -1e-300, 6.02214076e23}) CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("patch round trip") {
  const auto p = model_set(CutProjectScheme::fibonacci(), Window::fibonacci(), {-50, 50});
  write_patch(p, scratch("patch.txt"));
  const auto q = read_patch(scratch("patch.txt"));
  CHECK(q.points == p.points);
  CHECK(q.tags == p.tags);
  CHECK(q.region == p.region);
  const auto h = parse_header(read_text(scratch("patch.txt")).substr(0, read_text(scratch("patch.txt")).find('\n')));
  CHECK(h.at("format") == "patch");
  CHECK(h.at("exact") == "1");
}

TEST_CASE("comb and autocorrelation round trip") {
  const auto c = sample({BaseSet::fibonacci(), WeightLaw::uniform_complex(1.0)}, 3, {-40, 40});
  write_comb(c, scratch("comb.txt"));
  const auto d = read_comb(scratch("comb.txt"));
  CHECK(identical(c, d));
  CHECK(d.tags == c.tags);
  CHECK(d.bound == c.bound);

  const auto g = windowed_autocorr(c, Interval::centered(30), 5.0);
  write_autocorr(g, scratch("gamma.txt"));
  const auto h = read_autocorr(scratch("gamma.txt"));
  CHECK(identical(g.comb, h.comb));
  CHECK(h.volume == g.volume);
  CHECK(h.max_lag == g.max_lag);
  CHECK(h.source_hash == g.source_hash);

  CHECK_THROWS_AS(read_comb(scratch("missing.txt")), Error);
  try {
    read_comb(scratch("missing.txt"));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}

TEST_CASE("plot data") {
  const auto z = Comb::from_patch(model_set(CutProjectScheme::lattice(), Window(-0.5, 0.5), {-300, 300}));
  SpectralOptions opt;
  opt.scan = false;
  const auto est = split_pp_cont(z, VanHoveSequence({50, 100, 200}), {0, 1, 2, 3}, {0, 3, 0.01}, opt);
  const auto [atoms, density] = emit_plot_data(est, scratch("plot"));
  const auto text = read_text(atoms);
  CHECK(text.find("0 1\n") != std::string::npos);
  CHECK(text.find("1 1\n") != std::string::npos);
  CHECK(fs::exists(density));
  CHECK_THROWS_AS(emit_plot_data(DiffractionEstimate{}, scratch("empty")), Error);

  const auto csv = diffraction_csv(est);
  CHECK(csv.rfind("omega,value,kind", 0) == 0);
  CHECK(csv.find(",ATOM,") < csv.find(",DENSITY"));

  const RandomWeightModel half{BaseSet::lattice(), WeightLaw::bernoulli(0.5)};
  const auto b = sample(half, 1, {-20000, 20000});
  const auto eb = split_pp_cont(b, VanHoveSequence({1000, 2000, 4000}), {0, 1, 2, 3}, {0.05, 0.95, 0.05}, opt);
  const auto [ba, bd] = emit_plot_data(eb, scratch("bern"));
  std::istringstream in(read_text(bd));
  double w = 0, v = 0;
  int rows = 0;
  while (in >> w >> v) {
    CHECK(v == doctest::Approx(0.25).epsilon(0.1));
    ++rows;
  }
  CHECK(rows == 19);
}
