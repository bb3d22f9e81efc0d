#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "difflab/autocorr.hpp"
#include "difflab/comb.hpp"
#include "difflab/diffraction.hpp"
#include "difflab/ergodic.hpp"
#include "difflab/error.hpp"
#include "difflab/exact_cps.hpp"
#include "difflab/transfer.hpp"

namespace py = pybind11;
using namespace difflab;

namespace {

Interval region(std::pair<double, double> r) { return {r.first, r.second}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Diffraction of weighted Dirac combs";

  static py::exception<Error> error(m, "DifflabError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<Comb>(m, "Comb")
      .def_readonly("positions", &Comb::positions)
      .def_readonly("weights", &Comb::weights)
      .def_property_readonly("region", [](const Comb& c) { return std::make_pair(c.region.lo, c.region.hi); })
      .def_readonly("bound", &Comb::bound)
      .def_property_readonly("exact", &Comb::exact)
      .def("__len__", &Comb::size);

  py::class_<AtomEstimate>(m, "AtomEstimate")
      .def_readonly("omega", &AtomEstimate::omega)
      .def_readonly("intensity", &AtomEstimate::intensity)
      .def_property_readonly("kind", [](const AtomEstimate& a) { return std::string(to_string(a.kind)); })
      .def_readonly("trace", &AtomEstimate::trace);

  py::class_<DiffractionEstimate>(m, "DiffractionEstimate")
      .def_readonly("atoms", &DiffractionEstimate::atoms)
      .def_property_readonly("density", [](const DiffractionEstimate& e) {
        std::vector<std::pair<double, double>> out;
        for (const auto& s : e.density_samples) out.push_back({s.omega, s.density});
        return out;
      })
      .def_readonly("warnings", &DiffractionEstimate::warnings);

  m.def("fibonacci_points", [](std::pair<double, double> r) {
    return model_set(CutProjectScheme::fibonacci(), Window::fibonacci(), region(r)).points;
  }, py::arg("region"), "Points of the Fibonacci model set in a closed region.");

  m.def("lattice_comb", [](std::pair<double, double> r) {
    return sample({BaseSet::lattice(), WeightLaw::bernoulli(1.0)}, 0, region(r));
  }, py::arg("region"));

  m.def("fibonacci_comb", [](std::pair<double, double> r) {
    return sample({BaseSet::fibonacci(), WeightLaw::bernoulli(1.0)}, 0, region(r));
  }, py::arg("region"));

  m.def("bernoulli_comb", [](double p, std::uint64_t seed, std::pair<double, double> r, bool fibonacci) {
    RandomWeightModel model{fibonacci ? BaseSet::fibonacci() : BaseSet::lattice(), WeightLaw::bernoulli(p)};
    return sample(model, seed, region(r));
  }, py::arg("p"), py::arg("seed"), py::arg("region"), py::arg("fibonacci") = false);

  m.def("bragg_intensity", [](const Comb& c, double omega, double half_length) {
    return bragg_intensity(c, omega, VanHoveSequence({half_length}), 0);
  }, py::arg("comb"), py::arg("omega"), py::arg("half_length"));

  m.def("autocorrelation", [](const Comb& c, double half_length, double max_lag) {
    const auto g = windowed_autocorr(c, Interval::centered(half_length), max_lag);
    std::vector<std::pair<double, std::complex<double>>> out;
    for (std::size_t i = 0; i < g.comb.size(); ++i) out.push_back({g.comb.positions[i], g.comb.weights[i]});
    return out;
  }, py::arg("comb"), py::arg("half_length"), py::arg("max_lag"));

  m.def("diffraction", [](const Comb& c, std::vector<double> half_lengths, std::vector<double> candidates,
                          std::tuple<double, double, double> grid, double taper, bool scan) {
    SpectralOptions o;
    o.taper_scale = taper;
    o.scan = scan;
    const auto [lo, hi, step] = grid;
    return split_pp_cont(c, VanHoveSequence(std::move(half_lengths)), candidates, {lo, hi, step}, o);
  }, py::arg("comb"), py::arg("half_lengths"), py::arg("candidates"), py::arg("grid"),
     py::arg("taper") = 24.0, py::arg("scan") = true);

  m.def("decompose", [](const Comb& c, double mean_p, bool fibonacci) {
    const BaseSet base = fibonacci ? BaseSet::fibonacci() : BaseSet::lattice();
    auto parts = decompose(c, {base, WeightLaw::bernoulli(mean_p)});
    const bool exact = exactly_additive(c, parts);
    return py::make_tuple(parts.pure_point, parts.continuous, exact);
  }, py::arg("comb"), py::arg("p"), py::arg("fibonacci") = false,
     "Split a Bernoulli sample into mean and fluctuation.");

  m.def("sigma_fourier", [](const std::string& sigma, double omega) {
    return sigma_fourier(BoundedAtomicMeasure::parse(sigma), omega);
  }, py::arg("sigma"), py::arg("omega"));

  m.def("apply_sigma", [](const Comb& c, const std::string& sigma) {
    return apply_sigma(c, BoundedAtomicMeasure::parse(sigma));
  }, py::arg("comb"), py::arg("sigma"));

  m.def("support_density", [](const Comb& c, double k_len, double half_length) {
    return support_density(c, k_len, VanHoveSequence({half_length}), 0);
  }, py::arg("comb"), py::arg("k_len"), py::arg("half_length"));

  m.def("torus_class", [](double shift, double half_width) {
    const auto scheme = CutProjectScheme::fibonacci();
    const Window w = Window::fibonacci();
    const auto patch = model_set(scheme, w.shifted(shift), {-half_width, half_width});
    const auto tc = torus_parametrize(patch, scheme, w);
    return py::dict(py::arg("w") = tc.w, py::arg("width") = tc.width, py::arg("t") = tc.t,
                    py::arg("alpha") = tc.alpha, py::arg("beta") = tc.beta);
  }, py::arg("shift"), py::arg("half_width"));
}
