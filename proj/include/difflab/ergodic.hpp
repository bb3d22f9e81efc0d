#pragma once

// I.i.d. random weights on a fixed base point set, the pure point /
// continuous splitting of a sample, Birkhoff averages and support densities.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "difflab/autocorr.hpp"
#include "difflab/comb.hpp"
#include "difflab/diffraction.hpp"
#include "difflab/exact_cps.hpp"

namespace difflab {

struct WeightLaw {
  enum class Kind { Bernoulli, TwoPoint, UniformComplex };

  Kind kind = Kind::Bernoulli;
  double p = 0.5;       // probability of the value b (Bernoulli: b = 1, a = 0)
  double a = 0.0;
  double b = 1.0;
  double radius = 1.0;  // uniform on the closed disk |w| <= radius

  static WeightLaw bernoulli(double p);
  static WeightLaw two_point(double a, double b, double p);
  static WeightLaw uniform_complex(double radius);

  complex mean() const;
  double variance() const;  // E|w - mean|^2
  bool nonnegative() const;
  std::string describe() const;
};

/// Lattice spacing * Z, or a model set of a quadratic scheme.
class BaseSet {
 public:
  static BaseSet lattice(double spacing = 1.0);
  static BaseSet model_set(CutProjectScheme scheme, Window window);
  static BaseSet fibonacci() { return model_set(CutProjectScheme::fibonacci(), Window::fibonacci()); }

  bool is_lattice() const noexcept { return !window_.has_value(); }
  double spacing() const noexcept { return spacing_; }
  const CutProjectScheme& scheme() const noexcept { return scheme_; }
  const Window& window() const;
  /// Point density: 1 / spacing, or |W| / covolume.
  double density() const;
  std::string describe() const;

  /// Base points in the closed region, with exact tags.
  PointPatch points(const Interval& region) const;
  /// Whether the tagged atom at `position` belongs to the base set.
  bool contains(CpsPoint tag, double position) const;

 private:
  BaseSet(CutProjectScheme scheme, std::optional<Window> window, double spacing)
      : scheme_(std::move(scheme)), window_(std::move(window)), spacing_(spacing) {}
  CutProjectScheme scheme_;
  std::optional<Window> window_;
  double spacing_ = 1.0;
};

struct RandomWeightModel {
  BaseSet base = BaseSet::lattice();
  WeightLaw law;

  complex mean() const { return law.mean(); }
  double variance() const { return law.variance(); }
};

/// Pseudo-random 64-bit word attached to (seed, tag).
std::uint64_t point_hash(std::uint64_t seed, CpsPoint tag);

/// One weight per base point of the region (zero weights are kept, so the
/// comb lives on the full base set). Weights depend only on (seed, tag).
Comb sample(const RandomWeightModel& model, std::uint64_t seed, const Interval& region);

struct Decomposition {
  Comb pure_point;   // mean * delta_base
  Comb continuous;   // comb - pure_point, atom-wise
};

/// Throws NotInSystem when an atom with nonzero weight is not a base point.
Decomposition decompose(const Comb& comb, const RandomWeightModel& model);

/// fl(p + c) == comb weight for every base atom, and zero off the comb.
bool exactly_additive(const Comb& comb, const Decomposition& parts);

/// Atoms with nonzero weight whose tag is not in the base set.
std::size_t support_violations(const Comb& comb, const BaseSet& base);

struct DecompositionReport {
  std::uint64_t seed = 0;
  std::size_t sample_points = 0;
  std::vector<double> volumes;  // |A_n| per Van Hove index
  DiffractionEstimate gamma_hat;
  DiffractionEstimate gamma_hat_p;
  DiffractionEstimate gamma_hat_c;
  /// Atoms are compared only when the cross term between the two parts,
  /// of relative size sqrt(2 atom_noise / I), is below about 1.5%.
  double atom_noise = 0.0;
  std::size_t atoms_compared = 0;
  std::size_t densities_compared = 0;  // grid samples away from flagged atoms
  double atom_additivity_gap = 0.0;
  double density_additivity_gap = 0.0;
  double additivity_gap = 0.0;  // max of the two
  double pp_purity = 0.0;       // largest atom left in gamma_hat_c
  double cont_purity = 0.0;     // int |density| of gamma_hat_p over the grid
  bool bitwise_additive = false;
  std::size_t support_violations_p = 0;
  std::size_t support_violations_c = 0;
  bool positivity_inherited = true;
};

DecompositionReport verify_decomposition(const RandomWeightModel& model, std::uint64_t seed,
                                         const Interval& region, const VanHoveSequence& seq,
                                         const std::vector<double>& candidates,
                                         const FrequencyGrid& grid,
                                         const SpectralOptions& options = {});

std::vector<DecompositionReport> verify_decomposition(const RandomWeightModel& model,
                                                      const std::vector<std::uint64_t>& seeds,
                                                      const Interval& region,
                                                      const VanHoveSequence& seq,
                                                      const std::vector<double>& candidates,
                                                      const FrequencyGrid& grid,
                                                      const SpectralOptions& options = {});

struct SeedConsistency {
  bool consistent = true;
  double atom_spread = 0.0;     // max relative spread of matched atom intensities
  double density_spread = 0.0;  // max relative spread of mean gamma_hat_c density
  std::string detail;
};

SeedConsistency check_seed_consistency(const std::vector<DecompositionReport>& reports,
                                       double rel_tol = 0.05);

struct Observable {
  enum class Kind { Constant, Tent, SupportIndicator };

  Kind kind = Kind::Constant;
  double half_width = 0.5;  // tent half-width, or the radius u of U = (-u, u)

  static Observable constant() { return {Kind::Constant, 1.0}; }
  static Observable tent(double half_width) { return {Kind::Tent, half_width}; }
  static Observable support_indicator(double u) { return {Kind::SupportIndicator, u}; }

  /// f(comb * delta_t).
  complex evaluate(const Comb& comb, double t) const;
};

/// (1/|A|) int_A f(comb * delta_t) dt by a midpoint rule with step
/// half_width / 64. The comb must cover A reflected and fattened by the
/// observable's reach.
complex birkhoff_average(const Comb& comb, const Observable& f, const Interval& a);
complex birkhoff_average(const RandomWeightModel& model, std::uint64_t seed, const Observable& f,
                         const VanHoveSequence& seq, std::size_t n);

/// |(Supp + [-k/2, k/2]) cap A_n| / |A_n| by interval union over the atoms
/// with nonzero weight.
double support_density(const Comb& comb, double k_len, const VanHoveSequence& seq, std::size_t n);

}  // namespace difflab
