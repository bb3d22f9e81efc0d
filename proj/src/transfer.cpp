#include "difflab/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "difflab/diffraction.hpp"
#include "difflab/error.hpp"
#include "difflab/parallel.hpp"

namespace difflab {

namespace {

double parse_number(const std::string& s, const std::string& context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw Error(ErrorKind::InvalidConfig, "bad number '" + s + "' in " + context);
  return v;
}

}  // namespace

BoundedAtomicMeasure::BoundedAtomicMeasure(std::vector<std::pair<double, complex>> atoms) {
  std::sort(atoms.begin(), atoms.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  for (const auto& [x, w] : atoms) {
    if (!std::isfinite(x)) throw Error(ErrorKind::InvalidArgument, "sigma atom position must be finite");
    if (!atoms_.empty() && x - atoms_.back().first <= kMergeTolerance) {
      atoms_.back().second += w;
    } else {
      atoms_.push_back({x, w});
    }
  }
  std::erase_if(atoms_, [](const auto& a) { return a.second == complex{0.0}; });
  for (const auto& a : atoms_) total_variation_ += std::abs(a.second);
}

BoundedAtomicMeasure BoundedAtomicMeasure::parse(const std::string& text) {
  std::vector<std::pair<double, complex>> atoms;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw Error(ErrorKind::InvalidConfig, "sigma atom '" + item + "' is not position:weight");
    const double x = parse_number(item.substr(0, colon), "sigma");
    std::string w = item.substr(colon + 1);
    complex weight;
    if (const auto slash = w.find('/'); slash != std::string::npos) {
      weight = {parse_number(w.substr(0, slash), "sigma"), parse_number(w.substr(slash + 1), "sigma")};
    } else {
      weight = parse_number(w, "sigma");
    }
    atoms.push_back({x, weight});
  }
  if (atoms.empty()) throw Error(ErrorKind::InvalidConfig, "sigma has no atoms");
  return BoundedAtomicMeasure(std::move(atoms));
}

std::string BoundedAtomicMeasure::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (i) os << ',';
    os << atoms_[i].first << ':' << atoms_[i].second.real();
    if (atoms_[i].second.imag() != 0.0) os << '/' << atoms_[i].second.imag();
  }
  return os.str();
}

double BoundedAtomicMeasure::min_position() const {
  return atoms_.empty() ? 0.0 : atoms_.front().first;
}

double BoundedAtomicMeasure::max_position() const {
  return atoms_.empty() ? 0.0 : atoms_.back().first;
}

Comb apply_sigma(const Comb& comb, const BoundedAtomicMeasure& sigma) {
  const Interval region{comb.region.lo + sigma.max_position(), comb.region.hi + sigma.min_position()};
  std::vector<std::pair<double, complex>> atoms;
  atoms.reserve(comb.size() * sigma.atoms().size());
  for (std::size_t i = 0; i < comb.size(); ++i)
    for (const auto& [x, w] : sigma.atoms()) {
      const double y = comb.positions[i] + x;
      if (y >= region.lo - kMergeTolerance && y < region.hi + kMergeTolerance)
        atoms.push_back({y, comb.weights[i] * w});
    }
  return merge_atoms(std::move(atoms), region);
}

complex sigma_fourier(const BoundedAtomicMeasure& sigma, double omega) {
  complex s = 0.0;
  for (const auto& [x, w] : sigma.atoms()) {
    const long double v = static_cast<long double>(omega) * x;
    const double f = static_cast<double>(v - std::floor(v));
    s += w * std::polar(1.0, -2.0 * std::numbers::pi * f);
  }
  return s;
}

BoundedAtomicMeasure convolve(const BoundedAtomicMeasure& sigma, const BoundedAtomicMeasure& rho) {
  std::vector<std::pair<double, complex>> atoms;
  for (const auto& [x, w] : sigma.atoms())
    for (const auto& [y, v] : rho.atoms()) atoms.push_back({x + y, w * v});
  return BoundedAtomicMeasure(std::move(atoms));
}

SigmaReport verify_sigma_diffraction(const Comb& comb, const BoundedAtomicMeasure& sigma,
                                     const VanHoveSequence& seq, std::size_t n,
                                     const std::vector<double>& atom_frequencies,
                                     const std::vector<double>& density_frequencies,
                                     const SigmaOptions& options) {
  Comb transformed = apply_sigma(comb, sigma);
  const Interval common = intersect(comb.region, transformed.region);
  const Comb base = restrict(comb, common);
  transformed = restrict(transformed, common);

  SigmaReport report;
  report.n_index = n;
  report.blocks = van_hove_blocks(seq, n, common).size();

  std::vector<AtomEstimate> base_atoms(atom_frequencies.size());
  std::vector<AtomEstimate> trans_atoms(atom_frequencies.size());
  std::vector<SigmaRow> atom_rows(atom_frequencies.size());
  parallel_for(atom_frequencies.size(), [&](std::size_t k) {
    const double w = atom_frequencies[k];
    SigmaRow row;
    row.omega = w;
    row.atom = true;
    row.base = bragg_intensity_averaged(base, w, seq, n);
    row.transformed = bragg_intensity_averaged(transformed, w, seq, n);
    row.factor = std::norm(sigma_fourier(sigma, w));
    base_atoms[k] = {w, row.base, AtomKind::Atom, {}, true};
    trans_atoms[k] = {w, row.transformed, AtomKind::Atom, {}, true};
    atom_rows[k] = row;
  });

  std::vector<SigmaRow> density_rows(density_frequencies.size());
  parallel_for(density_frequencies.size(), [&](std::size_t k) {
    const double w = density_frequencies[k];
    SigmaRow row;
    row.omega = w;
    row.base = periodogram_density(base, w, seq, n, base_atoms);
    row.transformed = periodogram_density(transformed, w, seq, n, trans_atoms);
    row.factor = std::norm(sigma_fourier(sigma, w));
    density_rows[k] = row;
  });

  report.rows = std::move(atom_rows);
  report.rows.insert(report.rows.end(), density_rows.begin(), density_rows.end());
  for (auto& row : report.rows) {
    const double predicted = row.factor * row.base;
    row.absolute_gap = std::fabs(row.transformed - predicted);
    row.excluded = row.factor < options.conditioning_floor;
    if (row.excluded) {
      report.max_absolute_gap_excluded = std::max(report.max_absolute_gap_excluded, row.absolute_gap);
      continue;
    }
    if (row.atom && std::fabs(predicted) < options.atom_floor && row.transformed < options.atom_floor)
      continue;
    row.relative_gap = row.absolute_gap / std::max(std::fabs(predicted), 1e-300);
    report.max_relative_gap = std::max(report.max_relative_gap, row.relative_gap);
  }
  return report;
}

}  // namespace difflab
