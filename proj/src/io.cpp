#include "difflab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "difflab/error.hpp"

namespace difflab {

namespace {

double to_double(const std::string& s, const fs::path& path) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw Error(ErrorKind::Io, path.string() + ": bad number '" + s + "'");
  return v;
}

std::int64_t to_int(const std::string& s, const fs::path& path) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw Error(ErrorKind::Io, path.string() + ": bad integer '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(line);
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

Interval parse_region(const std::map<std::string, std::string>& h, const fs::path& path) {
  auto it = h.find("region");
  if (it == h.end()) throw Error(ErrorKind::Io, path.string() + ": header lacks region=");
  const auto parts = split(it->second, ',');
  if (parts.size() != 2) throw Error(ErrorKind::Io, path.string() + ": malformed region");
  return {to_double(parts[0], path), to_double(parts[1], path)};
}

std::string region_field(const Interval& r) {
  return "region=" + format_double(r.lo) + "," + format_double(r.hi);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

void close_checked(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::string short_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x == 0.0 ? 0.0 : x);
  return buf;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);
  return buf;
}

std::map<std::string, std::string> parse_header(const std::string& line) {
  std::map<std::string, std::string> out;
  if (line.empty() || line[0] != '#') return out;
  std::istringstream ss(line.substr(1));
  std::string word;
  bool first = true;
  while (ss >> word) {
    const auto eq = word.find('=');
    if (first && eq == std::string::npos) {
      out["format"] = word;
    } else if (eq != std::string::npos) {
      out[word.substr(0, eq)] = word.substr(eq + 1);
    }
    first = false;
  }
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  close_checked(out, path);
}

// ---------------------------------------------------------------------------

void write_patch(const PointPatch& patch, const fs::path& path) {
  const bool exact = !patch.tags.empty();
  std::string text = "#patch " + region_field(patch.region) + " exact=" + (exact ? "1" : "0") + "\n";
  for (std::size_t i = 0; i < patch.size(); ++i) {
    text += format_double(patch.points[i]);
    if (exact) text += "\t" + std::to_string(patch.tags[i].m) + "\t" + std::to_string(patch.tags[i].n);
    text += "\n";
  }
  write_text(path, text);
}

PointPatch read_patch(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Io, path.string() + ": empty file");
  const auto h = parse_header(line);
  if (h.count("format") == 0 || h.at("format") != "patch")
    throw Error(ErrorKind::Io, path.string() + ": not a patch file");
  PointPatch patch;
  patch.region = parse_region(h, path);
  const bool exact = h.count("exact") && h.at("exact") == "1";
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = split(line, '\t');
    if (f.size() != (exact ? 3u : 1u)) throw Error(ErrorKind::Io, path.string() + ": bad row '" + line + "'");
    patch.points.push_back(to_double(f[0], path));
    if (exact) patch.tags.push_back({to_int(f[1], path), to_int(f[2], path)});
  }
  for (std::size_t i = 1; i < patch.points.size(); ++i)
    if (!(patch.points[i] > patch.points[i - 1]))
      throw Error(ErrorKind::Io, path.string() + ": points must be strictly increasing");
  return patch;
}

void write_comb(const Comb& comb, const fs::path& path, const std::string& extra_header) {
  const bool exact = comb.exact();
  std::string text = "#comb " + region_field(comb.region) + " bound=" + format_double(comb.bound) +
                     " exact=" + (exact ? "1" : "0");
  if (!extra_header.empty()) text += " " + extra_header;
  text += "\n";
  for (std::size_t i = 0; i < comb.size(); ++i) {
    text += format_double(comb.positions[i]) + "\t" + format_double(comb.weights[i].real()) + "\t" +
            format_double(comb.weights[i].imag());
    if (exact) text += "\t" + std::to_string(comb.tags[i].m) + "\t" + std::to_string(comb.tags[i].n);
    text += "\n";
  }
  write_text(path, text);
}

Comb read_comb(const fs::path& path, std::map<std::string, std::string>* header) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Io, path.string() + ": empty file");
  const auto h = parse_header(line);
  if (h.count("format") == 0 || h.at("format") != "comb")
    throw Error(ErrorKind::Io, path.string() + ": not a comb file");
  Comb comb;
  comb.region = parse_region(h, path);
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = split(line, '\t');
    if (f.size() != 3 && f.size() != 5) throw Error(ErrorKind::Io, path.string() + ": bad row '" + line + "'");
    comb.positions.push_back(to_double(f[0], path));
    comb.weights.push_back({to_double(f[1], path), to_double(f[2], path)});
    if (f.size() == 5) comb.tags.push_back({to_int(f[3], path), to_int(f[4], path)});
  }
  if (!comb.tags.empty() && comb.tags.size() != comb.positions.size())
    throw Error(ErrorKind::Io, path.string() + ": tags on some rows only");
  try {
    comb.finalize();
  } catch (const Error& e) {
    throw Error(ErrorKind::Io, path.string() + ": " + e.what());
  }
  if (header) *header = h;
  return comb;
}

void write_autocorr(const Autocorr& gamma, const fs::path& path) {
  std::ostringstream extra;
  extra << "kind=autocorr n=" << gamma.n_index << " vol=" << format_double(gamma.volume)
        << " max_lag=" << format_double(gamma.max_lag) << " blocks=" << gamma.blocks
        << " hash=" << gamma.source_hash;
  write_comb(gamma.comb, path, extra.str());
}

Autocorr read_autocorr(const fs::path& path) {
  std::map<std::string, std::string> h;
  Autocorr g;
  g.comb = read_comb(path, &h);
  auto need = [&](const char* key) -> const std::string& {
    auto it = h.find(key);
    if (it == h.end()) throw Error(ErrorKind::Io, path.string() + ": header lacks " + key + "=");
    return it->second;
  };
  if (need("kind") != "autocorr")
    throw Error(ErrorKind::Io, path.string() + ": not an autocorrelation file");
  g.n_index = static_cast<std::size_t>(to_int(need("n"), path));
  g.volume = to_double(need("vol"), path);
  if (h.count("max_lag")) {
    const auto& s = h.at("max_lag");
    g.max_lag = (s == "inf") ? std::numeric_limits<double>::infinity() : to_double(s, path);
  }
  if (h.count("blocks")) g.blocks = static_cast<std::size_t>(to_int(h.at("blocks"), path));
  if (h.count("hash")) g.source_hash = std::stoull(h.at("hash"));
  return g;
}

// ---------------------------------------------------------------------------

std::string diffraction_csv(const DiffractionEstimate& estimate) {
  std::ostringstream os;
  os << "omega,value,kind";
  for (std::size_t n = 0; n < estimate.volumes.size(); ++n) os << ",trace_" << n;
  os << "\n";
  for (const auto& a : estimate.atoms) {
    os << format_double(a.omega) << ',' << format_double(a.intensity) << ',' << to_string(a.kind);
    for (double v : a.trace) os << ',' << format_double(v);
    os << "\n";
  }
  for (const auto& s : estimate.density_samples) {
    os << format_double(s.omega) << ',' << format_double(s.density) << ",DENSITY";
    for (std::size_t n = 0; n < estimate.volumes.size(); ++n) os << ',';
    os << "\n";
  }
  return os.str();
}

void write_diffraction_csv(const DiffractionEstimate& estimate, const fs::path& path) {
  write_text(path, diffraction_csv(estimate));
}

std::pair<fs::path, fs::path> emit_plot_data(const DiffractionEstimate& estimate,
                                             const fs::path& stem) {
  if (estimate.empty()) throw Error(ErrorKind::InvalidArgument, "cannot plot an empty estimate");
  fs::path atoms = stem;
  atoms += "_atoms.dat";
  fs::path density = stem;
  density += "_density.dat";
  std::string a;
  for (const auto& x : estimate.atoms)
    if (x.kind == AtomKind::Atom) a += short_double(x.omega) + " " + short_double(x.intensity) + "\n";
  std::string d;
  for (const auto& s : estimate.density_samples)
    d += short_double(s.omega) + " " + short_double(s.density) + "\n";
  write_text(atoms, a);
  write_text(density, d);
  return {atoms, density};
}

void write_decomposition_csv(const std::vector<DecompositionReport>& reports, const fs::path& path) {
  std::ostringstream os;
  os << "seed,sample_points,n_indices,volumes,atoms_compared,densities_compared,atom_gap,density_gap,additivity_gap,pp_purity,"
        "cont_purity,bitwise_additive,support_violations_p,support_violations_c,positivity\n";
  for (const auto& r : reports) {
    os << r.seed << ',' << r.sample_points << ',' << r.volumes.size() << ',';
    for (std::size_t i = 0; i < r.volumes.size(); ++i) os << (i ? ";" : "") << format_double(r.volumes[i]);
    os << ',' << r.atoms_compared << ',' << r.densities_compared << ',' << format_double(r.atom_additivity_gap) << ',' << format_double(r.density_additivity_gap)
       << ',' << format_double(r.additivity_gap) << ',' << format_double(r.pp_purity) << ','
       << format_double(r.cont_purity) << ',' << (r.bitwise_additive ? 1 : 0) << ','
       << r.support_violations_p << ',' << r.support_violations_c << ','
       << (r.positivity_inherited ? 1 : 0) << "\n";
  }
  write_text(path, os.str());
}

std::string decomposition_summary(const std::vector<DecompositionReport>& reports,
                                  const SeedConsistency& consistency) {
  std::ostringstream os;
  os.precision(6);
  for (const auto& r : reports) {
    os << "seed " << r.seed << ": " << r.sample_points << " points, " << r.volumes.size()
       << " Van Hove indices\n";
    os << "  bit-exact additivity: " << (r.bitwise_additive ? "yes" : "NO") << "\n";
    os << "  support violations: p=" << r.support_violations_p << " c=" << r.support_violations_c
       << "\n";
    os << "  additivity gap: atoms " << r.atom_additivity_gap << " (" << r.atoms_compared << " compared)" << ", densities "
       << r.density_additivity_gap << " (" << r.densities_compared << " compared)\n";
    os << "  largest atom left in continuous part: " << r.pp_purity << "\n";
    os << "  density mass in pure point part: " << r.cont_purity << "\n";
    std::size_t unresolved = 0;
    for (const auto* e : {&r.gamma_hat, &r.gamma_hat_p, &r.gamma_hat_c})
      for (const auto& a : e->atoms) unresolved += a.kind == AtomKind::Unresolved;
    if (unresolved) os << "  unresolved atom candidates: " << unresolved << "\n";
  }
  if (reports.size() > 1)
    os << "seed consistency: " << (consistency.consistent ? "yes" : "NO") << " (" << consistency.detail
       << ")\n";
  return os.str();
}

void write_sigma_csv(const SigmaReport& report, const fs::path& path) {
  std::ostringstream os;
  os << "omega,kind,base,transformed,factor,relative_gap,absolute_gap,excluded\n";
  for (const auto& r : report.rows) {
    os << format_double(r.omega) << ',' << (r.atom ? "ATOM" : "DENSITY") << ','
       << format_double(r.base) << ',' << format_double(r.transformed) << ','
       << format_double(r.factor) << ',' << format_double(r.relative_gap) << ','
       << format_double(r.absolute_gap) << ',' << (r.excluded ? 1 : 0) << "\n";
  }
  write_text(path, os.str());
}

}  // namespace difflab
