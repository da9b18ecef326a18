#include "pcsft/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "pcsft/errors.hpp"

namespace pcsft {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what, {path});
}

const Json& field(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) bad(path + "." + key, "missing required key");
  return obj.at(key);
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  return j.get<double>();
}

std::vector<double> numbers(const Json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

int dimension(const Json& obj, const std::string& path) {
  const Json& d = field(obj, "dim", path);
  if (!d.is_number_integer() || d.get<long long>() < 1) bad(path + ".dim", "expected a positive integer");
  return static_cast<int>(d.get<long long>());
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw InvalidInput("ensemble csv: bad number '" + s + "'");
  return v;
}

std::string next_line(std::istream& is, const char* what) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput(std::string("ensemble csv: missing ") + what);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

void write_row(std::ostream& os, const CVector& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k) os << ',';
    os << format_double(v(k).real()) << ',' << format_double(v(k).imag());
  }
  os << '\n';
}

CVector read_row(const std::string& line, int dim) {
  const auto cells = split(line, ',');
  if (static_cast<int>(cells.size()) != 2 * dim) throw InvalidInput("ensemble csv: row has wrong number of columns");
  CVector v(dim);
  for (int k = 0; k < dim; ++k) {
    v(k) = Complex(parse_double(cells[static_cast<std::size_t>(2 * k)]),
                   parse_double(cells[static_cast<std::size_t>(2 * k + 1)]));
  }
  return v;
}

void write_header(std::ostream& os, int dim, std::size_t n, std::uint64_t seed, const std::string& digest) {
  os << "dim,n,seed,spec_digest\n" << dim << ',' << n << ',' << seed << ',' << digest << '\n';
}

}  // namespace

void require_known_keys(const Json& obj, const std::vector<std::string>& allowed, const std::string& path) {
  if (!obj.is_object()) bad(path, "expected an object");
  std::vector<std::string> unknown;
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) unknown.push_back(path + "." + key);
  }
  if (!unknown.empty()) {
    std::string msg = "unknown key(s):";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg, unknown);
  }
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Matrices and vectors

Json matrix_to_json(const CMatrix& m) {
  Json re = Json::array();
  Json im = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      re.push_back(m(i, j).real());
      im.push_back(m(i, j).imag());
    }
  }
  return Json{{"dim", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

CMatrix matrix_from_json(const Json& j, const std::string& path) {
  require_known_keys(j, {"dim", "re", "im"}, path);
  const int dim = dimension(j, path);
  const auto re = numbers(field(j, "re", path), path + ".re");
  const auto im = j.contains("im") ? numbers(j.at("im"), path + ".im") : std::vector<double>(re.size(), 0.0);
  const auto expected = static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim);
  if (re.size() != expected) bad(path + ".re", "expected dim*dim entries");
  if (im.size() != expected) bad(path + ".im", "expected dim*dim entries");
  CMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int c = 0; c < dim; ++c) {
      const auto idx = static_cast<std::size_t>(i * dim + c);
      m(i, c) = Complex(re[idx], im[idx]);
    }
  }
  return m;
}

Json to_json(const HermitianOperator& op) { return matrix_to_json(op.matrix()); }

HermitianOperator hermitian_from_json(const Json& j, const std::string& path) {
  CMatrix m = matrix_from_json(j, path);
  try {
    return HermitianOperator(std::move(m));
  } catch (const InvalidInput& e) {
    bad(path, e.what());
  }
}

Json vector_to_json(const CVector& v) {
  Json re = Json::array();
  Json im = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    re.push_back(v(k).real());
    im.push_back(v(k).imag());
  }
  return Json{{"dim", v.size()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

CVector vector_from_json(const Json& j, const std::string& path) {
  require_known_keys(j, {"dim", "re", "im"}, path);
  const int dim = dimension(j, path);
  const auto re = numbers(field(j, "re", path), path + ".re");
  const auto im = j.contains("im") ? numbers(j.at("im"), path + ".im") : std::vector<double>(re.size(), 0.0);
  if (static_cast<int>(re.size()) != dim) bad(path + ".re", "expected dim entries");
  if (static_cast<int>(im.size()) != dim) bad(path + ".im", "expected dim entries");
  CVector v(dim);
  for (int k = 0; k < dim; ++k) v(k) = Complex(re[static_cast<std::size_t>(k)], im[static_cast<std::size_t>(k)]);
  return v;
}

// ---------------------------------------------------------------------------
// Field specs

Json to_json(const FieldSpec& spec) {
  Json j{{"kind", spec.kind_name()}};
  if (const auto* g = std::get_if<GaussianSpec>(&spec.kind())) {
    j["covariance"] = to_json(g->covariance);
  } else if (const auto* p = std::get_if<PureSpec>(&spec.kind())) {
    j["psi"] = vector_to_json(p->psi.amplitudes());
    j["sigma2"] = p->sigma2;
  } else if (const auto* s = std::get_if<SuperpositionSpec>(&spec.kind())) {
    j["coefficients"] = vector_to_json(s->coefficients);
    j["driver_sigma2"] = s->driver_sigma2;
    j["basis"] = matrix_to_json(s->basis.matrix());
  } else if (const auto* d = std::get_if<DecoheredSpec>(&spec.kind())) {
    j["inner"] = to_json(*d->inner);
    j["gamma"] = d->gamma;
  }
  return j;
}

FieldSpec field_spec_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) bad(path, "expected an object");
  const Json& kind_j = field(j, "kind", path);
  if (!kind_j.is_string()) bad(path + ".kind", "expected a string");
  const std::string kind = kind_j.get<std::string>();
  try {
    if (kind == "gaussian") {
      require_known_keys(j, {"kind", "covariance"}, path);
      return FieldSpec::gaussian(hermitian_from_json(field(j, "covariance", path), path + ".covariance"));
    }
    if (kind == "pure") {
      require_known_keys(j, {"kind", "psi", "sigma2"}, path);
      const double sigma2 = j.contains("sigma2") ? number(j.at("sigma2"), path + ".sigma2") : 1.0;
      return FieldSpec::pure(StateVector(vector_from_json(field(j, "psi", path), path + ".psi")), sigma2);
    }
    if (kind == "superposition") {
      require_known_keys(j, {"kind", "coefficients", "driver_sigma2", "basis"}, path);
      CVector c = vector_from_json(field(j, "coefficients", path), path + ".coefficients");
      const double driver = j.contains("driver_sigma2") ? number(j.at("driver_sigma2"), path + ".driver_sigma2") : 1.0;
      OrthonormalBasis basis = j.contains("basis")
                                   ? OrthonormalBasis::from_columns(matrix_from_json(j.at("basis"), path + ".basis"))
                                   : OrthonormalBasis::standard(static_cast<int>(c.size()));
      return FieldSpec::superposition(SuperpositionSpec{std::move(c), driver, std::move(basis)});
    }
    if (kind == "decohered") {
      require_known_keys(j, {"kind", "inner", "gamma"}, path);
      return FieldSpec::decohered(field_spec_from_json(field(j, "inner", path), path + ".inner"),
                                  number(field(j, "gamma", path), path + ".gamma"));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    bad(path, e.what());
  }
  bad(path + ".kind", "unknown field kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Results

Json to_json(const EnsembleStats& stats) {
  return Json{{"mean", vector_to_json(stats.mean)},
              {"covariance", to_json(stats.covariance)},
              {"dispersion", stats.dispersion}};
}

Json to_json(const EpistemicImage& image) { return Json{{"rho", to_json(image.rho.op())}, {"sigma2", image.sigma2}}; }

EpistemicImage epistemic_from_json(const Json& j, const std::string& path) {
  require_known_keys(j, {"rho", "sigma2"}, path);
  const double sigma2 = number(field(j, "sigma2", path), path + ".sigma2");
  if (!(sigma2 > 0.0)) bad(path + ".sigma2", "must be > 0");
  try {
    return EpistemicImage{DensityState::from_operator(hermitian_from_json(field(j, "rho", path), path + ".rho")),
                          sigma2};
  } catch (const InvalidInput& e) {
    bad(path + ".rho", e.what());
  }
}

Json to_json(const CorrelationMatrix& cor) {
  Json j = matrix_to_json(cor.values);
  Json defined = Json::array();
  for (bool b : cor.defined) defined.push_back(b);
  j["defined"] = std::move(defined);
  return j;
}

Json to_json(const DetectionStats& stats) {
  Json j{{"trials", stats.trials},
         {"clicks_per_channel", stats.clicks_per_channel},
         {"coincidences", stats.coincidences},
         {"no_click_trials", stats.no_click_trials},
         {"crossings_per_channel", stats.crossings_per_channel},
         {"joint_crossings", stats.joint_crossings},
         {"frequencies", stats.frequencies()},
         {"coincidence_fraction", stats.coincidence_fraction()},
         {"no_click_fraction", stats.no_click_fraction()}};
  Json g2 = Json::array();
  for (int k = 0; k < stats.channels(); ++k) {
    for (int m = k + 1; m < stats.channels(); ++m) {
      Json entry{{"pair", {k, m}}};
      try {
        entry["g2"] = g2_zero(stats, k, m);
      } catch (const UndefinedG2Error&) {
        entry["g2"] = nullptr;
      }
      g2.push_back(std::move(entry));
    }
  }
  j["g2"] = std::move(g2);
  return j;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string spec_digest(const FieldSpec& spec) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(spec).dump())));
  return buf;
}

// ---------------------------------------------------------------------------
// CSV

void write_ensemble_csv(std::ostream& os, const FieldEnsemble& ensemble) {
  write_header(os, ensemble.dim(), ensemble.size(), ensemble.seed(),
               ensemble.spec() ? spec_digest(*ensemble.spec()) : "none");
  os << "samples\n";
  for (Eigen::Index i = 0; i < ensemble.samples().cols(); ++i) write_row(os, ensemble.samples().col(i));
}

void write_components_csv(std::ostream& os, const ComponentSignals& signals, std::uint64_t seed,
                          const std::string& digest) {
  write_header(os, signals.dim(), signals.size(), seed, digest);
  os << "basis\n";
  for (Eigen::Index r = 0; r < signals.basis.matrix().rows(); ++r) {
    write_row(os, signals.basis.matrix().row(r).transpose());
  }
  os << "samples\n";
  for (Eigen::Index i = 0; i < signals.xi.cols(); ++i) write_row(os, signals.xi.col(i));
}

EnsembleFile read_ensemble_csv(std::istream& is) {
  if (next_line(is, "header") != "dim,n,seed,spec_digest") throw InvalidInput("ensemble csv: bad header");
  const auto meta = split(next_line(is, "metadata"), ',');
  if (meta.size() != 4) throw InvalidInput("ensemble csv: bad metadata row");
  EnsembleFile f;
  std::size_t n = 0;
  try {
    f.dim = std::stoi(meta[0]);
    n = static_cast<std::size_t>(std::stoull(meta[1]));
    f.seed = std::stoull(meta[2]);
  } catch (const std::exception&) {
    throw InvalidInput("ensemble csv: bad metadata row");
  }
  if (f.dim < 1) throw InvalidInput("ensemble csv: dim must be >= 1");
  f.spec_digest = meta[3];

  std::string section = next_line(is, "section marker");
  if (section == "basis") {
    CMatrix b(f.dim, f.dim);
    for (int r = 0; r < f.dim; ++r) b.row(r) = read_row(next_line(is, "basis row"), f.dim).transpose();
    f.basis = std::move(b);
    section = next_line(is, "section marker");
  }
  if (section != "samples") throw InvalidInput("ensemble csv: expected 'samples'");
  f.samples.resize(f.dim, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    f.samples.col(static_cast<Eigen::Index>(i)) = read_row(next_line(is, "sample row"), f.dim);
  }
  return f;
}

void write_probabilities_csv(std::ostream& os, const std::vector<double>& p) {
  os << "channel,probability\n";
  for (std::size_t k = 0; k < p.size(); ++k) os << (k + 1) << ',' << format_double(p[k]) << '\n';
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& sweep) {
  const int channels = sweep.empty() ? 0 : sweep.front().stats.channels();
  os << "threshold";
  for (int k = 1; k <= channels; ++k) os << ",freq_" << k;
  os << ",coincidence,g2,noclick\n";
  for (const auto& point : sweep) {
    os << format_double(point.threshold);
    for (double f : point.stats.frequencies()) os << ',' << format_double(f);
    os << ',' << format_double(point.stats.coincidence_fraction()) << ',';
    if (channels >= 2) {
      try {
        os << format_double(g2_zero(point.stats, 0, 1));
      } catch (const UndefinedG2Error&) {
      }
    }
    os << ',' << format_double(point.stats.no_click_fraction()) << '\n';
  }
}

}  // namespace pcsft
