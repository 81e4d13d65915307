#pragma once

// Command implementations behind the `ncst` executable. Each cmd_* function is a
// pure function of its arguments and writes its outputs (plus a manifest) itself,
// so the acceptance suite can drive exactly what the executable runs.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ncst/data.hpp"
#include "ncst/distribution.hpp"
#include "ncst/fitting.hpp"
#include "ncst/stats.hpp"
#include "ncst/transforms.hpp"

#ifndef NCST_VERSION
#define NCST_VERSION "0.0.0"
#endif

namespace ncst::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1.0";

enum ExitCode : int { kOk = 0, kInputError = 2, kConditionFailure = 3, kNotConverged = 4 };

// An error with the process exit code it maps to.
class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

inline int exit_code_for(const ncst::Error& e) {
  if (dynamic_cast<const ConditionViolated*>(&e) || dynamic_cast<const RankZero*>(&e) ||
      dynamic_cast<const MomentUndefined*>(&e))
    return kConditionFailure;
  return kInputError;
}

// ---- argument parsing -------------------------------------------------------

inline Vector parse_vector(const std::string& text, const std::string& field) {
  std::vector<double> v;
  for (auto f : ncst::detail::split_fields(text)) {
    double x;
    if (!ncst::detail::parse_double(f, x) || !std::isfinite(x))
      throw CliError(kInputError, field + ": '" + std::string(f) + "' is not a finite number");
    v.push_back(x);
  }
  if (v.empty()) throw CliError(kInputError, field + ": empty vector");
  return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Rows separated by ';', entries by ','.
inline Matrix parse_matrix(const std::string& text, const std::string& field) {
  std::vector<Vector> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';'))
    if (!ncst::detail::trim(row).empty()) rows.push_back(parse_vector(row, field));
  if (rows.empty()) throw CliError(kInputError, field + ": empty matrix");
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw CliError(kInputError, field + ": rows have different lengths");
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return m;
}

/// Distribution parameters as given on the command line.
struct ParamArgs {
  std::string xi;
  std::string omega;
  std::string alpha;
  std::optional<double> r;
};

inline SkewNormalParams make_sn(const ParamArgs& a) {
  if (a.xi.empty()) throw CliError(kInputError, "xi: required");
  const Vector xi = parse_vector(a.xi, "xi");
  const auto k = xi.size();
  const Matrix omega = a.omega.empty() ? Matrix(Matrix::Identity(k, k)) : parse_matrix(a.omega, "Omega");
  const Vector alpha = a.alpha.empty() ? Vector(Vector::Zero(k)) : parse_vector(a.alpha, "alpha");
  if (omega.rows() != k || omega.cols() != k) throw CliError(kInputError, "Omega: must be k x k with k = dim(xi)");
  if (alpha.size() != k) throw CliError(kInputError, "alpha: must have the same length as xi");
  try {
    return SkewNormalParams(xi, omega, alpha);
  } catch (const NotPositiveDefinite& e) {
    throw CliError(kInputError, std::string("Omega: ") + e.what());
  }
}

inline NcstParams make_ncst(const ParamArgs& a) {
  if (!a.r) throw CliError(kInputError, "r: required for ncst");
  SkewNormalParams sn = make_sn(a);
  try {
    return NcstParams(std::move(sn), *a.r);
  } catch (const DomainError& e) {
    throw CliError(kInputError, e.what());
  }
}

inline json params_json(const ParamArgs& a) {
  json j;
  j["xi"] = a.xi;
  j["Omega"] = a.omega;
  j["alpha"] = a.alpha;
  j["r"] = a.r ? json(*a.r) : json(nullptr);
  return j;
}

// ---- output helpers ---------------------------------------------------------

inline json vector_json(const Vector& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

inline json matrix_json(const Matrix& m) {
  json j = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) j.push_back(vector_json(m.row(i).transpose()));
  return j;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Everything needed to re-run a command. The timestamp lives only in the manifest
/// file, never in the outputs, so reruns are byte-identical.
struct RunInfo {
  std::string command;
  json parameters = json::object();
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> M;
  std::vector<std::string> argv;

  json to_json() const {
    json j;
    j["command"] = command;
    j["parameters"] = parameters;
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["M"] = M ? json(*M) : json(nullptr);
    j["tool_version"] = NCST_VERSION;
    return j;
  }
};

inline void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError(kInputError, "cannot write " + path);
  out << text;
  if (!out) throw CliError(kInputError, "failed writing " + path);
}

inline void write_manifest(const std::string& path, const RunInfo& run, const std::vector<std::string>& outputs) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = run.command;
  j["parameters"] = run.parameters;
  j["seed"] = run.seed ? json(*run.seed) : json(nullptr);
  j["M"] = run.M ? json(*run.M) : json(nullptr);
  j["timestamp"] = utc_timestamp();
  j["tool_version"] = NCST_VERSION;
  j["argv"] = run.argv;
  j["outputs"] = outputs;
  write_text(path, j.dump(2) + "\n");
}

// Writes `text` to `out` (or stdout when empty) and records a manifest next to it.
inline void emit(const std::string& out, const std::string& text, const RunInfo& run,
                 std::vector<std::string> extra_outputs = {}) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  write_text(out, text);
  extra_outputs.insert(extra_outputs.begin(), out);
  write_manifest(out + ".manifest.json", run, extra_outputs);
}

inline std::string csv_text(const DataMatrix& dm) {
  std::ostringstream os;
  write_csv(os, dm);
  return os.str();
}

inline std::uint64_t require_seed(const std::optional<std::uint64_t>& seed, const std::string& command) {
  if (!seed) throw CliError(kInputError, "--seed is required for " + command);
  return *seed;
}

// ---- sample -----------------------------------------------------------------

struct SampleArgs {
  std::string dist = "ncst";
  ParamArgs params;
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
};

inline DataMatrix sample_matrix(const SampleArgs& a) {
  const std::uint64_t seed = require_seed(a.seed, "sample");
  if (a.n < 1) throw CliError(kInputError, "n: must be at least 1");
  const RngStream stream{seed, 0};
  Matrix t;
  if (a.dist == "sn") {
    t = sn_sample(make_sn(a.params), a.n, stream);
  } else if (a.dist == "ncst") {
    t = ncst_sample(make_ncst(a.params), a.n, stream);
  } else {
    throw CliError(kInputError, "dist: must be 'sn' or 'ncst'");
  }
  return {default_labels(t.cols()), std::move(t)};
}

inline int cmd_sample(const SampleArgs& a, RunInfo run) {
  const DataMatrix dm = sample_matrix(a);
  run.command = "sample";
  run.seed = a.seed;
  run.parameters = {{"dist", a.dist}, {"params", params_json(a.params)}, {"n", a.n}};
  emit(a.out, csv_text(dm), run);
  return kOk;
}

// ---- density ----------------------------------------------------------------

struct DensityArgs {
  std::string dist = "ncst";
  ParamArgs params;
  std::string points;
  std::size_t M = Defaults::mc_draws_report;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
  std::string out;
};

inline std::vector<double> density_values(const DensityArgs& a, const DataMatrix& pts) {
  std::vector<double> out(static_cast<std::size_t>(pts.rows()));
  if (a.dist == "sn") {
    const auto p = make_sn(a.params);
    if (pts.cols() != p.dim()) throw CliError(kInputError, "points: expected " + std::to_string(p.dim()) + " columns");
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
      out[static_cast<std::size_t>(i)] = sn_logpdf(pts.values.row(i).transpose(), p);
    return out;
  }
  if (a.dist != "ncst") throw CliError(kInputError, "dist: must be 'sn' or 'ncst'");
  const auto p = make_ncst(a.params);
  if (pts.cols() != p.dim()) throw CliError(kInputError, "points: expected " + std::to_string(p.dim()) + " columns");
  const std::uint64_t seed = require_seed(a.seed, "density --dist ncst");
  if (a.M < 1) throw CliError(kInputError, "M: must be at least 1");
  const McConfig cfg{a.M, seed, true};
  const McDensity density(p);
  const MixingDraws draws = mixing_draws(cfg, p.r, 0);
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    out[static_cast<std::size_t>(i)] = density.logpdf(pts.values.row(i).transpose(), draws);
  return out;
}

inline int cmd_density(const DensityArgs& a, RunInfo run) {
  if (a.points.empty()) throw CliError(kInputError, "points: a points file is required");
  const DataMatrix pts = read_csv(a.points);
  const auto values = density_values(a, pts);
  run.command = "density";
  run.seed = a.seed;
  run.M = a.dist == "ncst" ? std::optional<std::size_t>(a.M) : std::nullopt;
  run.parameters = {{"dist", a.dist}, {"params", params_json(a.params)}, {"points", a.points}, {"format", a.format}};
  if (a.format == "json") {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["run"] = run.to_json();
    j["labels"] = pts.labels;
    j["points"] = matrix_json(pts.values);
    j["logpdf"] = values;
    emit(a.out, j.dump(2) + "\n", run);
    return kOk;
  }
  DataMatrix outm;
  outm.labels = pts.labels;
  outm.labels.push_back("logpdf");
  outm.values.resize(pts.rows(), pts.cols() + 1);
  outm.values.leftCols(pts.cols()) = pts.values;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) outm.values(i, pts.cols()) = values[static_cast<std::size_t>(i)];
  emit(a.out, csv_text(outm), run);
  return kOk;
}

// ---- fit / compare ----------------------------------------------------------

struct FitArgs {
  std::string data;
  std::vector<std::string> models;
  std::size_t M = Defaults::mc_draws_fit;
  std::size_t report_M = Defaults::mc_draws_report;
  std::optional<std::uint64_t> seed;
  bool standardize = false;
  std::string format = "json";
  std::string out;
  // Optional model-density grids for every fitted family.
  std::string grid_dir;
  std::size_t grid_points = Defaults::grid_points;
  double truncate_percentile = Defaults::contour_truncate_percentile;
};

inline std::vector<Family> parse_models(const std::vector<std::string>& names) {
  std::vector<Family> out;
  for (const auto& n : names) {
    std::stringstream ss(n);
    std::string part;
    while (std::getline(ss, part, ',')) {
      const std::string name(ncst::detail::trim(part));
      if (name.empty()) continue;
      if (name == "all" || name == "ALL") return all_families();
      const auto f = parse_family(name);
      if (!f) throw CliError(kInputError, "unknown model '" + name + "'; valid names: MVN, SN, AZZALINI_ST, NCST");
      if (std::find(out.begin(), out.end(), *f) == out.end()) out.push_back(*f);
    }
  }
  if (out.empty()) return all_families();
  return out;
}

inline DataMatrix standardize(DataMatrix dm) {
  for (Eigen::Index j = 0; j < dm.cols(); ++j) {
    auto col = dm.values.col(j);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(dm.rows() - 1));
    if (!(sd > 0.0)) throw CliError(kInputError, "column '" + dm.labels[static_cast<std::size_t>(j)] + "' is constant");
    col = (col.array() - mean) / sd;
  }
  return dm;
}

inline json fit_json(const FitResult& f) {
  json j;
  j["model"] = family_name(f.model.family);
  j["k"] = f.model.k;
  j["params"] = {{"xi", vector_json(f.params.xi)},
                 {"Omega", matrix_json(f.params.Omega)},
                 {"alpha", vector_json(f.params.alpha)},
                 {"r", std::isfinite(f.params.r) ? json(f.params.r) : json(nullptr)}};
  j["loglik"] = f.loglik;
  j["p"] = f.p;
  j["n"] = f.n;
  j["aic"] = f.aic;
  j["sic"] = f.sic;
  j["converged"] = f.converged;
  j["iterations"] = f.iterations;
  j["evaluations"] = f.evaluations;
  if (f.mc_config) {
    j["mc"] = {{"M", f.mc_config->M},
               {"seed", f.mc_config->seed},
               {"crn", f.mc_config->crn},
               {"report_M", f.report_M ? json(*f.report_M) : json(nullptr)},
               {"loglik_at_M", f.loglik_fit ? json(*f.loglik_fit) : json(nullptr)}};
  } else {
    j["mc"] = nullptr;
  }
  return j;
}

// Log-density of a fitted model at a point; NCST uses the supplied draws.
class ModelDensity {
 public:
  ModelDensity(Family f, const ModelParams& p, const McConfig& cfg) : family_(f), sn_(p.sn()), r_(p.r) {
    if (f == Family::NCST) {
      const NcstParams np(sn_, r_);
      mc_.emplace(np);
      draws_ = mixing_draws(cfg, r_, 0);
    }
  }
  double logpdf(const Vector& t) const {
    switch (family_) {
      case Family::MVN:
      case Family::SN: return sn_logpdf(t, sn_);
      case Family::AZZALINI_ST: return azzalini_st_logpdf(t, sn_, r_);
      case Family::NCST: return mc_->logpdf(t, draws_);
    }
    return 0.0;
  }

 private:
  Family family_;
  SkewNormalParams sn_;
  double r_;
  std::optional<McDensity> mc_;
  MixingDraws draws_;
};

// Parameters of the sub-vector `idx`; every family here is closed under margins.
inline ModelParams marginal_params(const ModelParams& p, const std::vector<Eigen::Index>& idx) {
  const auto k = p.xi.size();
  Matrix a = Matrix::Zero(k, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) a(idx[j], static_cast<Eigen::Index>(j)) = 1.0;
  const NcstParams sub = affine_transform(NcstParams(p.sn(), std::isfinite(p.r) ? p.r : 1.0), a);
  return {sub.sn.xi(), sub.sn.Omega(), sub.sn.alpha(), p.r};
}

/// Model density on 1-D margins and pairwise 2-D margins. Axes run from the
/// smallest observation to the given percentile of the observations.
inline std::vector<std::string> write_model_grids(const std::string& dir, const DataMatrix& data, const FitResult& fit,
                                                  const McConfig& cfg, std::size_t points, double pct) {
  std::vector<std::string> written;
  const auto k = data.cols();
  std::vector<AxisRange> ranges;
  for (Eigen::Index j = 0; j < k; ++j) {
    std::vector<double> col(data.values.col(j).data(), data.values.col(j).data() + data.rows());
    ranges.push_back({*std::min_element(col.begin(), col.end()), percentile(col, pct / 100.0)});
  }
  const std::string tag = family_name(fit.model.family);
  for (Eigen::Index j = 0; j < k; ++j) {
    const ModelDensity d(fit.model.family, marginal_params(fit.params, {j}), cfg);
    const auto axis = linspace(ranges[static_cast<std::size_t>(j)].lo, ranges[static_cast<std::size_t>(j)].hi, points);
    std::ostringstream os;
    os << data.labels[static_cast<std::size_t>(j)] << ",density\n";
    for (double x : axis) os << format_double(x) << ',' << format_double(std::exp(d.logpdf(Vector::Constant(1, x)))) << '\n';
    const std::string path = dir + "/" + tag + "_" + data.labels[static_cast<std::size_t>(j)] + ".csv";
    write_text(path, os.str());
    written.push_back(path);
  }
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = a + 1; b < k; ++b) {
      const ModelDensity d(fit.model.family, marginal_params(fit.params, {a, b}), cfg);
      const auto xa = linspace(ranges[static_cast<std::size_t>(a)].lo, ranges[static_cast<std::size_t>(a)].hi, points);
      const auto xb = linspace(ranges[static_cast<std::size_t>(b)].lo, ranges[static_cast<std::size_t>(b)].hi, points);
      std::ostringstream os;
      os << data.labels[static_cast<std::size_t>(a)] << ',' << data.labels[static_cast<std::size_t>(b)] << ",density\n";
      Vector t(2);
      for (double u : xa)
        for (double v : xb) {
          t << u, v;
          os << format_double(u) << ',' << format_double(v) << ',' << format_double(std::exp(d.logpdf(t))) << '\n';
        }
      const std::string path = dir + "/" + tag + "_" + data.labels[static_cast<std::size_t>(a)] + "__" +
                               data.labels[static_cast<std::size_t>(b)] + ".csv";
      write_text(path, os.str());
      written.push_back(path);
    }
  return written;
}

struct CompareOutcome {
  json document;
  std::vector<CompareEntry> entries;
  int exit_code = kOk;
};

/// Shared body of `fit` and `compare`.
inline CompareOutcome run_fits(const FitArgs& a, const std::string& command, RunInfo run) {
  if (a.data.empty()) throw CliError(kInputError, "data: a data file is required");
  const auto families = parse_models(a.models);
  const std::uint64_t seed = require_seed(a.seed, command);
  if (a.M < 1 || a.report_M < 1) throw CliError(kInputError, "M: must be at least 1");
  DataMatrix data = read_csv(a.data);
  if (a.standardize) data = standardize(std::move(data));

  FitOptions opts;
  opts.report_M = a.report_M;
  const McConfig cfg{a.M, seed, true};
  CompareOutcome oc;
  oc.entries = compare_models(data, families, opts, cfg);

  run.command = command;
  run.seed = seed;
  run.M = a.M;
  run.parameters = {{"data", a.data},
                    {"models", [&] {
                       json m = json::array();
                       for (Family f : families) m.push_back(family_name(f));
                       return m;
                     }()},
                    {"report_M", a.report_M},
                    {"standardize", a.standardize}};

  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = command;
  doc["n"] = data.rows();
  doc["k"] = data.cols();
  doc["labels"] = data.labels;
  doc["standardized"] = a.standardize;
  json table = json::array();
  json models = json::array();
  json errors = json::array();
  bool any = false, all_converged = true;
  for (const auto& e : oc.entries) {
    if (e.fit) {
      any = true;
      all_converged = all_converged && e.fit->converged;
      models.push_back(fit_json(*e.fit));
      table.push_back({{"model", family_name(e.family)},
                       {"loglik", e.fit->loglik},
                       {"aic", e.fit->aic},
                       {"sic", e.fit->sic}});
    } else {
      errors.push_back({{"model", family_name(e.family)}, {"error_type", e.error_type}, {"message", e.error}});
    }
  }
  doc["table"] = table;
  doc["models"] = models;
  doc["errors"] = errors;
  doc["run"] = run.to_json();
  oc.document = doc;

  std::vector<std::string> grids;
  if (!a.grid_dir.empty()) {
    McConfig grid_cfg = cfg;
    grid_cfg.M = a.report_M;
    for (const auto& e : oc.entries)
      if (e.fit) {
        auto w = write_model_grids(a.grid_dir, data, *e.fit, grid_cfg, a.grid_points, a.truncate_percentile);
        grids.insert(grids.end(), w.begin(), w.end());
      }
  }

  std::string text;
  if (a.format == "csv") {
    std::ostringstream os;
    os << "model,loglik,aic,sic\n";
    for (const auto& row : table)
      os << row["model"].get<std::string>() << ',' << format_double(row["loglik"].get<double>()) << ','
         << format_double(row["aic"].get<double>()) << ',' << format_double(row["sic"].get<double>()) << '\n';
    text = os.str();
  } else {
    text = doc.dump(2) + "\n";
  }
  emit(a.out, text, run, grids);

  if (!any) {
    oc.exit_code = kInputError;
  } else if (!all_converged) {
    oc.exit_code = kNotConverged;
  }
  return oc;
}

inline std::string table_text(const std::vector<CompareEntry>& entries) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "Model" << std::right << std::setw(16) << "Log-Likelihood" << std::setw(14)
     << "AIC" << std::setw(14) << "SIC" << '\n';
  os << std::fixed << std::setprecision(2);
  for (const auto& e : entries) {
    if (!e.fit) {
      os << std::left << std::setw(14) << family_name(e.family) << "  error: " << e.error << '\n';
      continue;
    }
    os << std::left << std::setw(14) << family_name(e.family) << std::right << std::setw(16) << e.fit->loglik
       << std::setw(14) << e.fit->aic << std::setw(14) << e.fit->sic << '\n';
  }
  return os.str();
}

// ---- simstudy ---------------------------------------------------------------

struct SimstudyArgs {
  std::string study;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t n = 100000;
  std::size_t grid_points = Defaults::grid_points;
  double truncate_percentile = Defaults::contour_truncate_percentile;
};

struct StudySetting {
  std::string label;
  std::string slug;
  NcstParams params;
};

inline std::vector<StudySetting> study_settings(const std::string& study) {
  Vector xi(2);
  xi << 1.0, 2.0;
  Matrix omega(2, 2);
  omega << 4.0, 0.0, 0.0, 1.0;
  std::vector<StudySetting> out;
  if (study == "alpha-sweep") {
    for (double a : {0.0, 3.0, 15.0}) {
      const std::string v = format_double(a);
      out.push_back({"alpha=(" + v + "," + v + ")", "alpha_" + v + "_" + v, NcstParams(xi, omega, Vector::Constant(2, a), 3.0)});
    }
  } else if (study == "df-sweep") {
    for (double r : {3.0, 5.0, 10.0, 30.0}) {
      const std::string v = format_double(r);
      out.push_back({"r=" + v, "r_" + v, NcstParams(xi, omega, Vector::Constant(2, 3.0), r)});
    }
  } else {
    throw CliError(kInputError, "study: must be 'alpha-sweep' or 'df-sweep'");
  }
  return out;
}

struct SimstudyRow {
  std::string setting;
  int margin;
  SummaryRow summary;
};

inline std::string grid_csv(const DensityGrid& g, const std::vector<std::string>& labels) {
  std::ostringstream os;
  if (!g.two_dimensional()) {
    os << labels[0] << ",density\n";
    for (std::size_t i = 0; i < g.axis1.size(); ++i) os << format_double(g.axis1[i]) << ',' << format_double(g.at(i)) << '\n';
    return os.str();
  }
  os << labels[0] << ',' << labels[1] << ",density\n";
  for (std::size_t i = 0; i < g.axis1.size(); ++i)
    for (std::size_t j = 0; j < g.axis2.size(); ++j)
      os << format_double(g.axis1[i]) << ',' << format_double(g.axis2[j]) << ',' << format_double(g.at(i, j)) << '\n';
  return os.str();
}

/// Runs one simulation study. Setting i draws from substream i of the seed. Writes
/// summary.csv, per-margin 1-D grids and a 2-D grid per setting when `a.out` is set.
inline std::vector<SimstudyRow> run_simstudy(const SimstudyArgs& a, RunInfo run) {
  const std::uint64_t seed = require_seed(a.seed, "simstudy");
  const auto settings = study_settings(a.study);
  if (a.n < 30) throw CliError(kInputError, "n: must be at least 30");
  if (!(a.truncate_percentile > 0.0 && a.truncate_percentile <= 100.0))
    throw CliError(kInputError, "truncate-percentile: must lie in (0, 100]");
  std::vector<SimstudyRow> rows;
  std::vector<std::string> written;
  const RngStream base{seed, 0};
  for (std::size_t s = 0; s < settings.size(); ++s) {
    const auto& st = settings[s];
    const Matrix t = ncst_sample(st.params, a.n, base.child(s));
    for (int m = 0; m < 2; ++m) {
      std::vector<double> col(t.col(m).data(), t.col(m).data() + t.rows());
      rows.push_back({st.label, m + 1, summarize("T" + std::to_string(m + 1), col)});
      if (!a.out.empty()) {
        GridSpec spec;
        spec.points = a.grid_points;
        const auto g = kde_grid(t.col(m), spec);
        const std::string path = a.out + "/kde_" + st.slug + "_t" + std::to_string(m + 1) + ".csv";
        write_text(path, grid_csv(g, {"t" + std::to_string(m + 1)}));
        written.push_back(path);
      }
    }
    if (!a.out.empty()) {
      GridSpec spec;
      spec.points = a.grid_points;
      spec.upper_quantile = a.truncate_percentile / 100.0;
      const auto g = kde_grid(t, spec);
      const std::string path = a.out + "/kde_" + st.slug + "_2d.csv";
      write_text(path, grid_csv(g, {"t1", "t2"}));
      written.push_back(path);
    }
  }
  if (!a.out.empty()) {
    std::ostringstream os;
    os << "study,setting,margin,skewness,excess_kurtosis,percentile_95,n\n";
    for (const auto& r : rows)
      os << a.study << ',' << '"' << r.setting << '"' << ",T" << r.margin << ',' << format_double(r.summary.skewness)
         << ',' << format_double(r.summary.excess_kurtosis) << ',' << format_double(r.summary.percentile_95) << ','
         << r.summary.n << '\n';
    const std::string summary = a.out + "/summary.csv";
    write_text(summary, os.str());
    written.insert(written.begin(), summary);
    run.command = "simstudy";
    run.seed = seed;
    run.parameters = {{"study", a.study},
                      {"n", a.n},
                      {"grid_points", a.grid_points},
                      {"truncate_percentile", a.truncate_percentile},
                      {"estimators", "moment skewness m3/m2^1.5, excess kurtosis m4/m2^2-3, type-7 percentile"}};
    write_manifest(a.out + "/manifest.json", run, written);
  }
  return rows;
}

// ---- quadform ---------------------------------------------------------------

struct QuadformArgs {
  ParamArgs params;
  std::string w;            // full matrix, rows separated by ';'
  std::string w_direction;  // a, giving W = a a' / |a|^2
  std::size_t n = 100000;
  double control_lambda = 6.0;
  std::optional<std::uint64_t> seed;
  std::string out;
};

inline Matrix quadform_weight(const QuadformArgs& a) {
  if (!a.w.empty() && !a.w_direction.empty()) throw CliError(kInputError, "W: give either --w or --w-direction");
  if (!a.w.empty()) return parse_matrix(a.w, "W");
  if (a.w_direction.empty()) throw CliError(kInputError, "W: --w or --w-direction is required");
  const Vector dir = parse_vector(a.w_direction, "w-direction");
  if (!(dir.squaredNorm() > 0.0)) throw CliError(kInputError, "w-direction: must be nonzero");
  return dir * dir.transpose() / dir.squaredNorm();
}

inline json analysis_json(const QuadFormAnalysis& qa) {
  json j;
  j["m"] = qa.m;
  j["lambda"] = qa.lambda;
  j["c_alpha"] = qa.c_alpha;
  j["nu"] = vector_json(qa.nu);
  j["alpha_star"] = qa.alpha_star;
  j["alpha_star_vector"] = vector_json(qa.alpha_star_vector);
  j["P1"] = matrix_json(qa.P1);
  j["W"] = matrix_json(qa.W);
  j["condition_iii_residual"] = qa.condition_iii_residual;
  j["df1_extrapolated"] = qa.m > 1;
  return j;
}

inline QuadFormValidation run_quadform(const QuadformArgs& a, json* document, RunInfo run) {
  const std::uint64_t seed = require_seed(a.seed, "quadform");
  const NcstParams p = make_ncst(a.params);
  const Matrix w = quadform_weight(a);
  if (w.rows() != p.dim() || w.cols() != p.dim()) throw CliError(kInputError, "W: must be k x k");
  if (a.n < 2) throw CliError(kInputError, "n: must be at least 2");
  auto v = quadform_validate(p, w, a.n, RngStream{seed, 0}, a.control_lambda);
  run.command = "quadform";
  run.seed = seed;
  run.parameters = {{"params", params_json(a.params)},
                    {"w", a.w},
                    {"w_direction", a.w_direction},
                    {"n", a.n},
                    {"control_lambda", a.control_lambda}};
  json j;
  j["schema_version"] = kSchemaVersion;
  j["analysis"] = analysis_json(v.analysis);
  j["reference"] = {{"df1", v.reference.df1},
                    {"df2", v.reference.df2},
                    {"lambda", v.reference.lambda},
                    {"alpha_star", v.reference.alpha_star}};
  j["truncation_quantile"] = Tolerances::quadform_truncation;
  j["ks"] = v.ks;
  j["control"] = {{"lambda", v.control_lambda}, {"ks", v.ks_control}};
  j["projected_reference"] = {{"xi", vector_json(v.projected.sn.xi())},
                              {"Omega", matrix_json(v.projected.sn.Omega())},
                              {"alpha", vector_json(v.projected.sn.alpha())},
                              {"ks", v.ks_projected}};
  json qq = json::array();
  for (const auto& q : v.qq) qq.push_back({{"p", q.p}, {"q_empirical", q.x}, {"q_reference", q.y}});
  j["qq"] = qq;
  j["run"] = run.to_json();
  if (!a.out.empty()) emit(a.out, j.dump(2) + "\n", run);
  if (document) *document = std::move(j);
  return v;
}

// ---- wdbc -------------------------------------------------------------------

struct WdbcArgs {
  std::string input;
  std::string out;
};

inline DataMatrix cmd_wdbc_matrix(const WdbcArgs& a) {
  if (a.input.empty()) throw CliError(kInputError, "input: a WDBC file is required");
  return read_wdbc(a.input);
}

inline int cmd_wdbc(const WdbcArgs& a, RunInfo run) {
  const DataMatrix dm = cmd_wdbc_matrix(a);
  run.command = "wdbc";
  run.parameters = {{"input", a.input}};
  emit(a.out, csv_text(dm), run);
  return kOk;
}

}  // namespace ncst::cli
