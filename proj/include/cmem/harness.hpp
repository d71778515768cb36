#pragma once

// Experiment registry, flat key-value config files, and bit-stable trace
// export for the fitting and classification runs.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <chrono>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cmem/cm_em.hpp"
#include "cmem/dist_core.hpp"
#include "cmem/em_family.hpp"
#include "cmem/info_measures.hpp"
#include "cmem/mmi_classify.hpp"
#include "cmem/trace.hpp"
#include "json.hpp"

namespace cmem {

enum class Algorithm { EM, MM, CMEM, CLASSIFY, QTABLE };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::EM: return "em";
    case Algorithm::MM: return "mm";
    case Algorithm::CMEM: return "cmem";
    case Algorithm::CLASSIFY: return "classify";
    case Algorithm::QTABLE: return "qtable";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "em") return Algorithm::EM;
  if (lower == "mm") return Algorithm::MM;
  if (lower == "cmem" || lower == "cm-em") return Algorithm::CMEM;
  if (lower == "classify") return Algorithm::CLASSIFY;
  if (lower == "qtable") return Algorithm::QTABLE;
  throw Error(ErrorCode::config, "unknown algorithm '" + std::string(s) + "'");
}

struct GridSpec {
  double lo = 1.0;
  double hi = 100.0;
  double step = 1.0;

  Grid make() const { return Grid::uniform(lo, hi, step); }
};

// One (left sigma, right sigma) row of the Q counterexample table.
struct QRow {
  double left_sigma;
  double right_sigma;
};

struct ClassifySettings {
  double start_boundary = 50.0;
  std::size_t max_rounds = 50;
};

struct ExperimentSpec {
  std::string name;
  GridSpec grid;
  MixtureModel truth;  // generates the data (or is the fitted model for classification)
  MixtureModel start;
  Algorithm algorithm = Algorithm::CMEM;
  FitConfig fit;
  CmConfig cm;
  ClassifySettings classify;
  std::vector<QRow> qrows;

  void validate() const {
    if (name.empty()) throw Error(ErrorCode::config, "experiment needs a name");
    if (truth.size() != start.size()) throw Error(ErrorCode::config, "truth and start have different label counts");
    fit.validate();
    cm.validate();
    if (algorithm == Algorithm::QTABLE && qrows.empty()) throw Error(ErrorCode::config, "qtable needs rows");
    if (algorithm == Algorithm::CLASSIFY && classify.max_rounds < 1) {
      throw Error(ErrorCode::config, "classify.max_rounds must be >= 1");
    }
    (void)grid.make();
  }

  Distribution data() const { return mixture_marginal(truth, grid.make()); }
};

inline MixtureModel make_model(std::vector<double> weights, const std::vector<double>& mu,
                               const std::vector<double>& sigma) {
  if (mu.size() != weights.size() || sigma.size() != weights.size()) {
    throw Error(ErrorCode::config, "weights, mu and sigma lists differ in length");
  }
  std::vector<GaussianParams> comps;
  for (std::size_t j = 0; j < mu.size(); ++j) comps.emplace_back(mu[j], sigma[j]);
  return MixtureModel(LabelWeights(std::move(weights)), std::move(comps));
}

inline std::vector<ExperimentSpec> builtin_registry() {
  std::vector<ExperimentSpec> out;
  const MixtureModel table1_truth = make_model({0.5, 0.5}, {35, 65}, {15, 15});
  out.push_back({"table1-counterexample", {}, table1_truth, table1_truth, Algorithm::QTABLE, {}, {}, {},
                 {{15, 15}, {10, 10}, {5, 12}}});
  out.push_back({"example1", {}, make_model({0.7, 0.3}, {35, 65}, {8, 12}), make_model({0.5, 0.5}, {30, 70}, {15, 15}),
                 Algorithm::CMEM, {}, {}, {}, {}});
  out.push_back({"example2", {}, make_model({0.1, 0.9}, {35, 65}, {8, 12}), make_model({0.5, 0.5}, {30, 70}, {8, 8}),
                 Algorithm::CMEM, {}, {}, {}, {}});
  out.push_back({"example3", {}, make_model({0.7, 0.3}, {46, 50}, {2, 20}),
                 make_model({0.5, 0.5}, {30, 70}, {20, 20}), Algorithm::CMEM, {}, {}, {}, {}});
  const MixtureModel classify_model = make_model({0.8, 0.2}, {30, 70}, {15, 10});
  out.push_back({"classify-ex", {}, classify_model, classify_model, Algorithm::CLASSIFY, {}, {}, {50.0, 50}, {}});
  return out;
}

inline std::optional<ExperimentSpec> find_builtin(std::string_view name) {
  for (auto& s : builtin_registry()) {
    if (s.name == name) return s;
  }
  return std::nullopt;
}

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline double parse_real(const std::string& s, const std::string& key) {
  const std::string t = trim(s);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw Error(ErrorCode::config, "'" + key + "' expects a number, got '" + t + "'");
  }
  return v;
}

inline std::size_t parse_count(const std::string& s, const std::string& key) {
  const double v = parse_real(s, key);
  if (v < 0 || v != std::floor(v)) throw Error(ErrorCode::config, "'" + key + "' expects a non-negative integer");
  return static_cast<std::size_t>(v);
}

inline std::vector<double> parse_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(item, key));
  return out;
}

// %.12g: twelve significant digits, locale-independent for the C locale.
inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

}  // namespace detail

// Flat `key = value` format, one experiment per file, '#' starts a comment.
// Lists are comma separated. Required: name, algorithm, truth.{weights,mu,sigma}.
inline ExperimentSpec parse_experiment(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::config, "line " + std::to_string(lineno) + ": expected key = value", lineno);
    }
    const std::string key = detail::trim(t.substr(0, eq));
    if (kv.count(key)) throw Error(ErrorCode::config, "duplicate key '" + key + "'", lineno);
    kv[key] = detail::trim(t.substr(eq + 1));
  }

  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto need = [&](const std::string& key) {
    auto v = take(key);
    if (!v) throw Error(ErrorCode::config, "missing required key '" + key + "'");
    return *v;
  };
  auto model = [&](const std::string& prefix, bool required) -> std::optional<MixtureModel> {
    auto w = take(prefix + ".weights");
    auto mu = take(prefix + ".mu");
    auto sd = take(prefix + ".sigma");
    if (!w && !mu && !sd && !required) return std::nullopt;
    if (!w || !mu || !sd) throw Error(ErrorCode::config, prefix + " needs weights, mu and sigma");
    return make_model(detail::parse_list(*w, prefix + ".weights"), detail::parse_list(*mu, prefix + ".mu"),
                      detail::parse_list(*sd, prefix + ".sigma"));
  };

  const std::string name = need("name");
  const Algorithm algorithm = parse_algorithm(need("algorithm"));
  const MixtureModel truth = *model("truth", true);
  const MixtureModel start = model("start", false).value_or(truth);
  ExperimentSpec spec{name, {}, truth, start, algorithm, {}, {}, {}, {}};

  if (auto g = take("grid")) {
    const auto v = detail::parse_list(*g, "grid");
    if (v.size() != 3) throw Error(ErrorCode::config, "grid expects lo, hi, step");
    spec.grid = {v[0], v[1], v[2]};
  }
  if (auto v = take("kl_threshold")) {
    spec.fit.kl_threshold = spec.cm.kl_threshold = detail::parse_real(*v, "kl_threshold");
  }
  if (auto v = take("max_iterations")) spec.fit.max_iterations = detail::parse_count(*v, "max_iterations");
  if (auto v = take("e2_tolerance")) spec.cm.e2_tolerance = detail::parse_real(*v, "e2_tolerance");
  if (auto v = take("e2_max_inner")) spec.cm.e2_max_inner = detail::parse_count(*v, "e2_max_inner");
  if (auto v = take("max_outer")) spec.cm.max_outer = detail::parse_count(*v, "max_outer");
  if (auto v = take("classify.start_boundary")) {
    spec.classify.start_boundary = detail::parse_real(*v, "classify.start_boundary");
  }
  if (auto v = take("classify.max_rounds")) spec.classify.max_rounds = detail::parse_count(*v, "classify.max_rounds");
  auto left = take("qtable.left_sigma");
  auto right = take("qtable.right_sigma");
  if (left || right) {
    if (!left || !right) throw Error(ErrorCode::config, "qtable needs both left_sigma and right_sigma");
    const auto l = detail::parse_list(*left, "qtable.left_sigma");
    const auto r = detail::parse_list(*right, "qtable.right_sigma");
    if (l.size() != r.size()) throw Error(ErrorCode::config, "qtable sigma lists differ in length");
    for (std::size_t k = 0; k < l.size(); ++k) spec.qrows.push_back({l[k], r[k]});
  }
  if (!kv.empty()) throw Error(ErrorCode::config, "unknown key '" + kv.begin()->first + "'");
  spec.validate();
  return spec;
}

inline ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config, "cannot open " + path.string());
  return parse_experiment(in);
}

inline std::string to_config(const ExperimentSpec& s) {
  auto model_lines = [](const std::string& prefix, const MixtureModel& m) {
    std::vector<double> w(m.weights().probs().begin(), m.weights().probs().end()), mu, sd;
    for (const auto& c : m.components()) {
      mu.push_back(c.mu);
      sd.push_back(c.sigma);
    }
    return prefix + ".weights = " + detail::join(w) + "\n" + prefix + ".mu = " + detail::join(mu) + "\n" + prefix +
           ".sigma = " + detail::join(sd) + "\n";
  };
  std::string out = "name = " + s.name + "\nalgorithm = " + std::string(to_string(s.algorithm)) + "\n";
  out += "grid = " + detail::join({s.grid.lo, s.grid.hi, s.grid.step}) + "\n";
  out += model_lines("truth", s.truth) + model_lines("start", s.start);
  out += "kl_threshold = " + detail::fmt(s.cm.kl_threshold) + "\n";
  out += "max_iterations = " + std::to_string(s.fit.max_iterations) + "\n";
  out += "e2_tolerance = " + detail::fmt(s.cm.e2_tolerance) + "\n";
  out += "e2_max_inner = " + std::to_string(s.cm.e2_max_inner) + "\n";
  out += "max_outer = " + std::to_string(s.cm.max_outer) + "\n";
  out += "classify.start_boundary = " + detail::fmt(s.classify.start_boundary) + "\n";
  out += "classify.max_rounds = " + std::to_string(s.classify.max_rounds) + "\n";
  if (!s.qrows.empty()) {
    std::vector<double> l, r;
    for (const auto& q : s.qrows) {
      l.push_back(q.left_sigma);
      r.push_back(q.right_sigma);
    }
    out += "qtable.left_sigma = " + detail::join(l) + "\nqtable.right_sigma = " + detail::join(r) + "\n";
  }
  return out;
}

// ---- trace CSV ------------------------------------------------------------

inline std::string trace_csv_header(std::size_t labels) {
  std::string h = "step_index,step_kind,Q_per_N,F_per_N,G,R,R_double_prime,KL,KY";
  for (std::size_t j = 1; j <= labels; ++j) {
    const auto s = std::to_string(j);
    h += ",weight_" + s + ",mu_" + s + ",sigma_" + s;
  }
  return h;
}

inline std::string trace_csv_row(std::size_t index, const StepTrace& row) {
  using detail::fmt;
  const MeasureSet& m = row.measures;
  std::string line = std::to_string(index) + "," + std::string(to_string(row.kind));
  for (double v : {m.q_per_n, m.f_per_n, m.g, m.r, m.r_double_prime, m.kl, m.ky}) line += "," + fmt(v);
  for (std::size_t j = 0; j < row.components.size(); ++j) {
    line += "," + fmt(row.weights[j]) + "," + fmt(row.components[j].mu) + "," + fmt(row.components[j].sigma);
  }
  return line;
}

inline std::string trace_csv(const std::vector<StepTrace>& trace) {
  std::string out = trace_csv_header(trace.empty() ? 0 : trace.front().components.size()) + "\n";
  for (std::size_t k = 0; k < trace.size(); ++k) out += trace_csv_row(k, trace[k]) + "\n";
  return out;
}

// A trace CSV row read back as numbers.
struct ParsedTraceRow {
  std::size_t index;
  std::string kind;
  MeasureSet measures;  // h_x and h_y_theta are not logged and stay 0
  std::vector<double> weights;
  std::vector<double> mu;
  std::vector<double> sigma;
};

inline std::vector<ParsedTraceRow> parse_trace_csv(std::string_view text) {
  std::vector<ParsedTraceRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) return rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 9 || (cells.size() - 9) % 3 != 0) {
      throw Error(ErrorCode::config, "malformed trace row: " + line);
    }
    ParsedTraceRow r;
    r.index = detail::parse_count(cells[0], "step_index");
    r.kind = cells[1];
    MeasureSet& m = r.measures;
    double* fields[] = {&m.q_per_n, &m.f_per_n, &m.g, &m.r, &m.r_double_prime, &m.kl, &m.ky};
    for (std::size_t k = 0; k < 7; ++k) *fields[k] = detail::parse_real(cells[2 + k], "measure");
    for (std::size_t k = 9; k < cells.size(); k += 3) {
      r.weights.push_back(detail::parse_real(cells[k], "weight"));
      r.mu.push_back(detail::parse_real(cells[k + 1], "mu"));
      r.sigma.push_back(detail::parse_real(cells[k + 2], "sigma"));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---- Q table ----------------------------------------------------------------

struct QTableRow {
  double left_sigma;
  double right_sigma;
  double q_per_n;
  double f_per_n;
};

// Data from the true model; the weighting channel is the posterior of the
// true model with every sigma set to `left`, the log term uses `right`.
inline std::vector<QTableRow> q_table(const MixtureModel& truth, const Grid& grid, const std::vector<QRow>& rows) {
  const Distribution data = mixture_marginal(truth, grid);
  auto with_sigma = [&](double s) {
    std::vector<GaussianParams> comps;
    for (const auto& c : truth.components()) comps.emplace_back(c.mu, s);
    return MixtureModel(truth.weights(), std::move(comps));
  };
  std::vector<QTableRow> out;
  for (const auto& r : rows) {
    const Channel left = posterior_channel(with_sigma(r.left_sigma), data);
    const MixtureModel right = with_sigma(r.right_sigma);
    const double q = q_value(data, left, right);
    out.push_back({r.left_sigma, r.right_sigma, q, f_value(q, right.weights())});
  }
  return out;
}

// ---- runs ---------------------------------------------------------------------

struct RunSummary {
  std::string name;
  Algorithm algorithm = Algorithm::CMEM;
  std::size_t iterations = 0;
  bool converged = false;
  std::string stop_reason;
  std::optional<MeasureSet> final_measures;
  std::optional<MixtureModel> final_model;
  std::size_t e2_rounds = 0;
  double wall_time_s = 0.0;
  std::vector<std::optional<double>> boundaries;  // classification, one per round
  std::vector<QTableRow> qtable;
};

struct ExperimentOutcome {
  RunSummary summary;
  std::string trace_csv;
  std::optional<FitResult> fit;
  std::optional<ClassificationResult> classification;
};

inline RunSummary summarize(const std::string& name, Algorithm algorithm, const FitResult& r) {
  RunSummary s;
  s.name = name;
  s.algorithm = algorithm;
  s.iterations = r.iterations;
  s.converged = r.converged;
  s.stop_reason = std::string(to_string(r.stop_reason));
  s.final_measures = r.final_measures();
  s.final_model = r.final_model;
  s.e2_rounds = r.e2_rounds;
  return s;
}

inline FitResult run_fit(const ExperimentSpec& spec, Algorithm algorithm) {
  const Distribution data = spec.data();
  switch (algorithm) {
    case Algorithm::EM: return run_em(data, spec.start, spec.fit);
    case Algorithm::MM: return run_mm(data, spec.start, spec.fit);
    case Algorithm::CMEM: return run_cm_em(data, spec.start, spec.cm);
    default: throw Error(ErrorCode::config, "not a fitting algorithm");
  }
}

inline std::string classification_csv(const ClassificationResult& r) {
  std::string out = "round,boundary,I_YZ,I_semantic,class0_size\n";
  for (std::size_t k = 0; k < r.trace.size(); ++k) {
    const auto& t = r.trace[k];
    const auto size0 = std::count(t.partition.assignment.begin(), t.partition.assignment.end(), std::size_t{0});
    out += std::to_string(k) + "," + (t.boundary ? detail::fmt(*t.boundary) : std::string("noncontiguous")) + "," +
           detail::fmt(t.shannon_mi) + "," + detail::fmt(t.semantic_mi) + "," + std::to_string(size0) + "\n";
  }
  return out;
}

inline std::string qtable_csv(const std::vector<QTableRow>& rows) {
  std::string out = "left_sigma,right_sigma,Q_per_N,F_per_N\n";
  for (const auto& r : rows) {
    out += detail::fmt(r.left_sigma) + "," + detail::fmt(r.right_sigma) + "," + detail::fmt(r.q_per_n) + "," +
           detail::fmt(r.f_per_n) + "\n";
  }
  return out;
}

inline ExperimentOutcome run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentOutcome out;
  switch (spec.algorithm) {
    case Algorithm::EM:
    case Algorithm::MM:
    case Algorithm::CMEM: {
      FitResult r = run_fit(spec, spec.algorithm);
      out.summary = summarize(spec.name, spec.algorithm, r);
      out.trace_csv = trace_csv(r.trace);
      out.fit = std::move(r);
      break;
    }
    case Algorithm::CLASSIFY: {
      const Grid grid = spec.grid.make();
      const auto model = FittedMixture::from_model(spec.truth, grid);
      ClassificationResult r = run_cm_classification(model, Partition::split(grid, spec.classify.start_boundary),
                                                     spec.classify.max_rounds);
      out.summary.name = spec.name;
      out.summary.algorithm = spec.algorithm;
      out.summary.iterations = r.rounds;
      out.summary.converged = r.converged;
      out.summary.stop_reason = r.converged ? "repeat" : "max_rounds";
      for (const auto& t : r.trace) out.summary.boundaries.push_back(t.boundary);
      out.trace_csv = classification_csv(r);
      out.classification = std::move(r);
      break;
    }
    case Algorithm::QTABLE: {
      out.summary.name = spec.name;
      out.summary.algorithm = spec.algorithm;
      out.summary.converged = true;
      out.summary.stop_reason = "complete";
      out.summary.qtable = q_table(spec.truth, spec.grid.make(), spec.qrows);
      out.trace_csv = qtable_csv(out.summary.qtable);
      break;
    }
  }
  out.summary.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline nlohmann::json to_json(const MeasureSet& m) {
  return {{"Q_per_N", m.q_per_n}, {"F_per_N", m.f_per_n}, {"G", m.g},     {"R", m.r},
          {"R_double_prime", m.r_double_prime}, {"KL", m.kl}, {"KY", m.ky}, {"H_X", m.h_x},
          {"H_theta_Y", m.h_y_theta}};
}

inline nlohmann::json to_json(const MixtureModel& model) {
  nlohmann::json comps = nlohmann::json::array();
  for (std::size_t j = 0; j < model.size(); ++j) {
    comps.push_back({{"weight", model.weights()[j]}, {"mu", model.component(j).mu}, {"sigma", model.component(j).sigma}});
  }
  return comps;
}

inline nlohmann::json to_json(const RunSummary& s) {
  nlohmann::json j = {{"experiment", s.name},
                      {"algorithm", std::string(to_string(s.algorithm))},
                      {"iterations", s.iterations},
                      {"converged", s.converged},
                      {"stop_reason", s.stop_reason},
                      {"wall_time_s", s.wall_time_s},
                      {"units", "bits"}};
  if (s.final_measures) j["final_measures"] = to_json(*s.final_measures);
  if (s.final_model) j["final_model"] = to_json(*s.final_model);
  if (s.algorithm == Algorithm::CMEM) j["e2_rounds"] = s.e2_rounds;
  if (!s.boundaries.empty()) {
    nlohmann::json b = nlohmann::json::array();
    for (const auto& x : s.boundaries) b.push_back(x ? nlohmann::json(*x) : nlohmann::json(nullptr));
    j["boundaries"] = b;
  }
  if (!s.qtable.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : s.qtable) {
      rows.push_back({{"left_sigma", r.left_sigma}, {"right_sigma", r.right_sigma}, {"Q_per_N", r.q_per_n},
                      {"F_per_N", r.f_per_n}});
    }
    j["qtable"] = rows;
  }
  return j;
}

// Writes <dir>/<name>.trace.csv and <dir>/<name>.summary.json.
inline void write_outputs(const ExperimentOutcome& o, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / (o.summary.name + ".trace.csv"), std::ios::binary) << o.trace_csv;
  std::ofstream(dir / (o.summary.name + ".summary.json"), std::ios::binary) << to_json(o.summary).dump(2) << "\n";
}

// ---- comparison ---------------------------------------------------------------

struct Comparison {
  std::string name;
  FitResult em;
  FitResult mm;
  FitResult cmem;
};

// EM, MM and CM-EM on the same data and start with one KL threshold.
inline Comparison compare_algorithms(const ExperimentSpec& spec) {
  ExperimentSpec s = spec;
  s.fit.kl_threshold = s.cm.kl_threshold;
  s.validate();
  return {s.name, run_fit(s, Algorithm::EM), run_fit(s, Algorithm::MM), run_fit(s, Algorithm::CMEM)};
}

inline std::string format_comparison(const Comparison& c) {
  std::ostringstream os;
  os << "algorithm,iterations,converged,KL";
  const std::size_t n = c.cmem.final_model.size();
  for (std::size_t j = 1; j <= n; ++j) os << ",mu_" << j;
  for (std::size_t j = 1; j <= n; ++j) os << ",sigma_" << j;
  for (std::size_t j = 1; j <= n; ++j) os << ",weight_" << j;
  os << "\n";
  auto line = [&](const char* label, const FitResult& r) {
    os << label << "," << r.iterations << "," << (r.converged ? "yes" : "no") << ","
       << detail::fmt(r.final_measures().kl);
    for (const auto& comp : r.final_model.components()) os << "," << detail::fmt(comp.mu);
    for (const auto& comp : r.final_model.components()) os << "," << detail::fmt(comp.sigma);
    for (double w : r.final_model.weights().probs()) os << "," << detail::fmt(w);
    os << "\n";
  };
  line("EM", c.em);
  line("MM", c.mm);
  line("CM-EM", c.cmem);
  return os.str();
}

}  // namespace cmem
