#include "sbmclt/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "sbmclt/errors.hpp"
#include "sbmclt/stats.hpp"

namespace sbmclt {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_numbers(const std::string& key, std::string text) {
  for (char& ch : text)
    if (ch == ',' || ch == '[' || ch == ']' || ch == ';') ch = ' ';
  std::istringstream is(text);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t used = 0;
      const double x = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(x);
    } catch (const std::exception&) {
      throw ModelError("model: key '" + key + "' has non-numeric value '" + tok + "'");
    }
  }
  return out;
}

Matrix square(const std::string& key, const std::vector<double>& xs, int d) {
  if (static_cast<int>(xs.size()) != d * d)
    throw ModelError("model: " + key + " must have d*d = " + std::to_string(d * d) + " entries, got " +
                     std::to_string(xs.size()));
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = xs[i * d + j];
  return m;
}

Vector vec(const std::string& key, const std::vector<double>& xs, int d) {
  if (static_cast<int>(xs.size()) != d)
    throw ModelError("model: " + key + " must have d = " + std::to_string(d) + " entries, got " +
                     std::to_string(xs.size()));
  return Eigen::Map<const Vector>(xs.data(), d);
}

std::string join_row_major(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out += (out.empty() ? "" : " ") + fmt17(m(i, j));
  return out;
}

std::string join(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? " " : "") + fmt17(v[i]);
  return out;
}

}  // namespace

std::string fmt17(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

ModelSpec parse_model(std::istream& in) {
  std::map<std::string, std::string> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ModelError("model: line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key != "d" && key != "K" && key != "Lambda" && key != "mu" && key != "beta")
      throw ModelError("model: unknown key '" + key + "'");
    if (entries.count(key)) throw ModelError("model: duplicate key '" + key + "'");
    entries[key] = line.substr(eq + 1);
  }
  for (const char* required : {"d", "K", "mu"})
    if (!entries.count(required)) throw ModelError(std::string("model: missing key '") + required + "'");

  const auto dvals = parse_numbers("d", entries["d"]);
  if (dvals.size() != 1 || dvals[0] < 1 || dvals[0] != std::floor(dvals[0]))
    throw ModelError("model: d must be a positive integer");
  const int d = static_cast<int>(dvals[0]);

  Matrix K = square("K", parse_numbers("K", entries["K"]), d);
  Matrix L = entries.count("Lambda") ? square("Lambda", parse_numbers("Lambda", entries["Lambda"]), d)
                                     : Matrix::Zero(d, d);
  Vector mu = vec("mu", parse_numbers("mu", entries["mu"]), d);
  Vector beta = entries.count("beta") ? vec("beta", parse_numbers("beta", entries["beta"]), d)
                                      : Vector::Zero(d);
  return ModelSpec{Kernel::make(std::move(K), std::move(L)),
                   TypeProfile::make(std::move(mu), std::move(beta))};
}

ModelSpec load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("model: cannot open '" + path.string() + "'");
  return parse_model(in);
}

std::string format_model(const ModelSpec& model) {
  std::ostringstream os;
  os << "d = " << model.kernel.dim() << '\n'
     << "K = " << join_row_major(model.kernel.rates) << '\n'
     << "Lambda = " << join_row_major(model.kernel.perturbation) << '\n'
     << "mu = " << join(model.profile.mu) << '\n'
     << "beta = " << join(model.profile.beta) << '\n';
  return os.str();
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(to_json(Vector(m.row(i).transpose())));
  return out;
}

json to_json(const RhoSolution& sol) {
  return {{"rho", to_json(sol.rho)},
          {"iterations", sol.iterations},
          {"residual", sol.residual},
          {"supercritical", sol.supercritical},
          {"lambda1", sol.lambda1}};
}

json to_json(const LimitLaw& law) {
  return {{"frame", std::string(to_string(law.frame))},
          {"mean", to_json(law.mean)},
          {"covariance", to_json(law.covariance)},
          {"J", to_json(law.J)},
          {"D", to_json(law.D)}};
}

json to_json(const MomentSummary& s) {
  return {{"R", s.R},
          {"sample_mean", to_json(s.sample_mean)},
          {"sample_cov", to_json(s.sample_cov)},
          {"standard_errors", to_json(s.standard_errors)},
          {"skewness", to_json(s.skewness)},
          {"excess_kurtosis", to_json(s.excess_kurtosis)}};
}

json to_json(const CltReport& report) {
  json levels = json::array();
  for (const auto& l : report.levels)
    levels.push_back({{"n", l.n},
                      {"N", l.N},
                      {"moments", to_json(l.summary)},
                      {"mean_error", l.mean_error},
                      {"max_se", l.max_se},
                      {"cov_rel_error", l.cov_rel_error},
                      {"cov_rel_error_se", l.cov_rel_error_se}});
  return {{"frame", std::string(to_string(report.frame))},
          {"theory", to_json(report.theory)},
          {"levels", levels},
          {"verdicts",
           {{"mean", report.mean_ok},
            {"covariance", report.cov_ok},
            {"monotone_shrinkage", report.monotone_ok},
            {"normality_indicators", report.normality_ok},
            {"pass", report.pass}}},
          {"frame_arbitration",
           {{"winner", report.frame_arbitration},
            {"error_k_weighted", report.arbitration_error_k_weighted},
            {"error_raw", report.arbitration_error_raw}}}};
}

json to_json(const LlnReport& report) {
  json levels = json::array();
  for (const auto& l : report.levels)
    levels.push_back({{"n", l.n},
                      {"N", l.N},
                      {"mean_deviation", l.mean_deviation},
                      {"q99_deviation", l.q99_deviation},
                      {"coverage", l.coverage},
                      {"max_second_component", l.max_second},
                      {"second_component_bound", l.second_bound},
                      {"giant_fraction_variance", l.giant_fraction_variance},
                      {"max_giant_fraction", l.max_giant_fraction}});
  return {{"target", to_json(report.target)},
          {"supercritical", report.supercritical},
          {"levels", levels},
          {"verdicts",
           {{"coverage", report.coverage_ok},
            {"shrinkage", report.shrink_ok},
            {"second_component", report.second_ok},
            {"pass", report.pass}}}};
}

namespace {
json to_json(const KsReport& rep) {
  json tests = json::array();
  for (const auto& t : rep.tests)
    tests.push_back({{"name", t.name}, {"statistic", t.ks.statistic}, {"p_value", t.ks.p_value}});
  return {{"alpha", rep.alpha},
          {"bonferroni_threshold", rep.tests.empty() ? rep.alpha : rep.alpha / rep.tests.size()},
          {"tests", tests},
          {"pass", rep.pass}};
}
}  // namespace

json to_json(const WalkIdentityReport& report) {
  return {{"N", report.N},
          {"v", to_json(report.v)},
          {"y0", report.y0},
          {"walk_vs_graph", to_json(report.walk_vs_graph)},
          {"null_control", to_json(report.null_control)},
          {"mean_largest_jump_walk", to_json(report.mean_largest_walk)},
          {"mean_largest_jump_graph", to_json(report.mean_largest_graph)},
          {"se_difference", to_json(report.se_difference)},
          {"verdicts", {{"jump_match", report.jump_match_ok}, {"pass", report.pass}}}};
}

json to_json(const FluctuationReport& report) {
  json blocks = json::array();
  for (const auto& b : report.blocks)
    blocks.push_back({{"i", b.i},
                      {"j", b.j},
                      {"empirical", to_json(b.empirical)},
                      {"theory", to_json(b.theory)},
                      {"max_rel_error", b.max_rel_error}});
  return {{"N", report.N},
          {"grid", report.grid},
          {"blocks", blocks},
          {"max_rel_error", report.max_rel_error},
          {"max_cross_type_z", report.max_cross_type_z},
          {"verdicts", {{"cross_type", report.cross_type_ok}, {"pass", report.pass}}}};
}

json to_json(const ErReport& report) {
  json levels = json::array();
  for (const auto& l : report.levels)
    levels.push_back({{"n", l.n},
                      {"mean_fraction", l.mean_fraction},
                      {"se_fraction", l.se_fraction},
                      {"variance", l.variance},
                      {"variance_rel_error", l.variance_rel_error}});
  return {{"c", report.c},
          {"rho", report.rho},
          {"sigma2", report.sigma2},
          {"levels", levels},
          {"verdicts",
           {{"mean", report.mean_ok}, {"variance", report.variance_ok}, {"pass", report.pass}}}};
}

json envelope(const std::string& command, json config, json result) {
  return {{"schema_version", kSchemaVersion},
          {"command", command},
          {"config", std::move(config)},
          {"result", std::move(result)}};
}

void write_components_csv(std::ostream& out, const GraphSample& sample, bool header) {
  const auto d = sample.profile.dim();
  if (header) {
    out << "seed,l,size";
    for (int k = 0; k < d; ++k) out << ",count_" << (k + 1);
    out << '\n';
  }
  for (std::size_t l = 0; l < sample.components.size(); ++l) {
    const auto& c = sample.components[l];
    out << sample.seed << ',' << (l + 1) << ',' << c.size;
    for (auto x : c.counts) out << ',' << x;
    out << '\n';
  }
}

void write_replicas_csv(std::ostream& out, const CltReport& report) {
  const auto d = report.theory.mean.size();
  out << "n,seed";
  for (Eigen::Index k = 0; k < d; ++k) out << ",stat_" << (k + 1);
  out << '\n';
  for (const auto& level : report.levels)
    for (std::size_t r = 0; r < level.statistics.size(); ++r) {
      out << level.n << ',' << level.seeds[r];
      for (Eigen::Index k = 0; k < d; ++k) out << ',' << fmt17(level.statistics[r][k]);
      out << '\n';
    }
}

void write_histogram(std::ostream& out, const std::vector<double>& xs, int bins) {
  if (xs.empty() || bins < 1) return;
  const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
  const double lo = *lo_it;
  const double width = std::max((*hi_it - lo) / bins, 1e-300);
  std::vector<std::int64_t> counts(bins, 0);
  for (double x : xs) ++counts[std::min(bins - 1, static_cast<int>((x - lo) / width))];
  out << "# bin_center count density\n";
  for (int b = 0; b < bins; ++b)
    out << fmt17(lo + (b + 0.5) * width) << ' ' << counts[b] << ' '
        << fmt17(static_cast<double>(counts[b]) / (xs.size() * width)) << '\n';
}

void write_qq(std::ostream& out, std::vector<double> xs) {
  if (xs.size() < 2) return;
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1));
  out << "# normal_quantile standardized_sample\n";
  for (std::size_t i = 0; i < xs.size(); ++i)
    out << fmt17(normal_quantile((i + 0.5) / n)) << ' ' << fmt17((xs[i] - mean) / sd) << '\n';
}

}  // namespace sbmclt
