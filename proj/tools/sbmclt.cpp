// sbmclt: giant-component laws and Monte Carlo checks for supercritical
// stochastic block models.
//
// Exit status: 0 success / PASS, 1 verdict FAIL, 2 usage or model error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sbmclt/errors.hpp"
#include "sbmclt/experiments.hpp"
#include "sbmclt/io.hpp"
#include "sbmclt/sbm.hpp"
#include "sbmclt/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sbmclt;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

std::string fmt6(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

std::string fmt6(const Vector& v) {
  std::string out = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt6(v[i]);
  return out + ")";
}

void print_matrix(const std::string& name, const Matrix& m) {
  std::cout << name << " =\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    std::cout << "  " << fmt6(Vector(m.row(i).transpose())) << '\n';
}

const char* verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

struct Common {
  std::string model_path;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir;
  bool json_stdout = false;
};

void emit_json(const Common& common, const std::string& name, const json& doc) {
  if (common.json_stdout) std::cout << doc.dump(2) << '\n';
  if (common.out_dir.empty()) return;
  fs::create_directories(common.out_dir);
  std::ofstream(fs::path(common.out_dir) / (name + ".json")) << doc.dump(2) << '\n';
}

json model_json(const ModelSpec& m) {
  return {{"d", m.kernel.dim()},
          {"K", to_json(m.kernel.rates)},
          {"Lambda", to_json(m.kernel.perturbation)},
          {"mu", to_json(m.profile.mu)},
          {"beta", to_json(m.profile.beta)}};
}

ExperimentConfig make_config(const ModelSpec& model, const Common& common,
                             std::vector<std::int64_t> n_list, int replicas) {
  ExperimentConfig c;
  c.kernel = model.kernel;
  c.profile = model.profile;
  c.n_list = std::move(n_list);
  c.replicas = replicas;
  c.base_seed = common.seed;
  c.threads = common.threads;
  return c;
}

json config_json(const ExperimentConfig& c, const Common& common) {
  return {{"n_list", c.n_list},   {"replicas", c.replicas}, {"seed", c.base_seed},
          {"frame", std::string(to_string(c.frame))}, {"model_file", common.model_path},
          {"y0", c.y0},           {"grid", c.grid}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Giant-component laws and Monte Carlo checks for stochastic block models"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--threads", common.threads, "Worker threads (0 = available parallelism)");
  app.add_option("--out", common.out_dir, "Directory for JSON/CSV/data outputs");
  app.add_flag("--json", common.json_stdout, "Also print the JSON summary to stdout");

  auto add_model = [&](CLI::App* sub) {
    sub->add_option("model", common.model_path, "Model file")->required()->check(CLI::ExistingFile);
  };
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Base seed (required)")->required();
  };

  double tol = kDefaultTolerance;
  auto* solve = app.add_subcommand("solve-rho", "Solve the survival fixed point rho");
  add_model(solve);
  solve->add_option("--tol", tol, "Sup-norm step tolerance")->check(CLI::PositiveNumber);

  std::string frame_text = "k_weighted";
  auto* law_cmd = app.add_subcommand("limit-law", "Gaussian limit of the giant-component vector");
  add_model(law_cmd);
  law_cmd->add_option("--frame", frame_text, "k_weighted | raw");

  std::int64_t n = 0;
  std::string dump_components;
  std::string dump_edges;
  auto* sample_cmd = app.add_subcommand("sample", "Sample one graph and print component tallies");
  add_model(sample_cmd);
  sample_cmd->add_option("--n", n, "Target vertex count")->required()->check(CLI::PositiveNumber);
  add_seed(sample_cmd);
  sample_cmd->add_option("--dump-components", dump_components, "CSV file for component tallies");
  sample_cmd->add_option("--dump-edges", dump_edges, "Debug: write the edge stream ('u v' lines)");

  std::vector<std::int64_t> n_list;
  int replicas = 0;
  auto* clt = app.add_subcommand("clt", "CLT experiment for the giant-component vector");
  add_model(clt);
  clt->add_option("--n-list", n_list, "Ascending sizes")->required()->delimiter(',');
  clt->add_option("--replicas", replicas, "Replicas per size")->required();
  add_seed(clt);
  clt->add_option("--frame", frame_text, "k_weighted | raw");

  auto* lln = app.add_subcommand("lln", "Law of large numbers and second-component check");
  add_model(lln);
  lln->add_option("--n-list", n_list, "Ascending sizes")->required()->delimiter(',');
  lln->add_option("--replicas", replicas, "Replicas per size")->required();
  add_seed(lln);

  double y0 = 0.0;
  auto* walk = app.add_subcommand("walk-verify", "Walk-side vs graph-side hitting-time law");
  add_model(walk);
  walk->add_option("--n", n, "Target vertex count")->required()->check(CLI::PositiveNumber);
  walk->add_option("--replicas", replicas, "Replicas per side")->required();
  walk->add_option("--y0", y0, "Evaluation level for T(y0) (default: automatic)");
  add_seed(walk);

  std::vector<double> grid;
  auto* fluct = app.add_subcommand("fluct", "Clock-field fluctuation covariance check");
  add_model(fluct);
  fluct->add_option("--n", n, "Target vertex count")->required()->check(CLI::PositiveNumber);
  fluct->add_option("--replicas", replicas, "Replicas")->required();
  fluct->add_option("--grid", grid, "Times t (comma separated)")->required()->delimiter(',');
  add_seed(fluct);

  double c = 0.0;
  auto* er = app.add_subcommand("er-baseline", "Erdos-Renyi giant-component reproduction");
  er->add_option("--c", c, "Mean degree")->required();
  er->add_option("--n-list", n_list, "Ascending sizes")->required()->delimiter(',');
  er->add_option("--replicas", replicas, "Replicas per size")->required();
  add_seed(er);

  double lambda = 0.0;
  auto* d1 = app.add_subcommand("d1-check", "One-type reduction of the general limit law");
  d1->add_option("--c", c, "Mean degree")->required();
  d1->add_option("--lambda", lambda, "Perturbation")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*solve) {
      const ModelSpec model = load_model(common.model_path);
      const RhoSolution sol = solve_rho(model.kernel, model.profile, tol);
      std::cout << "lambda1 = " << fmt6(sol.lambda1) << '\n'
                << "supercritical = " << (sol.supercritical ? "true" : "false") << '\n'
                << "rho = " << fmt6(sol.rho) << '\n'
                << "iterations = " << sol.iterations << ", residual = " << fmt6(sol.residual) << '\n';
      emit_json(common, "solve_rho",
                envelope("solve-rho", {{"model", model_json(model)}, {"tol", tol}}, to_json(sol)));
      return kExitPass;
    }

    if (*law_cmd) {
      const ModelSpec model = load_model(common.model_path);
      const Frame frame = parse_frame(frame_text);
      const LimitLaw law = limit_law(model.kernel, model.profile, frame);
      std::cout << "frame = " << to_string(frame) << '\n' << "mean = " << fmt6(law.mean) << '\n';
      print_matrix("covariance", law.covariance);
      print_matrix("J", law.J);
      emit_json(common, "limit_law",
                envelope("limit-law", {{"model", model_json(model)}, {"frame", frame_text}},
                         to_json(law)));
      return kExitPass;
    }

    if (*sample_cmd) {
      const ModelSpec model = load_model(common.model_path);
      const TypeProfile prof = model.profile.at_size(n);
      std::ofstream edges_out;
      EdgeSink sink;
      if (!dump_edges.empty()) {
        edges_out.open(dump_edges);
        sink = [&](std::int64_t u, std::int64_t v) { edges_out << u << ' ' << v << '\n'; };
      }
      const GraphSample s = sample_sbm(model.kernel, prof, common.seed, sink);
      std::cout << "N = " << prof.total() << ", edges = " << s.num_edges
                << ", components = " << s.components.size() << '\n';
      for (std::size_t l = 0; l < std::min<std::size_t>(5, s.components.size()); ++l) {
        std::cout << "C(" << (l + 1) << "): size " << s.components[l].size << ", counts (";
        for (std::size_t k = 0; k < s.components[l].counts.size(); ++k)
          std::cout << (k ? ", " : "") << s.components[l].counts[k];
        std::cout << ")\n";
      }
      if (!dump_components.empty()) {
        std::ofstream out(dump_components);
        write_components_csv(out, s);
      }
      return kExitPass;
    }

    if (*clt) {
      const ModelSpec model = load_model(common.model_path);
      ExperimentConfig config = make_config(model, common, n_list, replicas);
      config.frame = parse_frame(frame_text);
      const CltReport rep = run_clt_experiment(config);
      std::cout << "theory mean = " << fmt6(rep.theory.mean) << '\n';
      print_matrix("theory covariance", rep.theory.covariance);
      for (const auto& l : rep.levels)
        std::cout << "n=" << l.n << "  mean=" << fmt6(l.summary.sample_mean)
                  << "  mean_err=" << fmt6(l.mean_error) << " (4SE=" << fmt6(4 * l.max_se) << ")"
                  << "  cov_rel_err=" << fmt6(l.cov_rel_error) << " +- " << fmt6(l.cov_rel_error_se)
                  << '\n';
      const auto& last = rep.levels.back().summary;
      std::cout << "skewness = " << fmt6(last.skewness)
                << ", excess kurtosis = " << fmt6(last.excess_kurtosis) << '\n'
                << "frame arbitration: " << rep.frame_arbitration << '\n'
                << "mean " << verdict(rep.mean_ok) << ", covariance " << verdict(rep.cov_ok)
                << ", monotone " << verdict(rep.monotone_ok) << " => " << verdict(rep.pass) << '\n';
      emit_json(common, "clt", envelope("clt", config_json(config, common), to_json(rep)));
      if (!common.out_dir.empty()) {
        std::ofstream csv(fs::path(common.out_dir) / "clt_replicas.csv");
        write_replicas_csv(csv, rep);
        const auto& stats = rep.levels.back().statistics;
        for (Eigen::Index k = 0; k < rep.theory.mean.size(); ++k) {
          std::vector<double> col;
          for (const auto& x : stats) col.push_back(x[k]);
          std::ofstream hist(fs::path(common.out_dir) / ("clt_hist_" + std::to_string(k + 1) + ".dat"));
          write_histogram(hist, col);
          std::ofstream qq(fs::path(common.out_dir) / ("clt_qq_" + std::to_string(k + 1) + ".dat"));
          write_qq(qq, col);
        }
      }
      return rep.pass ? kExitPass : kExitFail;
    }

    if (*lln) {
      const ModelSpec model = load_model(common.model_path);
      const ExperimentConfig config = make_config(model, common, n_list, replicas);
      const LlnReport rep = run_lln_experiment(config);
      std::cout << "target M rho = " << fmt6(rep.target) << '\n'
                << "n  mean_dev  q99_dev  coverage  max_C2  bound\n";
      for (const auto& l : rep.levels)
        std::cout << l.n << "  " << fmt6(l.mean_deviation) << "  " << fmt6(l.q99_deviation) << "  "
                  << fmt6(l.coverage) << "  " << l.max_second << "  " << fmt6(l.second_bound) << '\n';
      std::cout << "coverage " << verdict(rep.coverage_ok) << ", shrinkage " << verdict(rep.shrink_ok)
                << ", second component " << verdict(rep.second_ok) << " => " << verdict(rep.pass)
                << '\n';
      emit_json(common, "lln", envelope("lln", config_json(config, common), to_json(rep)));
      return rep.pass ? kExitPass : kExitFail;
    }

    if (*walk) {
      const ModelSpec model = load_model(common.model_path);
      ExperimentConfig config = make_config(model, common, {n}, replicas);
      config.y0 = y0;
      const WalkIdentityReport rep = run_walk_identity_test(config);
      std::cout << "N = " << rep.N << ", v = " << fmt6(rep.v) << ", y0 = " << fmt6(rep.y0) << '\n';
      for (const auto& [label, ks] : {std::pair{"walk vs graph", &rep.walk_vs_graph},
                                      std::pair{"null control", &rep.null_control}}) {
        std::cout << label << ":\n";
        for (const auto& t : ks->tests)
          std::cout << "  " << t.name << "  D=" << fmt6(t.ks.statistic) << "  p=" << fmt6(t.ks.p_value)
                    << '\n';
        std::cout << "  => " << verdict(ks->pass) << '\n';
      }
      std::cout << "largest jump mean: walk " << fmt6(rep.mean_largest_walk) << ", graph "
                << fmt6(rep.mean_largest_graph) << " => " << verdict(rep.jump_match_ok) << '\n'
                << "overall " << verdict(rep.pass) << '\n';
      emit_json(common, "walk_verify", envelope("walk-verify", config_json(config, common), to_json(rep)));
      return rep.pass ? kExitPass : kExitFail;
    }

    if (*fluct) {
      const ModelSpec model = load_model(common.model_path);
      ExperimentConfig config = make_config(model, common, {n}, replicas);
      config.grid = grid;
      const FluctuationReport rep = run_fluctuation_check(config);
      for (const auto& b : rep.blocks)
        std::cout << "block (" << (b.i + 1) << "," << (b.j + 1) << "): max relative error "
                  << fmt6(b.max_rel_error) << '\n';
      std::cout << "max cross-type |z| = " << fmt6(rep.max_cross_type_z) << '\n'
                << "overall " << verdict(rep.pass) << '\n';
      emit_json(common, "fluct", envelope("fluct", config_json(config, common), to_json(rep)));
      return rep.pass ? kExitPass : kExitFail;
    }

    if (*er) {
      const ErReport rep = er_baseline(c, n_list, replicas, common.seed, common.threads);
      std::cout << "rho(c) = " << fmt6(rep.rho) << ", sigma2(c) = " << fmt6(rep.sigma2) << '\n'
                << "n  mean_fraction  se  variance  rel_err\n";
      for (const auto& l : rep.levels)
        std::cout << l.n << "  " << fmt6(l.mean_fraction) << "  " << fmt6(l.se_fraction) << "  "
                  << fmt6(l.variance) << "  " << fmt6(l.variance_rel_error) << '\n';
      std::cout << "mean " << verdict(rep.mean_ok) << ", variance " << verdict(rep.variance_ok)
                << " => " << verdict(rep.pass) << '\n';
      emit_json(common, "er_baseline",
                envelope("er-baseline",
                         {{"c", c}, {"n_list", n_list}, {"replicas", replicas}, {"seed", common.seed}},
                         to_json(rep)));
      return rep.pass ? kExitPass : kExitFail;
    }

    if (*d1) {
      const ReductionResiduals res = reduce_d1_check(c, lambda);
      const bool ok = res.variance < 1e-12 && res.mean < 1e-12;
      std::cout << "variance residual = " << fmt6(res.variance) << '\n'
                << "mean residual = " << fmt6(res.mean) << '\n'
                << verdict(ok) << '\n';
      emit_json(common, "d1_check",
                envelope("d1-check", {{"c", c}, {"lambda", lambda}},
                         {{"variance_residual", res.variance}, {"mean_residual", res.mean}, {"pass", ok}}));
      return ok ? kExitPass : kExitFail;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
