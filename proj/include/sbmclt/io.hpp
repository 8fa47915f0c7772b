#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbmclt/experiments.hpp"
#include "sbmclt/model.hpp"
#include "sbmclt/sbm.hpp"
#include "sbmclt/spectral.hpp"

namespace sbmclt {

inline constexpr int kSchemaVersion = 1;

/// Model definition read from a flat key-value file:
///
///   # comment
///   d = 2
///   K = 3 1 1 2          (row-major; commas and [] are accepted)
///   Lambda = 0 0 0 0     (optional, zeros)
///   mu = 0.6 0.4
///   beta = 0 0           (optional, zeros)
struct ModelSpec {
  Kernel kernel;
  TypeProfile profile;
};

ModelSpec parse_model(std::istream& in);
ModelSpec load_model(const std::filesystem::path& path);

/// Canonical text form accepted by parse_model.
std::string format_model(const ModelSpec& model);

nlohmann::json to_json(const Vector& v);
nlohmann::json to_json(const Matrix& m);
nlohmann::json to_json(const RhoSolution& sol);
nlohmann::json to_json(const LimitLaw& law);
nlohmann::json to_json(const MomentSummary& s);
nlohmann::json to_json(const CltReport& report);
nlohmann::json to_json(const LlnReport& report);
nlohmann::json to_json(const WalkIdentityReport& report);
nlohmann::json to_json(const FluctuationReport& report);
nlohmann::json to_json(const ErReport& report);

/// Wraps a payload as {"schema_version", "command", "config", "result"}.
nlohmann::json envelope(const std::string& command, nlohmann::json config, nlohmann::json result);

/// "seed,l,size,count_1..count_d" rows, one per component.
void write_components_csv(std::ostream& out, const GraphSample& sample, bool header = true);

/// "n,seed,stat_1..stat_d" rows, one per replica and size.
void write_replicas_csv(std::ostream& out, const CltReport& report);

/// Gnuplot-ready "bin_center count density" columns.
void write_histogram(std::ostream& out, const std::vector<double>& xs, int bins = 40);

/// Gnuplot-ready "normal_quantile standardized_sample" columns.
void write_qq(std::ostream& out, std::vector<double> xs);

/// Text with 17 significant digits.
std::string fmt17(double x);

}  // namespace sbmclt
