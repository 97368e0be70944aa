// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "raretype/database.hpp"
#include "raretype/inference.hpp"
#include "raretype/oracle.hpp"
#include "raretype/prior.hpp"
#include "raretype/pyp.hpp"
#include "raretype/surface.hpp"

namespace raretype {

enum class ExperimentKind { ModelFit, Surface, Test1, Test2, Test3 };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::Test2;

  // Source: a database file, or synthetic CRP draws at `generating`.
  std::optional<std::filesystem::path> database;
  DatabaseOptions database_options;
  std::optional<HyperParams> generating;

  std::size_t n_population = 2085;
  std::size_t n_sample = 100;
  std::size_t n_replicates = 100;
  std::size_t n_populations = 5;  // synthetic populations for Tests 2 and 3
  Seed seed{1};
  std::filesystem::path output_dir = ".";

  Hyperprior prior = Hyperprior::diffuse();
  MhConfig mh = MhConfig::with_defaults(200'000, Seed{0});
  std::size_t grid_points = 41;
  double grid_width = 4.0;  // surface half-width in Fisher standard deviations
  std::size_t threads = 1;

  // Throws DomainError on unknown keys or violated invariants.
  static ExperimentSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

struct RankedSeries {
  std::string series_id;
  std::vector<double> rel_freq;  // non-increasing
};

struct ModelFitResult {
  MleResult mle;
  std::vector<RankedSeries> series;  // "source", then "replicate_<i>"
  RankedSeries power_law;            // c * i^(-1/alpha_hat) over the source ranks
  // Fraction of ranks 1..100 where the source lies inside the replicate envelope.
  double envelope_coverage = 0.0;
};

struct LrComparisonRow {
  std::size_t population_id = 0;
  std::size_t replicate_id = 0;
  double log10_lr_true = 0.0;
  double log10_lr_true_se = 0.0;
  double log10_lr_bayes = 0.0;
  double log10_error = 0.0;  // log10_lr_true - log10_lr_bayes
};

struct SkippedReplicate {
  std::size_t population_id = 0;
  std::size_t replicate_id = 0;
  std::string reason;
};

struct ComparisonResult {
  std::vector<LrComparisonRow> rows;  // sorted by (population_id, replicate_id)
  std::vector<SkippedReplicate> skipped;
  double median_abs_error = 0.0;
  double median_error = 0.0;
};

struct SurfaceResult {
  MleResult mle;
  Surface alpha_theta;
  Surface phi_theta;
  double level95 = 0.0;
  double level99 = 0.0;
};

ModelFitResult run_model_fit(const ExperimentSpec& spec);
ComparisonResult run_test1(const ExperimentSpec& spec);
ComparisonResult run_test2(const ExperimentSpec& spec);
ComparisonResult run_test3(const ExperimentSpec& spec);
SurfaceResult run_surface(const ExperimentSpec& spec);

// One replicate shared by Tests 1-3: subsample without replacement, draw a suspect of a
// type absent from the subsample, and compare the true LR with the model LR. `labels`
// holds a type id per population member. Returns nullopt (with `reason`) when every
// population type already occurs in the subsample.
struct ReplicateContext {
  const std::vector<std::size_t>* labels;
  const PopulationFreqs* freqs;
  std::optional<HyperParams> known_params;  // Test 3
};
std::optional<LrComparisonRow> run_replicate(const ExperimentSpec& spec, const ReplicateContext& ctx,
                                             std::size_t population_id, std::size_t replicate_id,
                                             std::string& reason);

// Runs the experiment and writes <name>.csv (two CSVs for surface) and manifest.json into
// spec.output_dir. Returns the manifest.
nlohmann::json run_experiment(const ExperimentSpec& spec);

}  // namespace raretype
