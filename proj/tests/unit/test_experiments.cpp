// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "raretype/experiments.hpp"

using namespace raretype;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("raretype_exp_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// One-locus database with `types` equally frequent types of `copies` members each.
fs::path uniform_database(const fs::path& dir, std::size_t types, std::size_t copies) {
  const auto path = dir / "uniform.tsv";
  std::ofstream f(path);
  f << "id\tlocus\n";
  std::size_t id = 0;
  for (std::size_t c = 0; c < copies; ++c)
    for (std::size_t t = 0; t < types; ++t) f << ++id << '\t' << t << '\n';
  return path;
}

ExperimentSpec small_synthetic(ExperimentKind kind) {
  ExperimentSpec s;
  s.kind = kind;
  s.generating = HyperParams(0.5, 20.0);
  s.n_population = 800;
  s.n_sample = 60;
  s.n_replicates = 6;
  s.n_populations = 2;
  s.seed = Seed{5};
  s.mh = MhConfig::with_defaults(20'000, Seed{0});
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("experiment specs parse, validate and round-trip") {
  const auto j = nlohmann::json::parse(R"({
    "name": "test2", "source": {"synthetic": {"alpha": 0.5, "theta": 216}},
    "n_population": 2085, "n_sample": 100, "n_replicates": 100, "n_populations": 5,
    "seed": 11, "prior": "default", "mh": {"iterations": 100000, "chains": 2}
  })");
  const auto s = ExperimentSpec::from_json(j);
  CHECK(s.kind == ExperimentKind::Test2);
  CHECK(s.mh.burn_in == 10'000);
  CHECK(s.mh.chains == 2);
  CHECK(ExperimentSpec::from_json(s.to_json()).to_json() == s.to_json());

  auto bad = j;
  bad["unexpected"] = 1;
  CHECK_THROWS_AS(ExperimentSpec::from_json(bad), DomainError);
  bad = j;
  bad["mh"]["warmup"] = 3;
  CHECK_THROWS_AS(ExperimentSpec::from_json(bad), DomainError);
  bad = j;
  bad.erase("source");
  CHECK_THROWS_AS(ExperimentSpec::from_json(bad), DomainError);
  bad = j;
  bad["n_replicates"] = -3;
  CHECK_THROWS_AS(ExperimentSpec::from_json(bad), DomainError);
  bad = j;
  bad["name"] = "test9";
  CHECK_THROWS_AS(ExperimentSpec::from_json(bad), DomainError);
  CHECK_THROWS_AS(ExperimentSpec::from_json(nlohmann::json::parse(R"({"name": "test1"})")), DomainError);
}

TEST_CASE("test3 uses the closed form at the generating parameters") {
  auto s = small_synthetic(ExperimentKind::Test3);
  s.n_sample = 99;  // n = 99 database members plus the suspect
  const auto r = run_test3(s);
  REQUIRE(!r.rows.empty());
  for (const auto& row : r.rows) CHECK(row.log10_lr_bayes == doctest::Approx(std::log10(120.0 / 0.5)));
  s.n_sample = 100;
  const auto r100 = run_test3(s);
  for (const auto& row : r100.rows) CHECK(row.log10_lr_bayes == doctest::Approx(std::log10(242.0)));
}

TEST_CASE("test1 on a uniform population recovers log10 M exactly") {
  const auto dir = scratch("uniform");
  ExperimentSpec s;
  s.kind = ExperimentKind::Test1;
  s.database = uniform_database(dir, 400, 5);
  s.database_options.loci = {"locus"};
  s.n_population = 2000;
  s.n_sample = 100;
  s.n_replicates = 5;
  s.mh = MhConfig::with_defaults(10'000, Seed{0});
  const auto r = run_test1(s);
  REQUIRE(r.rows.size() == 5);
  for (const auto& row : r.rows) CHECK(row.log10_lr_true == doctest::Approx(std::log10(400.0)).epsilon(1e-12));
  CHECK(std::isfinite(r.median_error));
  CHECK(std::isfinite(r.median_abs_error));
}

TEST_CASE("replicates without a constructible rare type are skipped and accounted for") {
  const auto dir = scratch("exhaust");
  ExperimentSpec s;
  s.kind = ExperimentKind::Test1;
  s.database = uniform_database(dir, 3, 50);
  s.database_options.loci = {"locus"};
  s.n_sample = 100;
  s.n_replicates = 4;
  s.mh = MhConfig::with_defaults(10'000, Seed{0});
  const auto r = run_test1(s);
  CHECK(r.rows.empty());
  REQUIRE(r.skipped.size() == 4);
  CHECK(r.skipped[0].reason.find("subsample") != std::string::npos);
  CHECK(std::isnan(r.median_error));
}

TEST_CASE("test2 is reproducible and sorted") {
  const auto s = small_synthetic(ExperimentKind::Test2);
  const auto a = run_test2(s);
  const auto b = run_test2(s);
  CHECK(a.rows.size() + a.skipped.size() == s.n_replicates * s.n_populations);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].log10_lr_true == b.rows[i].log10_lr_true);
    CHECK(a.rows[i].log10_lr_bayes == b.rows[i].log10_lr_bayes);
    if (i > 0)
      CHECK(std::make_pair(a.rows[i - 1].population_id, a.rows[i - 1].replicate_id) <
            std::make_pair(a.rows[i].population_id, a.rows[i].replicate_id));
  }
  auto reseeded = s;
  reseeded.seed = Seed{6};
  const auto c = run_test2(reseeded);
  CHECK(c.rows.front().log10_lr_true != a.rows.front().log10_lr_true);
  auto threaded = s;
  threaded.threads = 3;
  const auto d = run_test2(threaded);
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].log10_error == d.rows[i].log10_error);
}

TEST_CASE("model fit series") {
  ExperimentSpec s;
  s.kind = ExperimentKind::ModelFit;
  s.generating = HyperParams(0.5, 216.0);
  s.n_population = 18'925;
  s.n_replicates = 50;
  const auto r = run_model_fit(s);
  REQUIRE(r.series.size() == 51);
  for (const auto& series : r.series) {
    CHECK(std::is_sorted(series.rel_freq.rbegin(), series.rel_freq.rend()));
    CHECK(std::accumulate(series.rel_freq.begin(), series.rel_freq.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(r.power_law.rel_freq.size() == r.series.front().rel_freq.size());
  CHECK(r.envelope_coverage >= 0.8);
  ExperimentSpec none;
  none.kind = ExperimentKind::ModelFit;
  CHECK_THROWS_AS(run_model_fit(none), DomainError);
}

TEST_CASE("surface experiment") {
  ExperimentSpec s;
  s.kind = ExperimentKind::Surface;
  s.generating = HyperParams(0.5, 216.0);
  s.n_population = 18'925;
  s.grid_points = 21;
  const auto r = run_surface(s);
  REQUIRE(r.alpha_theta.nodes.size() == 21 * 21);
  REQUIRE(r.phi_theta.nodes.size() == 21 * 21);
  for (const auto* surf : {&r.alpha_theta, &r.phi_theta}) {
    double best = -1e300;
    for (const auto& node : surf->nodes) best = std::max(best, node.rel_loglik);
    CHECK(std::abs(best) < 1e-9);
    CHECK(std::abs(surf->nodes[10 * 21 + 10].rel_loglik) < 1e-9);
  }
  CHECK(r.level99 < r.level95);
}

TEST_CASE("run_experiment writes outputs and a manifest") {
  const auto dir = scratch("run");
  auto s = small_synthetic(ExperimentKind::Test2);
  s.output_dir = dir / "a";
  const auto m = run_experiment(s);
  CHECK(fs::exists(dir / "a" / "test2.csv"));
  CHECK(fs::exists(dir / "a" / "manifest.json"));
  CHECK(m.at("seed") == 5);
  CHECK(m.contains("config_hash"));
  CHECK(m.contains("version"));
  CHECK_FALSE(m.contains("wall_time"));
  s.output_dir = dir / "b";
  s.threads = 2;
  run_experiment(s);
  CHECK(slurp(dir / "a" / "test2.csv") == slurp(dir / "b" / "test2.csv"));
  CHECK(slurp(dir / "a" / "manifest.json") == slurp(dir / "b" / "manifest.json"));
  const auto csv = slurp(dir / "a" / "test2.csv");
  CHECK(csv.substr(0, csv.find('\n')) == "population_id,replicate_id,log10_lr_true,log10_lr_true_se,log10_lr_bayes,log10_error");
}
