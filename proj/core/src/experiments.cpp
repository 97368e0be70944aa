// Apache License, Version 2.0, refer to LICENSE.txt

#include "raretype/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <unordered_set>

#include "raretype/parallel.hpp"
#include "raretype/serialize.hpp"
#include "raretype/version.hpp"

namespace raretype {

namespace {

// Seed streams. Each consumer derives from (master, stream, id) so replicates never share
// random numbers and results do not depend on scheduling.
constexpr std::uint64_t kPopulationStream = 1;
constexpr std::uint64_t kReplicateStream = 2;
constexpr std::uint64_t kChainStream = 3;
constexpr std::uint64_t kSourceStream = 4;
constexpr std::uint64_t kFitReplicateStream = 5;

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

std::vector<double> ranked_frequencies(std::vector<std::uint32_t> sizes, std::size_t n) {
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  std::vector<double> f;
  f.reserve(sizes.size());
  for (auto s : sizes) f.push_back(static_cast<double>(s) / static_cast<double>(n));
  return f;
}

std::vector<std::uint32_t> sizes_of(const SetPartition& p) {
  std::vector<std::uint32_t> s;
  s.reserve(p.num_blocks());
  for (const auto& b : p.blocks()) s.push_back(static_cast<std::uint32_t>(b.size()));
  return s;
}

// Type id per element (block index).
std::vector<std::size_t> labels_of(const SetPartition& p) {
  std::vector<std::size_t> labels(p.n());
  for (std::size_t b = 0; b < p.num_blocks(); ++b)
    for (auto e : p.block(b)) labels[e - 1] = b;
  return labels;
}

PopulationFreqs freqs_of(const SetPartition& p) {
  std::vector<double> w;
  w.reserve(p.num_blocks());
  for (const auto& b : p.blocks()) w.push_back(static_cast<double>(b.size()));
  return PopulationFreqs(std::move(w));
}

SetPartition load_source(const ExperimentSpec& spec) {
  if (spec.database) return ingest_database(*spec.database, spec.database_options).partition;
  if (spec.generating) return crp_sample(spec.n_population, *spec.generating, derive_seed(spec.seed, kSourceStream));
  throw DomainError("experiment source unavailable: give a database or generating parameters");
}

std::size_t get_size(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_unsigned()) throw DomainError(std::string("'") + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

ComparisonResult finish(std::vector<std::optional<LrComparisonRow>>& slots, std::vector<std::string>& reasons,
                        std::size_t replicates) {
  ComparisonResult out;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (slots[k]) {
      out.rows.push_back(*slots[k]);
    } else {
      out.skipped.push_back({k / replicates, k % replicates, reasons[k]});
    }
  }
  std::vector<double> errors, abs_errors;
  for (const auto& r : out.rows) {
    errors.push_back(r.log10_error);
    abs_errors.push_back(std::abs(r.log10_error));
  }
  out.median_error = median(errors);
  out.median_abs_error = median(abs_errors);
  return out;
}

ComparisonResult run_comparison(const ExperimentSpec& spec, const std::vector<std::vector<std::size_t>>& labels,
                                const std::vector<PopulationFreqs>& freqs, bool known_params) {
  const std::size_t pops = labels.size();
  const std::size_t reps = spec.n_replicates;
  std::vector<std::optional<LrComparisonRow>> slots(pops * reps);
  std::vector<std::string> reasons(pops * reps);
  parallel_for(pops * reps, spec.threads, [&](std::size_t k) {
    ReplicateContext ctx{&labels[k / reps], &freqs[k / reps], known_params ? spec.generating : std::nullopt};
    slots[k] = run_replicate(spec, ctx, k / reps, k % reps, reasons[k]);
  });
  return finish(slots, reasons, reps);
}

void synthetic_populations(const ExperimentSpec& spec, std::vector<std::vector<std::size_t>>& labels,
                           std::vector<PopulationFreqs>& freqs) {
  if (!spec.generating) throw DomainError("synthetic populations need generating parameters");
  for (std::size_t pop = 0; pop < spec.n_populations; ++pop) {
    ChineseRestaurant crp(*spec.generating, derive_seed(spec.seed, kPopulationStream, pop));
    crp.seat(spec.n_population);
    labels.emplace_back(crp.seating().begin(), crp.seating().end());
    std::vector<double> w(crp.table_sizes().begin(), crp.table_sizes().end());
    freqs.emplace_back(std::move(w));
  }
}

void write_comparison_csv(const std::filesystem::path& path, const ComparisonResult& r) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << "population_id,replicate_id,log10_lr_true,log10_lr_true_se,log10_lr_bayes,log10_error\n";
  for (const auto& row : r.rows)
    out << row.population_id << ',' << row.replicate_id << ',' << format_number(row.log10_lr_true) << ','
        << format_number(row.log10_lr_true_se) << ',' << format_number(row.log10_lr_bayes) << ','
        << format_number(row.log10_error) << '\n';
}

void write_surface_csv(const std::filesystem::path& path, const Surface& s) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << (s.param == Parametrization::AlphaTheta ? "alpha,theta" : "phi,theta") << ",rel_loglik,gaussian_rel_loglik\n";
  for (const auto& node : s.nodes)
    out << format_number(node.first) << ',' << format_number(node.second) << ',' << format_number(node.rel_loglik)
        << ',' << format_number(node.gaussian_rel_loglik) << '\n';
}

// Symmetric half-width around `center`, kept strictly inside (lo, hi).
double half_width(double center, double want, double lo, double hi) {
  double w = want;
  if (std::isfinite(lo)) w = std::min(w, 0.999 * (center - lo));
  if (std::isfinite(hi)) w = std::min(w, 0.999 * (hi - center));
  return std::max(w, 0.0);
}

std::array<double, 2> standard_deviations(const Matrix2& f) {
  const double det = f[0][0] * f[1][1] - f[0][1] * f[1][0];
  if (!(det > 0.0) || !(f[0][0] > 0.0)) throw DomainError("observed information is not positive definite");
  return {std::sqrt(f[1][1] / det), std::sqrt(f[0][0] / det)};
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::ModelFit:
      return "model_fit";
    case ExperimentKind::Surface:
      return "surface";
    case ExperimentKind::Test1:
      return "test1";
    case ExperimentKind::Test2:
      return "test2";
    case ExperimentKind::Test3:
      return "test3";
  }
  return {};
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::ModelFit, ExperimentKind::Surface, ExperimentKind::Test1, ExperimentKind::Test2,
                 ExperimentKind::Test3})
    if (to_string(k) == name) return k;
  throw DomainError("unknown experiment '" + name + "'");
}

ExperimentSpec ExperimentSpec::from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{"name",         "source",      "n_population", "n_sample",
                                           "n_replicates", "n_populations", "seed",       "output_dir",
                                           "prior",        "mh",          "grid",         "threads"};
  if (!j.is_object()) throw DomainError("experiment spec must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw DomainError("unknown key '" + it.key() + "' in experiment spec");

  ExperimentSpec s;
  try {
    s.kind = experiment_kind_from_string(j.at("name").get<std::string>());
    if (j.contains("source")) {
      const auto& src = j.at("source");
      for (auto it = src.begin(); it != src.end(); ++it)
        if (it.key() != "database" && it.key() != "loci" && it.key() != "filter" && it.key() != "synthetic" &&
            it.key() != "separator")
          throw DomainError("unknown key '" + it.key() + "' in experiment source");
      if (src.contains("database")) s.database = src.at("database").get<std::string>();
      if (src.contains("loci")) s.database_options.loci = src.at("loci").get<std::vector<std::string>>();
      if (src.contains("separator")) {
        auto sep = src.at("separator").get<std::string>();
        if (sep.size() != 1) throw DomainError("separator must be one character");
        s.database_options.separator = sep[0];
      }
      if (src.contains("filter"))
        s.database_options.filter =
            RowFilter{src.at("filter").at("column").get<std::string>(), src.at("filter").at("value").get<std::string>()};
      if (src.contains("synthetic"))
        s.generating = HyperParams(src.at("synthetic").at("alpha").get<double>(),
                                   src.at("synthetic").at("theta").get<double>());
    }
    if (j.contains("n_population")) s.n_population = get_size(j, "n_population");
    if (j.contains("n_sample")) s.n_sample = get_size(j, "n_sample");
    if (j.contains("n_replicates")) s.n_replicates = get_size(j, "n_replicates");
    if (j.contains("n_populations")) s.n_populations = get_size(j, "n_populations");
    if (j.contains("threads")) s.threads = get_size(j, "threads");
    if (j.contains("seed")) s.seed = Seed{j.at("seed").get<std::uint64_t>()};
    if (j.contains("output_dir")) s.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("prior")) s.prior = Hyperprior::parse(j.at("prior").get<std::string>());
    if (j.contains("mh")) {
      const auto& mh = j.at("mh");
      for (auto it = mh.begin(); it != mh.end(); ++it)
        if (it.key() != "iterations" && it.key() != "burn_in" && it.key() != "thinning" && it.key() != "chains")
          throw DomainError("unknown key '" + it.key() + "' in mh config");
      if (mh.contains("iterations")) s.mh = MhConfig::with_defaults(get_size(mh, "iterations"), Seed{0});
      if (mh.contains("burn_in")) s.mh.burn_in = get_size(mh, "burn_in");
      if (mh.contains("thinning")) s.mh.thinning = get_size(mh, "thinning");
      if (mh.contains("chains")) s.mh.chains = get_size(mh, "chains");
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      for (auto it = g.begin(); it != g.end(); ++it)
        if (it.key() != "points" && it.key() != "width") throw DomainError("unknown key '" + it.key() + "' in grid");
      if (g.contains("points")) s.grid_points = get_size(g, "points");
      if (g.contains("width")) s.grid_width = g.at("width").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed experiment spec: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json ExperimentSpec::to_json() const {
  nlohmann::json src = nlohmann::json::object();
  if (database) {
    src["database"] = database->string();
    src["loci"] = database_options.loci;
    src["separator"] = std::string(1, database_options.separator);
    if (database_options.filter)
      src["filter"] = {{"column", database_options.filter->column}, {"value", database_options.filter->value}};
  }
  if (generating) src["synthetic"] = {{"alpha", generating->alpha()}, {"theta", generating->theta()}};
  return {{"name", raretype::to_string(kind)},
          {"source", src},
          {"n_population", n_population},
          {"n_sample", n_sample},
          {"n_replicates", n_replicates},
          {"n_populations", n_populations},
          {"seed", seed.value},
          {"output_dir", output_dir.string()},
          {"prior", prior.to_string()},
          {"mh", {{"iterations", mh.iterations}, {"burn_in", mh.burn_in}, {"thinning", mh.thinning}, {"chains", mh.chains}}},
          {"grid", {{"points", grid_points}, {"width", grid_width}}}};
}

void ExperimentSpec::validate() const {
  if (n_replicates == 0) throw DomainError("n_replicates must be at least 1");
  if (n_sample == 0) throw DomainError("n_sample must be at least 1");
  if (n_sample > n_population && !(kind == ExperimentKind::Test1 && database))
    throw DomainError("n_sample exceeds n_population");
  if ((kind == ExperimentKind::Test2 || kind == ExperimentKind::Test3) && !generating)
    throw DomainError(raretype::to_string(kind) + " needs synthetic generating parameters");
  if (kind == ExperimentKind::Test1 && !database) throw DomainError("test1 needs a population database");
  if ((kind == ExperimentKind::ModelFit || kind == ExperimentKind::Surface) && !database && !generating)
    throw DomainError("experiment source unavailable: give a database or generating parameters");
  if (n_populations == 0) throw DomainError("n_populations must be at least 1");
  if (grid_points < 3) throw DomainError("grid needs at least 3 points per axis");
  if (!(grid_width > 0.0)) throw DomainError("grid width must be positive");
  mh.validate();
}

std::optional<LrComparisonRow> run_replicate(const ExperimentSpec& spec, const ReplicateContext& ctx,
                                             std::size_t population_id, std::size_t replicate_id,
                                             std::string& reason) {
  const auto& labels = *ctx.labels;
  const std::size_t pop_size = labels.size();
  if (spec.n_sample > pop_size) throw DomainError("n_sample exceeds the population size");
  Rng rng = make_rng(derive_seed(derive_seed(spec.seed, kReplicateStream, population_id), replicate_id));

  // Partial Fisher-Yates: the first n_sample slots are a uniform sample without replacement.
  std::vector<std::size_t> order(pop_size);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < spec.n_sample; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(i, pop_size - 1)(rng);
    std::swap(order[i], order[j]);
  }
  std::vector<std::size_t> sample_labels(spec.n_sample);
  std::unordered_set<std::size_t> seen;
  for (std::size_t i = 0; i < spec.n_sample; ++i) {
    sample_labels[i] = labels[order[i]];
    seen.insert(sample_labels[i]);
  }

  // The suspect's type must be new to the subsample.
  std::optional<std::size_t> suspect;
  for (int attempt = 0; attempt < 10'000 && !suspect; ++attempt) {
    const std::size_t who = std::uniform_int_distribution<std::size_t>(0, pop_size - 1)(rng);
    if (!seen.count(labels[who])) suspect = labels[who];
  }
  if (!suspect) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < pop_size; ++i)
      if (!seen.count(labels[i])) candidates.push_back(i);
    if (candidates.empty()) {
      reason = "every population type occurs in the subsample; no rare-type suspect";
      return std::nullopt;
    }
    suspect = labels[candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)]];
  }
  sample_labels.push_back(*suspect);
  const SetPartition p_plus = partition_from_labels(sample_labels);
  const IntegerPartition ip_plus = to_integer_partition(p_plus);

  MhConfig cfg = spec.mh;
  cfg.seed = derive_seed(derive_seed(spec.seed, kChainStream, population_id), replicate_id);
  const TrueLr truth = true_lr(*ctx.freqs, ip_plus, cfg);

  LrComparisonRow row;
  row.population_id = population_id;
  row.replicate_id = replicate_id;
  row.log10_lr_true = std::log10(truth.lr);
  row.log10_lr_true_se = truth.mc_std_error / (truth.lr * std::log(10.0));
  const std::size_t n = p_plus.n() - 1;
  const double lr = ctx.known_params ? lr_closed_form(n, *ctx.known_params) : lr_bayes(p_plus, spec.prior).lr_bayes;
  row.log10_lr_bayes = std::log10(lr);
  row.log10_error = row.log10_lr_true - row.log10_lr_bayes;
  return row;
}

ModelFitResult run_model_fit(const ExperimentSpec& spec) {
  const SetPartition source = load_source(spec);
  const std::size_t n = source.n();
  ModelFitResult out;
  out.mle = mle_fit(source);
  if (!out.mle.interior()) throw DomainError("model fit needs an interior MLE: " + out.mle.note);
  out.series.push_back({"source", ranked_frequencies(sizes_of(source), n)});
  const HyperParams fitted = out.mle.params();
  std::vector<RankedSeries> reps(spec.n_replicates);
  parallel_for(spec.n_replicates, spec.threads, [&](std::size_t r) {
    reps[r] = {"replicate_" + std::to_string(r + 1),
               ranked_frequencies(crp_table_sizes(n, fitted, derive_seed(spec.seed, kFitReplicateStream, r)), n)};
  });
  for (auto& r : reps) out.series.push_back(std::move(r));

  // Reference line with slope -1/alpha_hat, intercept fitted to the source on log scale.
  const auto& src = out.series.front().rel_freq;
  const double slope = -1.0 / out.mle.alpha_hat;
  double log_c = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) log_c += std::log(src[i]) - slope * std::log(static_cast<double>(i + 1));
  log_c /= static_cast<double>(src.size());
  out.power_law.series_id = "power_law";
  for (std::size_t i = 0; i < src.size(); ++i)
    out.power_law.rel_freq.push_back(std::exp(log_c + slope * std::log(static_cast<double>(i + 1))));

  const std::size_t ranks = std::min<std::size_t>(100, src.size());
  std::size_t inside = 0;
  for (std::size_t i = 0; i < ranks; ++i) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t r = 1; r < out.series.size(); ++r) {
      const auto& f = out.series[r].rel_freq;
      const double v = i < f.size() ? f[i] : 0.0;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (src[i] >= lo && src[i] <= hi) ++inside;
  }
  out.envelope_coverage = static_cast<double>(inside) / static_cast<double>(ranks);
  return out;
}

ComparisonResult run_test1(const ExperimentSpec& spec) {
  if (!spec.database) throw DomainError("test1 needs a population database");
  const SetPartition population = ingest_database(*spec.database, spec.database_options).partition;
  std::vector<std::vector<std::size_t>> labels{labels_of(population)};
  std::vector<PopulationFreqs> freqs{freqs_of(population)};
  return run_comparison(spec, labels, freqs, false);
}

ComparisonResult run_test2(const ExperimentSpec& spec) {
  std::vector<std::vector<std::size_t>> labels;
  std::vector<PopulationFreqs> freqs;
  synthetic_populations(spec, labels, freqs);
  return run_comparison(spec, labels, freqs, false);
}

ComparisonResult run_test3(const ExperimentSpec& spec) {
  std::vector<std::vector<std::size_t>> labels;
  std::vector<PopulationFreqs> freqs;
  synthetic_populations(spec, labels, freqs);
  return run_comparison(spec, labels, freqs, true);
}

SurfaceResult run_surface(const ExperimentSpec& spec) {
  const SetPartition p_plus = extend_with_suspect(load_source(spec));
  const IntegerPartition ip = to_integer_partition(p_plus);
  const std::size_t n = p_plus.n() - 1;
  SurfaceResult out;
  out.mle = mle_fit(ip);
  if (!out.mle.interior()) throw DomainError("surface needs an interior MLE: " + out.mle.note);
  const double a = out.mle.alpha_hat, t = out.mle.theta_hat;
  const std::size_t points = spec.grid_points % 2 ? spec.grid_points : spec.grid_points + 1;

  const auto sd = standard_deviations(out.mle.observed_fisher);
  const double wa = half_width(a, spec.grid_width * sd[0], 0.0, 1.0);
  // theta > -alpha must hold at the smallest alpha on the grid.
  const double wt = half_width(t, spec.grid_width * sd[1], -(a - wa), std::numeric_limits<double>::infinity());
  out.alpha_theta = loglik_surface(ip, out.mle, {Parametrization::AlphaTheta, {a - wa, a + wa, points}, {t - wt, t + wt, points}});

  const auto center = to_phi_theta(a, t, n);
  const auto sd_phi = standard_deviations(fisher_phi_theta(out.mle.observed_fisher, a, t, n));
  const double wt2 = half_width(t, spec.grid_width * sd_phi[1], -a * 0.5, std::numeric_limits<double>::infinity());
  // alpha = 1 - phi (n+1+theta)/n must stay in (0, 1) over the theta range.
  const double nn = static_cast<double>(n);
  const double phi_hi = nn / (nn + 1.0 + t + wt2);
  const double wp = half_width(center[0], spec.grid_width * sd_phi[0], 0.0, phi_hi);
  out.phi_theta = loglik_surface(ip, out.mle, {Parametrization::PhiTheta, {center[0] - wp, center[0] + wp, points}, {t - wt2, t + wt2, points}});

  out.level95 = gaussian_contour_level(0.95);
  out.level99 = gaussian_contour_level(0.99);
  return out;
}

nlohmann::json run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::filesystem::create_directories(spec.output_dir);
  // The output location is left out so that relocated runs produce identical files.
  nlohmann::json recorded = spec.to_json();
  recorded.erase("output_dir");
  nlohmann::json manifest{{"experiment", raretype::to_string(spec.kind)},
                          {"spec", recorded},
                          {"config_hash", config_hash(recorded)},
                          {"seed", spec.seed.value},
                          {"version", kVersion},
                          {"suspect_construction", "rejection sampling of a population member whose type is absent from the subsample"}};
  const std::string name = raretype::to_string(spec.kind);
  switch (spec.kind) {
    case ExperimentKind::ModelFit: {
      const auto r = run_model_fit(spec);
      const auto path = spec.output_dir / (name + ".csv");
      std::ofstream out(path);
      if (!out) throw Error("cannot write '" + path.string() + "'");
      out << "rank,rel_freq,series_id\n";
      auto emit = [&](const RankedSeries& s) {
        for (std::size_t i = 0; i < s.rel_freq.size(); ++i)
          out << i + 1 << ',' << format_number(s.rel_freq[i]) << ',' << s.series_id << '\n';
      };
      for (const auto& s : r.series) emit(s);
      emit(r.power_law);
      manifest["outputs"] = {path.filename().string()};
      manifest["mle"] = to_json(r.mle);
      manifest["envelope_coverage_ranks_1_100"] = r.envelope_coverage;
      break;
    }
    case ExperimentKind::Surface: {
      const auto r = run_surface(spec);
      const auto p1 = spec.output_dir / "surface_alpha_theta.csv";
      const auto p2 = spec.output_dir / "surface_phi_theta.csv";
      write_surface_csv(p1, r.alpha_theta);
      write_surface_csv(p2, r.phi_theta);
      manifest["outputs"] = {p1.filename().string(), p2.filename().string()};
      manifest["mle"] = to_json(r.mle);
      manifest["contour_levels"] = {{"0.95", r.level95}, {"0.99", r.level99}};
      manifest["phi_center"] = r.phi_theta.center[0];
      break;
    }
    case ExperimentKind::Test1:
    case ExperimentKind::Test2:
    case ExperimentKind::Test3: {
      const auto r = spec.kind == ExperimentKind::Test1   ? run_test1(spec)
                     : spec.kind == ExperimentKind::Test2 ? run_test2(spec)
                                                          : run_test3(spec);
      const auto path = spec.output_dir / (name + ".csv");
      write_comparison_csv(path, r);
      manifest["outputs"] = {path.filename().string()};
      manifest["rows"] = r.rows.size();
      manifest["median_error"] = std::isfinite(r.median_error) ? nlohmann::json(r.median_error) : nlohmann::json(nullptr);
      manifest["median_abs_error"] =
          std::isfinite(r.median_abs_error) ? nlohmann::json(r.median_abs_error) : nlohmann::json(nullptr);
      nlohmann::json skipped = nlohmann::json::array();
      for (const auto& s : r.skipped)
        skipped.push_back({{"population_id", s.population_id}, {"replicate_id", s.replicate_id}, {"reason", s.reason}});
      manifest["skipped"] = skipped;
      break;
    }
  }
  std::ofstream mf(spec.output_dir / "manifest.json");
  if (!mf) throw Error("cannot write manifest in '" + spec.output_dir.string() + "'");
  write_json(mf, manifest);
  return manifest;
}

}  // namespace raretype
