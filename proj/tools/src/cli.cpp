// Apache License, Version 2.0, refer to LICENSE.txt

#include "raretype_cli/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "raretype/database.hpp"
#include "raretype/error.hpp"
#include "raretype/experiments.hpp"
#include "raretype/inference.hpp"
#include "raretype/oracle.hpp"
#include "raretype/prior.hpp"
#include "raretype/pyp.hpp"
#include "raretype/serialize.hpp"
#include "raretype/version.hpp"

namespace raretype::cli {

namespace {

struct SourceArgs {
  std::string db;
  std::string loci;
  std::string filter;
};

struct FitArgs {
  SourceArgs src;
  std::string out;
  bool allow_boundary = false;
};

struct LrArgs {
  SourceArgs src;
  std::string partition;
  std::string prior = "default";
  double tolerance = 1e-6;
  std::size_t max_nodes = 512;
  std::string out;
  bool allow_boundary = false;
};

struct OracleArgs {
  std::string freqs;
  std::string partition;
  std::size_t iterations = 1'000'000;
  std::optional<std::size_t> burn_in;
  std::size_t thinning = 10;
  std::size_t chains = 1;
  bool exhaustive = false;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::string out;
};

struct SimulateArgs {
  double alpha = 0.5;
  double theta = 1.0;
  std::size_t n = 1000;
  std::size_t m = 1000;
  std::size_t points_per_decade = 10;
  bool ranked = false;
  std::uint64_t seed = 1;
  std::string out;
};

struct ExperimentArgs {
  std::string spec;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

DatabaseOptions database_options(const SourceArgs& a) {
  DatabaseOptions o;
  if (!a.loci.empty()) o.loci = parse_locus_list(a.loci);
  if (!a.filter.empty()) {
    const auto eq = a.filter.find('=');
    if (eq == std::string::npos || eq == 0) throw DomainError("--filter expects COLUMN=VALUE, got '" + a.filter + "'");
    o.filter = RowFilter{a.filter.substr(0, eq), a.filter.substr(eq + 1)};
  }
  return o;
}

nlohmann::json source_json(const SourceArgs& a) {
  return {{"db", a.db}, {"loci", a.loci}, {"filter", a.filter}};
}

nlohmann::json provenance(const nlohmann::json& inputs, std::optional<std::uint64_t> seed) {
  nlohmann::json p{{"tool_version", kVersion}, {"config_hash", config_hash(inputs)}};
  if (seed) p["seed"] = *seed;
  return p;
}

// Appends the suspect's new singleton type to a database partition.
IntegerPartition with_suspect(const IntegerPartition& p) {
  std::vector<std::size_t> a(p.sizes().begin(), p.sizes().end());
  std::vector<std::size_t> r(p.multiplicities().begin(), p.multiplicities().end());
  if (!a.empty() && a.front() == 1) {
    ++r.front();
  } else {
    a.insert(a.begin(), 1);
    r.insert(r.begin(), 1);
  }
  return IntegerPartition(std::move(a), std::move(r));
}

void emit(const std::string& path, std::ostream& out, const std::string& text) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path + "'");
  f << text;
  if (!f) throw Error("failed writing '" + path + "'");
}

std::string json_text(const nlohmann::json& j) {
  std::ostringstream s;
  write_json(s, j);
  return s.str();
}

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  const Database db = ingest_database(a.src.db, database_options(a.src));
  const MleResult m = mle_fit(db.partition);
  nlohmann::json inputs{{"command", "fit"}, {"source", source_json(a.src)}};
  nlohmann::json j{{"command", "fit"},
                   {"n", db.partition.n()},
                   {"k", db.partition.num_blocks()},
                   {"mle", to_json(m)},
                   {"provenance", provenance(inputs, std::nullopt)}};
  emit(a.out, out, json_text(j));
  if (!m.interior() && !a.allow_boundary) {
    err << "flagged: MLE is not interior (" << m.note << "); pass --allow-boundary to accept\n";
    return kExitFlagged;
  }
  return kExitOk;
}

int cmd_lr(const LrArgs& a, std::ostream& out, std::ostream& err) {
  if (a.src.db.empty() == a.partition.empty()) throw DomainError("lr needs exactly one of --db or --partition");
  const Hyperprior prior = Hyperprior::parse(a.prior);
  IntegerPartition p_plus = a.partition.empty()
                                ? to_integer_partition(extend_with_suspect(ingest_database(a.src.db, database_options(a.src)).partition))
                                : with_suspect(parse_integer_partition(a.partition));
  LrOptions opts;
  opts.quadrature.tolerance = a.tolerance;
  opts.quadrature.max_nodes = a.max_nodes;
  const LrReport r = lr_bayes(p_plus, prior, opts);
  nlohmann::json inputs{{"command", "lr"},       {"source", source_json(a.src)}, {"partition", a.partition},
                        {"prior", prior.to_string()}, {"tolerance", a.tolerance},    {"max_nodes", a.max_nodes}};
  nlohmann::json j = to_json(r);
  j["command"] = "lr";
  j["prior"] = prior.to_string();
  j["provenance"] = provenance(inputs, std::nullopt);
  emit(a.out, out, json_text(j));
  if (!r.quadrature_converged) {
    err << "flagged: quadrature did not reach the requested tolerance\n";
    return kExitFlagged;
  }
  if (std::isnan(r.lr_plugin) && !a.allow_boundary) {
    err << "flagged: no interior MLE, plug-in LR unavailable; pass --allow-boundary to accept\n";
    return kExitFlagged;
  }
  return kExitOk;
}

int cmd_oracle(const OracleArgs& a, std::ostream& out, std::ostream&) {
  const PopulationFreqs p = PopulationFreqs::load(a.freqs);
  const IntegerPartition part = with_suspect(parse_integer_partition(a.partition));
  nlohmann::json inputs{{"command", "oracle"}, {"freqs", a.freqs}, {"partition", a.partition},
                        {"exhaustive", a.exhaustive}};
  nlohmann::json j{{"command", "oracle"}, {"types", p.size()}, {"n", part.n() - 1}};
  if (a.exhaustive) {
    j["method"] = "exhaustive";
    j["lr"] = true_lr_exact(p, part);
    j["provenance"] = provenance(inputs, std::nullopt);
  } else {
    MhConfig cfg = MhConfig::with_defaults(a.iterations, Seed{a.seed});
    if (a.burn_in) cfg.burn_in = *a.burn_in;
    cfg.thinning = a.thinning;
    cfg.chains = a.chains;
    cfg.validate();
    inputs["iterations"] = cfg.iterations;
    inputs["burn_in"] = cfg.burn_in;
    inputs["thinning"] = cfg.thinning;
    inputs["chains"] = cfg.chains;
    const TrueLr t = true_lr(p, part, cfg, a.threads);
    j["method"] = "metropolis";
    j["lr"] = t.lr;
    j["mc_std_error"] = t.mc_std_error;
    j["singletons"] = t.singletons;
    j["singleton_mass"] = {{"estimate", t.mass.estimate},
                           {"mc_std_error", t.mass.mc_std_error},
                           {"samples", t.mass.samples},
                           {"acceptance_rate", t.mass.acceptance_rate}};
    j["provenance"] = provenance(inputs, a.seed);
  }
  emit(a.out, out, json_text(j));
  return kExitOk;
}

int cmd_simulate_crp(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const HyperParams h(a.alpha, a.theta);
  ChineseRestaurant crp(h, Seed{a.seed});
  crp.seat(a.n);
  std::string text = "id\ttable\n";
  text.reserve(a.n * 14);
  for (std::size_t i = 0; i < crp.seating().size(); ++i) {
    text += std::to_string(i + 1);
    text += '\t';
    text += std::to_string(crp.seating()[i] + 1);
    text += '\n';
  }
  emit(a.out, out, text);
  err << "customers " << crp.customers() << ", tables " << crp.tables() << '\n';
  return kExitOk;
}

int cmd_simulate_sticks(const SimulateArgs& a, std::ostream& out, std::ostream&) {
  const WeightVector w = stick_breaking_sample(HyperParams(a.alpha, a.theta), a.m, Seed{a.seed});
  const std::vector<double> values = a.ranked ? w.ranked() : w.weights;
  std::string text = "index,weight\n";
  for (std::size_t i = 0; i < values.size(); ++i) text += std::to_string(i + 1) + ',' + format_number(values[i]) + '\n';
  text += "residual," + format_number(w.residual) + '\n';
  emit(a.out, out, text);
  return kExitOk;
}

int cmd_simulate_diagnostics(const SimulateArgs& a, std::ostream& out, std::ostream&) {
  const auto points = block_growth_diagnostics(HyperParams(a.alpha, a.theta), a.n, Seed{a.seed}, a.points_per_decade);
  std::string text = "n,tables,tables_scaled,singleton_fraction\n";
  for (const auto& g : points)
    text += std::to_string(g.n) + ',' + std::to_string(g.tables) + ',' + format_number(g.tables_scaled) + ',' +
            format_number(g.singleton_fraction) + '\n';
  emit(a.out, out, text);
  return kExitOk;
}

int cmd_experiment(const ExperimentArgs& a, std::ostream& out, std::ostream&) {
  std::ifstream in(a.spec);
  if (!in) throw Error("cannot open experiment spec '" + a.spec + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError("experiment spec '" + a.spec + "' is not valid JSON: " + e.what());
  }
  ExperimentSpec spec = ExperimentSpec::from_json(j);
  if (!a.out.empty()) spec.output_dir = a.out;
  if (a.seed) spec.seed = Seed{*a.seed};
  if (a.threads) spec.threads = *a.threads;
  const nlohmann::json manifest = run_experiment(spec);
  write_json(out, manifest);
  return kExitOk;
}

void add_source(CLI::App* cmd, SourceArgs& s, bool required) {
  auto* db = cmd->add_option("--db", s.db, "Tab-separated profile database")->check(CLI::ExistingFile);
  if (required) db->required();
  cmd->add_option("--loci", s.loci, "Comma-separated locus columns (default: the 7 standard Y-STR loci)");
  cmd->add_option("--filter", s.filter, "Keep rows with COLUMN=VALUE");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian nonparametric likelihood ratio for rare-type matches", "raretype"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Maximum-likelihood (alpha, theta) for a database");
  add_source(fit_cmd, fit.src, true);
  fit_cmd->add_option("--out", fit.out, "Output JSON path (default: stdout)");
  fit_cmd->add_flag("--allow-boundary", fit.allow_boundary, "Exit 0 even when the MLE is on the boundary");

  LrArgs lr;
  auto* lr_cmd = app.add_subcommand("lr", "Bayesian and plug-in LR for a rare-type match");
  add_source(lr_cmd, lr.src, false);
  lr_cmd->add_option("--partition", lr.partition, "Database partition as size:count pairs, e.g. 1:4,2:2");
  lr_cmd->add_option("--prior", lr.prior, "Hyperprior spec")->capture_default_str();
  lr_cmd->add_option("--tolerance", lr.tolerance, "Relative quadrature tolerance")->capture_default_str();
  lr_cmd->add_option("--max-nodes", lr.max_nodes, "Largest Gauss-Hermite rule per axis")->capture_default_str();
  lr_cmd->add_option("--out", lr.out, "Output JSON path (default: stdout)");
  lr_cmd->add_flag("--allow-boundary", lr.allow_boundary, "Exit 0 when the plug-in LR is unavailable");

  OracleArgs oracle;
  auto* oracle_cmd = app.add_subcommand("oracle", "True LR with known population frequencies");
  oracle_cmd->add_option("--freqs", oracle.freqs, "One-column frequency file")->required()->check(CLI::ExistingFile);
  oracle_cmd->add_option("--partition", oracle.partition, "Database partition as size:count pairs")->required();
  oracle_cmd->add_option("--iterations", oracle.iterations, "Metropolis steps per chain")->capture_default_str();
  oracle_cmd->add_option("--burn-in", oracle.burn_in, "Discarded steps (default: 10% of iterations)");
  oracle_cmd->add_option("--thinning", oracle.thinning)->capture_default_str();
  oracle_cmd->add_option("--chains", oracle.chains)->capture_default_str();
  oracle_cmd->add_flag("--exhaustive", oracle.exhaustive, "Enumerate every assignment instead of sampling");
  oracle_cmd->add_option("--seed", oracle.seed)->capture_default_str();
  oracle_cmd->add_option("--threads", oracle.threads, "Worker threads for chains")->capture_default_str();
  oracle_cmd->add_option("--out", oracle.out, "Output JSON path (default: stdout)");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Draw from the two-parameter Poisson-Dirichlet model");
  sim_cmd->require_subcommand(1);
  auto add_common = [&](CLI::App* c) {
    c->add_option("--alpha", sim.alpha)->capture_default_str();
    c->add_option("--theta", sim.theta)->capture_default_str();
    c->add_option("--seed", sim.seed)->capture_default_str();
    c->add_option("--out", sim.out, "Output path (default: stdout)");
  };
  auto* crp_cmd = sim_cmd->add_subcommand("crp", "Chinese restaurant seating, written as a one-locus database");
  add_common(crp_cmd);
  crp_cmd->add_option("--n", sim.n, "Customers")->capture_default_str();
  auto* sticks_cmd = sim_cmd->add_subcommand("sticks", "Truncated stick-breaking weights");
  add_common(sticks_cmd);
  sticks_cmd->add_option("--m", sim.m, "Number of weights")->capture_default_str();
  sticks_cmd->add_flag("--ranked", sim.ranked, "Sort weights in decreasing order");
  auto* diag_cmd = sim_cmd->add_subcommand("diagnostics", "Block-count growth along one CRP run");
  add_common(diag_cmd);
  diag_cmd->add_option("--n", sim.n, "Customers")->capture_default_str();
  diag_cmd->add_option("--points-per-decade", sim.points_per_decade)->capture_default_str();

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "Run an experiment described by a JSON spec");
  exp_cmd->add_option("spec", exp.spec, "Experiment spec (JSON)")->required();
  exp_cmd->add_option("--out", exp.out, "Output directory (overrides the spec)");
  exp_cmd->add_option("--seed", exp.seed, "Master seed (overrides the spec)");
  exp_cmd->add_option("--threads", exp.threads, "Worker threads (overrides the spec)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  int code = kExitOk;
  try {
    if (*fit_cmd) code = cmd_fit(fit, out, err);
    else if (*lr_cmd) code = cmd_lr(lr, out, err);
    else if (*oracle_cmd) code = cmd_oracle(oracle, out, err);
    else if (*crp_cmd) code = cmd_simulate_crp(sim, out, err);
    else if (*sticks_cmd) code = cmd_simulate_sticks(sim, out, err);
    else if (*diag_cmd) code = cmd_simulate_diagnostics(sim, out, err);
    else if (*exp_cmd) code = cmd_experiment(exp, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  err << "wall time " << elapsed.count() << " s\n";
  return code;
}

}  // namespace raretype::cli
