// Apache License, Version 2.0, refer to LICENSE.txt

#include "raretype/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <string>

#include "raretype/parallel.hpp"

namespace raretype {

PopulationFreqs::PopulationFreqs(std::vector<double> weights) : p_(std::move(weights)) {
  if (p_.empty()) throw DomainError("empty frequency vector");
  for (double w : p_)
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("frequencies must be positive and finite");
  std::sort(p_.begin(), p_.end(), std::greater<>());
  const double total = std::accumulate(p_.begin(), p_.end(), 0.0);
  for (double& w : p_) w /= total;
}

PopulationFreqs PopulationFreqs::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open '" + path.string() + "'");
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto last = line.find_last_not_of(" \t\r");
    const std::string cell = line.substr(first, last - first + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != cell.size()) throw ParseError(line_no, "not a number: '" + cell + "'");
    if (!(v > 0.0)) throw ParseError(line_no, "frequency must be positive");
    values.push_back(v);
  }
  if (values.empty()) throw ParseError(0, "no frequencies in '" + path.string() + "'");
  return PopulationFreqs(std::move(values));
}

ChiAssignment ChiAssignment::initial(std::size_t m, const IntegerPartition& part) {
  if (part.num_blocks() > m)
    throw DomainError("population has " + std::to_string(m) + " types but the sample shows " +
                      std::to_string(part.num_blocks()));
  std::vector<std::uint32_t> chi(m, 0);
  std::size_t pos = 0;
  const auto& r = part.multiplicities();
  for (std::size_t j = r.size(); j >= 1; --j)
    for (std::size_t c = 0; c < r[j - 1]; ++c) chi[pos++] = static_cast<std::uint32_t>(j);
  return ChiAssignment(std::move(chi));
}

bool ChiAssignment::satisfies(const IntegerPartition& part) const noexcept {
  const auto& r = part.multiplicities();
  std::vector<std::size_t> counts(r.size() + 1, 0);
  for (auto v : chi_) {
    if (v > r.size()) return false;
    ++counts[v];
  }
  for (std::size_t j = 0; j < r.size(); ++j)
    if (counts[j + 1] != r[j]) return false;
  return true;
}

MhConfig MhConfig::with_defaults(std::size_t iterations, Seed seed) {
  MhConfig cfg;
  cfg.iterations = iterations;
  cfg.burn_in = iterations / 10;
  cfg.thinning = 10;
  cfg.seed = seed;
  return cfg;
}

void MhConfig::validate() const {
  if (burn_in >= iterations) throw DomainError("burn-in must be smaller than the iteration count");
  if (thinning == 0) throw DomainError("thinning must be at least 1");
  if (chains == 0) throw DomainError("need at least one chain");
  if (batches < 2) throw DomainError("need at least two batches");
}

namespace {

void require_valid(const ChiAssignment& chi, const PopulationFreqs& p, const IntegerPartition& part) {
  if (chi.size() != p.size()) throw DomainError("assignment length differs from the number of types");
  if (!chi.satisfies(part)) throw DomainError("assignment violates the class counts");
}

double class_size(const IntegerPartition& part, std::uint32_t v) {
  return v == 0 ? 0.0 : static_cast<double>(part.sizes()[v - 1]);
}

}  // namespace

double chi_log_weight(const ChiAssignment& chi, const PopulationFreqs& p, const IntegerPartition& part) {
  require_valid(chi, p, part);
  double w = 0.0;
  for (std::size_t i = 0; i < chi.size(); ++i)
    if (chi[i] > 0) w += class_size(part, chi[i]) * std::log(p[i]);
  return w;
}

double swap_acceptance_probability(const ChiAssignment& chi, const PopulationFreqs& p,
                                   const IntegerPartition& part, std::size_t i, std::size_t j) {
  require_valid(chi, p, part);
  if (i >= chi.size() || j >= chi.size()) throw DomainError("swap position out of range");
  const double delta = (class_size(part, chi[j]) - class_size(part, chi[i])) * (std::log(p[i]) - std::log(p[j]));
  return std::exp(std::min(0.0, delta));
}

ChiChain::ChiChain(const PopulationFreqs& p, const IntegerPartition& part, ChiAssignment start)
    : p_(&p), chi_(start.values()) {
  require_valid(start, p, part);
  log_p_.reserve(p.size());
  for (double v : p.values()) log_p_.push_back(std::log(v));
  const std::size_t classes = part.num_classes();
  class_size_.resize(classes + 1, 0.0);
  for (std::size_t j = 1; j <= classes; ++j) class_size_[j] = static_cast<double>(part.sizes()[j - 1]);
  if (part.sizes().front() == 1) singleton_class_ = 1;

  positions_.resize(classes + 1);
  slot_.resize(chi_.size());
  for (std::size_t i = 0; i < chi_.size(); ++i) {
    auto& bucket = positions_[chi_[i]];
    slot_[i] = bucket.size();
    bucket.push_back(i);
    log_weight_ += class_size_[chi_[i]] * log_p_[i];
    if (singleton_class_ != 0 && chi_[i] == singleton_class_) singleton_mass_ += p[i];
  }
}

bool ChiChain::can_move() const noexcept {
  return std::count_if(positions_.begin(), positions_.end(), [](const auto& b) { return !b.empty(); }) > 1;
}

bool ChiChain::step(Rng& rng) {
  const std::uint64_t m = chi_.size();
  std::uint64_t pairs = 0;
  for (const auto& b : positions_) pairs += b.size() * (m - b.size());
  if (pairs == 0) return false;

  // P(first value v) is proportional to c_v (M - c_v); the partner's value w != v is
  // proportional to c_w. Every unordered pair with differing values has probability 2/pairs.
  std::uint64_t pick = std::uniform_int_distribution<std::uint64_t>(0, pairs - 1)(rng);
  std::size_t v = 0;
  for (;; ++v) {
    const std::uint64_t mass = positions_[v].size() * (m - positions_[v].size());
    if (pick < mass) break;
    pick -= mass;
  }
  const std::size_t a = positions_[v][std::uniform_int_distribution<std::size_t>(0, positions_[v].size() - 1)(rng)];
  std::uint64_t pick2 = std::uniform_int_distribution<std::uint64_t>(0, m - positions_[v].size() - 1)(rng);
  std::size_t w = 0;
  for (;; ++w) {
    if (w == v) continue;
    if (pick2 < positions_[w].size()) break;
    pick2 -= positions_[w].size();
  }
  const std::size_t b = positions_[w][std::uniform_int_distribution<std::size_t>(0, positions_[w].size() - 1)(rng)];

  const double delta = (class_size_[w] - class_size_[v]) * (log_p_[a] - log_p_[b]);
  if (delta < 0.0 && !(uniform01(rng) < std::exp(delta))) return false;
  log_weight_ += delta;
  swap_positions(a, b);
  return true;
}

void ChiChain::swap_positions(std::size_t a, std::size_t b) {
  const std::uint32_t va = chi_[a], vb = chi_[b];
  if (singleton_class_ != 0) {
    const auto& p = *p_;
    if (va == singleton_class_) singleton_mass_ += p[b] - p[a];
    if (vb == singleton_class_) singleton_mass_ += p[a] - p[b];
  }
  positions_[va][slot_[a]] = b;
  positions_[vb][slot_[b]] = a;
  std::swap(slot_[a], slot_[b]);
  chi_[a] = vb;
  chi_[b] = va;
}

ChiAssignment mh_step(const ChiAssignment& chi, const PopulationFreqs& p, const IntegerPartition& part, Rng& rng) {
  ChiChain chain(p, part, chi);
  chain.step(rng);
  return chain.state();
}

namespace {

MassEstimate run_chain(const PopulationFreqs& p, const IntegerPartition& part, const MhConfig& cfg, Seed seed) {
  Rng rng = make_rng(seed);
  ChiChain chain(p, part, ChiAssignment::initial(p.size(), part));
  std::vector<double> samples;
  samples.reserve((cfg.iterations - cfg.burn_in) / cfg.thinning + 1);
  std::size_t accepted = 0;
  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    accepted += chain.step(rng) ? 1 : 0;
    if (it > cfg.burn_in && (it - cfg.burn_in) % cfg.thinning == 0) samples.push_back(chain.singleton_mass());
  }
  MassEstimate est;
  est.samples = samples.size();
  est.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(cfg.iterations);
  if (samples.empty()) {
    est.estimate = chain.singleton_mass();
    return est;
  }
  est.estimate = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());

  const std::size_t batches = std::min(cfg.batches, samples.size());
  if (batches < 2) return est;
  const std::size_t per_batch = samples.size() / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    auto first = samples.begin() + static_cast<std::ptrdiff_t>(b * per_batch);
    means[b] = std::accumulate(first, first + static_cast<std::ptrdiff_t>(per_batch), 0.0) /
               static_cast<double>(per_batch);
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(batches);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  est.mc_std_error = std::sqrt(ss / (static_cast<double>(batches) * static_cast<double>(batches - 1)));
  return est;
}

}  // namespace

MassEstimate estimate_singleton_mass(const PopulationFreqs& p, const IntegerPartition& part, const MhConfig& cfg,
                                     std::size_t threads) {
  cfg.validate();
  if (part.multiplicity_of(1) == 0) throw DomainError("no singleton class");
  std::vector<MassEstimate> runs(cfg.chains);
  parallel_for(cfg.chains, threads, [&](std::size_t c) { runs[c] = run_chain(p, part, cfg, derive_seed(cfg.seed, c)); });
  if (runs.size() == 1) return runs.front();

  MassEstimate out;
  const bool weighted = std::all_of(runs.begin(), runs.end(), [](const MassEstimate& r) { return r.mc_std_error > 0.0; });
  double wsum = 0.0, acc = 0.0, var_plain = 0.0, rate = 0.0;
  for (const auto& r : runs) {
    const double w = weighted ? 1.0 / (r.mc_std_error * r.mc_std_error) : 1.0;
    wsum += w;
    acc += w * r.estimate;
    var_plain += r.mc_std_error * r.mc_std_error;
    out.samples += r.samples;
    rate += r.acceptance_rate;
  }
  out.estimate = acc / wsum;
  const double c = static_cast<double>(runs.size());
  out.mc_std_error = weighted ? std::sqrt(1.0 / wsum) : std::sqrt(var_plain) / c;
  out.acceptance_rate = rate / c;
  return out;
}

double chi_assignment_count(std::size_t m, const IntegerPartition& part) {
  const std::size_t k = part.num_blocks();
  if (k > m) return 0.0;
  double lc = std::lgamma(static_cast<double>(m) + 1.0) - std::lgamma(static_cast<double>(m - k) + 1.0);
  for (std::size_t r : part.multiplicities()) lc -= std::lgamma(static_cast<double>(r) + 1.0);
  return std::round(std::exp(lc));
}

double enumerate_chi_expectation(const PopulationFreqs& p, const IntegerPartition& part) {
  const std::size_t m = p.size();
  const double count = chi_assignment_count(m, part);
  if (count == 0.0) throw DomainError("population has fewer types than the sample");
  if (count > kMaxEnumeratedAssignments) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "instance too large for enumeration: %.4g assignments exceed the bound of %.0f",
                  count, kMaxEnumeratedAssignments);
    throw DomainError(buf);
  }
  if (part.multiplicity_of(1) == 0) throw DomainError("no singleton class");

  const std::size_t classes = part.num_classes();
  std::vector<double> sizes(classes + 1, 0.0);
  std::vector<std::size_t> quota(classes + 1, 0);
  quota[0] = m - part.num_blocks();
  for (std::size_t j = 1; j <= classes; ++j) {
    sizes[j] = static_cast<double>(part.sizes()[j - 1]);
    quota[j] = part.multiplicities()[j - 1];
  }
  std::vector<double> log_p(m);
  for (std::size_t i = 0; i < m; ++i) log_p[i] = std::log(p[i]);
  // The initial assignment pairs the largest classes with the most frequent types, so it
  // has the largest weight and keeps every exp() below 1.
  const double ref = chi_log_weight(ChiAssignment::initial(m, part), p, part);

  double total = 0.0, weighted_mass = 0.0;
  std::function<void(std::size_t, double, double)> visit = [&](std::size_t i, double lw, double mass) {
    if (i == m) {
      const double w = std::exp(lw - ref);
      total += w;
      weighted_mass += w * mass;
      return;
    }
    for (std::size_t v = 0; v <= classes; ++v) {
      if (quota[v] == 0) continue;
      --quota[v];
      visit(i + 1, lw + sizes[v] * log_p[i], mass + (sizes[v] == 1.0 ? p[i] : 0.0));
      ++quota[v];
    }
  };
  visit(0, 0.0, 0.0);
  return weighted_mass / total;
}

TrueLr true_lr(const PopulationFreqs& p, const IntegerPartition& part_plus, const MhConfig& cfg, std::size_t threads) {
  TrueLr out;
  out.singletons = part_plus.multiplicity_of(1);
  if (out.singletons == 0) throw DomainError("no singleton class");
  out.mass = estimate_singleton_mass(p, part_plus, cfg, threads);
  const double n1 = static_cast<double>(out.singletons);
  out.lr = n1 / out.mass.estimate;
  out.mc_std_error = n1 * out.mass.mc_std_error / (out.mass.estimate * out.mass.estimate);
  return out;
}

double true_lr_exact(const PopulationFreqs& p, const IntegerPartition& part_plus) {
  const std::size_t n1 = part_plus.multiplicity_of(1);
  if (n1 == 0) throw DomainError("no singleton class");
  return static_cast<double>(n1) / enumerate_chi_expectation(p, part_plus);
}

}  // namespace raretype
