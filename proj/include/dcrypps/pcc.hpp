#pragma once

// Probabilistic certificate over a finished derivation. Ps is the product of
// (1 - residual) over assertions. Confidence re-evaluates every ledger
// residual with uncertain base probabilities drawn from Beta distributions
// and reports the fraction of draws whose Ps reaches the required level.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dcrypps/attack_kb.hpp"
#include "dcrypps/derivation.hpp"
#include "dcrypps/diagnosis.hpp"
#include "dcrypps/error.hpp"

namespace dcrypps {

// Beta distribution with the given mean and concentration (alpha + beta).
// An infinite strength, or a mean at 0 or 1, is a point mass.
struct ParameterUncertainty {
  double mean = 0.0;
  double strength = std::numeric_limits<double>::infinity();

  bool degenerate() const { return std::isinf(strength) || mean <= 0.0 || mean >= 1.0; }

  template <typename Engine>
  double draw(Engine& engine) const {
    if (degenerate()) return mean;
    std::gamma_distribution<double> ga(mean * strength, 1.0);
    std::gamma_distribution<double> gb((1.0 - mean) * strength, 1.0);
    double x = ga(engine);
    double y = gb(engine);
    return x + y > 0.0 ? x / (x + y) : mean;
  }
};

using UncertaintyTable = std::map<std::string, ParameterUncertainty>;

inline double compute_ps(const std::vector<double>& residuals) {
  double ps = 1.0;
  for (double r : residuals) ps *= 1.0 - r;
  return ps;
}

inline double compute_ps(const DerivationReport& report) {
  std::vector<double> residuals;
  for (const auto& e : report.ledger) residuals.push_back(e.residual_risk);
  return compute_ps(residuals);
}

// Attack likelihoods of every attack cause in the ledger, at the given strength.
inline UncertaintyTable default_uncertainty(const DerivationReport& report, const AttackKb& kb,
                                            double strength) {
  UncertaintyTable table;
  for (const auto& e : report.ledger) {
    for (const auto& c : e.causes) {
      if (!c.cause.is_cyber()) continue;
      const AttackModel* a = find_attack(kb, c.cause.attack);
      if (!a) throw Error(ErrorCode::kInvalidArgument, "unknown attack model '" + c.cause.attack + "'");
      table.emplace(param_key(c.component, c.cause), ParameterUncertainty{a->base_likelihood, strength});
    }
  }
  return table;
}

namespace detail {

inline void check_uncertainty(const DerivationReport& report, const UncertaintyTable& uncertainty) {
  std::set<std::string> known;
  for (const auto& e : report.ledger) {
    for (const auto& c : e.causes) known.insert(param_key(c.component, c.cause));
  }
  for (const auto& [key, u] : uncertainty) {
    if (!known.count(key)) throw Error(ErrorCode::kInvalidArgument, "unknown parameter '" + key + "'");
    if (!(u.mean >= 0.0 && u.mean <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "parameter '" + key + "': mean must be in [0,1]");
    }
    if (!(u.strength > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "parameter '" + key + "': strength must be > 0");
    }
  }
}

// Ps with base probabilities taken from `values` where present.
inline double ps_with(const DerivationReport& report, const ParamTable& values) {
  double ps = 1.0;
  for (const auto& e : report.ledger) {
    double keep = 1.0;
    for (const auto& c : e.causes) {
      double base = c.base_probability;
      auto it = values.find(param_key(c.component, c.cause));
      if (it != values.end()) base = c.cause.is_cyber() ? it->second * c.exposure : it->second;
      keep *= 1.0 - mitigated_probability(base, c, report.config.alpha);
    }
    ps *= 1.0 - (1.0 - keep);
  }
  return ps;
}

}  // namespace detail

// Each draw owns an engine seeded from (seed, draw index), so the result does
// not depend on evaluation order.
inline double compute_confidence(const DerivationReport& report, const UncertaintyTable& uncertainty,
                                 double required_ps, std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorCode::kInvalidArgument, "samples must be >= 1");
  detail::check_uncertainty(report, uncertainty);
  std::size_t hits = 0;
  ParamTable values;
  for (std::size_t i = 0; i < samples; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(std::uint64_t(i) >> 32)};
    std::mt19937_64 engine(seq);
    for (const auto& [key, u] : uncertainty) values[key] = u.draw(engine);
    if (detail::ps_with(report, values) >= required_ps) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

inline std::vector<AssertionShare> assertion_shares(const DerivationReport& report) {
  std::vector<AssertionShare> out;
  double total = 0.0;
  std::size_t saturated = 0;
  for (const auto& e : report.ledger) {
    if (e.residual_risk >= 1.0) ++saturated;
    else total += -std::log1p(-e.residual_risk);
  }
  for (const auto& e : report.ledger) {
    AssertionShare s{e.assertion, e.residual_risk, 0.0};
    if (saturated > 0) {
      s.contribution = e.residual_risk >= 1.0 ? 1.0 / static_cast<double>(saturated) : 0.0;
    } else if (total > 0.0) {
      s.contribution = -std::log1p(-e.residual_risk) / total;
    }
    out.push_back(s);
  }
  return out;
}

inline ProbabilisticCertificate certify(const DerivationReport& report, const UncertaintyTable& uncertainty) {
  const auto& cfg = report.config;
  ProbabilisticCertificate cert;
  cert.ps = compute_ps(report);
  cert.required_ps = cfg.required_ps;
  cert.samples = cfg.samples;
  cert.seed = cfg.seed;
  cert.per_assertion = assertion_shares(report);
  cert.confidence = compute_confidence(report, uncertainty, cfg.required_ps, cfg.samples, cfg.seed);
  return cert;
}

inline ProbabilisticCertificate certify(const DerivationReport& report, const AttackKb& kb) {
  return certify(report, default_uncertainty(report, kb, report.config.uncertainty_strength));
}

}  // namespace dcrypps
