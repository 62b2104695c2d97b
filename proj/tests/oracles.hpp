#pragma once

// Independent reference implementations used to check the library. These
// deliberately avoid the production code paths: sorting is repeated
// peeling over the raw domination predicate, the front is a quadratic
// filter, and the incomplete beta integral is direct quadrature.

#include <cmath>
#include <cstddef>
#include <vector>

#include "hlsdse/pareto.hpp"

namespace oracle {

inline bool dominated_by_any(const std::vector<hlsdse::Objectives>& pop, std::size_t i,
                             const std::vector<bool>& removed) {
  for (std::size_t j = 0; j < pop.size(); ++j) {
    if (j == i || removed[j]) continue;
    bool leq = pop[j].latency <= pop[i].latency && pop[j].util <= pop[i].util;
    bool strict = pop[j].latency < pop[i].latency || pop[j].util < pop[i].util;
    if (leq && strict) return true;
  }
  return false;
}

/// Non-dominated sorting by repeated peeling.
inline std::vector<std::vector<std::size_t>> peel_fronts(
    const std::vector<hlsdse::Objectives>& pop) {
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<bool> removed(pop.size(), false);
  std::size_t remaining = pop.size();
  while (remaining > 0) {
    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < pop.size(); ++i)
      if (!removed[i] && !dominated_by_any(pop, i, removed)) front.push_back(i);
    for (std::size_t i : front) removed[i] = true;
    remaining -= front.size();
    fronts.push_back(std::move(front));
  }
  return fronts;
}

/// Indices of the non-dominated subset (quadratic filter).
inline std::vector<std::size_t> domination_filter(const std::vector<hlsdse::Objectives>& pop) {
  std::vector<bool> removed(pop.size(), false);
  std::vector<std::size_t> front;
  for (std::size_t i = 0; i < pop.size(); ++i)
    if (!dominated_by_any(pop, i, removed)) front.push_back(i);
  return front;
}

/// Regularized incomplete beta I(c; a, a) by Simpson quadrature after the
/// substitution u = x^a, which removes the integrable singularity at 0.
inline double incomplete_beta_symmetric(double c, double a, int panels = 20001) {
  if (c <= 0.0) return 0.0;
  if (c >= 1.0) return 1.0;
  if (c > 0.5) return 1.0 - incomplete_beta_symmetric(1.0 - c, a, panels);
  double hi = std::pow(c, a);
  int n = panels % 2 == 1 ? panels : panels + 1;
  double h = hi / static_cast<double>(n - 1);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = static_cast<double>(i) * h;
    double v = std::pow(1.0 - std::pow(u, 1.0 / a), a - 1.0);
    double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * v;
  }
  double integral = sum * h / 3.0;
  double log_beta = 2.0 * std::lgamma(a) - std::lgamma(2.0 * a);
  return integral / (a * std::exp(log_beta));
}

}  // namespace oracle
