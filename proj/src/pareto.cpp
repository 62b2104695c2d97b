#include "hlsdse/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "hlsdse/errors.hpp"

namespace hlsdse {

double utilization(double lut, double ff, double dsp, double bram, const UtilWeights& w) {
  return w.w_lut * lut + w.w_ff * ff + w.w_dsp * dsp + w.w_bram * bram;
}

bool dominates(const Objectives& a, const Objectives& b) {
  return a.latency <= b.latency && a.util <= b.util &&
         (a.latency < b.latency || a.util < b.util);
}

std::vector<std::vector<std::size_t>> non_dominated_sort(const std::vector<Objectives>& pop) {
  const std::size_t n = pop.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<int> domination_count(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (dominates(pop[i], pop[j])) dominated[i].push_back(j);
      else if (dominates(pop[j], pop[i])) ++domination_count[i];
    }

  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i)
    if (domination_count[i] == 0) current.push_back(i);
  while (!current.empty()) {
    fronts.push_back(current);
    std::vector<std::size_t> next;
    for (std::size_t i : current)
      for (std::size_t j : dominated[i])
        if (--domination_count[j] == 0) next.push_back(j);
    std::sort(next.begin(), next.end());
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> crowding_distance(const std::vector<Objectives>& front) {
  const std::size_t n = front.size();
  if (n <= 2) return std::vector<double>(n, kCrowdingSentinel);

  std::vector<double> dist(n, 0.0);
  auto accumulate_axis = [&](auto key) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return key(front[a]) < key(front[b]); });
    double lo = key(front[order.front()]);
    double hi = key(front[order.back()]);
    double range = hi - lo;
    dist[order.front()] = kCrowdingSentinel;
    dist[order.back()] = kCrowdingSentinel;
    if (range <= 0.0) return;  // degenerate objective contributes nothing
    for (std::size_t k = 1; k + 1 < n; ++k) {
      std::size_t i = order[k];
      if (dist[i] == kCrowdingSentinel) continue;
      dist[i] += (key(front[order[k + 1]]) - key(front[order[k - 1]])) / range;
    }
  };
  accumulate_axis([](const Objectives& o) { return o.latency; });
  accumulate_axis([](const Objectives& o) { return o.util; });
  return dist;
}

void label_population(std::vector<RankedDesign>& pop) {
  std::vector<Objectives> objectives;
  objectives.reserve(pop.size());
  for (const auto& d : pop) objectives.push_back(d.objectives);
  auto fronts = non_dominated_sort(objectives);
  for (std::size_t f = 0; f < fronts.size(); ++f) {
    std::vector<Objectives> front;
    front.reserve(fronts[f].size());
    for (std::size_t i : fronts[f]) front.push_back(objectives[i]);
    auto crowd = crowding_distance(front);
    for (std::size_t k = 0; k < fronts[f].size(); ++k) {
      pop[fronts[f][k]].rank = static_cast<int>(f + 1);
      pop[fronts[f][k]].crowding = crowd[k];
    }
  }
}

namespace {

/// Indices of `pop` with the given rank, most crowded first, insertion
/// index breaking ties.
std::vector<std::size_t> rank_members(const std::vector<RankedDesign>& pop, int rank) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < pop.size(); ++i)
    if (pop[i].rank == rank) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return pop[a].crowding > pop[b].crowding;
  });
  return idx;
}

}  // namespace

std::vector<RankedDesign> select_elites(const std::vector<RankedDesign>& pop, std::size_t k,
                                        std::size_t rank2_quota) {
  if (k >= pop.size()) {
    // nothing to screen out; still hand parents over best-first
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (pop[a].rank != pop[b].rank) return pop[a].rank < pop[b].rank;
      return pop[a].crowding > pop[b].crowding;
    });
    std::vector<RankedDesign> out;
    out.reserve(pop.size());
    for (std::size_t i : order) out.push_back(pop[i]);
    return out;
  }

  int max_rank = 0;
  for (const auto& d : pop) max_rank = std::max(max_rank, d.rank);

  auto rank1 = rank_members(pop, 1);
  auto rank2 = rank_members(pop, 2);
  std::size_t quota_used = std::min({rank2_quota, rank2.size(), k});

  std::vector<std::size_t> picked;
  std::vector<bool> taken(pop.size(), false);
  auto take = [&](std::size_t i) {
    picked.push_back(i);
    taken[i] = true;
  };

  std::size_t from_rank1 = std::min(k - quota_used, rank1.size());
  for (std::size_t i = 0; i < from_rank1; ++i) take(rank1[i]);
  for (std::size_t i = 0; i < rank2.size() && i < quota_used && picked.size() < k; ++i)
    take(rank2[i]);
  for (int r = 3; r <= max_rank && picked.size() < k; ++r)
    for (std::size_t i : rank_members(pop, r)) {
      if (picked.size() >= k) break;
      take(i);
    }
  // The quota may leave slots open when lower ranks are exhausted; top up
  // across all ranks so the screen always yields k parents.
  if (picked.size() < k) {
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < pop.size(); ++i)
      if (!taken[i]) rest.push_back(i);
    std::stable_sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
      if (pop[a].rank != pop[b].rank) return pop[a].rank < pop[b].rank;
      return pop[a].crowding > pop[b].crowding;
    });
    for (std::size_t i : rest) {
      if (picked.size() >= k) break;
      take(i);
    }
  }

  std::vector<RankedDesign> out;
  out.reserve(picked.size());
  for (std::size_t i : picked) out.push_back(pop[i]);
  return out;
}

std::vector<EvaluatedDesign> pareto_front(const std::vector<EvaluatedDesign>& evals) {
  if (evals.empty()) return {};
  std::vector<Objectives> objectives;
  objectives.reserve(evals.size());
  for (const auto& e : evals) objectives.push_back(e.objectives);
  auto fronts = non_dominated_sort(objectives);

  std::vector<EvaluatedDesign> front;
  for (std::size_t i : fronts.front()) {
    bool duplicate = false;
    for (const auto& kept : front)
      if (kept.objectives == evals[i].objectives) {
        duplicate = true;
        break;
      }
    if (!duplicate) front.push_back(evals[i]);
  }
  std::stable_sort(front.begin(), front.end(), [](const auto& a, const auto& b) {
    return a.objectives.latency < b.objectives.latency;
  });
  return front;
}

double adrs(const std::vector<Objectives>& explored, const std::vector<Objectives>& reference) {
  if (reference.empty()) throw ValidationError("adrs: reference front must be non-empty");
  for (const auto& r : reference)
    if (r.latency <= 0.0 || r.util <= 0.0)
      throw ValidationError("adrs: reference objectives must be strictly positive");
  if (explored.empty()) return std::numeric_limits<double>::infinity();

  double total = 0.0;
  for (const auto& ref : reference) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& ex : explored) {
      double d = std::max({0.0, (ex.latency - ref.latency) / ref.latency,
                           (ex.util - ref.util) / ref.util});
      best = std::min(best, d);
    }
    total += best;
  }
  return total / static_cast<double>(reference.size());
}

std::string front_to_csv(const std::vector<FrontPoint>& front,
                         const std::vector<std::string>& meta) {
  std::ostringstream out;
  for (const auto& line : meta) out << "# " << line << "\n";
  out << "latency,util,config_id\n";
  char buf[64];
  for (const auto& p : front) {
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g,", p.latency, p.util);
    out << buf << p.config_id << "\n";
  }
  return out.str();
}

std::vector<FrontPoint> front_from_csv(const std::string& text) {
  std::vector<FrontPoint> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("latency,util", 0) != 0)
        throw ParseError("front CSV line " + std::to_string(lineno) +
                         ": expected header 'latency,util,config_id'");
      header_seen = true;
      continue;
    }
    std::istringstream fields(line);
    std::string lat, util, id;
    if (!std::getline(fields, lat, ',') || !std::getline(fields, util, ','))
      throw ParseError("front CSV line " + std::to_string(lineno) + ": expected latency,util[,config_id]");
    std::getline(fields, id, ',');
    FrontPoint p;
    try {
      std::size_t used = 0;
      p.latency = std::stod(lat, &used);
      if (used != lat.size()) throw std::invalid_argument(lat);
      p.util = std::stod(util, &used);
      if (used != util.size()) throw std::invalid_argument(util);
    } catch (const std::exception&) {
      throw ParseError("front CSV line " + std::to_string(lineno) + ": malformed number");
    }
    p.config_id = id;
    out.push_back(std::move(p));
  }
  if (!header_seen) throw ParseError("front CSV: missing header line");
  return out;
}

nlohmann::json front_json(const std::vector<FrontPoint>& front) {
  auto arr = nlohmann::json::array();
  for (const auto& p : front)
    arr.push_back({{"latency", p.latency}, {"util", p.util}, {"config_id", p.config_id}});
  return arr;
}

}  // namespace hlsdse
