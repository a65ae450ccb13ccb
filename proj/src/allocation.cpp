#include "cpss/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace cpss {

namespace {

int find_slot(const std::vector<int>& ids, int id) {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return -1;
  return static_cast<int>(it - ids.begin());
}

// Ranks candidate indices by descending score; equal scores keep ascending
// index order so the output never depends on sort internals.
std::vector<int> rank_descending(const std::vector<double>& scores, const std::vector<int>& ids) {
  std::vector<int> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  std::vector<int> ranked(ids.size());
  for (size_t i = 0; i < order.size(); ++i) ranked[i] = ids[order[i]];
  return ranked;
}

void validate_gains(const std::vector<std::vector<double>>& gains, size_t users,
                    size_t subcarriers) {
  if (gains.size() != users) throw DimensionError("gains rows must match user count");
  for (const auto& row : gains) {
    if (row.size() != subcarriers) throw DimensionError("gains columns must match subcarrier count");
    for (double g : row) {
      if (!std::isfinite(g) || g < 0.0) throw ConfigError("gains must be finite and nonnegative");
    }
  }
}

std::vector<std::vector<double>> gain_matrix(const ChannelSet& channels, int cell, Band band,
                                             const std::vector<int>& user_ids,
                                             const std::vector<int>& subcarrier_ids) {
  std::vector<std::vector<double>> gains(user_ids.size(),
                                         std::vector<double>(subcarrier_ids.size()));
  for (size_t u = 0; u < user_ids.size(); ++u)
    for (size_t s = 0; s < subcarrier_ids.size(); ++s)
      gains[u][s] = frob_norm_sq(channels.own_channel(cell, user_ids[u], band, subcarrier_ids[s]));
  return gains;
}

}  // namespace

int PreferenceProfile::user_slot(int user_id) const { return find_slot(users, user_id); }

int PreferenceProfile::subcarrier_slot(int subcarrier_id) const {
  return find_slot(subcarriers, subcarrier_id);
}

bool Assignment::user_matched(int user) const {
  for (const auto& band_map : bands)
    for (const auto& [sc, accepted] : band_map)
      if (std::binary_search(accepted.begin(), accepted.end(), user)) return true;
  return false;
}

int Assignment::matched_count() const {
  int count = 0;
  for (const auto& band_map : bands)
    for (const auto& [sc, accepted] : band_map) count += static_cast<int>(accepted.size());
  return count;
}

PreferenceProfile build_preferences_from_gains(const std::vector<std::vector<double>>& gains,
                                               const std::vector<int>& user_ids,
                                               const std::vector<int>& subcarrier_ids) {
  validate_gains(gains, user_ids.size(), subcarrier_ids.size());
  if (!std::is_sorted(user_ids.begin(), user_ids.end()) ||
      std::adjacent_find(user_ids.begin(), user_ids.end()) != user_ids.end())
    throw ConfigError("user ids must be strictly ascending");
  if (!std::is_sorted(subcarrier_ids.begin(), subcarrier_ids.end()) ||
      std::adjacent_find(subcarrier_ids.begin(), subcarrier_ids.end()) != subcarrier_ids.end())
    throw ConfigError("subcarrier ids must be strictly ascending");

  PreferenceProfile prefs;
  prefs.users = user_ids;
  prefs.subcarriers = subcarrier_ids;
  prefs.user_prefs.resize(user_ids.size());
  prefs.subcarrier_prefs.resize(subcarrier_ids.size());
  for (size_t u = 0; u < user_ids.size(); ++u)
    prefs.user_prefs[u] = rank_descending(gains[u], subcarrier_ids);
  for (size_t s = 0; s < subcarrier_ids.size(); ++s) {
    std::vector<double> column(user_ids.size());
    for (size_t u = 0; u < user_ids.size(); ++u) column[u] = gains[u][s];
    prefs.subcarrier_prefs[s] = rank_descending(column, user_ids);
  }
  return prefs;
}

PreferenceProfile build_preferences(const ChannelSet& channels, int cell, Band band) {
  std::vector<int> all(channels.topo.users_per_cell[cell]);
  std::iota(all.begin(), all.end(), 0);
  return build_preferences(channels, cell, band, all);
}

PreferenceProfile build_preferences(const ChannelSet& channels, int cell, Band band,
                                    const std::vector<int>& user_subset) {
  int count = band == Band::Dedicated ? channels.topo.dedicated_subcarriers[cell]
                                      : channels.topo.shared_subcarriers;
  std::vector<int> subcarrier_ids(count);
  std::iota(subcarrier_ids.begin(), subcarrier_ids.end(), 0);
  return build_preferences_from_gains(gain_matrix(channels, cell, band, user_subset, subcarrier_ids),
                                      user_subset, subcarrier_ids);
}

Assignment gale_shapley(const PreferenceProfile& prefs, int capacity, GsStats* stats, Band into) {
  if (capacity < 1) throw ConfigError("capacity must be >= 1");
  const int users = static_cast<int>(prefs.users.size());
  const int subcarriers = static_cast<int>(prefs.subcarriers.size());

  // rank[s][u] = position of user slot u in subcarrier s's list; lower wins.
  std::vector<std::vector<int>> rank(subcarriers, std::vector<int>(users));
  for (int s = 0; s < subcarriers; ++s)
    for (int pos = 0; pos < users; ++pos)
      rank[s][prefs.user_slot(prefs.subcarrier_prefs[s][pos])] = pos;

  // Proposals consume the list front to back, under acceptance as well as
  // rejection, so `cursor` doubles as the count of entries removed.
  std::vector<int> cursor(users, 0);
  std::vector<int> engaged(users, -1);  // subcarrier slot or -1
  std::vector<std::vector<int>> accepted(subcarriers);
  int proposals = 0;

  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (int u = 0; u < users; ++u) {
      if (engaged[u] >= 0 || cursor[u] >= static_cast<int>(prefs.user_prefs[u].size())) continue;
      const int s = prefs.subcarrier_slot(prefs.user_prefs[u][cursor[u]]);
      ++cursor[u];
      ++proposals;
      progressed = true;
      auto& holders = accepted[s];
      if (static_cast<int>(holders.size()) < capacity) {
        holders.push_back(u);
        engaged[u] = s;
        continue;
      }
      // Full: the proposer displaces the worst-ranked holder only if it
      // strictly outranks them.
      auto worst = std::max_element(holders.begin(), holders.end(),
                                    [&](int a, int b) { return rank[s][a] < rank[s][b]; });
      if (rank[s][u] < rank[s][*worst]) {
        engaged[*worst] = -1;
        engaged[u] = s;
        *worst = u;
      }
    }
  }

  if (stats) stats->proposals = proposals;

  Assignment out;
  auto& matches = out.band(into);
  for (int s = 0; s < subcarriers; ++s) {
    if (accepted[s].empty()) continue;
    std::vector<int> ids;
    ids.reserve(accepted[s].size());
    for (int u : accepted[s]) ids.push_back(prefs.users[u]);
    std::sort(ids.begin(), ids.end());
    matches[prefs.subcarriers[s]] = std::move(ids);
  }
  for (int u = 0; u < users; ++u)
    if (engaged[u] < 0) out.unmatched.push_back(prefs.users[u]);
  return out;
}

namespace {

struct FlowEdge {
  int to;
  int cap;
  double cost;
};

// Successive shortest augmenting paths on the bipartite transportation graph.
// Every edge capacity is integral and each augmentation pushes one unit, so
// the final flow is integral; Bellman-Ford handles the negative arc costs.
class MinCostFlow {
 public:
  explicit MinCostFlow(int nodes) : adjacency_(nodes) {}

  void add_edge(int from, int to, int cap, double cost) {
    adjacency_[from].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({to, cap, cost});
    adjacency_[to].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({from, 0, -cost});
  }

  // Pushes exactly `amount` units; throws if the graph cannot carry them.
  void run(int source, int sink, int amount) {
    for (int pushed = 0; pushed < amount; ++pushed) {
      if (!augment(source, sink)) throw SolverError("transportation flow infeasible");
    }
  }

  int flow_on(int edge_index) const { return edges_[2 * edge_index + 1].cap; }

 private:
  bool augment(int source, int sink) {
    const int n = static_cast<int>(adjacency_.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, inf);
    std::vector<int> via(n, -1);
    dist[source] = 0.0;
    for (int round = 0; round < n - 1; ++round) {
      bool relaxed = false;
      for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
        const int from = edges_[e ^ 1].to;
        if (edges_[e].cap <= 0 || dist[from] == inf) continue;
        if (dist[from] + edges_[e].cost < dist[edges_[e].to]) {
          dist[edges_[e].to] = dist[from] + edges_[e].cost;
          via[edges_[e].to] = e;
          relaxed = true;
        }
      }
      if (!relaxed) break;
    }
    if (via[sink] < 0) return false;
    for (int node = sink; node != source; node = edges_[via[node] ^ 1].to) {
      edges_[via[node]].cap -= 1;
      edges_[via[node] ^ 1].cap += 1;
    }
    return true;
  }

  std::vector<std::vector<int>> adjacency_;
  std::vector<FlowEdge> edges_;
};

}  // namespace

Assignment transportation_assign(const std::vector<std::vector<double>>& gains, int capacity) {
  std::vector<int> user_ids(gains.size());
  std::iota(user_ids.begin(), user_ids.end(), 0);
  std::vector<int> subcarrier_ids(gains.empty() ? 0 : gains[0].size());
  std::iota(subcarrier_ids.begin(), subcarrier_ids.end(), 0);
  return transportation_assign(gains, capacity, user_ids, subcarrier_ids);
}

Assignment transportation_assign(const std::vector<std::vector<double>>& gains, int capacity,
                                 const std::vector<int>& user_ids,
                                 const std::vector<int>& subcarrier_ids, Band into) {
  if (capacity < 1) throw ConfigError("capacity must be >= 1");
  validate_gains(gains, user_ids.size(), subcarrier_ids.size());
  const int users = static_cast<int>(user_ids.size());
  const int subcarriers = static_cast<int>(subcarrier_ids.size());

  // Node layout: source, users, subcarriers, sink. Maximizing total gain is
  // minimizing total -gain.
  const int source = 0;
  const int sink = users + subcarriers + 1;
  MinCostFlow flow(sink + 1);
  for (int u = 0; u < users; ++u) flow.add_edge(source, 1 + u, 1, 0.0);
  std::vector<std::vector<int>> pair_edge(users, std::vector<int>(subcarriers));
  for (int u = 0; u < users; ++u)
    for (int s = 0; s < subcarriers; ++s) {
      pair_edge[u][s] = users + u * subcarriers + s;
      flow.add_edge(1 + u, 1 + users + s, 1, -gains[u][s]);
    }
  for (int s = 0; s < subcarriers; ++s)
    flow.add_edge(1 + users + s, sink, capacity, 0.0);

  flow.run(source, sink, std::min(users, capacity * subcarriers));

  Assignment out;
  auto& matches = out.band(into);
  std::vector<bool> matched(users, false);
  for (int u = 0; u < users; ++u)
    for (int s = 0; s < subcarriers; ++s)
      if (flow.flow_on(pair_edge[u][s]) == 1) {
        matches[subcarrier_ids[s]].push_back(user_ids[u]);
        matched[u] = true;
      }
  for (auto& [sc, ids] : matches) std::sort(ids.begin(), ids.end());
  for (int u = 0; u < users; ++u)
    if (!matched[u]) out.unmatched.push_back(user_ids[u]);
  return out;
}

Assignment allocate_two_stage(const ChannelSet& channels, int cell, AllocationMethod method,
                              int capacity) {
  auto run_band = [&](Band band, const std::vector<int>& user_subset) {
    if (method == AllocationMethod::GaleShapley)
      return gale_shapley(build_preferences(channels, cell, band, user_subset), capacity, nullptr,
                          band);
    std::vector<int> subcarrier_ids(band == Band::Dedicated
                                        ? channels.topo.dedicated_subcarriers[cell]
                                        : channels.topo.shared_subcarriers);
    std::iota(subcarrier_ids.begin(), subcarrier_ids.end(), 0);
    return transportation_assign(gain_matrix(channels, cell, band, user_subset, subcarrier_ids),
                                 capacity, user_subset, subcarrier_ids, band);
  };

  std::vector<int> all(channels.topo.users_per_cell[cell]);
  std::iota(all.begin(), all.end(), 0);

  Assignment out = run_band(Band::Dedicated, all);
  out.cell = cell;
  if (channels.topo.shared_subcarriers > 0 && !out.unmatched.empty()) {
    Assignment second = run_band(Band::Shared, out.unmatched);
    out.band(Band::Shared) = std::move(second.band(Band::Shared));
    out.unmatched = std::move(second.unmatched);
  }
  return out;
}

bool stability_check(const Assignment& assignment, const PreferenceProfile& prefs, int capacity,
                     Band band) {
  const int users = static_cast<int>(prefs.users.size());
  const auto& matches = assignment.band(band);

  std::vector<int> matched_to(users, -1);  // subcarrier slot
  for (const auto& [sc, accepted] : matches) {
    const int s = prefs.subcarrier_slot(sc);
    if (s < 0) continue;
    for (int id : accepted) {
      const int u = prefs.user_slot(id);
      if (u >= 0) matched_to[u] = s;
    }
  }

  std::vector<std::vector<int>> rank(prefs.subcarriers.size(), std::vector<int>(users));
  for (size_t s = 0; s < prefs.subcarriers.size(); ++s)
    for (int pos = 0; pos < users; ++pos)
      rank[s][prefs.user_slot(prefs.subcarrier_prefs[s][pos])] = pos;

  for (int u = 0; u < users; ++u) {
    const auto& list = prefs.user_prefs[u];
    // Every entry ahead of the current match (the whole list when unmatched)
    // is a candidate for a blocking pair.
    size_t limit = list.size();
    if (matched_to[u] >= 0) {
      const int current = prefs.subcarriers[matched_to[u]];
      limit = std::find(list.begin(), list.end(), current) - list.begin();
    }
    for (size_t pos = 0; pos < limit; ++pos) {
      const int s = prefs.subcarrier_slot(list[pos]);
      auto it = matches.find(list[pos]);
      const int load = it == matches.end() ? 0 : static_cast<int>(it->second.size());
      if (load < capacity) return false;
      for (int id : it->second) {
        const int holder = prefs.user_slot(id);
        if (holder >= 0 && rank[s][u] < rank[s][holder]) return false;
      }
    }
  }
  return true;
}

uint64_t count_feasible_groups(int users, int capacity) {
  if (users < 1 || capacity < 1) throw ConfigError("users and capacity must be >= 1");
  uint64_t total = 0;
  const int max_size = std::min(users, capacity);
  for (int t = 1; t <= max_size; ++t) {
    // C(users, t) by the multiplicative rule; every prefix product is an
    // exact binomial so the division is exact.
    uint64_t binom = 1;
    for (int i = 1; i <= t; ++i) binom = binom * static_cast<uint64_t>(users - t + i) / i;
    total += binom;
  }
  return total;
}

}  // namespace cpss
