// Subcarrier-to-user assignment for one cell: capacitated deferred acceptance
// (users propose, subcarriers hold up to N_T users) and a max-weight
// transportation formulation solved as min-cost flow. Both run dedicated band
// first, then the shared band for users left over.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "cpss/channel.hpp"
#include "cpss/linalg.hpp"

namespace cpss {

struct SolverError : Error {
  using Error::Error;
};

enum class AllocationMethod { GaleShapley, Transportation };

/// Preference lists for one (cell, band) instance. Both sides rank by
/// descending squared Frobenius norm of the own-cell channel; ties break by
/// ascending index so runs are reproducible.
struct PreferenceProfile {
  std::vector<int> users;        // user ids, ascending
  std::vector<int> subcarriers;  // subcarrier ids, ascending
  std::vector<std::vector<int>> user_prefs;        // [user slot] -> subcarrier ids, best first
  std::vector<std::vector<int>> subcarrier_prefs;  // [subcarrier slot] -> user ids, best first

  int user_slot(int user_id) const;
  int subcarrier_slot(int subcarrier_id) const;
};

/// Binary allocation for one cell: per band, subcarrier -> accepted users
/// (each list capped at the transmit antenna count), plus users that ended up
/// with no subcarrier in either band. Accepted lists are stored sorted and a
/// user appears on at most one subcarrier across both bands.
struct Assignment {
  int cell = 0;
  std::array<std::map<int, std::vector<int>>, 2> bands;  // index with Band
  std::vector<int> unmatched;

  std::map<int, std::vector<int>>& band(Band b) { return bands[static_cast<int>(b)]; }
  const std::map<int, std::vector<int>>& band(Band b) const {
    return bands[static_cast<int>(b)];
  }
  const std::map<int, std::vector<int>>& dedicated() const { return band(Band::Dedicated); }
  const std::map<int, std::vector<int>>& shared() const { return band(Band::Shared); }

  bool user_matched(int user) const;
  int matched_count() const;
};

struct GsStats {
  int proposals = 0;
};

/// Rank both sides of a raw gains matrix (gains[u][s] for the listed ids).
PreferenceProfile build_preferences_from_gains(const std::vector<std::vector<double>>& gains,
                                               const std::vector<int>& user_ids,
                                               const std::vector<int>& subcarrier_ids);

/// Gains are squared Frobenius norms of the own-cell channels on `band`,
/// optionally restricted to a subset of users.
PreferenceProfile build_preferences(const ChannelSet& channels, int cell, Band band);
PreferenceProfile build_preferences(const ChannelSet& channels, int cell, Band band,
                                    const std::vector<int>& user_subset);

/// Deferred acceptance with quotas; fills the `into` band of the result.
/// Unmatched users exhaust their lists; that is a normal outcome, not an
/// error. Every proposal consumes one preference entry, so
/// stats->proposals <= #users * #subcarriers.
Assignment gale_shapley(const PreferenceProfile& prefs, int capacity, GsStats* stats = nullptr,
                        Band into = Band::Dedicated);

/// Max total gain subject to <= capacity users per subcarrier and <= 1
/// subcarrier per user, with exactly min(#users, capacity * #subcarriers)
/// users matched. Solved by successive shortest augmenting paths; the flow is
/// integral by construction. gains[u][s] must be finite and >= 0.
Assignment transportation_assign(const std::vector<std::vector<double>>& gains, int capacity);
Assignment transportation_assign(const std::vector<std::vector<double>>& gains, int capacity,
                                 const std::vector<int>& user_ids,
                                 const std::vector<int>& subcarrier_ids,
                                 Band into = Band::Dedicated);

/// Dedicated-band pass over all users, then a shared-band pass over the
/// leftovers. Users unmatched after both passes keep rate zero.
Assignment allocate_two_stage(const ChannelSet& channels, int cell, AllocationMethod method,
                              int capacity);

/// True iff no blocking pair exists in the `band` matching against the
/// original preference lists.
bool stability_check(const Assignment& assignment, const PreferenceProfile& prefs, int capacity,
                     Band band = Band::Dedicated);

/// Number of user groups that can share one subcarrier:
/// sum over t = 1..min(capacity, users) of C(users, t).
uint64_t count_feasible_groups(int users, int capacity);

}  // namespace cpss
