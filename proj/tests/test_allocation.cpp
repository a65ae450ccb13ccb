#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "cpss/allocation.hpp"
#include "cpss/channel.hpp"
#include "doctest.h"
#include "oracles.hpp"

using cpss::AllocationMethod;
using cpss::Assignment;
using cpss::Band;
using cpss::PreferenceProfile;

namespace {

std::vector<int> iota_ids(int n) {
  std::vector<int> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = i;
  return ids;
}

std::vector<std::vector<double>> random_gains(std::mt19937_64& gen, int users, int subcarriers) {
  std::uniform_real_distribution<double> dist(0.01, 10.0);
  std::vector<std::vector<double>> gains(users, std::vector<double>(subcarriers));
  for (auto& row : gains)
    for (double& g : row) g = dist(gen);
  return gains;
}

int user_rank(const PreferenceProfile& prefs, int user_slot, int subcarrier_id) {
  const auto& list = prefs.user_prefs[user_slot];
  auto it = std::find(list.begin(), list.end(), subcarrier_id);
  return it == list.end() ? static_cast<int>(list.size())
                          : static_cast<int>(it - list.begin());
}

// Map an assignment band to user slot -> subcarrier slot (-1 if unmatched).
std::vector<int> match_vector(const Assignment& assignment, const PreferenceProfile& prefs,
                              Band band) {
  std::vector<int> match(prefs.users.size(), -1);
  for (const auto& [sc, accepted] : assignment.band(band))
    for (int user : accepted) match[prefs.user_slot(user)] = prefs.subcarrier_slot(sc);
  return match;
}

void check_assignment_shape(const Assignment& assignment, int users, int capacity) {
  std::set<int> seen;
  int matched = 0;
  for (const auto& band : assignment.bands)
    for (const auto& [sc, accepted] : band) {
      CHECK(static_cast<int>(accepted.size()) <= capacity);
      CHECK(std::is_sorted(accepted.begin(), accepted.end()));
      for (int user : accepted) {
        CHECK(seen.insert(user).second);
        ++matched;
      }
    }
  for (int user : assignment.unmatched) CHECK(seen.insert(user).second);
  CHECK(static_cast<int>(seen.size()) == users);
  CHECK(assignment.matched_count() == matched);
}

}  // namespace

TEST_CASE("preferences rank gains descending with index tie-break") {
  PreferenceProfile prefs =
      cpss::build_preferences_from_gains({{5.0, 2.0, 9.0}}, iota_ids(1), iota_ids(3));
  CHECK(prefs.user_prefs[0] == std::vector<int>{2, 0, 1});

  PreferenceProfile tied =
      cpss::build_preferences_from_gains({{1.0}, {1.0}, {3.0}}, iota_ids(3), iota_ids(1));
  CHECK(tied.subcarrier_prefs[0] == std::vector<int>{2, 0, 1});

  std::mt19937_64 gen(101);
  for (int trial = 0; trial < 20; ++trial) {
    auto gains = random_gains(gen, 4, 3);
    PreferenceProfile p = cpss::build_preferences_from_gains(gains, iota_ids(4), iota_ids(3));
    for (int u = 0; u < 4; ++u) {
      // Selection-sort oracle: repeatedly take the max gain, lower index first.
      std::vector<int> remaining = iota_ids(3);
      std::vector<int> expected;
      while (!remaining.empty()) {
        int best = remaining[0];
        for (int s : remaining)
          if (gains[u][s] > gains[u][best]) best = s;
        expected.push_back(best);
        remaining.erase(std::find(remaining.begin(), remaining.end(), best));
      }
      CHECK(p.user_prefs[u] == expected);
    }
  }
}

TEST_CASE("preferences from channels use squared Frobenius gains") {
  cpss::Topology topo;
  topo.users_per_cell = {3, 1};
  topo.tx_antennas = {2, 1};
  topo.rx_antennas = {2, 1};
  topo.dedicated_subcarriers = {3, 1};
  topo.shared_subcarriers = 0;
  cpss::ChannelSet channels = cpss::build_channel_set(topo, 1.0, 55, 0);

  std::vector<std::vector<double>> gains(3, std::vector<double>(3));
  for (int u = 0; u < 3; ++u)
    for (int s = 0; s < 3; ++s)
      gains[u][s] = cpss::frob_norm_sq(channels.own_channel(0, u, Band::Dedicated, s));

  PreferenceProfile from_channels = cpss::build_preferences(channels, 0, Band::Dedicated);
  PreferenceProfile from_gains =
      cpss::build_preferences_from_gains(gains, iota_ids(3), iota_ids(3));
  CHECK(from_channels.user_prefs == from_gains.user_prefs);
  CHECK(from_channels.subcarrier_prefs == from_gains.subcarrier_prefs);

  PreferenceProfile subset = cpss::build_preferences(channels, 0, Band::Dedicated, {2});
  CHECK(subset.users == std::vector<int>{2});
  CHECK(subset.user_prefs[0] == from_gains.user_prefs[2]);
}

TEST_CASE("preference builders reject malformed gains") {
  CHECK_THROWS_AS(cpss::build_preferences_from_gains({{1.0, 2.0}, {3.0}}, iota_ids(2), iota_ids(2)),
                  cpss::DimensionError);
  CHECK_THROWS_AS(cpss::build_preferences_from_gains({{-1.0}}, iota_ids(1), iota_ids(1)),
                  cpss::ConfigError);
}

TEST_CASE("deferred acceptance accepts up to capacity without contention") {
  PreferenceProfile prefs =
      cpss::build_preferences_from_gains({{4.0}, {1.0}}, iota_ids(2), iota_ids(1));
  Assignment result = cpss::gale_shapley(prefs, 2);
  CHECK(result.dedicated().at(0) == std::vector<int>{0, 1});
  CHECK(result.unmatched.empty());
}

TEST_CASE("deferred acceptance keeps the two most preferred of three proposers") {
  PreferenceProfile prefs =
      cpss::build_preferences_from_gains({{9.0}, {5.0}, {1.0}}, iota_ids(3), iota_ids(1));
  Assignment result = cpss::gale_shapley(prefs, 2);
  CHECK(result.dedicated().at(0) == std::vector<int>{0, 1});
  CHECK(result.unmatched == std::vector<int>{2});
}

TEST_CASE("deferred acceptance evicts the least preferred holder") {
  // Subcarrier ranks user 2 first, then 0, then 1; user 1 is accepted early
  // and displaced when user 2 proposes.
  PreferenceProfile prefs =
      cpss::build_preferences_from_gains({{5.0}, {1.0}, {9.0}}, iota_ids(3), iota_ids(1));
  Assignment result = cpss::gale_shapley(prefs, 2);
  CHECK(result.dedicated().at(0) == std::vector<int>{0, 2});
  CHECK(result.unmatched == std::vector<int>{1});
}

TEST_CASE("deferred acceptance output is the user-optimal stable matching") {
  std::mt19937_64 gen(202);
  for (int trial = 0; trial < 50; ++trial) {
    auto gains = random_gains(gen, 6, 2);
    PreferenceProfile prefs = cpss::build_preferences_from_gains(gains, iota_ids(6), iota_ids(2));
    const int capacity = 2;

    cpss::GsStats stats;
    Assignment result = cpss::gale_shapley(prefs, capacity, &stats);
    check_assignment_shape(result, 6, capacity);
    CHECK(cpss::stability_check(result, prefs, capacity));
    CHECK(stats.proposals <= 6 * 2);
    CHECK(stats.proposals >= result.matched_count());

    auto stable = oracle::all_stable_matchings(prefs, capacity);
    REQUIRE(!stable.empty());
    std::vector<int> got = match_vector(result, prefs, Band::Dedicated);
    for (int u = 0; u < 6; ++u) {
      int got_rank = got[u] < 0 ? 2 : user_rank(prefs, u, prefs.subcarriers[got[u]]);
      int best_rank = 2;
      for (const auto& m : stable) {
        int r = m[u] < 0 ? 2 : user_rank(prefs, u, prefs.subcarriers[m[u]]);
        best_rank = std::min(best_rank, r);
      }
      CHECK(got_rank == best_rank);
    }
  }
}

TEST_CASE("deferred acceptance is deterministic") {
  std::mt19937_64 gen(203);
  auto gains = random_gains(gen, 5, 3);
  PreferenceProfile prefs = cpss::build_preferences_from_gains(gains, iota_ids(5), iota_ids(3));
  Assignment a = cpss::gale_shapley(prefs, 1);
  Assignment b = cpss::gale_shapley(prefs, 1);
  CHECK(a.bands == b.bands);
  CHECK(a.unmatched == b.unmatched);
}

TEST_CASE("stability check flags blocking pairs and spare capacity") {
  PreferenceProfile prefs =
      cpss::build_preferences_from_gains({{9.0, 1.0}, {8.0, 2.0}}, iota_ids(2), iota_ids(2));

  Assignment stable = cpss::gale_shapley(prefs, 1);
  CHECK(cpss::stability_check(stable, prefs, 1));

  // Both users parked on their second choice while subcarrier 0 sits empty.
  Assignment blocked;
  blocked.band(Band::Dedicated)[1] = {0};
  blocked.unmatched = {1};
  CHECK_FALSE(cpss::stability_check(blocked, prefs, 1));

  // Unmatched user with spare capacity anywhere is always blocking.
  Assignment empty;
  empty.unmatched = {0, 1};
  CHECK_FALSE(cpss::stability_check(empty, prefs, 1));
}

TEST_CASE("transportation handles the single-user instance") {
  Assignment result = cpss::transportation_assign({{3.7}}, 1);
  CHECK(result.dedicated().at(0) == std::vector<int>{0});
  CHECK(result.unmatched.empty());
}

TEST_CASE("transportation prefers total gain over greedy choices") {
  // Greedy by user would give 10 + 9 and strand user 2's gain of 8 behind a
  // full subcarrier; the optimum takes 10 + 9 + 8 = 27.
  Assignment result = cpss::transportation_assign({{10.0, 1.0}, {9.0, 1.0}, {1.0, 8.0}}, 2);
  CHECK(result.dedicated().at(0) == std::vector<int>{0, 1});
  CHECK(result.dedicated().at(1) == std::vector<int>{2});
  CHECK(result.unmatched.empty());
}

TEST_CASE("transportation matches the exhaustive optimum") {
  std::mt19937_64 gen(404);
  for (int trial = 0; trial < 100; ++trial) {
    auto gains = random_gains(gen, 5, 2);
    Assignment result = cpss::transportation_assign(gains, 2);
    check_assignment_shape(result, 5, 2);
    CHECK(result.matched_count() == 4);

    double got = oracle::assignment_gain(result, Band::Dedicated, gains, iota_ids(5), iota_ids(2));
    double best = oracle::best_assignment_gain(gains, 2);
    CHECK(got == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("transportation matches everyone when slots dominate") {
  std::mt19937_64 gen(405);
  auto gains = random_gains(gen, 3, 4);
  Assignment result = cpss::transportation_assign(gains, 2);
  CHECK(result.matched_count() == 3);
  CHECK(result.unmatched.empty());
}

TEST_CASE("transportation validates gains") {
  CHECK_THROWS_AS(cpss::transportation_assign({{1.0, 2.0}, {3.0}}, 1), cpss::DimensionError);
  CHECK_THROWS_AS(cpss::transportation_assign({{-0.5}}, 1), cpss::ConfigError);
}

TEST_CASE("two-stage allocation leaves the shared band empty when dedicated slots suffice") {
  cpss::Topology topo;
  topo.users_per_cell = {8, 8};
  topo.tx_antennas = {4, 4};
  topo.rx_antennas = {2, 2};
  topo.dedicated_subcarriers = {2, 2};
  topo.shared_subcarriers = 1;
  cpss::ChannelSet channels = cpss::build_channel_set(topo, 1.0, 66, 0);

  for (auto method : {AllocationMethod::GaleShapley, AllocationMethod::Transportation}) {
    Assignment result = cpss::allocate_two_stage(channels, 0, method, 4);
    check_assignment_shape(result, 8, 4);
    CHECK(result.matched_count() == 8);
    CHECK(result.shared().empty());
    CHECK(result.unmatched.empty());
  }
}

TEST_CASE("two-stage allocation spills exactly the overflow into the shared band") {
  cpss::Topology topo;
  topo.users_per_cell = {10, 10};
  topo.tx_antennas = {4, 4};
  topo.rx_antennas = {2, 2};
  topo.dedicated_subcarriers = {2, 2};
  topo.shared_subcarriers = 1;
  cpss::ChannelSet channels = cpss::build_channel_set(topo, 1.0, 67, 0);

  for (auto method : {AllocationMethod::GaleShapley, AllocationMethod::Transportation}) {
    for (int cell = 0; cell < 2; ++cell) {
      Assignment result = cpss::allocate_two_stage(channels, cell, method, 4);
      check_assignment_shape(result, 10, 4);
      int dedicated = 0, shared = 0;
      for (const auto& [sc, accepted] : result.dedicated()) dedicated += accepted.size();
      for (const auto& [sc, accepted] : result.shared()) shared += accepted.size();
      CHECK(dedicated == 8);
      CHECK(shared == 2);
      CHECK(result.unmatched.empty());
    }
  }
}

TEST_CASE("two-stage allocation leaves true overflow unmatched") {
  cpss::Topology topo;
  topo.users_per_cell = {18, 18};
  topo.tx_antennas = {4, 4};
  topo.rx_antennas = {2, 2};
  topo.dedicated_subcarriers = {3, 3};
  topo.shared_subcarriers = 0;
  cpss::ChannelSet channels = cpss::build_channel_set(topo, 1.0, 68, 0);

  for (auto method : {AllocationMethod::GaleShapley, AllocationMethod::Transportation}) {
    Assignment result = cpss::allocate_two_stage(channels, 0, method, 4);
    check_assignment_shape(result, 18, 4);
    CHECK(result.matched_count() == 12);
    CHECK(static_cast<int>(result.unmatched.size()) == 6);
    CHECK(result.shared().empty());
  }
}

TEST_CASE("count_feasible_groups") {
  CHECK(cpss::count_feasible_groups(1, 4) == 1);
  CHECK(cpss::count_feasible_groups(4, 2) == 10);
  CHECK(cpss::count_feasible_groups(10, 4) == 385);
  CHECK(cpss::count_feasible_groups(60, 2) == 60 + 59 * 60 / 2);
}
