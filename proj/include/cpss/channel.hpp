// Rayleigh-fading channel generation for the two-cell topology: dedicated
// subcarriers see only the own base station, shared subcarriers also carry a
// cross link from the other cell's base station.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cpss/linalg.hpp"
#include "cpss/rng.hpp"

namespace cpss {

struct ConfigError : Error {
  using Error::Error;
};

enum class Band { Dedicated = 0, Shared = 1 };

constexpr int kNumCells = 2;

struct Topology {
  std::array<int, 2> users_per_cell{1, 1};          // I_k, I_j
  std::array<int, 2> tx_antennas{1, 1};             // per base station
  std::array<int, 2> rx_antennas{1, 1};             // per user
  std::array<int, 2> dedicated_subcarriers{1, 1};   // N, M
  int shared_subcarriers = 0;                       // common pool

  /// Throws ConfigError on non-positive counts (shared may be zero). Loads
  /// with fewer users than transmit antennas are allowed so degenerate
  /// single-user studies stay expressible.
  void validate() const;
};

/// All channel matrices for one Monte Carlo sample. Entries are drawn from
/// substreams keyed by (master_seed, sample_index, cell, user, band,
/// subcarrier, transmitter), so the set is reproducible in any build order.
struct ChannelSet {
  Topology topo;
  double noise_variance = 1.0;

  // [cell][user][subcarrier]
  std::vector<std::vector<std::vector<ComplexMatrix>>> dedicated;
  std::vector<std::vector<std::vector<ComplexMatrix>>> shared_own;
  std::vector<std::vector<std::vector<ComplexMatrix>>> shared_cross;

  const ComplexMatrix& own_channel(int cell, int user, Band band, int subcarrier) const {
    return band == Band::Dedicated ? dedicated[cell][user][subcarrier]
                                   : shared_own[cell][user][subcarrier];
  }
  const ComplexMatrix& cross_channel(int cell, int user, int shared_subcarrier) const {
    return shared_cross[cell][user][shared_subcarrier];
  }
};

/// Matrix of i.i.d. CN(0,1) entries; real and imaginary parts are each
/// Gaussian with variance 1/2. Deterministic given the stream state.
ComplexMatrix draw_rayleigh(RandomStream& stream, int rows, int cols);

ChannelSet build_channel_set(const Topology& topo, double noise_variance,
                             uint64_t master_seed, uint64_t sample_index);

}  // namespace cpss
