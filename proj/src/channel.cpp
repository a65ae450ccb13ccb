#include "cpss/channel.hpp"

namespace cpss {

void Topology::validate() const {
  for (int c = 0; c < kNumCells; ++c) {
    if (users_per_cell[c] < 1) throw ConfigError("topology: users_per_cell must be >= 1");
    if (tx_antennas[c] < 1) throw ConfigError("topology: tx_antennas must be >= 1");
    if (rx_antennas[c] < 1) throw ConfigError("topology: rx_antennas must be >= 1");
    if (dedicated_subcarriers[c] < 1)
      throw ConfigError("topology: dedicated_subcarriers must be >= 1");
  }
  if (shared_subcarriers < 0) throw ConfigError("topology: shared_subcarriers must be >= 0");
}

ComplexMatrix draw_rayleigh(RandomStream& stream, int rows, int cols) {
  ComplexMatrix h(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) h(r, c) = stream.complex_gaussian_unit();
  return h;
}

namespace {

// Field tags keeping substream keys collision-free across draw kinds.
constexpr uint64_t kTagDedicated = 1;
constexpr uint64_t kTagShared = 2;

ComplexMatrix draw_keyed(uint64_t master_seed, uint64_t sample_index, uint64_t tag, int cell,
                         int user, int subcarrier, int transmitter, int rows, int cols) {
  RandomStream stream(substream_key(
      master_seed, {sample_index, tag, static_cast<uint64_t>(cell), static_cast<uint64_t>(user),
                    static_cast<uint64_t>(subcarrier), static_cast<uint64_t>(transmitter)}));
  return draw_rayleigh(stream, rows, cols);
}

}  // namespace

ChannelSet build_channel_set(const Topology& topo, double noise_variance, uint64_t master_seed,
                             uint64_t sample_index) {
  topo.validate();
  if (!(noise_variance > 0.0)) throw ConfigError("noise_variance must be > 0");

  ChannelSet set;
  set.topo = topo;
  set.noise_variance = noise_variance;
  set.dedicated.resize(kNumCells);
  set.shared_own.resize(kNumCells);
  set.shared_cross.resize(kNumCells);

  for (int cell = 0; cell < kNumCells; ++cell) {
    const int users = topo.users_per_cell[cell];
    const int n_r = topo.rx_antennas[cell];
    const int other = 1 - cell;
    set.dedicated[cell].resize(users);
    set.shared_own[cell].resize(users);
    set.shared_cross[cell].resize(users);
    for (int u = 0; u < users; ++u) {
      set.dedicated[cell][u].reserve(topo.dedicated_subcarriers[cell]);
      for (int n = 0; n < topo.dedicated_subcarriers[cell]; ++n) {
        set.dedicated[cell][u].push_back(draw_keyed(master_seed, sample_index, kTagDedicated,
                                                    cell, u, n, cell, n_r,
                                                    topo.tx_antennas[cell]));
      }
      set.shared_own[cell][u].reserve(topo.shared_subcarriers);
      set.shared_cross[cell][u].reserve(topo.shared_subcarriers);
      for (int p = 0; p < topo.shared_subcarriers; ++p) {
        set.shared_own[cell][u].push_back(draw_keyed(master_seed, sample_index, kTagShared, cell,
                                                     u, p, cell, n_r, topo.tx_antennas[cell]));
        set.shared_cross[cell][u].push_back(draw_keyed(master_seed, sample_index, kTagShared,
                                                       cell, u, p, other, n_r,
                                                       topo.tx_antennas[other]));
      }
    }
  }
  return set;
}

}  // namespace cpss
