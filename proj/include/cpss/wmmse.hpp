// Weighted-MMSE transceiver optimization for the two-cell pipeline. For fixed
// subcarrier assignments, alternates per-link MMSE receivers, MSE-inverse
// weights, and per-cell KKT precoders with a bisected power multiplier. The
// weighted sum rate recorded after each iteration is non-decreasing.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cpss/allocation.hpp"
#include "cpss/channel.hpp"
#include "cpss/linalg.hpp"

namespace cpss {

/// One scheduled (user, subcarrier) pair. Stream count equals the receive
/// antenna count, so T is N_T x N_R, U is N_R x N_R, W is N_R x N_R.
struct LinkState {
  int user = 0;
  int subcarrier = 0;
  Band band = Band::Dedicated;
  double priority = 1.0;  // mu >= 0
  ComplexMatrix T;
  ComplexMatrix U;
  ComplexMatrix W;
  double rate = 0.0;  // bits/s/Hz
};

/// All links of one cell plus the per-subcarrier co-scheduling structure.
/// Links sharing a (band, subcarrier) group interfere with each other; shared
/// band links additionally see the other cell's links on the same subcarrier.
struct CellProblem {
  struct Group {
    Band band = Band::Dedicated;
    int subcarrier = 0;
    std::vector<int> links;  // indices into `links`, ascending user order
  };

  int cell = 0;
  double p_max = 0.0;
  double noise_variance = 1.0;
  const ChannelSet* channels = nullptr;
  std::vector<LinkState> links;
  std::vector<Group> groups;

  const ComplexMatrix& own_channel(int link_index) const;
  double total_power() const;  // sum of frob_norm_sq(T) over links
};

struct WmmseSettings {
  double epsilon = 1e-4;
  int max_iterations = 100;
  double bisection_tolerance = 1e-6;
  int bisection_max_steps = 200;

  void validate() const;
};

struct WmmseResult {
  std::vector<double> trace;  // weighted sum rate after each iteration
  std::vector<double> objective_trace;  // weighted-MSE objective, one per iteration
  std::array<std::vector<double>, 2> power_trace;  // per-cell transmit power
  int iterations = 0;
  bool converged = false;
};

/// Links are ordered dedicated band first, then shared, subcarriers ascending
/// and users ascending within a subcarrier. `weights` holds one priority per
/// user id; empty means all ones.
CellProblem make_cell_problem(const ChannelSet& channels, int cell, const Assignment& assignment,
                              double p_max, const std::vector<double>& weights = {});

/// Table II step 1: every precoder is an independent Gaussian draw scaled to
/// frob_norm_sq = p_max / #links. Keyed by (master_seed, sample_index) plus
/// link coordinates, so solves reproduce independently of evaluation order.
void init_precoders(CellProblem& problem, uint64_t master_seed, uint64_t sample_index);

/// J = sum over co-scheduled own-cell interferers H T_j T_j^H H^H
///   + (shared band) sum over other-cell links on the subcarrier through the
///     cross channel + noise_variance * I. Hermitian positive definite.
ComplexMatrix interference_plus_noise(const CellProblem& problem, int link_index,
                                      const CellProblem& other);

/// U = (H T T^H H^H + J)^{-1} H T, the linear MMSE receiver.
ComplexMatrix mmse_receiver(const ComplexMatrix& h, const ComplexMatrix& t,
                            const ComplexMatrix& j);

/// E = (I - U^H H T)(I - U^H H T)^H + U^H (J - sigma^2 I) U + sigma^2 U^H U.
ComplexMatrix mse_matrix(const ComplexMatrix& h, const ComplexMatrix& t, const ComplexMatrix& u,
                         const ComplexMatrix& j, double noise_variance);

/// E = (I + T^H H^H J^{-1} H T)^{-1}; equals mse_matrix at the MMSE receiver.
ComplexMatrix mse_matrix_mmse(const ComplexMatrix& h, const ComplexMatrix& t,
                              const ComplexMatrix& j);

/// W = E^{-1}; requires E Hermitian positive definite.
ComplexMatrix weight_update(const ComplexMatrix& e);

/// R = log2 det(I + T^H H^H J^{-1} H T) in bits/s/Hz.
double user_rate(const ComplexMatrix& h, const ComplexMatrix& t, const ComplexMatrix& j);

/// Sets every precoder of the cell to T = mu (A + lambda I)^{-1} H^H U W,
/// where A accumulates mu H^H U W U^H H over the link's co-scheduling group:
/// own-cell links through the own channel plus, on shared subcarriers, the
/// other cell's links through the cross channel from this cell's transmitter.
/// A depends only on decoders and weights, so the two cells' updates commute.
void precoder_update(CellProblem& problem, const CellProblem& other, double lambda);

/// Smallest lambda >= 0 with total precoder power <= p_max: 0 when the
/// constraint is slack, otherwise bracket by doubling and bisect until the
/// residual (scaled by max(1, lambda)) is within bisection_tolerance.
double bisect_power(const CellProblem& problem, const CellProblem& other,
                    const WmmseSettings& settings);

/// Full alternating loop over both cells. Each iteration updates every
/// decoder and weight, then both cells' precoders, then the link rates.
/// Stops when the largest per-link change of log2 det W falls to epsilon
/// or at max_iterations.
WmmseResult wmmse_solve(std::array<CellProblem, 2>& problems, const WmmseSettings& settings);

}  // namespace cpss
