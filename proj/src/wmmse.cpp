#include "cpss/wmmse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cpss/rng.hpp"

namespace cpss {

namespace {

// Channel-draw substreams use tags 1 and 2; precoder initialization gets its
// own tag so it never replays channel entries.
constexpr uint64_t kTagPrecoderInit = 3;

const CellProblem::Group& group_of(const CellProblem& problem, int link_index) {
  const LinkState& link = problem.links[link_index];
  for (const auto& group : problem.groups)
    if (group.band == link.band && group.subcarrier == link.subcarrier) return group;
  throw SolverError("link has no co-scheduling group");
}

// Cross channel from `from_cell`'s transmitter into one of `to`'s users.
const ComplexMatrix& cross_into(const CellProblem& to, const LinkState& link) {
  return to.channels->cross_channel(to.cell, link.user, link.subcarrier);
}

// Weighted receive gram of one link through the given channel:
// mu (H^H U) W (H^H U)^H. This is the link's contribution to the KKT
// accumulation matrix A of whichever transmitter owns H.
ComplexMatrix link_gram(const ComplexMatrix& h, const LinkState& link) {
  ComplexMatrix m = matmul(hermitian(h), link.U);
  ComplexMatrix gram = matmul(matmul(m, link.W), hermitian(m));
  gram *= link.priority;
  return gram;
}

// KKT accumulation matrix for one co-scheduling group: every own-cell link in
// the group through the own channel, plus (shared band) the other cell's
// links on the same subcarrier through the cross channel from this cell's
// transmitter. Reads only decoders and weights, never precoders.
ComplexMatrix group_accumulation(const CellProblem& problem, const CellProblem& other,
                                 const CellProblem::Group& group) {
  const int nt = problem.channels->topo.tx_antennas[problem.cell];
  ComplexMatrix a(nt, nt);
  for (int li : group.links) a += link_gram(problem.own_channel(li), problem.links[li]);
  if (group.band == Band::Shared) {
    for (const LinkState& peer : other.links)
      if (peer.band == Band::Shared && peer.subcarrier == group.subcarrier)
        a += link_gram(cross_into(other, peer), peer);
  }
  return hermitize(a);
}

// mu H^H U W, the right-hand side of the KKT precoder solve.
ComplexMatrix link_target(const CellProblem& problem, int link_index) {
  const LinkState& link = problem.links[link_index];
  ComplexMatrix target = matmul(hermitian(problem.own_channel(link_index)),
                                matmul(link.U, link.W));
  target *= link.priority;
  return target;
}

// Eigendirections of the accumulation at or below this fraction of the top
// eigenvalue are treated as its null space. The targets mu H^H U W lie in the
// accumulation's column space, so any projection mass they show along such
// directions is roundoff. The power curve and the precoder solve must apply
// the identical cut: that keeps the materialized power equal to the curve the
// multiplier was bisected on.
constexpr double kRankTolerance = 1e-12;

// Total precoder power as an explicit function of lambda. Diagonalizing each
// group's accumulation matrix once turns every evaluation into a rational
// sum: ||T_i(lambda)||^2 = sum_m c_m / (eig_m + lambda)^2, so the bracketing
// and bisection loops cost O(N_T) per probe instead of a matrix inverse.
struct PowerCurve {
  std::vector<double> eigenvalues;
  std::vector<double> coefficients;

  double operator()(double lambda) const {
    double power = 0.0;
    for (size_t m = 0; m < eigenvalues.size(); ++m) {
      const double denom = eigenvalues[m] + lambda;
      if (denom <= 0.0) {
        if (coefficients[m] > 0.0) return std::numeric_limits<double>::infinity();
        continue;
      }
      power += coefficients[m] / (denom * denom);
    }
    return power;
  }
};

PowerCurve build_power_curve(const CellProblem& problem, const CellProblem& other) {
  PowerCurve curve;
  for (const auto& group : problem.groups) {
    HermitianEigen eigen = hermitian_eigen(group_accumulation(problem, other, group));
    double scale = 0.0;
    for (double v : eigen.values) scale = std::max(scale, v);
    const size_t base = curve.eigenvalues.size();
    for (double v : eigen.values) {
      // The accumulation matrix is positive semidefinite; tiny negative
      // eigenvalues are solver roundoff.
      curve.eigenvalues.push_back(std::max(v, 0.0));
      curve.coefficients.push_back(0.0);
    }
    const ComplexMatrix basis_h = hermitian(eigen.vectors);
    for (int li : group.links) {
      const ComplexMatrix projected = matmul(basis_h, link_target(problem, li));
      for (int m = 0; m < projected.rows(); ++m) {
        if (eigen.values[m] <= scale * kRankTolerance) continue;
        double row = 0.0;
        for (int c = 0; c < projected.cols(); ++c) row += std::norm(projected(m, c));
        curve.coefficients[base + m] += row;
      }
    }
  }
  return curve;
}

}  // namespace

const ComplexMatrix& CellProblem::own_channel(int link_index) const {
  const LinkState& link = links[link_index];
  return channels->own_channel(cell, link.user, link.band, link.subcarrier);
}

double CellProblem::total_power() const {
  double power = 0.0;
  for (const LinkState& link : links) power += frob_norm_sq(link.T);
  return power;
}

void WmmseSettings::validate() const {
  if (!(epsilon > 0.0) || epsilon >= 1.0) throw ConfigError("epsilon must be in (0, 1)");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(bisection_tolerance > 0.0)) throw ConfigError("bisection_tolerance must be > 0");
  if (bisection_max_steps < 1) throw ConfigError("bisection_max_steps must be >= 1");
}

CellProblem make_cell_problem(const ChannelSet& channels, int cell, const Assignment& assignment,
                              double p_max, const std::vector<double>& weights) {
  if (cell < 0 || cell >= kNumCells) throw ConfigError("cell out of range");
  if (!(p_max >= 0.0)) throw ConfigError("p_max must be >= 0");
  if (!weights.empty()) {
    if (static_cast<int>(weights.size()) != channels.topo.users_per_cell[cell])
      throw ConfigError("weights must have one entry per user");
    for (double w : weights)
      if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("weights must be finite and >= 0");
  }

  CellProblem problem;
  problem.cell = cell;
  problem.p_max = p_max;
  problem.noise_variance = channels.noise_variance;
  problem.channels = &channels;

  const int nt = channels.topo.tx_antennas[cell];
  const int nr = channels.topo.rx_antennas[cell];
  for (Band band : {Band::Dedicated, Band::Shared}) {
    for (const auto& [subcarrier, accepted] : assignment.band(band)) {
      CellProblem::Group group;
      group.band = band;
      group.subcarrier = subcarrier;
      for (int user : accepted) {
        LinkState link;
        link.user = user;
        link.subcarrier = subcarrier;
        link.band = band;
        link.priority = weights.empty() ? 1.0 : weights[user];
        link.T = ComplexMatrix(nt, nr);
        link.U = ComplexMatrix(nr, nr);
        link.W = ComplexMatrix::identity(nr);
        group.links.push_back(static_cast<int>(problem.links.size()));
        problem.links.push_back(std::move(link));
      }
      problem.groups.push_back(std::move(group));
    }
  }
  return problem;
}

void init_precoders(CellProblem& problem, uint64_t master_seed, uint64_t sample_index) {
  if (problem.links.empty()) return;
  const double target = problem.p_max / static_cast<double>(problem.links.size());
  for (LinkState& link : problem.links) {
    RandomStream stream(substream_key(
        master_seed, {sample_index, kTagPrecoderInit, static_cast<uint64_t>(problem.cell),
                      static_cast<uint64_t>(link.band), static_cast<uint64_t>(link.subcarrier),
                      static_cast<uint64_t>(link.user)}));
    ComplexMatrix t(link.T.rows(), link.T.cols());
    for (auto& entry : t.data()) entry = stream.complex_gaussian_unit();
    const double norm_sq = frob_norm_sq(t);
    t *= norm_sq > 0.0 ? std::sqrt(target / norm_sq) : 0.0;
    link.T = std::move(t);
  }
}

ComplexMatrix interference_plus_noise(const CellProblem& problem, int link_index,
                                      const CellProblem& other) {
  const LinkState& link = problem.links[link_index];
  const ComplexMatrix& h = problem.own_channel(link_index);
  const int nr = h.rows();

  ComplexMatrix j = ComplexMatrix::identity(nr);
  j *= problem.noise_variance;
  // Intracell interferers transmit from the same base station, so they reach
  // this user through its own channel.
  for (int li : group_of(problem, link_index).links) {
    if (li == link_index) continue;
    ComplexMatrix x = matmul(h, problem.links[li].T);
    j += matmul(x, hermitian(x));
  }
  if (link.band == Band::Shared) {
    const ComplexMatrix& g = problem.channels->cross_channel(problem.cell, link.user,
                                                             link.subcarrier);
    for (const LinkState& peer : other.links) {
      if (peer.band != Band::Shared || peer.subcarrier != link.subcarrier) continue;
      ComplexMatrix x = matmul(g, peer.T);
      j += matmul(x, hermitian(x));
    }
  }
  return hermitize(j);
}

ComplexMatrix mmse_receiver(const ComplexMatrix& h, const ComplexMatrix& t,
                            const ComplexMatrix& j) {
  ComplexMatrix ht = matmul(h, t);
  ComplexMatrix cov = matmul(ht, hermitian(ht));
  cov += j;
  return matmul(inverse(hermitize(cov)), ht);
}

ComplexMatrix mse_matrix(const ComplexMatrix& h, const ComplexMatrix& t, const ComplexMatrix& u,
                         const ComplexMatrix& j, double noise_variance) {
  const int streams = t.cols();
  ComplexMatrix uh = hermitian(u);
  ComplexMatrix m = ComplexMatrix::identity(streams);
  m -= matmul(uh, matmul(h, t));
  ComplexMatrix e = matmul(m, hermitian(m));

  ComplexMatrix interference = j;
  for (int r = 0; r < interference.rows(); ++r) interference(r, r) -= noise_variance;
  e += matmul(matmul(uh, interference), u);

  ComplexMatrix noise = matmul(uh, u);
  noise *= noise_variance;
  e += noise;
  return hermitize(e);
}

ComplexMatrix mse_matrix_mmse(const ComplexMatrix& h, const ComplexMatrix& t,
                              const ComplexMatrix& j) {
  ComplexMatrix ht = matmul(h, t);
  ComplexMatrix g = matmul(hermitian(ht), matmul(inverse(hermitize(j)), ht));
  return hermitize(inverse(ComplexMatrix::identity(t.cols()) + hermitize(g)));
}

ComplexMatrix weight_update(const ComplexMatrix& e) {
  log2_det_hpd(hermitize(e));  // positive-definiteness gate
  return hermitize(inverse(e));
}

double user_rate(const ComplexMatrix& h, const ComplexMatrix& t, const ComplexMatrix& j) {
  ComplexMatrix ht = matmul(h, t);
  ComplexMatrix g = matmul(hermitian(ht), matmul(inverse(hermitize(j)), ht));
  const double rate = log2_det_hpd(ComplexMatrix::identity(t.cols()) + hermitize(g));
  return std::max(rate, 0.0);
}

void precoder_update(CellProblem& problem, const CellProblem& other, double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  for (const auto& group : problem.groups) {
    const HermitianEigen eigen = hermitian_eigen(group_accumulation(problem, other, group));
    double scale = 0.0;
    for (double v : eigen.values) scale = std::max(scale, v);
    // T_i = (A + lambda I)^{-1} mu H^H U W, solved in A's eigenbasis. The
    // accumulation is rank deficient whenever the group carries fewer streams
    // than transmit antennas; directions under the rank cut are zeroed, not
    // amplified, matching the curve bisect_power solved against.
    std::vector<double> gains(eigen.values.size(), 0.0);
    for (size_t m = 0; m < eigen.values.size(); ++m) {
      if (eigen.values[m] <= scale * kRankTolerance) continue;
      gains[m] = 1.0 / (eigen.values[m] + lambda);
    }
    const ComplexMatrix basis_h = hermitian(eigen.vectors);
    for (int li : group.links) {
      ComplexMatrix projected = matmul(basis_h, link_target(problem, li));
      for (int m = 0; m < projected.rows(); ++m)
        for (int c = 0; c < projected.cols(); ++c) projected(m, c) *= gains[m];
      problem.links[li].T = matmul(eigen.vectors, projected);
    }
  }
}

double bisect_power(const CellProblem& problem, const CellProblem& other,
                    const WmmseSettings& settings) {
  const PowerCurve power = build_power_curve(problem, other);
  if (power(0.0) <= problem.p_max) return 0.0;

  // power(lambda) is continuous and strictly decreasing wherever it is
  // finite, so the first power-of-two bracket end below p_max pins the root.
  double lo = 0.0;
  double hi = 1.0;
  int steps = 0;
  while (power(hi) >= problem.p_max) {
    lo = hi;
    hi *= 2.0;
    if (++steps > settings.bisection_max_steps)
      throw SolverError("power bracket not found; inputs are corrupted");
  }

  // Returning the feasible end keeps the power at or under budget. The
  // scaled residual test also drives lambda * slack to zero, which the
  // monotone-objective guarantee needs from the inexact multiplier.
  while (true) {
    const double residual = problem.p_max - power(hi);
    if (residual <= settings.bisection_tolerance && residual * hi <= 1e-10) return hi;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return hi;
    if (power(mid) >= problem.p_max)
      lo = mid;
    else
      hi = mid;
  }
}

WmmseResult wmmse_solve(std::array<CellProblem, 2>& problems, const WmmseSettings& settings) {
  settings.validate();
  WmmseResult result;
  std::array<std::vector<double>, 2> prev_logdet;
  for (int c = 0; c < kNumCells; ++c) prev_logdet[c].assign(problems[c].links.size(), 0.0);

  for (int iteration = 1; iteration <= settings.max_iterations; ++iteration) {
    // Decoders and weights for every link of both cells. These read only
    // precoders, so the update order across links is immaterial.
    double objective = 0.0;
    double max_delta = 0.0;
    for (int c = 0; c < kNumCells; ++c) {
      CellProblem& cell = problems[c];
      const CellProblem& other = problems[1 - c];
      for (size_t li = 0; li < cell.links.size(); ++li) {
        LinkState& link = cell.links[li];
        const ComplexMatrix& h = cell.own_channel(static_cast<int>(li));
        ComplexMatrix j = interference_plus_noise(cell, static_cast<int>(li), other);
        link.U = mmse_receiver(h, link.T, j);
        ComplexMatrix e = mse_matrix(h, link.T, link.U, j, cell.noise_variance);
        link.W = weight_update(e);
        const double logdet = log2_det_hpd(link.W);
        objective += link.priority * (trace(matmul(link.W, e)).real() - logdet);
        max_delta = std::max(max_delta, std::abs(logdet - prev_logdet[c][li]));
        prev_logdet[c][li] = logdet;
      }
    }

    // Precoders. The accumulation matrices read only decoders and weights,
    // so the two cells' updates are independent given the phase above.
    for (int c = 0; c < kNumCells; ++c) {
      const double lambda = bisect_power(problems[c], problems[1 - c], settings);
      precoder_update(problems[c], problems[1 - c], lambda);
    }

    double wsr = 0.0;
    for (int c = 0; c < kNumCells; ++c) {
      CellProblem& cell = problems[c];
      const CellProblem& other = problems[1 - c];
      for (size_t li = 0; li < cell.links.size(); ++li) {
        LinkState& link = cell.links[li];
        ComplexMatrix j = interference_plus_noise(cell, static_cast<int>(li), other);
        link.rate = user_rate(cell.own_channel(static_cast<int>(li)), link.T, j);
        wsr += link.priority * link.rate;
      }
    }

    result.trace.push_back(wsr);
    result.objective_trace.push_back(objective);
    for (int c = 0; c < kNumCells; ++c)
      result.power_trace[c].push_back(problems[c].total_power());
    result.iterations = iteration;
    if (max_delta <= settings.epsilon) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace cpss
