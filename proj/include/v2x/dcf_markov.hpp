#pragma once

// Two-dimensional backoff Markov chain of a saturated CSMA/CA (DCF) station:
// states are (backoff stage i, counter k). The stationary distribution gives
// the per-slot transmission probability tau, which is coupled to the
// collision/busy probabilities through a damped fixed-point iteration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace v2x {

/// Iterative solver failed to reach its tolerance (or cannot possibly).
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& what, double residual, long iterations)
      : std::runtime_error(what + " (residual=" + std::to_string(residual) +
                           ", iterations=" + std::to_string(iterations) + ")"),
        residual(residual),
        iterations(iterations) {}
  double residual;
  long iterations;
};

/// Contention/backoff configuration of a saturated station population.
///
/// The stage-0 counter is drawn uniformly from [0, cw_min], so the stage-0
/// window holds w0 = cw_min + 1 values; the window doubles per stage up to
/// max_stage_m.
struct DcfParameters {
  int cw_min = 7;
  int max_stage_m = 5;
  int station_count_n = 1;
  double slot_duration_us = 15.0;

  int w0() const { return cw_min + 1; }
  int window(int stage) const { return w0() << std::min(stage, max_stage_m); }
  int state_count() const {
    int total = 0;
    for (int i = 0; i <= max_stage_m; ++i) total += window(i);
    return total;
  }

  void validate() const {
    if (cw_min < 1) throw std::domain_error("DcfParameters: cw_min must be >= 1");
    if (max_stage_m < 0) throw std::domain_error("DcfParameters: max_stage_m must be >= 0");
    if (max_stage_m > 20) throw std::domain_error("DcfParameters: max_stage_m too large");
    if (station_count_n < 1) throw std::domain_error("DcfParameters: station_count_n must be >= 1");
    if (!(slot_duration_us > 0)) throw std::domain_error("DcfParameters: slot_duration_us must be > 0");
  }
};

/// Dense row-major square matrix, just big enough for the chain solver.
class SquareMatrix {
 public:
  explicit SquareMatrix(int n) : n_(n), data_(static_cast<size_t>(n) * n, 0.0) {}

  int size() const { return n_; }
  double& at(int row, int col) { return data_[static_cast<size_t>(row) * n_ + col]; }
  double at(int row, int col) const { return data_[static_cast<size_t>(row) * n_ + col]; }

  double row_sum(int row) const {
    double s = 0.0;
    for (int c = 0; c < n_; ++c) s += at(row, c);
    return s;
  }

 private:
  int n_;
  std::vector<double> data_;
};

/// Maps (stage, counter) to a flat state index and back.
class StateIndexer {
 public:
  explicit StateIndexer(const DcfParameters& params) {
    offsets_.reserve(params.max_stage_m + 2);
    int acc = 0;
    for (int i = 0; i <= params.max_stage_m; ++i) {
      offsets_.push_back(acc);
      acc += params.window(i);
    }
    offsets_.push_back(acc);
  }
  int index(int stage, int counter) const { return offsets_[stage] + counter; }
  int stage_offset(int stage) const { return offsets_[stage]; }
  int total() const { return offsets_.back(); }

 private:
  std::vector<int> offsets_;
};

/// Stationary occupancy of the (stage, counter) chain, normalized to 1.
struct StationaryDistribution {
  std::vector<std::vector<double>> b;  // b[stage][counter]

  double b00() const { return b[0][0]; }
  double sum() const {
    double s = 0.0;
    for (const auto& stage : b)
      for (double v : stage) s += v;
    return s;
  }
};

/// Converged (tau, P_c, P_b) triple with the stationary distribution behind it.
struct FixedPointSolution {
  double tau = 0.0;
  double p_collision = 0.0;
  double p_busy = 0.0;
  StationaryDistribution stationary;
  long iterations = 0;
  double residual = 0.0;
};

namespace detail {

inline void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error(std::string(name) + " must be in [0, 1]");
}

}  // namespace detail

/// Builds the one-step transition matrix over (stage, counter) states.
///
/// Counters decrement with probability 1 - p_b and freeze with probability
/// p_b while the channel is busy. A station at counter 0 transmits: on
/// success it re-enters stage 0 with a uniformly drawn counter, on collision
/// it moves one stage up (capped) and redraws from the doubled window.
inline SquareMatrix build_transition_matrix(const DcfParameters& params, double p_c, double p_b) {
  params.validate();
  detail::check_probability(p_c, "p_c");
  detail::check_probability(p_b, "p_b");

  const StateIndexer idx(params);
  const int m = params.max_stage_m;
  const int w0 = params.w0();
  SquareMatrix P(idx.total());

  for (int i = 0; i <= m; ++i) {
    const int wi = params.window(i);
    for (int k = 0; k < wi; ++k) {
      const int row = idx.index(i, k);
      if (k > 0) {
        P.at(row, idx.index(i, k - 1)) += 1.0 - p_b;
        P.at(row, row) += p_b;
      } else {
        // transmission slot: success back to stage 0, collision escalates
        for (int kk = 0; kk < w0; ++kk) P.at(row, idx.index(0, kk)) += (1.0 - p_c) / w0;
        const int next = std::min(i + 1, m);
        const int wn = params.window(next);
        for (int kk = 0; kk < wn; ++kk) P.at(row, idx.index(next, kk)) += p_c / wn;
      }
    }
  }
  return P;
}

namespace detail {

struct Nonzero {
  int row;
  int col;
  double value;
};

inline std::vector<Nonzero> extract_nonzeros(const SquareMatrix& P) {
  std::vector<Nonzero> nz;
  for (int r = 0; r < P.size(); ++r)
    for (int c = 0; c < P.size(); ++c)
      if (P.at(r, c) != 0.0) nz.push_back({r, c, P.at(r, c)});
  return nz;
}

inline StationaryDistribution pack_distribution(const DcfParameters& params,
                                                const std::vector<double>& flat) {
  StationaryDistribution dist;
  const StateIndexer idx(params);
  dist.b.resize(params.max_stage_m + 1);
  for (int i = 0; i <= params.max_stage_m; ++i)
    dist.b[i].assign(flat.begin() + idx.stage_offset(i),
                     flat.begin() + idx.stage_offset(i) + params.window(i));
  return dist;
}

// Direct solve of the balance equations b(P - I) = 0 with one equation
// replaced by the normalization, via partial-pivot Gaussian elimination.
// Used where the chain mixes too slowly for power iteration (p_c near 1
// makes the top-stage retry loop nearly absorbing).
inline StationaryDistribution stationary_by_elimination(const DcfParameters& params, double p_c,
                                                        double p_b) {
  const SquareMatrix P = build_transition_matrix(params, p_c, p_b);
  const int n = P.size();
  std::vector<std::vector<double>> M(n, std::vector<double>(n + 1, 0.0));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) M[r][c] = P.at(c, r) - (r == c ? 1.0 : 0.0);
    M[r][n] = 0.0;
  }
  for (int c = 0; c < n; ++c) M[n - 1][c] = 1.0;
  M[n - 1][n] = 1.0;

  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(M[r][col]) > std::abs(M[pivot][col])) pivot = r;
    if (std::abs(M[pivot][col]) < 1e-300)
      throw ConvergenceError("stationary distribution is not unique (singular balance system)", 1.0, 0);
    std::swap(M[col], M[pivot]);
    const double d = M[col][col];
    for (int c = col; c <= n; ++c) M[col][c] /= d;
    for (int r = col + 1; r < n; ++r) {
      const double f = M[r][col];
      if (f == 0.0) continue;
      for (int c = col; c <= n; ++c) M[r][c] -= f * M[col][c];
    }
  }
  std::vector<double> flat(n);
  for (int r = n - 1; r >= 0; --r) {
    double v = M[r][n];
    for (int c = r + 1; c < n; ++c) v -= M[r][c] * flat[c];
    flat[r] = v;
  }
  double mass = 0.0;
  for (double v : flat) mass += v;
  for (double& v : flat) v /= mass;
  return pack_distribution(params, flat);
}

}  // namespace detail

/// Left eigenvector of build_transition_matrix for eigenvalue 1, found by
/// power iteration with renormalization (convergence: max entry change
/// <= 1e-12, which equals the balance residual ||bP - b||_inf on exit).
inline StationaryDistribution stationary_distribution(const DcfParameters& params, double p_c, double p_b) {
  if (p_c >= 1.0)
    throw ConvergenceError("stationary_distribution: top-stage retry loop is absorbing at p_c = 1", 1.0, 0);

  // Mixing is bounded by the escape rate out of the deepest window; when the
  // chain is nearly absorbing (p_c close to 1), power iteration cannot reach
  // the tolerance in a sane number of steps, so fall through to elimination.
  const double mixing_estimate =
      params.window(params.max_stage_m) / std::max((1.0 - p_c) * (1.0 - p_b), 1e-300);
  if (mixing_estimate > 5e4) return detail::stationary_by_elimination(params, p_c, p_b);

  const SquareMatrix P = build_transition_matrix(params, p_c, p_b);
  const auto nz = detail::extract_nonzeros(P);
  const int n = P.size();

  std::vector<double> b(n, 1.0 / n);
  std::vector<double> next(n);
  constexpr double kTol = 1e-12;
  constexpr long kMaxIter = 1000000;

  double change = 1.0;
  for (long it = 0; it < kMaxIter; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (const auto& e : nz) next[e.col] += b[e.row] * e.value;

    double mass = 0.0;
    for (double v : next) mass += v;
    for (double& v : next) v /= mass;

    change = 0.0;
    for (int s = 0; s < n; ++s) change = std::max(change, std::abs(next[s] - b[s]));
    b.swap(next);
    if (change <= kTol) return detail::pack_distribution(params, b);
  }
  return detail::stationary_by_elimination(params, p_c, p_b);
}

/// Per-slot transmission probability: total stationary mass on counter-zero
/// states, tau = sum_i b[i][0].
inline double transmission_probability(const StationaryDistribution& dist) {
  if (dist.b.empty()) throw std::domain_error("transmission_probability: empty distribution");
  if (std::abs(dist.sum() - 1.0) > 1e-9)
    throw std::domain_error("transmission_probability: distribution is not normalized");
  double tau = 0.0;
  for (const auto& stage : dist.b) tau += stage.front();
  return tau;
}

/// Probability that at least one of n stations transmits in a slot.
inline double prob_any_transmission(double tau, int n) {
  detail::check_probability(tau, "tau");
  if (n < 1) throw std::domain_error("prob_any_transmission: n must be >= 1");
  return 1.0 - std::pow(1.0 - tau, n);
}

/// Probability a transmission slot carries exactly one transmitter, i.e. the
/// chance a given transmission attempt succeeds. Undefined at tau = 0.
inline double prob_success_given_any(double tau, int n) {
  if (!(tau > 0.0 && tau <= 1.0))
    throw std::domain_error("prob_success_given_any: tau must be in (0, 1]");
  if (n < 1) throw std::domain_error("prob_success_given_any: n must be >= 1");
  if (n == 1) return 1.0;  // a lone station never collides
  const double miss = std::pow(1.0 - tau, n - 1);
  return n * tau * miss / (1.0 - std::pow(1.0 - tau, n));
}

/// Solves the self-consistency between the chain and the station population:
/// P_c = P_b = 1 - (1 - tau)^(n-1) and tau = transmission_probability of the
/// chain at those probabilities. Damped Picard iteration, residual is the
/// largest coordinate change of the last step.
inline FixedPointSolution solve_fixed_point(const DcfParameters& params, double tolerance = 1e-9,
                                            long max_iterations = 10000) {
  params.validate();
  if (!(tolerance > 0)) throw std::domain_error("solve_fixed_point: tolerance must be > 0");

  const int n = params.station_count_n;
  const auto couple = [n](double tau) { return n > 1 ? 1.0 - std::pow(1.0 - tau, n - 1) : 0.0; };
  constexpr double kDamping = 0.5;

  double tau = 2.0 / (params.w0() + 1);
  double p = couple(tau);
  for (long it = 1; it <= max_iterations; ++it) {
    const double mapped = transmission_probability(stationary_distribution(params, p, p));
    const double tau_next = (1.0 - kDamping) * tau + kDamping * mapped;
    const double p_next = couple(tau_next);
    const double residual = std::max(std::abs(tau_next - tau), std::abs(p_next - p));
    tau = tau_next;
    p = p_next;
    if (residual <= tolerance) {
      FixedPointSolution sol;
      sol.tau = tau;
      sol.p_collision = p;
      sol.p_busy = p;
      sol.stationary = stationary_distribution(params, p, p);
      sol.iterations = it;
      sol.residual = residual;
      return sol;
    }
  }
  throw ConvergenceError("solve_fixed_point: exceeded max_iterations at tau=" + std::to_string(tau),
                         std::abs(couple(tau) - p), max_iterations);
}

}  // namespace v2x
