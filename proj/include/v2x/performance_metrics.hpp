#pragma once

// Closed-form MAC performance metrics on top of a solved contention model:
// normalized throughput, per-slot channel-state probabilities seen by a
// tagged station, and the mean total-delay decomposition.

#include <cmath>
#include <stdexcept>

#include "v2x/dcf_markov.hpp"

namespace v2x {

/// All MAC/PHY durations in microseconds plus payload size and data rate.
struct TimingProfile {
  double difs_us = 65.0;
  double sifs_us = 35.0;
  double slot_us = 15.0;
  double propagation_delta_us = 1.0;
  double payload_bytes = 1100.0;
  double data_rate_bits_per_us = 6.0;  // 6 Mbps base rate
  double header_us = 40.0;
  double ack_us = 40.0;
  double rts_us = 30.0;
  double cts_us = 25.0;

  /// Time on air for the payload alone.
  double payload_airtime_us() const { return payload_bytes * 8.0 / data_rate_bits_per_us; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0)) throw std::domain_error(std::string("TimingProfile: ") + name + " must be > 0");
    };
    positive(difs_us, "difs_us");
    positive(sifs_us, "sifs_us");
    positive(slot_us, "slot_us");
    positive(propagation_delta_us, "propagation_delta_us");
    positive(data_rate_bits_per_us, "data_rate_bits_per_us");
    positive(header_us, "header_us");
    positive(ack_us, "ack_us");
    positive(rts_us, "rts_us");
    positive(cts_us, "cts_us");
    if (!(payload_bytes >= 1)) throw std::domain_error("TimingProfile: payload_bytes must be >= 1");
  }
};

struct FrameDurations {
  double t_success_us;
  double t_collision_us;
};

/// Busy-period lengths under basic access: a successful exchange runs
/// header + payload + SIFS + delta + ACK + DIFS + delta, a collision is
/// abandoned after header + payload + DIFS + delta.
inline FrameDurations frame_durations(const TimingProfile& t) {
  t.validate();
  const double payload = t.payload_airtime_us();
  FrameDurations d;
  d.t_success_us = t.header_us + payload + t.sifs_us + t.propagation_delta_us + t.ack_us +
                   t.difs_us + t.propagation_delta_us;
  d.t_collision_us = t.header_us + payload + t.difs_us + t.propagation_delta_us;
  return d;
}

/// Fraction of channel time carrying successful payload bits (renewal form:
/// expected payload per slot over expected slot duration).
inline double normalized_throughput(double tau, int n, const TimingProfile& timing) {
  detail::check_probability(tau, "tau");
  if (n < 1) throw std::domain_error("normalized_throughput: n must be >= 1");
  if (tau == 0.0) return 0.0;

  const double p_tr = prob_any_transmission(tau, n);
  const double p_su = prob_success_given_any(tau, n);
  const auto frames = frame_durations(timing);
  const double payload = timing.payload_airtime_us();

  const double expected_slot = (1.0 - p_tr) * timing.slot_us + p_tr * p_su * frames.t_success_us +
                               p_tr * (1.0 - p_su) * frames.t_collision_us;
  return p_su * p_tr * payload / expected_slot;
}

/// What a tagged station sees in one slot, as a partition of unity:
/// idle, own successful-looking transmission, overheard success, collision
/// involving the tagged station, and residual busy time.
struct StateProbabilities {
  double p_idle = 0.0;
  double p_success = 0.0;
  double p_busy = 0.0;
  double p_collision = 0.0;
  double p_own_tx = 0.0;
  double tau_tx = 0.0;  // tagged station's transmission probability
  double tau_nb = 0.0;  // each neighbour's transmission probability

  double sum() const { return (p_idle + p_success + p_collision + p_own_tx) + p_busy; }
};

inline StateProbabilities state_probabilities(double tau_tx, double tau_nb, int n) {
  detail::check_probability(tau_tx, "tau_tx");
  detail::check_probability(tau_nb, "tau_nb");
  if (n < 1) throw std::domain_error("state_probabilities: n must be >= 1");

  StateProbabilities s;
  s.tau_tx = tau_tx;
  s.tau_nb = tau_nb;
  if (n == 1) {
    // no neighbours: a lone station is either idle or transmitting
    s.p_idle = 1.0 - tau_tx;
    s.p_own_tx = tau_tx;
    s.p_success = 0.0;
    s.p_collision = 0.0;
    s.p_busy = 1.0 - (s.p_idle + s.p_success + s.p_collision + s.p_own_tx);
    return s;
  }

  const double quiet = std::pow(1.0 - tau_nb, n - 2);  // n-2 of the n-1 neighbours silent
  s.p_success = (n - 1) * tau_nb * (1.0 - tau_tx) * quiet;
  s.p_idle = (1.0 - tau_tx) * std::pow(1.0 - tau_nb, n - 1);
  s.p_collision = tau_tx * (n - 1) * tau_nb * quiet;
  s.p_own_tx = tau_tx * std::pow(1.0 - tau_nb, n - 1);
  s.p_busy = 1.0 - (s.p_idle + s.p_success + s.p_collision + s.p_own_tx);
  if (s.p_busy < -1e-12)
    throw std::domain_error("state_probabilities: inconsistent (tau_tx, tau_nb) pair, negative busy residual");
  return s;
}

struct RtsCtsDurations {
  double t_tsp_us;  // full handshake: one packet delivered
  double t_tsc_us;  // cost of a collided handshake attempt
};

/// Durations under the RTS/CTS handshake: a delivered packet costs
/// CTS + 3 SIFS + DIFS + data (header + payload) + RTS + ACK, while a
/// collision is resolved after only RTS + DIFS.
inline RtsCtsDurations rts_cts_durations(const TimingProfile& t) {
  t.validate();
  const double data = t.header_us + t.payload_airtime_us();
  return {t.cts_us + 3.0 * t.sifs_us + t.difs_us + data + t.rts_us + t.ack_us,
          t.rts_us + t.difs_us};
}

/// Mean residual backoff: half the minimum window, in time units.
inline double mean_backoff_time_us(int cw_min, double slot_us) {
  if (cw_min < 1) throw std::domain_error("mean_backoff_time_us: cw_min must be >= 1");
  if (!(slot_us > 0)) throw std::domain_error("mean_backoff_time_us: slot_us must be > 0");
  return cw_min * slot_us / 2.0;
}

/// Mean total-delay decomposition across a transmitter population.
struct DelayReport {
  double t_total_us = 0.0;
  double t_transmission_us = 0.0;
  double t_collision_us = 0.0;
  double cw_star_us = 0.0;
  double t_empirical_us = 0.0;  // idle-time share
  double n_transmissions = 0.0;
  double n_collisions = 0.0;
  double t_tsp_us = 0.0;
  double t_tsc_us = 0.0;
};

/// Expected total delay: per-packet handshake time scaled by the expected
/// transmission count, collision cost scaled by the expected collision
/// count, mean residual backoff, and the idle-time share.
inline DelayReport total_delay(const StateProbabilities& states, int n_transmitters,
                               const TimingProfile& timing, int cw_min) {
  if (n_transmitters < 0) throw std::domain_error("total_delay: n_transmitters must be >= 0");
  const auto handshake = rts_cts_durations(timing);

  DelayReport r;
  r.t_tsp_us = handshake.t_tsp_us;
  r.t_tsc_us = handshake.t_tsc_us;
  r.n_transmissions = states.p_own_tx * n_transmitters;
  r.n_collisions = states.p_collision * n_transmitters;
  r.t_transmission_us = r.t_tsp_us * r.n_transmissions;
  r.t_collision_us = r.t_tsc_us * r.n_collisions;
  r.cw_star_us = mean_backoff_time_us(cw_min, timing.slot_us);
  r.t_empirical_us = states.p_idle * n_transmitters * timing.slot_us;
  r.t_total_us = r.t_transmission_us + r.t_collision_us + r.cw_star_us + r.t_empirical_us;
  return r;
}

/// Analytic packet delivery ratio: the per-transmission-slot success
/// probability of the saturated population.
inline double analytic_pdr(double tau, int n) { return prob_success_given_any(tau, n); }

}  // namespace v2x
