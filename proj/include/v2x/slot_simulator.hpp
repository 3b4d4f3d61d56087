#pragma once

// Slot-level Monte Carlo simulation of the saturated contention process in a
// single collision domain. Every slot is one decision epoch: stations whose
// counters sit at zero transmit, a lone transmitter succeeds, two or more
// collide and escalate their windows, and everyone else freezes through busy
// slots and counts down through idle ones. Busy slots consume the configured
// frame duration for time-based metrics but one epoch for counter logic.

#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "v2x/performance_metrics.hpp"
#include "v2x/road_scenario.hpp"

namespace v2x {

enum class AccessMode { basic, rts_cts };

inline const char* to_string(AccessMode mode) {
  return mode == AccessMode::basic ? "basic" : "rts_cts";
}

struct SimConfig {
  std::vector<int> station_cw_min;  // per-station minimum contention window
  int max_stage_m = 5;
  TimingProfile timing;
  long long total_slots = 1000000;
  std::uint64_t seed = 1;
  AccessMode access_mode = AccessMode::basic;
  // Optional deterministic start (per-station initial counters); when absent
  // the counters are drawn uniformly from each station's stage-0 window.
  std::optional<std::vector<int>> initial_counters;

  static SimConfig homogeneous(int stations, int cw_min) {
    SimConfig cfg;
    cfg.station_cw_min.assign(stations, cw_min);
    return cfg;
  }

  void validate() const {
    if (station_cw_min.empty()) throw std::domain_error("SimConfig: need at least one station");
    for (int cw : station_cw_min)
      if (cw < 1) throw std::domain_error("SimConfig: per-station cw_min must be >= 1");
    if (max_stage_m < 0 || max_stage_m > 20) throw std::domain_error("SimConfig: bad max_stage_m");
    if (total_slots < 1) throw std::domain_error("SimConfig: total_slots must be >= 1");
    if (initial_counters && initial_counters->size() != station_cw_min.size())
      throw std::domain_error("SimConfig: initial_counters size mismatch");
    timing.validate();
  }
};

/// Empirical aggregates of one simulation run.
struct SimReport {
  std::vector<double> per_station_tau;
  double mean_tau = 0.0;
  std::optional<double> pdr;               // successful events / transmission events
  double throughput = 0.0;                 // payload airtime fraction of elapsed time
  std::optional<double> mean_mac_delay_us; // head-of-line to ACK completion, delivered packets
  double busy_fraction = 0.0;              // per-station share of slots with another station transmitting
  double collision_fraction = 0.0;         // collided packet transmissions / packet transmissions
  long long successes = 0;
  long long collisions = 0;   // collision events
  long long idle_slots = 0;
  long long attempted = 0;    // transmission events (successes + collisions)
  long long packet_attempts = 0;
  long long total_slots = 0;
  int station_count = 0;
  int active_transmitters = 0;  // authorized stations in scenario runs
  double elapsed_time_us = 0.0;
  std::uint64_t seed = 0;
  std::string rng_algorithm = "mt19937_64";

  std::string to_text() const {
    std::ostringstream out;
    out << "# v2x simreport v1 rng=" << rng_algorithm << " seed=" << seed << "\n";
    out << "stations " << station_count << "\n";
    out << "active_transmitters " << active_transmitters << "\n";
    out << "total_slots " << total_slots << "\n";
    out << "idle_slots " << idle_slots << "\n";
    out << "successes " << successes << "\n";
    out << "collisions " << collisions << "\n";
    out << "attempted " << attempted << "\n";
    out << "packet_attempts " << packet_attempts << "\n";
    out << "mean_tau " << mean_tau << "\n";
    out << "pdr " << (pdr ? std::to_string(*pdr) : "NA") << "\n";
    out << "throughput " << throughput << "\n";
    out << "mean_mac_delay_us " << (mean_mac_delay_us ? std::to_string(*mean_mac_delay_us) : "NA") << "\n";
    out << "busy_fraction " << busy_fraction << "\n";
    out << "collision_fraction " << collision_fraction << "\n";
    out << "elapsed_time_us " << elapsed_time_us << "\n";
    return out.str();
  }
};

namespace detail {

// Unbiased-enough bounded draw via 128-bit multiply-shift; avoids the
// implementation-defined behaviour of std::uniform_int_distribution so runs
// reproduce across standard libraries.
inline std::uint64_t draw_below(std::mt19937_64& eng, std::uint64_t bound) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(eng()) * bound) >> 64);
}

}  // namespace detail

inline SimReport run_simulation(const SimConfig& config) {
  config.validate();
  const int n = static_cast<int>(config.station_cw_min.size());
  const auto basic = frame_durations(config.timing);
  const auto handshake = rts_cts_durations(config.timing);
  const double t_success =
      config.access_mode == AccessMode::basic ? basic.t_success_us : handshake.t_tsp_us;
  const double t_collision =
      config.access_mode == AccessMode::basic ? basic.t_collision_us : handshake.t_tsc_us;
  const double payload = config.timing.payload_airtime_us();

  std::mt19937_64 eng(config.seed);
  std::vector<int> stage(n, 0);
  std::vector<long long> counter(n);
  for (int s = 0; s < n; ++s) {
    counter[s] = config.initial_counters
                     ? (*config.initial_counters)[s]
                     : static_cast<long long>(detail::draw_below(eng, config.station_cw_min[s] + 1));
    if (counter[s] < 0) throw std::domain_error("SimConfig: initial counters must be >= 0");
  }

  std::vector<long long> tx_count(n, 0), collided_tx(n, 0);
  std::vector<double> hol_start(n, 0.0);
  std::vector<int> transmitters;
  transmitters.reserve(n);

  SimReport rep;
  rep.station_count = n;
  rep.active_transmitters = n;
  rep.total_slots = config.total_slots;
  rep.seed = config.seed;

  double now = 0.0;
  long long busy_station_slots = 0;
  double delay_sum = 0.0;
  long long delay_count = 0;

  for (long long slot = 0; slot < config.total_slots; ++slot) {
    transmitters.clear();
    for (int s = 0; s < n; ++s)
      if (counter[s] == 0) transmitters.push_back(s);

    if (transmitters.empty()) {
      ++rep.idle_slots;
      now += config.timing.slot_us;
      for (int s = 0; s < n; ++s) --counter[s];
    } else if (transmitters.size() == 1) {
      const int s = transmitters.front();
      ++rep.successes;
      now += t_success;
      ++tx_count[s];
      stage[s] = 0;
      counter[s] = static_cast<long long>(detail::draw_below(eng, config.station_cw_min[s] + 1));
      delay_sum += now - hol_start[s];
      ++delay_count;
      hol_start[s] = now;  // next packet becomes head-of-line immediately (saturation)
      busy_station_slots += n - 1;
    } else {
      ++rep.collisions;
      now += t_collision;
      busy_station_slots += n;  // every station hears someone else transmit
      for (int s : transmitters) {
        ++tx_count[s];
        ++collided_tx[s];
        stage[s] = std::min(stage[s] + 1, config.max_stage_m);
        const std::uint64_t window =
            static_cast<std::uint64_t>(config.station_cw_min[s] + 1) << stage[s];
        counter[s] = static_cast<long long>(detail::draw_below(eng, window));
      }
    }
  }

  rep.elapsed_time_us = now;
  rep.attempted = rep.successes + rep.collisions;
  long long total_tx = 0, total_collided = 0;
  rep.per_station_tau.resize(n);
  for (int s = 0; s < n; ++s) {
    rep.per_station_tau[s] = static_cast<double>(tx_count[s]) / config.total_slots;
    total_tx += tx_count[s];
    total_collided += collided_tx[s];
  }
  rep.packet_attempts = total_tx;
  rep.mean_tau = static_cast<double>(total_tx) / (static_cast<double>(n) * config.total_slots);
  if (rep.attempted > 0) rep.pdr = static_cast<double>(rep.successes) / rep.attempted;
  rep.throughput = rep.successes * payload / rep.elapsed_time_us;
  if (delay_count > 0) rep.mean_mac_delay_us = delay_sum / delay_count;
  rep.busy_fraction =
      static_cast<double>(busy_station_slots) / (static_cast<double>(n) * config.total_slots);
  rep.collision_fraction = total_tx > 0 ? static_cast<double>(total_collided) / total_tx : 0.0;
  return rep;
}

/// Scenario entry point: only authorized vehicles contend, each with its
/// risk-scaled stage-0 window. Everything else matches run_simulation; a
/// threshold nobody meets yields an all-idle report with absent pdr/delay.
inline SimReport run_scenario_simulation(const Scenario& scenario, double threshold,
                                         const SimConfig& config, int cw_min = 7) {
  const AuthorizationResult auth = authorized_transmitters(scenario, threshold, cw_min);

  SimConfig active = config;
  active.station_cw_min.clear();
  for (int id : auth.authorized_ids) active.station_cw_min.push_back(auth.effective_cw[id]);

  if (active.station_cw_min.empty()) {
    SimReport rep;
    rep.station_count = 0;
    rep.active_transmitters = 0;
    rep.total_slots = config.total_slots;
    rep.idle_slots = config.total_slots;
    rep.elapsed_time_us = config.total_slots * config.timing.slot_us;
    rep.seed = config.seed;
    return rep;
  }

  SimReport rep = run_simulation(active);
  rep.active_transmitters = static_cast<int>(active.station_cw_min.size());
  return rep;
}

}  // namespace v2x
