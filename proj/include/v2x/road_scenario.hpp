#pragma once

// Two-lane road snapshot: vehicle placement, pairwise distances, per-vehicle
// risk from nearest-neighbour proximity, and the threshold-based transmission
// authorization with distance-scaled contention windows.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace v2x {

struct Vehicle {
  int id = 0;
  double x = 0.0;  // metres along the road
  double y = 0.0;  // lateral offset (lane centre)
  int lane = 0;    // 0 or 1
  int direction = 1;  // +1 with lane 0, -1 with lane 1
};

/// Euclidean separation of two vehicles.
inline double pairwise_distance(const Vehicle& a, const Vehicle& b) {
  return std::hypot(b.x - a.x, b.y - a.y);
}

namespace detail {

// 53-bit uniform double in [0, 1); keeps placement reproducible across
// standard libraries (std::uniform_real_distribution is not portable).
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Immutable roster of vehicles on a two-lane segment plus the distance matrix.
class Scenario {
 public:
  Scenario(std::vector<Vehicle> vehicles, double road_length, double lane_separation, std::uint64_t seed)
      : vehicles_(std::move(vehicles)),
        road_length_(road_length),
        lane_separation_(lane_separation),
        seed_(seed) {
    const size_t n = vehicles_.size();
    distances_.assign(n * n, 0.0);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j) {
        const double d = pairwise_distance(vehicles_[i], vehicles_[j]);
        distances_[i * n + j] = d;
        distances_[j * n + i] = d;
      }
  }

  const std::vector<Vehicle>& vehicles() const { return vehicles_; }
  int size() const { return static_cast<int>(vehicles_.size()); }
  double road_length() const { return road_length_; }
  double lane_separation() const { return lane_separation_; }
  std::uint64_t seed() const { return seed_; }

  double distance(int i, int j) const {
    check_id(i);
    check_id(j);
    return distances_[static_cast<size_t>(i) * vehicles_.size() + j];
  }

  /// Smallest distance from the given vehicle to any other vehicle.
  double nearest_neighbor_distance(int id) const {
    check_id(id);
    if (size() < 2) throw std::domain_error("nearest_neighbor_distance: need at least 2 vehicles");
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < size(); ++j)
      if (j != id) best = std::min(best, distance(id, j));
    return best;
  }

  /// Flat text form: a header with the generation parameters, then one
  /// vehicle per row. Positions are printed with full precision so the
  /// round trip is lossless and byte-stable.
  std::string to_text() const {
    std::ostringstream out;
    out << "# v2x scenario v1\n";
    out << "# seed=" << seed_ << " n_vehicles=" << size() << " road_length="
        << detail::format_full(road_length_) << " lane_separation="
        << detail::format_full(lane_separation_) << "\n";
    out << "# columns: id lane x y direction\n";
    for (const auto& v : vehicles_)
      out << v.id << ' ' << v.lane << ' ' << detail::format_full(v.x) << ' '
          << detail::format_full(v.y) << ' ' << v.direction << "\n";
    return out.str();
  }

  static Scenario from_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::uint64_t seed = 0;
    int n_vehicles = -1;
    double road_length = 0.0, lane_separation = 0.0;
    std::vector<Vehicle> vehicles;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line[0] == '#') {
        if (line.find("seed=") != std::string::npos) {
          unsigned long long parsed_seed = 0;
          if (std::sscanf(line.c_str(), "# seed=%llu n_vehicles=%d road_length=%lf lane_separation=%lf",
                          &parsed_seed, &n_vehicles, &road_length, &lane_separation) != 4)
            throw std::runtime_error("scenario parse: malformed header: " + line);
          seed = parsed_seed;
        }
        continue;
      }
      Vehicle v;
      if (std::sscanf(line.c_str(), "%d %d %lf %lf %d", &v.id, &v.lane, &v.x, &v.y, &v.direction) != 5)
        throw std::runtime_error("scenario parse: malformed row: " + line);
      vehicles.push_back(v);
    }
    if (n_vehicles < 0 || static_cast<int>(vehicles.size()) != n_vehicles)
      throw std::runtime_error("scenario parse: header/row count mismatch");
    return Scenario(std::move(vehicles), road_length, lane_separation, seed);
  }

 private:
  void check_id(int id) const {
    if (id < 0 || id >= size()) throw std::out_of_range("Scenario: unknown vehicle id");
  }

  std::vector<Vehicle> vehicles_;
  double road_length_;
  double lane_separation_;
  std::uint64_t seed_;
  std::vector<double> distances_;
};

/// Draws a random roster: even lane split (odd counts put the extra vehicle
/// in lane 0), x uniform over the segment, deterministic for a given seed.
inline Scenario generate_scenario(std::uint64_t seed, int n_vehicles, double road_length,
                                  double lane_separation) {
  if (n_vehicles < 2) throw std::domain_error("generate_scenario: n_vehicles must be >= 2");
  if (!(road_length > 0)) throw std::domain_error("generate_scenario: road_length must be > 0");
  if (!(lane_separation >= 0)) throw std::domain_error("generate_scenario: lane_separation must be >= 0");

  std::mt19937_64 eng(seed);
  const int lane0 = (n_vehicles + 1) / 2;
  std::vector<Vehicle> vehicles(n_vehicles);
  for (int i = 0; i < n_vehicles; ++i) {
    Vehicle& v = vehicles[i];
    v.id = i;
    v.lane = i < lane0 ? 0 : 1;
    v.direction = v.lane == 0 ? 1 : -1;
    v.x = detail::uniform01(eng) * road_length;
    v.y = v.lane == 0 ? 0.0 : lane_separation;
  }
  return Scenario(std::move(vehicles), road_length, lane_separation, seed);
}

/// Risk from staying-distance shortfall: 1 at contact, 0 at or beyond the
/// threshold, linear in between.
inline double risk_level(double nn_distance, double threshold) {
  if (!(threshold > 0)) throw std::domain_error("risk_level: threshold must be > 0");
  if (nn_distance < 0) throw std::domain_error("risk_level: nn_distance must be >= 0");
  const double r = 1.0 - nn_distance / threshold;
  return std::clamp(r, 0.0, 1.0);
}

/// Risk-scaled minimum contention window: highest risk contends with the
/// smallest window (floor 1). Round-half-up.
inline int effective_contention_window(double risk, int cw_min) {
  if (!(risk >= 0.0 && risk <= 1.0)) throw std::domain_error("effective_contention_window: risk in [0, 1]");
  if (cw_min < 1) throw std::domain_error("effective_contention_window: cw_min must be >= 1");
  const int scaled = static_cast<int>(std::floor(cw_min * (1.0 - risk) + 0.5));
  return std::max(1, scaled);
}

/// Which vehicles may transmit at a given threshold, with per-vehicle risk
/// and effective contention window (computed for every vehicle, authorized
/// or not).
struct AuthorizationResult {
  double threshold = 0.0;
  std::vector<int> authorized_ids;     // ascending
  std::vector<double> risk;            // indexed by vehicle id
  std::vector<int> effective_cw;       // indexed by vehicle id
};

/// A vehicle is authorized iff its nearest-neighbour distance is strictly
/// below the threshold.
inline AuthorizationResult authorized_transmitters(const Scenario& scenario, double threshold,
                                                   int cw_min = 7) {
  if (!(threshold > 0)) throw std::domain_error("authorized_transmitters: threshold must be > 0");
  AuthorizationResult result;
  result.threshold = threshold;
  result.risk.resize(scenario.size());
  result.effective_cw.resize(scenario.size());
  for (int id = 0; id < scenario.size(); ++id) {
    const double nn = scenario.nearest_neighbor_distance(id);
    result.risk[id] = risk_level(nn, threshold);
    result.effective_cw[id] = effective_contention_window(result.risk[id], cw_min);
    if (nn < threshold) result.authorized_ids.push_back(id);
  }
  return result;
}

}  // namespace v2x
