#pragma once

#include <cstddef>
#include <vector>

#include "blemesh/ids.hpp"

namespace blemesh {

/// Log-distance propagation parameters. The defaults give a maximum range of
/// roughly 13.3 m, which is typical indoor BLE coverage.
struct RadioParams {
  double tx_power_dbm = 0.0;
  double pl0_db = 45.0;
  double exponent = 4.0;
  double rx_threshold_dbm = -90.0;
  double shadowing_sigma_db = 0.0;

  bool operator==(const RadioParams&) const = default;
};

struct Position {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Position&) const = default;
};

/// Throws InvalidInput when the parameters are physically meaningless.
void validate(const RadioParams& params);

double distance(Position a, Position b);

/// Received power in dBm at `distance_m`. Distances under 1 m are clamped to
/// 1 m. `noise_draw` is a standard-normal sample scaled by the shadowing sigma.
double path_loss_rssi(double distance_m, const RadioParams& params, double noise_draw = 0.0);

struct Reception {
  bool heard = false;
  double rl_dbm = 0.0;
};

Reception hears(Position a, Position b, const RadioParams& params, double noise_draw = 0.0);

/// Per-trial snapshot of every ordered link. Shadowing, when enabled, is drawn
/// once per ordered pair at construction and frozen for the trial.
class LinkTable {
 public:
  LinkTable() = default;

  /// `noise` holds one standard-normal draw per ordered pair, row-major
  /// (from, to); it may be empty when shadowing is off.
  LinkTable(const std::vector<Position>& positions, const RadioParams& params,
            const std::vector<double>& noise);

  std::size_t size() const { return n_; }
  double rl(std::size_t from, std::size_t to) const { return rl_[from * n_ + to]; }
  bool heard(std::size_t from, std::size_t to) const { return from != to && heard_[from * n_ + to]; }
  /// A connection needs both directions of the link to close.
  bool connectable(std::size_t a, std::size_t b) const { return heard(a, b) && heard(b, a); }

 private:
  std::size_t n_ = 0;
  std::vector<double> rl_;
  std::vector<char> heard_;
};

}  // namespace blemesh
