#include "blemesh/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace blemesh {

void validate(const RadioParams& p) {
  if (!(p.exponent > 0.0)) throw InvalidInput("radio.exponent must be > 0");
  if (!(p.pl0_db > 0.0)) throw InvalidInput("radio.pl0_db must be > 0");
  if (!(p.rx_threshold_dbm < p.tx_power_dbm))
    throw InvalidInput("radio.rx_threshold_dbm must be below radio.tx_power_dbm");
  if (!(p.shadowing_sigma_db >= 0.0)) throw InvalidInput("radio.shadowing_sigma_db must be >= 0");
}

double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

double path_loss_rssi(double distance_m, const RadioParams& params, double noise_draw) {
  if (!std::isfinite(distance_m) || distance_m <= 0.0)
    throw InvalidInput("distance must be finite and positive, got " + std::to_string(distance_m));
  const double d = std::max(distance_m, 1.0);
  const double loss = params.pl0_db + 10.0 * params.exponent * std::log10(d);
  return params.tx_power_dbm - loss + params.shadowing_sigma_db * noise_draw;
}

Reception hears(Position a, Position b, const RadioParams& params, double noise_draw) {
  if (!std::isfinite(a.x) || !std::isfinite(a.y) || !std::isfinite(b.x) || !std::isfinite(b.y))
    throw InvalidInput("positions must be finite");
  // Co-located nodes sit inside the clamp radius.
  const double rl = path_loss_rssi(std::max(distance(a, b), 1.0), params, noise_draw);
  return {rl >= params.rx_threshold_dbm, rl};
}

LinkTable::LinkTable(const std::vector<Position>& positions, const RadioParams& params,
                     const std::vector<double>& noise)
    : n_(positions.size()), rl_(n_ * n_, 0.0), heard_(n_ * n_, 0) {
  if (!noise.empty() && noise.size() != n_ * n_)
    throw InvalidInput("link noise table has the wrong size");
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (i == j) continue;
      const double draw = noise.empty() ? 0.0 : noise[i * n_ + j];
      const Reception r = hears(positions[i], positions[j], params, draw);
      rl_[i * n_ + j] = r.rl_dbm;
      heard_[i * n_ + j] = r.heard ? 1 : 0;
    }
  }
}

}  // namespace blemesh
