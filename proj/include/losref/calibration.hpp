#pragma once

#include <limits>

#include "losref/cir.hpp"

namespace losref {

/// Over-the-air reference: the known Tx-Rx LoS distance fixes the delay
/// origin, and optionally the absolute gain via the free-space path gain.
struct CalibrationConfig {
  double reference_distance_m = 1.0;
  bool friis_normalization = true;
  double speed_of_light_m_s = kSpeedOfLight;

  double reference_delay_s() const { return reference_distance_m / speed_of_light_m_s; }

  void validate() const {
    if (reference_distance_m <= 0.0)
      throw ConfigError("calibration: reference distance must be positive");
  }
};

struct LosPeak {
  double peak_delay_s = 0.0;
  double peak_phase_rad = 0.0;  // in (-pi, pi]
  double peak_magnitude = 0.0;
  std::size_t bin = 0;
};

/// Strongest delay bin of the CIR; ties break toward smaller delay.
inline LosPeak detect_los_peak(const Cir& c) {
  if (c.values.empty()) throw DataError("detect_los_peak: empty CIR");
  std::size_t best = 0;
  double best_mag = std::abs(c.values[0]);
  for (std::size_t n = 1; n < c.values.size(); ++n) {
    const double mag = std::abs(c.values[n]);
    if (mag > best_mag) {
      best = n;
      best_mag = mag;
    }
  }
  if (best_mag <= 0.0) throw DegenerateError("detect_los_peak: all-zero CIR");
  return {c.grid.delay(best), std::arg(c.values[best]), best_mag, best};
}

/// Margin (dB) between the detected peak and the strongest bin outside an
/// exclusion window of +-exclusion_bins around it. Small margins mean the
/// LoS-dominance assumption is suspect.
inline double dominance_margin_db(const Cir& c, std::size_t peak_bin,
                                  std::size_t exclusion_bins) {
  const std::size_t m = c.values.size();
  double second = 0.0;
  for (std::size_t n = 0; n < m; ++n) {
    const std::size_t dist = n > peak_bin ? n - peak_bin : peak_bin - n;
    const std::size_t ring_dist = std::min(dist, m - dist);
    if (ring_dist <= exclusion_bins) continue;
    second = std::max(second, std::abs(c.values[n]));
  }
  if (second <= 0.0) return std::numeric_limits<double>::infinity();
  return amplitude_db(std::abs(c.values[peak_bin]) / second);
}

/// Delay calibration and phase alignment: circularly shift the CIR so the
/// strongest bin lands on the grid bin nearest tau_ref, and rotate so its
/// phase is zero. h(tau) = h_raw(tau - (tau_ref - tau*)) e^{-j theta*}.
inline Cir calibrate(const Cir& c, const CalibrationConfig& cfg) {
  cfg.validate();
  const LosPeak peak = detect_los_peak(c);
  const std::size_t m = c.values.size();
  const long ref_bin = static_cast<long>(std::lround(cfg.reference_delay_s() / c.grid.spacing_s)) %
                       static_cast<long>(m);
  const long shift = ((ref_bin - static_cast<long>(peak.bin)) % static_cast<long>(m) +
                      static_cast<long>(m)) %
                     static_cast<long>(m);
  const cdouble rot = std::polar(1.0, -peak.peak_phase_rad);

  Cir out;
  out.time_s = c.time_s;
  out.grid = c.grid;
  out.values.resize(m);
  for (std::size_t n = 0; n < m; ++n)
    out.values[(n + static_cast<std::size_t>(shift)) % m] = c.values[n] * rot;
  return out;
}

/// Scale the whole CIR by one real factor so the peak magnitude matches the
/// free-space gain lambda / (4 pi d_ref). Identity when disabled.
inline Cir normalize_to_friis(const Cir& c, const CalibrationConfig& cfg,
                              const RadioParams& radio) {
  if (!cfg.friis_normalization) return c;
  cfg.validate();
  const std::size_t m = c.values.size();
  const std::size_t ref_bin =
      static_cast<std::size_t>(std::lround(cfg.reference_delay_s() / c.grid.spacing_s)) % m;
  const double peak_mag = std::abs(c.values[ref_bin]);
  if (peak_mag <= 0.0) throw DegenerateError("normalize_to_friis: zero magnitude at tau_ref");
  const double target = radio.wavelength() / (4.0 * kPi * cfg.reference_distance_m);
  const double scale = target / peak_mag;
  Cir out = c;
  for (auto& v : out.values) v *= scale;
  return out;
}

struct CalibrationReport {
  std::size_t low_dominance_count = 0;  // snapshots with top-2 margin < 3 dB
  double min_dominance_margin_db = std::numeric_limits<double>::infinity();
};

/// Calibrate a whole raw series (parallel across snapshots). The dominance
/// diagnostic uses an exclusion window of one Blackman mainlobe (3/B).
inline CirSeries calibrate_series(const CirSeries& series, const CalibrationConfig& cfg,
                                  CalibrationReport* report = nullptr) {
  if (series.state != CalibrationState::kRaw)
    throw DataError("calibrate_series: expected a raw CIR series");
  const std::size_t exclusion = static_cast<std::size_t>(
      std::lround(3.0 * delay_resolution(series.radio) / series.grid.spacing_s));
  CirSeries out;
  out.radio = series.radio;
  out.grid = series.grid;
  out.state = CalibrationState::kCalibrated;
  out.cirs.resize(series.cirs.size());
  std::vector<double> margins(series.cirs.size(), 0.0);
  parallel_for(series.cirs.size(), [&](std::size_t i) {
    const LosPeak peak = detect_los_peak(series.cirs[i]);
    margins[i] = dominance_margin_db(series.cirs[i], peak.bin, exclusion);
    Cir cal = calibrate(series.cirs[i], cfg);
    out.cirs[i] = normalize_to_friis(cal, cfg, series.radio);
  });
  if (report) {
    for (double m : margins) {
      report->min_dominance_margin_db = std::min(report->min_dominance_margin_db, m);
      if (m < 3.0) ++report->low_dominance_count;
    }
  }
  return out;
}

}  // namespace losref
