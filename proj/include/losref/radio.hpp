#pragma once

#include <memory>
#include <numeric>

#include "losref/common.hpp"

namespace losref {

/// Transmission and CIR-construction parameters. Defaults (see
/// default_radio()) describe an 802.11ax 160 MHz channel at 5570 MHz.
struct RadioParams {
  double carrier_frequency_hz = 5.57e9;
  double bandwidth_hz = 160e6;
  double subcarrier_spacing_hz = 78.125e3;
  std::vector<int> subcarrier_indices;  // symmetric about 0, ascending
  double wavelength_m = 0.0;            // derived from c/f_c when left 0
  double speed_of_light_m_s = kSpeedOfLight;
  int oversampling_factor = 32;  // kappa
  int fft_points_base = 2048;    // IDFT length before oversampling

  int delay_bin_count() const { return oversampling_factor * fft_points_base; }

  /// Oversampled delay-grid spacing, 1/(kappa * N_fft * delta_f).
  double delay_spacing_s() const {
    return 1.0 / (static_cast<double>(delay_bin_count()) * subcarrier_spacing_hz);
  }

  /// Unambiguous delay span, 1/delta_f.
  double delay_span_s() const { return 1.0 / subcarrier_spacing_hz; }

  double sample_period_s() const { return 1.0 / bandwidth_hz; }

  void validate() const {
    if (carrier_frequency_hz <= 0 || bandwidth_hz <= 0 || subcarrier_spacing_hz <= 0)
      throw ConfigError("radio: frequencies must be positive");
    if (oversampling_factor < 1) throw ConfigError("radio: oversampling_factor must be >= 1");
    if (fft_points_base < 2) throw ConfigError("radio: fft_points_base must be >= 2");
    if (subcarrier_indices.empty()) throw ConfigError("radio: no subcarrier indices");
    for (std::size_t i = 1; i < subcarrier_indices.size(); ++i)
      if (subcarrier_indices[i] <= subcarrier_indices[i - 1])
        throw ConfigError("radio: subcarrier indices must be strictly ascending");
    if (subcarrier_indices.front() != -subcarrier_indices.back())
      throw ConfigError("radio: subcarrier indices must be symmetric about 0");
    const int half = fft_points_base / 2;
    if (subcarrier_indices.back() >= half)
      throw ConfigError("radio: subcarrier index exceeds fft_points_base/2");
    if (wavelength_m > 0) {
      const double expected = speed_of_light_m_s / carrier_frequency_hz;
      if (std::abs(wavelength_m - expected) > 1e-6 * expected)
        throw ConfigError("radio: wavelength inconsistent with carrier frequency");
    }
  }

  double wavelength() const {
    return wavelength_m > 0 ? wavelength_m : speed_of_light_m_s / carrier_frequency_hz;
  }
};

/// Piecewise spectral-edge attenuation of the device front end:
/// 1 for |k| <= knee, floor for |k| >= floor_index, linear in between.
struct AttenuationModel {
  int knee_index = 680;
  int floor_index = 704;
  double floor_value = 0.6;

  void validate() const {
    if (floor_index <= knee_index) throw ConfigError("attenuation: floor_index must exceed knee_index");
    if (floor_value <= 0.0) throw ConfigError("attenuation: floor must be positive");
  }

  double operator()(int k) const {
    const int a = std::abs(k);
    if (a <= knee_index) return 1.0;
    if (a >= floor_index) return floor_value;
    const double frac = static_cast<double>(a - knee_index) /
                        static_cast<double>(floor_index - knee_index);
    return 1.0 + (floor_value - 1.0) * frac;
  }
};

inline std::vector<int> index_range(int lo, int hi) {
  std::vector<int> v(static_cast<std::size_t>(hi - lo + 1));
  std::iota(v.begin(), v.end(), lo);
  return v;
}

/// 802.11ax 160 MHz defaults: f_c 5570 MHz, delta_f 78.125 kHz, indices
/// -1012..1012 (2025 after pilot interpolation), N_fft 2048, kappa 32.
inline RadioParams default_radio() {
  RadioParams r;
  r.subcarrier_indices = index_range(-1012, 1012);
  return r;
}

/// One packet's channel frequency response sample. The subcarrier index
/// grid is shared across a series, so snapshots alias one immutable list.
struct CfrSnapshot {
  double time_s = 0.0;
  double rssi_db = 0.0;  // integer-dB granularity
  std::shared_ptr<const std::vector<int>> indices;
  std::vector<cdouble> values;  // one per subcarrier index

  void validate() const {
    if (!indices) throw DataError("cfr snapshot: missing index grid");
    if (values.size() != indices->size())
      throw DataError("cfr snapshot: values/index length mismatch");
  }
};

struct CfrSeries {
  RadioParams radio;
  std::vector<CfrSnapshot> snapshots;

  void validate() const {
    radio.validate();
    const void* grid = nullptr;
    double prev_t = -1.0;
    for (const auto& s : snapshots) {
      s.validate();
      if (s.indices->size() != radio.subcarrier_indices.size() ||
          !std::equal(s.indices->begin(), s.indices->end(), radio.subcarrier_indices.begin()))
        throw DataError("cfr series: snapshot index grid differs from radio grid");
      if (grid == nullptr) grid = s.indices.get();
      if (!snapshots.empty() && s.time_s <= prev_t)
        throw DataError("cfr series: times not strictly increasing");
      prev_t = s.time_s;
    }
  }
};

}  // namespace losref
