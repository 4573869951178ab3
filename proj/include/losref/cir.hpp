#pragma once

#include "losref/fft.hpp"
#include "losref/radio.hpp"

namespace losref {

/// Uniform delay grid starting at tau = 0.
struct DelayGrid {
  double spacing_s = 0.0;
  std::size_t size = 0;

  double delay(std::size_t bin) const { return spacing_s * static_cast<double>(bin); }

  bool operator==(const DelayGrid&) const = default;
};

enum class CalibrationState { kRaw, kCalibrated, kResidual };

/// Delay-domain channel impulse response for one snapshot.
struct Cir {
  double time_s = 0.0;
  DelayGrid grid;
  std::vector<cdouble> values;
};

struct CirSeries {
  RadioParams radio;
  DelayGrid grid;
  CalibrationState state = CalibrationState::kRaw;
  std::vector<Cir> cirs;
};

enum class WindowKind { kBlackman, kRect, kHann };

/// Classic three-term Blackman (0.42, 0.5, 0.08), symmetric; endpoints are
/// exactly zero. Peak sidelobe of its transform is about -58 dB.
inline std::vector<double> window_coefficients(std::size_t n) {
  if (n < 2) throw ConfigError("window_coefficients: need n >= 2");
  std::vector<double> w(n);
  const double step = kTwoPi / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = step * static_cast<double>(i);
    w[i] = 0.42 - 0.5 * std::cos(a) + 0.08 * std::cos(2.0 * a);
  }
  return w;
}

inline std::vector<double> hann_coefficients(std::size_t n) {
  if (n < 2) throw ConfigError("hann_coefficients: need n >= 2");
  std::vector<double> w(n);
  const double step = kTwoPi / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(step * static_cast<double>(i));
  return w;
}

/// Intrinsic delay resolution, 1/B.
inline double delay_resolution(const RadioParams& radio) {
  if (radio.bandwidth_hz <= 0) throw ConfigError("delay_resolution: bandwidth must be positive");
  return 1.0 / radio.bandwidth_hz;
}

/// CFR -> CIR: window the occupied subcarrier bins, place them on the base
/// FFT grid by index, zero-pad kappa-fold and inverse-transform. The output
/// rides the full oversampled ring; the 1/(kappa*N_fft) IDFT scaling makes
/// sum |h|^2 = (1/(kappa*N_fft)) sum |w H|^2.
inline Cir build_cir(const CfrSnapshot& s, const RadioParams& radio,
                     WindowKind window = WindowKind::kBlackman) {
  s.validate();
  const auto& idx = *s.indices;
  if (idx.size() != radio.subcarrier_indices.size() ||
      !std::equal(idx.begin(), idx.end(), radio.subcarrier_indices.begin()))
    throw DataError("build_cir: snapshot index grid does not match radio params");

  const std::size_t m = static_cast<std::size_t>(radio.delay_bin_count());
  std::vector<cdouble> spectrum(m, cdouble{0.0, 0.0});

  std::vector<double> w;
  switch (window) {
    case WindowKind::kBlackman:
      w = window_coefficients(idx.size());
      break;
    case WindowKind::kHann:
      w = hann_coefficients(idx.size());
      break;
    case WindowKind::kRect:
      w.assign(idx.size(), 1.0);
      break;
  }

  for (std::size_t p = 0; p < idx.size(); ++p) {
    const long k = idx[p];
    const std::size_t slot = static_cast<std::size_t>((k % static_cast<long>(m) +
                                                       static_cast<long>(m)) %
                                                      static_cast<long>(m));
    spectrum[slot] = s.values[p] * w[p];
  }
  ifft_inplace(spectrum);

  Cir out;
  out.time_s = s.time_s;
  out.grid = DelayGrid{radio.delay_spacing_s(), m};
  out.values = std::move(spectrum);
  return out;
}

/// Build CIRs for a whole series (parallel across snapshots).
inline CirSeries build_cir_series(const CfrSeries& series,
                                  WindowKind window = WindowKind::kBlackman) {
  CirSeries out;
  out.radio = series.radio;
  out.grid = DelayGrid{series.radio.delay_spacing_s(),
                       static_cast<std::size_t>(series.radio.delay_bin_count())};
  out.state = CalibrationState::kRaw;
  out.cirs.resize(series.snapshots.size());
  parallel_for(series.snapshots.size(), [&](std::size_t i) {
    out.cirs[i] = build_cir(series.snapshots[i], series.radio, window);
  });
  return out;
}

/// Keep only delay bins [0, count), e.g. to bound memory for long captures.
inline Cir crop_cir(const Cir& c, std::size_t count) {
  if (count > c.values.size()) throw DataError("crop_cir: count exceeds grid");
  Cir out;
  out.time_s = c.time_s;
  out.grid = DelayGrid{c.grid.spacing_s, count};
  out.values.assign(c.values.begin(), c.values.begin() + static_cast<std::ptrdiff_t>(count));
  return out;
}

}  // namespace losref
