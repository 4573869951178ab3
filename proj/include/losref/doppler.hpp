#pragma once

#include "losref/cir.hpp"
#include "losref/fft.hpp"

namespace losref {

struct IntervalStats {
  double median_s = 0.0;
  double mad_s = 0.0;
  double min_s = 0.0;
  double max_s = 0.0;
};

/// Statistics of consecutive time differences.
inline IntervalStats interval_stats(const std::vector<double>& times) {
  if (times.size() < 2) throw DataError("interval_stats: need at least 2 times");
  std::vector<double> intervals(times.size() - 1);
  for (std::size_t i = 0; i + 1 < times.size(); ++i) intervals[i] = times[i + 1] - times[i];
  IntervalStats st;
  st.median_s = median(intervals);
  st.mad_s = median_abs_deviation(intervals, st.median_s);
  const auto [mn, mx] = std::minmax_element(intervals.begin(), intervals.end());
  st.min_s = *mn;
  st.max_s = *mx;
  return st;
}

struct ResampleGrid {
  double start_s = 0.0;
  double step_s = 0.0;
  std::size_t count = 0;

  double time(std::size_t i) const { return start_s + step_s * static_cast<double>(i); }

  void validate() const {
    if (step_s <= 0.0) throw ConfigError("resample grid: step must be positive");
    if (count < 2) throw ConfigError("resample grid: need at least 2 points");
  }
};

struct ResampleResult {
  CirSeries series;
  ResampleGrid grid;
  std::size_t observed_assigned = 0;
  std::size_t conflicts_dropped = 0;
  bool hold_fallback = false;  // fewer than 2 observations landed on the grid
};

/// Resample a jittered CIR series onto a uniform grid with step equal to the
/// median inter-packet interval. Observations claim their nearest free grid
/// point (earlier snapshot wins, a loser may take an adjacent free point);
/// remaining points get linear magnitude and wrapped-difference linear phase
/// interpolation per delay bin between the nearest filled neighbours.
inline ResampleResult uniform_resample(const CirSeries& series) {
  if (series.cirs.size() < 2) throw DataError("uniform_resample: need at least 2 snapshots");
  if (series.state == CalibrationState::kRaw)
    throw DataError("uniform_resample: series must be calibrated or residual");

  std::vector<double> times(series.cirs.size());
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = series.cirs[i].time_s;
  const IntervalStats st = interval_stats(times);

  ResampleGrid grid;
  grid.start_s = times.front();
  grid.step_s = st.median_s;
  grid.count = static_cast<std::size_t>(
                   std::llround((times.back() - times.front()) / st.median_s)) +
               1;
  grid.validate();

  // ownership of each grid point: index into series.cirs, or none
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> owner(grid.count, kNone);
  ResampleResult result;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double pos = (times[i] - grid.start_s) / grid.step_s;
    const long nearest = std::lround(pos);
    long chosen = -1;
    double chosen_dist = 0.0;
    for (long cand : {nearest, nearest - 1, nearest + 1}) {
      if (cand < 0 || cand >= static_cast<long>(grid.count)) continue;
      if (owner[static_cast<std::size_t>(cand)] != kNone) continue;
      const double dist = std::abs(pos - static_cast<double>(cand));
      if (chosen < 0 || dist < chosen_dist) {
        chosen = cand;
        chosen_dist = dist;
      }
    }
    if (chosen < 0) {
      ++result.conflicts_dropped;
      continue;
    }
    owner[static_cast<std::size_t>(chosen)] = i;
    ++result.observed_assigned;
  }

  std::vector<std::size_t> filled;
  for (std::size_t g = 0; g < grid.count; ++g)
    if (owner[g] != kNone) filled.push_back(g);
  result.hold_fallback = filled.size() < 2;

  CirSeries out;
  out.radio = series.radio;
  out.grid = series.grid;
  out.state = series.state;
  out.cirs.resize(grid.count);
  for (std::size_t g = 0; g < grid.count; ++g) {
    out.cirs[g].time_s = grid.time(g);
    out.cirs[g].grid = series.grid;
    out.cirs[g].values.resize(series.grid.size);
  }

  parallel_for(grid.count, [&](std::size_t g) {
    if (owner[g] != kNone) {
      out.cirs[g].values = series.cirs[owner[g]].values;
      return;
    }
    // locate nearest filled neighbours
    const auto it = std::lower_bound(filled.begin(), filled.end(), g);
    const bool has_next = it != filled.end();
    const bool has_prev = it != filled.begin();
    if (!has_prev || !has_next) {
      const std::size_t src = has_next ? *it : *(it - 1);
      out.cirs[g].values = series.cirs[owner[src]].values;  // nearest-value hold
      return;
    }
    const std::size_t lo = *(it - 1);
    const std::size_t hi = *it;
    const double frac = static_cast<double>(g - lo) / static_cast<double>(hi - lo);
    const auto& a = series.cirs[owner[lo]].values;
    const auto& b = series.cirs[owner[hi]].values;
    for (std::size_t bin = 0; bin < a.size(); ++bin) {
      const double mag_a = std::abs(a[bin]);
      const double mag_b = std::abs(b[bin]);
      const double ph_a = std::arg(a[bin]);
      const double dph = wrap_phase(std::arg(b[bin]) - ph_a);
      out.cirs[g].values[bin] =
          std::polar(mag_a + (mag_b - mag_a) * frac, ph_a + dph * frac);
    }
  });

  result.series = std::move(out);
  result.grid = grid;
  return result;
}

/// Short-time Fourier analysis parameters for Doppler estimation.
struct StftParams {
  std::size_t segment_length = 256;
  std::size_t overlap = 224;
  std::size_t doppler_interp_rate = 8;  // zero-padding factor along time
  WindowKind window = WindowKind::kHann;
  bool mean_removal = true;

  std::size_t hop() const { return segment_length - overlap; }
  std::size_t fft_length() const { return segment_length * doppler_interp_rate; }

  void validate() const {
    if (segment_length < 2) throw ConfigError("stft: segment length must be >= 2");
    if (overlap >= segment_length) throw ConfigError("stft: overlap must be < segment length");
    if (doppler_interp_rate < 1) throw ConfigError("stft: interp rate must be >= 1");
  }
};

/// One STFT window of the delay-Doppler representation s(tau, nu; t).
/// Values are row-major [delay bin][doppler bin], Doppler axis fft-shifted.
struct DelayDopplerFrame {
  double center_time_s = 0.0;
  DelayGrid delay_grid;
  std::vector<double> doppler_grid_hz;
  std::vector<cdouble> values;

  std::size_t doppler_bins() const { return doppler_grid_hz.size(); }
  const cdouble& at(std::size_t delay_bin, std::size_t doppler_bin) const {
    return values[delay_bin * doppler_bins() + doppler_bin];
  }
};

namespace detail {

inline std::vector<double> stft_window(const StftParams& p) {
  switch (p.window) {
    case WindowKind::kHann:
      return hann_coefficients(p.segment_length);
    case WindowKind::kBlackman:
      return window_coefficients(p.segment_length);
    case WindowKind::kRect:
      return std::vector<double>(p.segment_length, 1.0);
  }
  return std::vector<double>(p.segment_length, 1.0);
}

inline double uniform_step(const std::vector<Cir>& cirs) {
  const double dt = cirs[1].time_s - cirs[0].time_s;
  for (std::size_t i = 1; i + 1 < cirs.size(); ++i) {
    const double d = cirs[i + 1].time_s - cirs[i].time_s;
    if (std::abs(d - dt) > 1e-6 * dt)
      throw DataError("stft_delay_doppler: series is not uniformly sampled");
  }
  return dt;
}

}  // namespace detail

/// Precomputed layout of an STFT run over a uniformly sampled series.
struct StftLayout {
  double dt = 0.0;
  std::vector<std::size_t> starts;  // segment start indices
  std::vector<double> window;
  std::vector<double> doppler_grid_hz;  // fft-shifted
};

inline StftLayout stft_layout(const CirSeries& series, const StftParams& params) {
  params.validate();
  if (series.cirs.size() < params.segment_length)
    throw DataError("stft_delay_doppler: series shorter than one STFT segment");
  StftLayout layout;
  layout.dt = detail::uniform_step(series.cirs);
  layout.window = detail::stft_window(params);
  const std::size_t fft_len = params.fft_length();
  layout.doppler_grid_hz.resize(fft_len);
  for (std::size_t q = 0; q < fft_len; ++q)
    layout.doppler_grid_hz[q] = (static_cast<double>(q) - static_cast<double>(fft_len / 2)) /
                                (static_cast<double>(fft_len) * layout.dt);
  for (std::size_t s = 0; s + params.segment_length <= series.cirs.size(); s += params.hop())
    layout.starts.push_back(s);
  return layout;
}

/// One STFT window: per delay bin, mean removal, window, zero-padding by the
/// Doppler interpolation rate, forward DFT, fft-shifted Doppler axis.
inline DelayDopplerFrame stft_frame(const CirSeries& series, const StftParams& params,
                                    const StftLayout& layout, std::size_t frame_index) {
  const std::size_t s0 = layout.starts.at(frame_index);
  const std::size_t seg = params.segment_length;
  const std::size_t fft_len = params.fft_length();
  const std::size_t bins = series.grid.size;
  DelayDopplerFrame frame;
  frame.center_time_s = series.cirs[s0].time_s + layout.dt * static_cast<double>(seg / 2);
  frame.delay_grid = series.grid;
  frame.doppler_grid_hz = layout.doppler_grid_hz;
  frame.values.resize(bins * fft_len);
  std::vector<cdouble> x(fft_len);
  for (std::size_t bin = 0; bin < bins; ++bin) {
    cdouble mean{0.0, 0.0};
    if (params.mean_removal) {
      for (std::size_t i = 0; i < seg; ++i) mean += series.cirs[s0 + i].values[bin];
      mean /= static_cast<double>(seg);
    }
    std::fill(x.begin(), x.end(), cdouble{0.0, 0.0});
    for (std::size_t i = 0; i < seg; ++i)
      x[i] = (series.cirs[s0 + i].values[bin] - mean) * layout.window[i];
    fft_inplace(x);
    // fftshift: negative Doppler first
    for (std::size_t q = 0; q < fft_len; ++q)
      frame.values[bin * fft_len + q] = x[(q + fft_len / 2) % fft_len];
  }
  return frame;
}

/// Per-delay-bin STFT along observation time, all frames materialized.
/// Long captures should prefer the stft_layout/stft_frame pair and stream.
inline std::vector<DelayDopplerFrame> stft_delay_doppler(const CirSeries& series,
                                                         const StftParams& params) {
  const StftLayout layout = stft_layout(series, params);
  std::vector<DelayDopplerFrame> frames(layout.starts.size());
  parallel_for(layout.starts.size(), [&](std::size_t f) {
    frames[f] = stft_frame(series, params, layout, f);
  });
  return frames;
}

/// Argmax of the delay-Doppler surface with the bistatic-to-velocity
/// conversion v = -nu lambda / 2 (small-baseline monostatic approximation).
struct PeakEstimate {
  double bistatic_delay_s = 0.0;
  double doppler_hz = 0.0;
  double effective_radial_velocity_m_s = 0.0;
  double power_db = 0.0;
};

/// Maximum of |s| over (tau, nu); ties break toward smaller delay, then
/// smaller |nu|.
inline PeakEstimate peak_delay_doppler(const DelayDopplerFrame& frame, double wavelength_m) {
  if (frame.values.empty()) throw DataError("peak_delay_doppler: empty frame");
  const std::size_t nd = frame.doppler_bins();
  double best_mag = -1.0;
  std::size_t best_bin = 0, best_q = 0;
  for (std::size_t bin = 0; bin * nd < frame.values.size(); ++bin) {
    for (std::size_t q = 0; q < nd; ++q) {
      const double mag = std::abs(frame.values[bin * nd + q]);
      if (mag > best_mag ||
          (mag == best_mag && bin == best_bin &&
           std::abs(frame.doppler_grid_hz[q]) < std::abs(frame.doppler_grid_hz[best_q]))) {
        best_mag = mag;
        best_bin = bin;
        best_q = q;
      }
    }
  }
  if (best_mag <= 0.0) throw DegenerateError("peak_delay_doppler: all-zero frame");
  PeakEstimate peak;
  peak.bistatic_delay_s = frame.delay_grid.delay(best_bin);
  peak.doppler_hz = frame.doppler_grid_hz[best_q];
  peak.effective_radial_velocity_m_s = -peak.doppler_hz * wavelength_m / 2.0;
  peak.power_db = power_db(best_mag * best_mag);
  return peak;
}

enum class MapScale { kLinearPower, kDbRelativeToMax };

/// Time-frequency energy map, row-major [frequency][time].
struct SpectralMap {
  std::vector<double> times_s;
  std::vector<double> frequency_hz;
  std::vector<double> values;
  MapScale scale = MapScale::kLinearPower;

  double at(std::size_t f, std::size_t t) const { return values[f * times_s.size() + t]; }
};

/// |s|^2 incoherently integrated over the delay axis: one Doppler column.
inline std::vector<double> incoherent_column(const DelayDopplerFrame& frame) {
  const std::size_t nd = frame.doppler_bins();
  std::vector<double> column(nd, 0.0);
  const std::size_t bins = frame.values.size() / nd;
  for (std::size_t bin = 0; bin < bins; ++bin)
    for (std::size_t q = 0; q < nd; ++q) column[q] += std::norm(frame.at(bin, q));
  return column;
}

/// Assemble the Doppler-time map from per-frame columns, converting to dB
/// relative to the map maximum.
inline SpectralMap assemble_doppler_time(std::vector<double> frame_times,
                                         const std::vector<double>& doppler_grid,
                                         const std::vector<std::vector<double>>& columns) {
  if (columns.empty()) throw DataError("incoherent_doppler_time: no frames");
  SpectralMap map;
  map.frequency_hz = doppler_grid;
  map.times_s = std::move(frame_times);
  const std::size_t nd = doppler_grid.size();
  map.values.assign(nd * columns.size(), 0.0);
  for (std::size_t f = 0; f < columns.size(); ++f) {
    if (columns[f].size() != nd) throw DataError("incoherent_doppler_time: frame grids differ");
    for (std::size_t q = 0; q < nd; ++q) map.values[q * columns.size() + f] = columns[f][q];
  }
  const double peak = *std::max_element(map.values.begin(), map.values.end());
  if (peak > 0.0) {
    for (auto& v : map.values) v = power_db(std::max(v, peak * 1e-30) / peak);
  }
  map.scale = MapScale::kDbRelativeToMax;
  return map;
}

/// Doppler-time representation: per frame, |s|^2 incoherently integrated
/// over the delay axis; reported in dB relative to the map maximum.
inline SpectralMap incoherent_doppler_time(const std::vector<DelayDopplerFrame>& frames) {
  if (frames.empty()) throw DataError("incoherent_doppler_time: no frames");
  std::vector<double> times(frames.size());
  std::vector<std::vector<double>> columns(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    times[f] = frames[f].center_time_s;
    columns[f] = incoherent_column(frames[f]);
  }
  return assemble_doppler_time(std::move(times), frames.front().doppler_grid_hz, columns);
}

}  // namespace losref
