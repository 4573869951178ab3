#pragma once

#include "losref/cir.hpp"

namespace losref {

/// Static multipath estimate: the per-bin temporal mean of calibrated CIRs.
struct ClutterProfile {
  DelayGrid grid;
  std::vector<cdouble> mean_values;
  std::size_t snapshot_count = 0;
};

/// Per-bin arithmetic mean over all snapshots. Requires a calibrated series:
/// averaging unaligned CIRs is physically meaningless.
inline ClutterProfile estimate_clutter(const CirSeries& series) {
  if (series.cirs.empty()) throw DataError("estimate_clutter: empty series");
  if (series.state != CalibrationState::kCalibrated)
    throw DataError("estimate_clutter: series must be calibrated");
  ClutterProfile profile;
  profile.grid = series.grid;
  profile.snapshot_count = series.cirs.size();
  profile.mean_values.assign(series.grid.size, cdouble{0.0, 0.0});
  const double inv = 1.0 / static_cast<double>(series.cirs.size());
  parallel_for(series.grid.size, [&](std::size_t bin) {
    cdouble acc{0.0, 0.0};
    for (const auto& cir : series.cirs) acc += cir.values[bin];
    profile.mean_values[bin] = acc * inv;
  });
  return profile;
}

/// Residual CIR: h~(tau, t) = h(tau, t) - mean_t h(tau, t).
inline CirSeries residual(const CirSeries& series, const ClutterProfile& clutter) {
  if (series.grid != clutter.grid || clutter.mean_values.size() != series.grid.size)
    throw DataError("residual: delay grid mismatch");
  CirSeries out;
  out.radio = series.radio;
  out.grid = series.grid;
  out.state = CalibrationState::kResidual;
  out.cirs.resize(series.cirs.size());
  parallel_for(series.cirs.size(), [&](std::size_t i) {
    Cir r;
    r.time_s = series.cirs[i].time_s;
    r.grid = series.grid;
    r.values.resize(series.grid.size);
    for (std::size_t bin = 0; bin < series.grid.size; ++bin)
      r.values[bin] = series.cirs[i].values[bin] - clutter.mean_values[bin];
    out.cirs[i] = std::move(r);
  });
  return out;
}

/// Sliding-window variant for long captures where the static background
/// drifts: subtracts a per-snapshot mean over a centred window (clamped at
/// the edges) instead of the whole-run mean.
inline CirSeries residual_sliding(const CirSeries& series, std::size_t window) {
  if (series.cirs.empty()) throw DataError("residual_sliding: empty series");
  if (series.state != CalibrationState::kCalibrated)
    throw DataError("residual_sliding: series must be calibrated");
  if (window < 1) throw ConfigError("residual_sliding: window must be >= 1");
  const std::size_t n = series.cirs.size();
  const std::size_t w = std::min(window, n);
  const std::size_t half = w / 2;

  CirSeries out;
  out.radio = series.radio;
  out.grid = series.grid;
  out.state = CalibrationState::kResidual;
  out.cirs.resize(n);
  parallel_for(n, [&](std::size_t i) {
    const std::size_t begin = i > half ? std::min(i - half, n - w) : 0;
    Cir r;
    r.time_s = series.cirs[i].time_s;
    r.grid = series.grid;
    r.values.resize(series.grid.size);
    const double inv = 1.0 / static_cast<double>(w);
    for (std::size_t bin = 0; bin < series.grid.size; ++bin) {
      cdouble acc{0.0, 0.0};
      for (std::size_t j = begin; j < begin + w; ++j) acc += series.cirs[j].values[bin];
      r.values[bin] = series.cirs[i].values[bin] - acc * inv;
    }
    out.cirs[i] = std::move(r);
  });
  return out;
}

}  // namespace losref
