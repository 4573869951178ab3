#pragma once

#include "losref/radio.hpp"
#include "losref/scene.hpp"

namespace losref {

/// Frequency-domain conditioning parameters. Defaults match the measured
/// device behaviour of the 160 MHz 802.11ax front end this pipeline targets.
struct PreprocessConfig {
  bool outlier_removal = true;
  double rssi_drop_threshold_db = 10.0;
  int rssi_median_window = 101;  // running-median context, odd

  bool dc_interpolation = true;
  int dc_index_min = -11;
  int dc_index_max = 11;
  int dc_flank_bins = 50;  // bins per side used for the phase-trend statistic

  bool notch_repair = true;
  std::vector<int> notch_indices = make_notch_indices();

  bool equalize_attenuation = true;
  AttenuationModel attenuation;

  bool rms_normalize = true;
  int rms_reference_index_bound = 680;

  void validate() const {
    if (rssi_drop_threshold_db <= 0.0) throw ConfigError("preprocess: rssi threshold must be positive");
    if (rssi_median_window < 1) throw ConfigError("preprocess: median window must be >= 1");
    if (dc_index_min > dc_index_max) throw ConfigError("preprocess: bad dc index range");
    attenuation.validate();
    if (rms_reference_index_bound < 0) throw ConfigError("preprocess: bad rms bound");
  }
};

/// Drop snapshots whose RSSI sits more than the threshold below the running
/// median (strict inequality: a drop of exactly the threshold is retained).
inline CfrSeries remove_outliers(const CfrSeries& series, const PreprocessConfig& cfg) {
  if (series.snapshots.empty()) throw DataError("remove_outliers: empty series");
  const std::size_t n = series.snapshots.size();
  const std::size_t window = std::min<std::size_t>(cfg.rssi_median_window, n);
  const std::size_t half = window / 2;

  CfrSeries out;
  out.radio = series.radio;
  out.snapshots.reserve(n);
  std::vector<double> context;
  context.reserve(window);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t begin = i > half ? std::min(i - half, n - window) : 0;
    context.clear();
    for (std::size_t j = begin; j < begin + window; ++j)
      context.push_back(series.snapshots[j].rssi_db);
    const double med = median(context);
    if (series.snapshots[i].rssi_db >= med - cfg.rssi_drop_threshold_db)
      out.snapshots.push_back(series.snapshots[i]);
  }
  if (out.snapshots.empty()) throw DataError("remove_outliers: all snapshots removed");
  return out;
}

namespace detail {

/// Median of the wrapped inter-subcarrier phase differences over up to
/// `flank` bins on each side of [lo_pos, hi_pos].
inline double flank_phase_slope(const std::vector<cdouble>& v, std::size_t lo_pos,
                                std::size_t hi_pos, int flank) {
  std::vector<double> diffs;
  const std::size_t left_begin = lo_pos > static_cast<std::size_t>(flank)
                                     ? lo_pos - static_cast<std::size_t>(flank)
                                     : 0;
  for (std::size_t p = left_begin; p < lo_pos; ++p)
    diffs.push_back(std::arg(v[p + 1] / v[p]));
  const std::size_t right_end = std::min(v.size() - 1, hi_pos + static_cast<std::size_t>(flank));
  for (std::size_t p = hi_pos; p < right_end; ++p)
    diffs.push_back(std::arg(v[p + 1] / v[p]));
  if (diffs.empty()) return 0.0;
  return median(std::move(diffs));
}

}  // namespace detail

/// Rebuild the signal-free DC bins: linear interpolation of the unwrapped
/// phase between the nearest valid bins on each side, and linear magnitude
/// interpolation. The 2 pi branch of the far anchor is chosen from the
/// flanking phase trend, since the corrupted bins themselves carry no usable
/// unwrapping information.
inline CfrSnapshot interpolate_dc_phase(const CfrSnapshot& s, const PreprocessConfig& cfg) {
  s.validate();
  const auto& idx = *s.indices;
  std::size_t first_dc = idx.size(), last_dc = 0;
  for (std::size_t p = 0; p < idx.size(); ++p) {
    if (idx[p] >= cfg.dc_index_min && idx[p] <= cfg.dc_index_max) {
      first_dc = std::min(first_dc, p);
      last_dc = std::max(last_dc, p);
    }
  }
  if (first_dc == idx.size()) return s;  // grid does not cover the DC range
  if (first_dc == 0 || last_dc + 1 >= idx.size())
    throw DataError("interpolate_dc_phase: no valid bins flanking the DC range");

  const std::size_t lo = first_dc - 1;  // nearest valid bin below
  const std::size_t hi = last_dc + 1;   // nearest valid bin above
  CfrSnapshot out = s;
  auto& v = out.values;

  const double a = std::arg(v[lo]);
  const double b = std::arg(v[hi]);
  const double slope = detail::flank_phase_slope(v, lo, hi, cfg.dc_flank_bins);
  const double span = static_cast<double>(idx[hi] - idx[lo]);
  const double b_unwrapped = b + kTwoPi * std::round((a + slope * span - b) / kTwoPi);

  const double mag_lo = std::abs(v[lo]);
  const double mag_hi = std::abs(v[hi]);
  for (std::size_t p = first_dc; p <= last_dc; ++p) {
    const double frac = static_cast<double>(idx[p] - idx[lo]) / span;
    v[p] = std::polar(mag_lo + (mag_hi - mag_lo) * frac, a + (b_unwrapped - a) * frac);
  }
  return out;
}

/// Replace magnitudes at the configured notch bins by linear interpolation
/// from the nearest untouched neighbours; phases are retained.
inline CfrSnapshot repair_notches(const CfrSnapshot& s, const PreprocessConfig& cfg) {
  s.validate();
  if (cfg.notch_indices.empty()) return s;
  const auto& idx = *s.indices;
  std::vector<bool> is_notch(idx.size(), false);
  bool any = false;
  for (std::size_t p = 0; p < idx.size(); ++p) {
    if (std::find(cfg.notch_indices.begin(), cfg.notch_indices.end(), idx[p]) !=
        cfg.notch_indices.end()) {
      is_notch[p] = true;
      any = true;
    }
  }
  if (!any) return s;

  CfrSnapshot out = s;
  auto& v = out.values;
  std::size_t p = 0;
  while (p < v.size()) {
    if (!is_notch[p]) {
      ++p;
      continue;
    }
    std::size_t run_end = p;
    while (run_end + 1 < v.size() && is_notch[run_end + 1]) ++run_end;
    const bool has_lo = p > 0;
    const bool has_hi = run_end + 1 < v.size();
    const double mag_lo = has_lo ? std::abs(v[p - 1]) : (has_hi ? std::abs(v[run_end + 1]) : 0.0);
    const double mag_hi = has_hi ? std::abs(v[run_end + 1]) : mag_lo;
    const double denom = static_cast<double>(run_end - p + 2);
    for (std::size_t q = p; q <= run_end; ++q) {
      const double frac = static_cast<double>(q - p + 1) / denom;
      const double mag = has_lo && has_hi ? mag_lo + (mag_hi - mag_lo) * frac
                                          : (has_lo ? mag_lo : mag_hi);
      v[q] = std::polar(mag, std::arg(v[q]));
    }
    p = run_end + 1;
  }
  return out;
}

/// Undo the spectral-edge attenuation: scale each bin by 1/A(k).
inline CfrSnapshot equalize_edge_attenuation(const CfrSnapshot& s, const PreprocessConfig& cfg) {
  s.validate();
  cfg.attenuation.validate();
  CfrSnapshot out = s;
  const auto& idx = *out.indices;
  for (std::size_t p = 0; p < out.values.size(); ++p) {
    const double a = cfg.attenuation(idx[p]);
    if (a <= 0.0) throw ConfigError("equalize_edge_attenuation: A(k) must be positive");
    out.values[p] /= a;
  }
  return out;
}

/// Divide by the RMS magnitude over |k| <= rms_reference_index_bound.
inline CfrSnapshot normalize_rms(const CfrSnapshot& s, const PreprocessConfig& cfg) {
  s.validate();
  const auto& idx = *s.indices;
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t p = 0; p < s.values.size(); ++p) {
    if (std::abs(idx[p]) <= cfg.rms_reference_index_bound) {
      acc += std::norm(s.values[p]);
      ++count;
    }
  }
  if (count == 0) throw ConfigError("normalize_rms: reference bound excludes every bin");
  const double rms = std::sqrt(acc / static_cast<double>(count));
  if (rms <= 0.0) throw DegenerateError("normalize_rms: all-zero snapshot");
  CfrSnapshot out = s;
  for (auto& v : out.values) v /= rms;
  return out;
}

/// Diagnostic: arg(H((k+1) df) / H(k df)) for consecutive bins.
inline std::vector<double> phase_diff_profile(const CfrSnapshot& s) {
  s.validate();
  if (s.values.size() < 2) throw DataError("phase_diff_profile: need at least 2 bins");
  std::vector<double> out(s.values.size() - 1);
  for (std::size_t p = 0; p + 1 < s.values.size(); ++p)
    out[p] = std::arg(s.values[p + 1] / s.values[p]);
  return out;
}

/// Canonical stage order on one snapshot (everything after outlier removal).
inline CfrSnapshot preprocess_snapshot(const CfrSnapshot& s, const PreprocessConfig& cfg) {
  CfrSnapshot out = s;
  if (cfg.dc_interpolation) out = interpolate_dc_phase(out, cfg);
  if (cfg.notch_repair) out = repair_notches(out, cfg);
  if (cfg.equalize_attenuation) out = equalize_edge_attenuation(out, cfg);
  if (cfg.rms_normalize) out = normalize_rms(out, cfg);
  return out;
}

/// Full conditioning pipeline: outlier removal, then per-snapshot DC phase
/// interpolation, notch repair, edge equalization and RMS normalization.
inline CfrSeries preprocess_series(const CfrSeries& series, const PreprocessConfig& cfg) {
  cfg.validate();
  CfrSeries out = cfg.outlier_removal ? remove_outliers(series, cfg) : series;
  parallel_for(out.snapshots.size(), [&](std::size_t i) {
    out.snapshots[i] = preprocess_snapshot(out.snapshots[i], cfg);
  });
  return out;
}

}  // namespace losref
