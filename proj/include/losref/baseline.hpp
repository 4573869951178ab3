#pragma once

#include "losref/doppler.hpp"
#include "losref/radio.hpp"

namespace losref {

enum class BaselineMode { kSubcarrier, kPrincipalComponent };

namespace detail {

/// Magnitude matrix [time][subcarrier] resampled onto the median-interval
/// grid (nearest assignment, then linear interpolation), plus grid times.
struct MagnitudeMatrix {
  std::vector<double> times;
  std::size_t columns = 0;
  std::vector<double> data;  // row-major [time][subcarrier]

  double at(std::size_t t, std::size_t k) const { return data[t * columns + k]; }
};

inline MagnitudeMatrix magnitude_matrix_uniform(const CfrSeries& series) {
  if (series.snapshots.size() < 2) throw DataError("baseline: need at least 2 snapshots");
  std::vector<double> times(series.snapshots.size());
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = series.snapshots[i].time_s;
  const IntervalStats st = interval_stats(times);

  ResampleGrid grid;
  grid.start_s = times.front();
  grid.step_s = st.median_s;
  grid.count =
      static_cast<std::size_t>(std::llround((times.back() - times.front()) / st.median_s)) + 1;
  grid.validate();

  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> owner(grid.count, kNone);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const long g = std::lround((times[i] - grid.start_s) / grid.step_s);
    if (g < 0 || g >= static_cast<long>(grid.count)) continue;
    if (owner[static_cast<std::size_t>(g)] == kNone) owner[static_cast<std::size_t>(g)] = i;
  }
  std::vector<std::size_t> filled;
  for (std::size_t g = 0; g < grid.count; ++g)
    if (owner[g] != kNone) filled.push_back(g);
  if (filled.size() < 2) throw DataError("baseline: too few snapshots land on the grid");

  const std::size_t cols = series.snapshots.front().values.size();
  MagnitudeMatrix mat;
  mat.columns = cols;
  mat.times.resize(grid.count);
  mat.data.resize(grid.count * cols);
  for (std::size_t g = 0; g < grid.count; ++g) mat.times[g] = grid.time(g);

  parallel_for(grid.count, [&](std::size_t g) {
    double* row = &mat.data[g * cols];
    if (owner[g] != kNone) {
      const auto& v = series.snapshots[owner[g]].values;
      for (std::size_t k = 0; k < cols; ++k) row[k] = std::abs(v[k]);
      return;
    }
    const auto it = std::lower_bound(filled.begin(), filled.end(), g);
    if (it == filled.end() || it == filled.begin()) {
      const std::size_t src = it == filled.end() ? filled.back() : filled.front();
      const auto& v = series.snapshots[owner[src]].values;
      for (std::size_t k = 0; k < cols; ++k) row[k] = std::abs(v[k]);
      return;
    }
    const std::size_t lo = *(it - 1);
    const std::size_t hi = *it;
    const double frac = static_cast<double>(g - lo) / static_cast<double>(hi - lo);
    const auto& a = series.snapshots[owner[lo]].values;
    const auto& b = series.snapshots[owner[hi]].values;
    for (std::size_t k = 0; k < cols; ++k) {
      const double ma = std::abs(a[k]);
      row[k] = ma + (std::abs(b[k]) - ma) * frac;
    }
  });
  return mat;
}

}  // namespace detail

/// Principal components of time-mean-centred magnitude vectors, extracted by
/// deflated matrix-free power iteration on the covariance operator.
/// Components come out in descending-variance order; each component's sign is
/// fixed by making its largest-magnitude loading positive.
class MagnitudePca {
 public:
  MagnitudePca(const double* data, std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), centered_(rows * cols) {
    if (rows < 2) throw DataError("pca: need at least 2 snapshots");
    std::vector<double> mean(cols, 0.0);
    for (std::size_t t = 0; t < rows; ++t)
      for (std::size_t k = 0; k < cols; ++k) mean[k] += data[t * cols + k];
    for (auto& m : mean) m /= static_cast<double>(rows);
    for (std::size_t t = 0; t < rows; ++t)
      for (std::size_t k = 0; k < cols; ++k)
        centered_[t * cols + k] = data[t * cols + k] - mean[k];
  }

  /// Score time series of the requested component (0-based).
  std::vector<double> component_score(std::size_t component) {
    while (loadings_.size() <= component) {
      if (!extract_next()) throw ConfigError("pca: component index exceeds data rank");
    }
    return scores_[component];
  }

  double component_variance(std::size_t component) {
    while (variances_.size() <= component) {
      if (!extract_next()) throw ConfigError("pca: component index exceeds data rank");
    }
    return variances_[component];
  }

  const std::vector<double>& loading(std::size_t component) {
    while (loadings_.size() <= component) {
      if (!extract_next()) throw ConfigError("pca: component index exceeds data rank");
    }
    return loadings_[component];
  }

 private:
  bool extract_next() {
    if (loadings_.size() >= std::min(rows_ - 1, cols_)) return false;
    // deterministic start vector
    std::vector<double> v(cols_);
    for (std::size_t k = 0; k < cols_; ++k)
      v[k] = 1.0 + 1e-3 * static_cast<double>(k % 97);
    normalize(v);

    std::vector<double> u(rows_), w(cols_);
    double lambda = 0.0;
    for (int iter = 0; iter < 1000; ++iter) {
      // u = C v ; w = C^T u
      for (std::size_t t = 0; t < rows_; ++t) {
        double acc = 0.0;
        const double* row = &centered_[t * cols_];
        for (std::size_t k = 0; k < cols_; ++k) acc += row[k] * v[k];
        u[t] = acc;
      }
      std::fill(w.begin(), w.end(), 0.0);
      for (std::size_t t = 0; t < rows_; ++t) {
        const double* row = &centered_[t * cols_];
        const double ut = u[t];
        for (std::size_t k = 0; k < cols_; ++k) w[k] += row[k] * ut;
      }
      const double norm = std::sqrt(dot(w, w));
      if (norm <= 1e-300) return false;  // data rank exhausted
      for (std::size_t k = 0; k < cols_; ++k) v[k] = w[k] / norm;
      if (iter > 4 && std::abs(norm - lambda) <= 1e-13 * norm) {
        lambda = norm;
        break;
      }
      lambda = norm;
    }
    if (lambda <= total_scale() * 1e-24) return false;

    // sign convention: largest-|loading| entry positive
    std::size_t arg = 0;
    for (std::size_t k = 1; k < cols_; ++k)
      if (std::abs(v[k]) > std::abs(v[arg])) arg = k;
    if (v[arg] < 0.0)
      for (auto& x : v) x = -x;

    std::vector<double> score(rows_);
    for (std::size_t t = 0; t < rows_; ++t) {
      double acc = 0.0;
      const double* row = &centered_[t * cols_];
      for (std::size_t k = 0; k < cols_; ++k) acc += row[k] * v[k];
      score[t] = acc;
    }
    // deflate: remove the recovered component from the data
    for (std::size_t t = 0; t < rows_; ++t) {
      double* row = &centered_[t * cols_];
      const double st = score[t];
      for (std::size_t k = 0; k < cols_; ++k) row[k] -= st * v[k];
    }
    double var = 0.0;
    for (double sc : score) var += sc * sc;
    var /= static_cast<double>(rows_ - 1);

    loadings_.push_back(std::move(v));
    scores_.push_back(std::move(score));
    variances_.push_back(var);
    return true;
  }

  static double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
  }

  static void normalize(std::vector<double>& v) {
    const double n = std::sqrt(dot(v, v));
    for (auto& x : v) x /= n;
  }

  double total_scale() {
    if (scale_ < 0.0) {
      scale_ = 0.0;
      for (double x : centered_) scale_ += x * x;
      scale_ = std::sqrt(scale_);
    }
    return scale_;
  }

  std::size_t rows_, cols_;
  std::vector<double> centered_;
  double scale_ = -1.0;
  std::vector<std::vector<double>> loadings_;
  std::vector<std::vector<double>> scores_;
  std::vector<double> variances_;
};

/// Magnitude-domain sensing baseline: a real time series (|H(k df, t)| at a
/// chosen subcarrier, or a principal-component score of the per-snapshot
/// magnitude vectors) run through the same STFT as the coherent pipeline.
/// Being real-valued, its spectrum is symmetric in frequency sign.
inline SpectralMap baseline_magnitude_stft(const CfrSeries& series, BaselineMode mode,
                                           int index, const StftParams& params) {
  params.validate();
  const detail::MagnitudeMatrix mat = detail::magnitude_matrix_uniform(series);
  const double dt = mat.times[1] - mat.times[0];

  std::vector<double> x;
  if (mode == BaselineMode::kSubcarrier) {
    const auto& idx = *series.snapshots.front().indices;
    const auto it = std::find(idx.begin(), idx.end(), index);
    if (it == idx.end()) throw ConfigError("baseline: subcarrier index not on the grid");
    const std::size_t col = static_cast<std::size_t>(it - idx.begin());
    x.resize(mat.times.size());
    for (std::size_t t = 0; t < x.size(); ++t) x[t] = mat.at(t, col);
  } else {
    if (index < 0) throw ConfigError("baseline: component index must be >= 0");
    MagnitudePca pca(mat.data.data(), mat.times.size(), mat.columns);
    x = pca.component_score(static_cast<std::size_t>(index));
  }

  if (x.size() < params.segment_length)
    throw DataError("baseline: series shorter than one STFT segment");
  const std::size_t seg = params.segment_length;
  const std::size_t fft_len = params.fft_length();
  const std::vector<double> window = detail::stft_window(params);

  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + seg <= x.size(); s += params.hop()) starts.push_back(s);

  SpectralMap map;
  map.scale = MapScale::kLinearPower;
  map.frequency_hz.resize(fft_len);
  for (std::size_t q = 0; q < fft_len; ++q)
    map.frequency_hz[q] = (static_cast<double>(q) - static_cast<double>(fft_len / 2)) /
                          (static_cast<double>(fft_len) * dt);
  map.times_s.resize(starts.size());
  map.values.assign(fft_len * starts.size(), 0.0);

  parallel_for(starts.size(), [&](std::size_t f) {
    const std::size_t s0 = starts[f];
    map.times_s[f] = mat.times[s0] + dt * static_cast<double>(seg / 2);
    std::vector<cdouble> buf(fft_len, cdouble{0.0, 0.0});
    double mean = 0.0;
    if (params.mean_removal) {
      for (std::size_t i = 0; i < seg; ++i) mean += x[s0 + i];
      mean /= static_cast<double>(seg);
    }
    for (std::size_t i = 0; i < seg; ++i) buf[i] = (x[s0 + i] - mean) * window[i];
    fft_inplace(buf);
    for (std::size_t q = 0; q < fft_len; ++q)
      map.values[q * starts.size() + f] = std::norm(buf[(q + fft_len / 2) % fft_len]);
  });
  return map;
}

}  // namespace losref
