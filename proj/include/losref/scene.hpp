#pragma once

#include <array>
#include <optional>

#include "losref/radio.hpp"

namespace losref {

/// One tapped-delay-line path: complex gain and propagation delay.
struct PathSpec {
  cdouble gain{1.0, 0.0};
  double delay_s = 0.0;

  void validate() const {
    if (delay_s < 0.0) throw ConfigError("path: delay must be >= 0");
    if (!std::isfinite(gain.real()) || !std::isfinite(gain.imag()))
      throw ConfigError("path: gain must be finite");
  }
};

using Vec2 = std::array<double, 2>;

inline double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

enum class TrajectoryKind { kStatic, kStraightLine, kSinusoidal };

/// Planar target trajectory relative to a fixed Tx/Rx pair.
struct Trajectory {
  TrajectoryKind kind = TrajectoryKind::kStatic;
  Vec2 position_m{0.0, 0.0};    // static position / line start / oscillation center
  Vec2 velocity_m_s{0.0, 0.0};  // straight-line kind
  Vec2 direction{1.0, 0.0};     // sinusoidal motion axis (normalized on use)
  double amplitude_m = 0.0;     // sinusoidal position amplitude
  double rate_hz = 0.0;         // sinusoidal cycles per second
  double duration_s = 0.0;
  Vec2 tx_position_m{0.0, 0.0};
  Vec2 rx_position_m{0.0, 0.0};

  void validate() const {
    if (duration_s <= 0.0) throw ConfigError("trajectory: duration must be positive");
    if (kind == TrajectoryKind::kSinusoidal) {
      if (amplitude_m < 0.0) throw ConfigError("trajectory: amplitude must be >= 0");
      if (rate_hz <= 0.0) throw ConfigError("trajectory: rate must be positive");
      if (std::hypot(direction[0], direction[1]) == 0.0)
        throw ConfigError("trajectory: sinusoidal direction must be nonzero");
    }
  }

  Vec2 position(double t) const {
    switch (kind) {
      case TrajectoryKind::kStatic:
        return position_m;
      case TrajectoryKind::kStraightLine:
        return {position_m[0] + velocity_m_s[0] * t, position_m[1] + velocity_m_s[1] * t};
      case TrajectoryKind::kSinusoidal: {
        const double norm = std::hypot(direction[0], direction[1]);
        const double s = amplitude_m * std::sin(kTwoPi * rate_hz * t) / norm;
        return {position_m[0] + s * direction[0], position_m[1] + s * direction[1]};
      }
    }
    return position_m;
  }

  Vec2 velocity(double t) const {
    switch (kind) {
      case TrajectoryKind::kStatic:
        return {0.0, 0.0};
      case TrajectoryKind::kStraightLine:
        return velocity_m_s;
      case TrajectoryKind::kSinusoidal: {
        const double norm = std::hypot(direction[0], direction[1]);
        const double ds = amplitude_m * kTwoPi * rate_hz * std::cos(kTwoPi * rate_hz * t) / norm;
        return {ds * direction[0], ds * direction[1]};
      }
    }
    return {0.0, 0.0};
  }
};

inline void check_in_duration(const Trajectory& traj, double t) {
  if (t < 0.0 || t > traj.duration_s)
    throw DataError("trajectory: time outside scene duration");
}

/// Tx-target-Rx path-length sum at observation time t.
inline double bistatic_range(const Trajectory& traj, double t) {
  check_in_duration(traj, t);
  const Vec2 p = traj.position(t);
  return distance(p, traj.tx_position_m) + distance(p, traj.rx_position_m);
}

/// Analytic time derivative of the bistatic range.
inline double bistatic_range_rate(const Trajectory& traj, double t) {
  check_in_duration(traj, t);
  const Vec2 p = traj.position(t);
  const Vec2 v = traj.velocity(t);
  double rate = 0.0;
  for (const Vec2& anchor : {traj.tx_position_m, traj.rx_position_m}) {
    const double dx = p[0] - anchor[0];
    const double dy = p[1] - anchor[1];
    const double r = std::hypot(dx, dy);
    if (r > 0.0) rate += (v[0] * dx + v[1] * dy) / r;
  }
  return rate;
}

/// Per-snapshot clock offset law: fixed value or uniform draw.
struct OffsetLaw {
  enum class Kind { kFixed, kUniform };
  Kind kind = Kind::kFixed;
  double fixed_value = 0.0;
  double min = 0.0;
  double max = 0.0;

  double draw(Rng& rng) const {
    return kind == Kind::kFixed ? fixed_value : rng.uniform(min, max);
  }
};

/// Free-running-clock model: per-snapshot delay offset alpha and phase
/// offset beta. Delay offsets are quantized to the receiver sample period
/// by default; packet-detection timing is aligned to the ADC sample clock,
/// and this keeps the offset an exact number of oversampled delay bins.
struct ClockModel {
  OffsetLaw delay_offset;                                    // seconds
  OffsetLaw phase_offset{OffsetLaw::Kind::kFixed, 0.0, 0.0, kTwoPi};
  bool quantize_to_sample_period = true;
  std::uint64_t seed = 0;

  static ClockModel uniform_random(double alpha_span_s, std::uint64_t seed) {
    ClockModel m;
    m.delay_offset = {OffsetLaw::Kind::kUniform, 0.0, -alpha_span_s, alpha_span_s};
    m.phase_offset = {OffsetLaw::Kind::kUniform, 0.0, 0.0, kTwoPi};
    m.seed = seed;
    return m;
  }

  std::pair<double, double> draw(std::size_t snapshot_index, double sample_period_s) const {
    Rng rng(mix_seed(seed, snapshot_index));
    double alpha = delay_offset.draw(rng);
    const double beta = phase_offset.draw(rng);
    if (quantize_to_sample_period && sample_period_s > 0.0 &&
        delay_offset.kind != OffsetLaw::Kind::kFixed)
      alpha = std::round(alpha / sample_period_s) * sample_period_s;
    return {alpha, beta};
  }
};

/// Inter-packet timing: nominal interval plus optional contention-like
/// jitter (lognormal-shaped around the configured median, occasional long
/// tail, clipped) and random packet drops.
struct PacketTimingModel {
  enum class JitterKind { kNone, kEmpirical };
  double nominal_interval_s = 1e-3;
  JitterKind jitter = JitterKind::kNone;
  double median_s = 1.069e-3;
  double mad_s = 0.017e-3;
  double clip_min_s = 0.5e-3;
  double tail_max_s = 6.5e-3;
  double tail_probability = 0.002;
  double drop_probability = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (nominal_interval_s <= 0.0) throw ConfigError("timing: nominal interval must be positive");
    if (jitter == JitterKind::kEmpirical) {
      if (median_s <= 0.0 || mad_s < 0.0) throw ConfigError("timing: bad jitter parameters");
      if (clip_min_s > median_s || tail_max_s < median_s)
        throw ConfigError("timing: clip range must contain the median");
    }
    if (drop_probability < 0.0 || drop_probability >= 1.0)
      throw ConfigError("timing: drop probability must be in [0, 1)");
  }
};

/// Strictly increasing receiver observation times in [0, duration).
inline std::vector<double> generate_packet_times(const PacketTimingModel& model,
                                                 double duration_s) {
  model.validate();
  if (duration_s <= 0.0) throw DataError("generate_packet_times: duration must be positive");
  Rng interval_rng(mix_seed(model.seed, 0));
  Rng drop_rng(mix_seed(model.seed, 1));
  // sigma such that the lognormal's median absolute deviation matches mad_s
  const double inv_q75 = 1.0 / 0.6744897501960817;  // 1 / Phi^-1(0.75)
  const double sigma = model.jitter == PacketTimingModel::JitterKind::kEmpirical
                           ? model.mad_s / model.median_s * inv_q75
                           : 0.0;
  std::vector<double> times;
  double t = 0.0;
  std::size_t slot = 0;
  while (t < duration_s - 1e-12) {
    if (!drop_rng.bernoulli(model.drop_probability)) times.push_back(t);
    double interval = model.nominal_interval_s;
    if (model.jitter == PacketTimingModel::JitterKind::kEmpirical) {
      if (interval_rng.bernoulli(model.tail_probability)) {
        interval = interval_rng.uniform(model.median_s, model.tail_max_s);
      } else {
        interval = model.median_s * std::exp(sigma * interval_rng.normal());
      }
      interval = std::clamp(interval, model.clip_min_s, model.tail_max_s);
    }
    ++slot;
    t = model.jitter == PacketTimingModel::JitterKind::kNone
            ? model.nominal_interval_s * static_cast<double>(slot)
            : t + interval;
  }
  return times;
}

/// Device-imperfection injection, mirroring what preprocessing repairs.
struct ArtifactConfig {
  bool corrupt_dc = false;  // overwrite DC-bin phases (signal-free bins)
  enum class DcJunkLaw { kZeroPhase, kRandomPhase };
  DcJunkLaw dc_law = DcJunkLaw::kZeroPhase;
  int dc_index_min = -11;
  int dc_index_max = 11;

  bool notch = false;  // attenuate bins near +-60 MHz offsets
  double notch_depth = 0.3;
  std::vector<int> notch_indices;  // defaulted from make_notch_indices()

  bool edge_attenuation = false;  // multiply by A(k)
  AttenuationModel attenuation;

  // snapshots whose CFR (and hence RSSI) is depressed, e.g. {index, 15 dB}
  std::vector<std::pair<std::size_t, double>> rssi_outliers;

  std::uint64_t seed = 0;

  bool any_enabled() const {
    return corrupt_dc || notch || edge_attenuation || !rssi_outliers.empty();
  }
};

/// Index sets nearest the +-60 MHz device notches (center 768 at 78.125 kHz).
inline std::vector<int> make_notch_indices(int center = 768, int halfwidth = 3) {
  std::vector<int> v;
  for (int k = -center - halfwidth; k <= -center + halfwidth; ++k) v.push_back(k);
  for (int k = center - halfwidth; k <= center + halfwidth; ++k) v.push_back(k);
  return v;
}

struct TargetSpec {
  Trajectory trajectory;
  cdouble gain{0.1, 0.0};  // constant complex reflection gain of the moving tap
};

/// Full synthetic bistatic scene.
struct SceneConfig {
  RadioParams radio = default_radio();
  double duration_s = 1.0;
  Vec2 tx_position_m{-0.5, 0.0};
  Vec2 rx_position_m{0.5, 0.0};
  bool auto_los = true;          // add the Tx-Rx direct path automatically
  cdouble los_gain{1.0, 0.0};
  std::vector<PathSpec> static_paths;  // additional explicit taps
  std::optional<TargetSpec> target;
  ClockModel clock;
  PacketTimingModel timing;
  ArtifactConfig artifacts;
  double rssi_offset_db = -40.0;
  std::uint64_t seed = 1;

  double los_delay_s() const {
    return distance(tx_position_m, rx_position_m) / radio.speed_of_light_m_s;
  }

  void validate() const {
    radio.validate();
    if (duration_s <= 0.0) throw ConfigError("scene: duration must be positive");
    for (const auto& p : static_paths) p.validate();
    if (target) target->trajectory.validate();
    if (!auto_los && static_paths.empty() && !target)
      throw ConfigError("scene: no propagation paths configured");
    timing.validate();
    artifacts.attenuation.validate();
  }

  /// All taps active at time t (static paths plus the moving target tap).
  std::vector<PathSpec> paths_at(double t) const {
    std::vector<PathSpec> paths;
    if (auto_los) paths.push_back({los_gain, los_delay_s()});
    paths.insert(paths.end(), static_paths.begin(), static_paths.end());
    if (target) {
      const double d = bistatic_range(target->trajectory, t);
      paths.push_back({target->gain, d / radio.speed_of_light_m_s});
    }
    return paths;
  }
};

namespace detail {

/// Accumulate eta * e^{-j 2 pi (f_c + k df) tau} over the index grid using a
/// phasor recurrence, re-anchored with an exact evaluation every 256 steps.
inline void add_path_cfr(std::vector<cdouble>& values, const std::vector<int>& indices,
                         double carrier_hz, double spacing_hz, const PathSpec& path) {
  const cdouble carrier = std::polar(1.0, -kTwoPi * carrier_hz * path.delay_s);
  const cdouble step = std::polar(1.0, -kTwoPi * spacing_hz * path.delay_s);
  cdouble phasor;
  for (std::size_t p = 0; p < indices.size(); ++p) {
    if (p % 256 == 0) {
      phasor = std::polar(1.0, -kTwoPi * spacing_hz * path.delay_s *
                                   static_cast<double>(indices[p]));
    } else {
      phasor *= step;
    }
    values[p] += path.gain * carrier * phasor;
  }
}

}  // namespace detail

/// Ideal (offset-free, artifact-free) CFR of the scene at observation time t:
/// H(k df) = sum_l eta_l e^{-j 2 pi f_c tau_l} e^{-j 2 pi k df tau_l}.
inline CfrSnapshot synth_cfr(const SceneConfig& scene, double t,
                             std::shared_ptr<const std::vector<int>> indices = nullptr) {
  const auto paths = scene.paths_at(t);
  if (paths.empty()) throw ConfigError("synth_cfr: scene has no paths");
  if (!indices) indices = std::make_shared<const std::vector<int>>(scene.radio.subcarrier_indices);
  CfrSnapshot s;
  s.time_s = t;
  s.indices = std::move(indices);
  s.values.assign(s.indices->size(), cdouble{0.0, 0.0});
  for (const auto& path : paths) {
    path.validate();
    detail::add_path_cfr(s.values, *s.indices, scene.radio.carrier_frequency_hz,
                         scene.radio.subcarrier_spacing_hz, path);
  }
  return s;
}

/// Free-running-clock distortion: H(f) -> H(f) e^{+j 2 pi f alpha} e^{j beta},
/// the frequency-domain dual of shifting the CIR delay axis by -alpha and
/// rotating it by beta.
inline CfrSnapshot apply_clock_offsets(const CfrSnapshot& s, double alpha_s, double beta_rad,
                                       double subcarrier_spacing_hz) {
  s.validate();
  CfrSnapshot out = s;
  const cdouble rot = std::polar(1.0, beta_rad);
  const cdouble step = std::polar(1.0, kTwoPi * subcarrier_spacing_hz * alpha_s);
  cdouble phasor;
  for (std::size_t p = 0; p < out.values.size(); ++p) {
    if (p % 256 == 0) {
      phasor = std::polar(1.0, kTwoPi * subcarrier_spacing_hz * alpha_s *
                                   static_cast<double>((*out.indices)[p]));
    } else {
      phasor *= step;
    }
    out.values[p] *= rot * phasor;
  }
  return out;
}

/// Apply configured device artifacts to one snapshot.
inline CfrSnapshot inject_device_artifacts(const CfrSnapshot& s, const ArtifactConfig& cfg,
                                           std::size_t snapshot_index = 0) {
  s.validate();
  CfrSnapshot out = s;
  const auto& idx = *out.indices;

  if (cfg.corrupt_dc) {
    Rng rng(mix_seed(cfg.seed, snapshot_index));
    for (std::size_t p = 0; p < idx.size(); ++p) {
      if (idx[p] < cfg.dc_index_min || idx[p] > cfg.dc_index_max) continue;
      const double mag = std::abs(out.values[p]);
      const double junk = cfg.dc_law == ArtifactConfig::DcJunkLaw::kZeroPhase
                              ? 0.0
                              : rng.uniform(0.0, kTwoPi);
      out.values[p] = std::polar(mag, junk);
    }
  }

  if (cfg.notch) {
    const auto& notch = cfg.notch_indices.empty() ? make_notch_indices() : cfg.notch_indices;
    for (std::size_t p = 0; p < idx.size(); ++p) {
      if (std::find(notch.begin(), notch.end(), idx[p]) != notch.end())
        out.values[p] *= cfg.notch_depth;
    }
  }

  if (cfg.edge_attenuation) {
    for (std::size_t p = 0; p < idx.size(); ++p) out.values[p] *= cfg.attenuation(idx[p]);
  }

  for (const auto& [index, drop_db] : cfg.rssi_outliers) {
    if (index == snapshot_index) {
      const double scale = std::pow(10.0, -drop_db / 20.0);
      for (auto& v : out.values) v *= scale;
    }
  }
  return out;
}

/// RSSI reported with 1 dB granularity, derived from the RMS CFR magnitude.
inline double synth_rssi_db(const std::vector<cdouble>& values, double offset_db) {
  double acc = 0.0;
  for (const auto& v : values) acc += std::norm(v);
  const double rms = std::sqrt(acc / static_cast<double>(values.size()));
  if (rms <= 0.0) return -120.0;
  return std::round(20.0 * std::log10(rms) + offset_db);
}

/// Generate the full observed CFR series: packet times, ideal channel,
/// device artifacts, RSSI, then clock offsets. Deterministic in (scene, seed);
/// snapshots are evaluated in parallel.
inline CfrSeries synthesize_series(const SceneConfig& scene) {
  scene.validate();
  const auto times = generate_packet_times(scene.timing, scene.duration_s);
  if (times.empty()) throw DataError("synthesize_series: scene produced no packets");

  auto indices = std::make_shared<const std::vector<int>>(scene.radio.subcarrier_indices);
  CfrSeries series;
  series.radio = scene.radio;
  series.snapshots.resize(times.size());
  const double sample_period = scene.radio.sample_period_s();
  parallel_for(times.size(), [&](std::size_t i) {
    CfrSnapshot s = synth_cfr(scene, times[i], indices);
    if (scene.artifacts.any_enabled()) s = inject_device_artifacts(s, scene.artifacts, i);
    s.rssi_db = synth_rssi_db(s.values, scene.rssi_offset_db);
    const auto [alpha, beta] = scene.clock.draw(i, sample_period);
    if (alpha != 0.0 || beta != 0.0)
      s = apply_clock_offsets(s, alpha, beta, scene.radio.subcarrier_spacing_hz);
    series.snapshots[i] = std::move(s);
  });
  return series;
}

}  // namespace losref
