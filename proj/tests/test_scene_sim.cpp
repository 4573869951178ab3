#include "losref/scene.hpp"

#include <gtest/gtest.h>

#include "losref/cir.hpp"
#include "test_support.hpp"

namespace {

using namespace losref;
using testsupport::oracle_delay_response;

Trajectory bistatic_fixture(TrajectoryKind kind) {
  Trajectory traj;
  traj.kind = kind;
  traj.tx_position_m = {-0.5, 0.0};
  traj.rx_position_m = {0.5, 0.0};
  traj.duration_s = 10.0;
  return traj;
}

TEST(BistaticRange, SeatedTargetGeometry) {
  auto traj = bistatic_fixture(TrajectoryKind::kStatic);
  traj.position_m = {3.0, 0.0};
  const double d = bistatic_range(traj, 1.0);
  EXPECT_NEAR(d, 6.0, 0.15);  // reported as roughly 6.1 m for this layout
  EXPECT_DOUBLE_EQ(d, bistatic_range(traj, 9.0));  // static: constant over t
}

TEST(BistaticRange, TargetCoincidentWithTx) {
  auto traj = bistatic_fixture(TrajectoryKind::kStatic);
  traj.position_m = traj.tx_position_m;
  EXPECT_DOUBLE_EQ(bistatic_range(traj, 0.0), 1.0);
}

TEST(BistaticRange, StraightLineMatchesDirectEvaluation) {
  auto traj = bistatic_fixture(TrajectoryKind::kStraightLine);
  traj.position_m = {4.0, 1.0};
  traj.velocity_m_s = {-0.7, 0.1};
  for (int i = 0; i < 10; ++i) {
    const double t = 0.5 + i;
    // oracle: direct coordinate arithmetic
    const double px = 4.0 - 0.7 * t;
    const double py = 1.0 + 0.1 * t;
    const double expected = std::hypot(px + 0.5, py) + std::hypot(px - 0.5, py);
    EXPECT_NEAR(bistatic_range(traj, t), expected, 1e-12);
  }
}

TEST(BistaticRange, OutsideDurationThrows) {
  auto traj = bistatic_fixture(TrajectoryKind::kStatic);
  traj.position_m = {2.0, 0.0};
  EXPECT_THROW(bistatic_range(traj, -0.1), DataError);
  EXPECT_THROW(bistatic_range(traj, 10.1), DataError);
}

TEST(BistaticRange, RateMatchesNumericalDerivative) {
  auto traj = bistatic_fixture(TrajectoryKind::kStraightLine);
  traj.position_m = {5.0, 0.8};
  traj.velocity_m_s = {-1.1, 0.05};
  const double h = 1e-5;
  for (double t : {1.0, 3.7, 6.2, 9.0}) {
    const double numeric = (bistatic_range(traj, t + h) - bistatic_range(traj, t - h)) / (2 * h);
    const double analytic = bistatic_range_rate(traj, t);
    EXPECT_NEAR(analytic, numeric, 1e-6 * std::abs(analytic) + 1e-9);
  }
}

TEST(BistaticRange, SinusoidalSwingOnAxis) {
  auto traj = bistatic_fixture(TrajectoryKind::kSinusoidal);
  traj.position_m = {3.05, 0.0};
  traj.direction = {1.0, 0.0};
  traj.amplitude_m = 0.01;
  traj.rate_hz = 0.25;
  // collinear beyond the pair: bistatic range is exactly 2x, so the
  // peak-to-peak bistatic swing is 4 * amplitude
  double lo = 1e9, hi = -1e9;
  for (double t = 0.0; t < 4.0; t += 0.01) {
    const double d = bistatic_range(traj, t);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  EXPECT_NEAR(hi - lo, 0.04, 1e-9);
  EXPECT_NEAR(0.5 * (hi + lo), 6.1, 1e-9);
}

SceneConfig single_path_scene(double delay_s, cdouble gain = {1.0, 0.0}) {
  SceneConfig scene;
  scene.radio = default_radio();
  scene.auto_los = false;
  scene.static_paths = {{gain, delay_s}};
  return scene;
}

TEST(SynthCfr, ZeroDelayGivesUnitResponse) {
  const auto s = synth_cfr(single_path_scene(0.0), 0.0);
  for (const auto& v : s.values) {
    EXPECT_NEAR(v.real(), 1.0, 1e-12);
    EXPECT_NEAR(v.imag(), 0.0, 1e-12);
  }
}

TEST(SynthCfr, PhaseSlopeMatchesDelay) {
  const double tau = 3.3356e-9;  // 1.0 m
  const auto scene = single_path_scene(tau);
  const auto s = synth_cfr(scene, 0.0);
  const double expected = -kTwoPi * scene.radio.subcarrier_spacing_hz * tau;
  EXPECT_NEAR(expected, -1.637e-3, 2e-6);
  for (std::size_t p = 0; p + 1 < s.values.size(); p += 97)
    EXPECT_NEAR(std::arg(s.values[p + 1] / s.values[p]), expected, 1e-9);
}

TEST(SynthCfr, MatchesNaivePerSubcarrierEvaluation) {
  SceneConfig scene = single_path_scene(17.3e-9, cdouble{0.8, -0.2});
  scene.static_paths.push_back({cdouble{0.05, 0.12}, 43.9e-9});
  const auto s = synth_cfr(scene, 0.0);
  // oracle: naive complex exponential evaluation per subcarrier
  for (std::size_t p = 0; p < s.values.size(); p += 53) {
    cdouble expected{0.0, 0.0};
    for (const auto& path : scene.static_paths) {
      const double phase = -kTwoPi *
                           (scene.radio.carrier_frequency_hz +
                            (*s.indices)[p] * scene.radio.subcarrier_spacing_hz) *
                           path.delay_s;
      expected += path.gain * cdouble{std::cos(phase), std::sin(phase)};
    }
    EXPECT_LT(std::abs(s.values[p] - expected), 1e-12);
  }
}

TEST(SynthCfr, TwoPathPeakRatioNear20dB) {
  SceneConfig scene = single_path_scene(3.3e-9);
  scene.static_paths.push_back({cdouble{0.1, 0.0}, 20e-9});  // 20 dB weaker
  const auto s = synth_cfr(scene, 0.0);
  const auto w = window_coefficients(s.values.size());
  const double spacing = scene.radio.subcarrier_spacing_hz;
  // oracle: brute-force DFT of the synthetic CFR around each path delay
  const double m1 = std::abs(testsupport::oracle_delay_response(s, spacing, 3.3e-9, w));
  const double m2 = std::abs(testsupport::oracle_delay_response(s, spacing, 20e-9, w));
  EXPECT_NEAR(amplitude_db(m1 / m2), 20.0, 1.5);
}

TEST(ApplyClockOffsets, ZeroOffsetsIdentity) {
  const auto s = synth_cfr(single_path_scene(5e-9), 0.0);
  const auto out = apply_clock_offsets(s, 0.0, 0.0, 78.125e3);
  for (std::size_t p = 0; p < s.values.size(); ++p)
    EXPECT_EQ(out.values[p], s.values[p]);
}

TEST(ApplyClockOffsets, HalfTurnNegates) {
  const auto s = synth_cfr(single_path_scene(5e-9), 0.0);
  const auto out = apply_clock_offsets(s, 0.0, kPi, 78.125e3);
  for (std::size_t p = 0; p < s.values.size(); p += 101)
    EXPECT_LT(std::abs(out.values[p] + s.values[p]), 1e-12);
}

TEST(ApplyClockOffsets, PeakMovesAndCarriesPhase) {
  const double tau = 30e-9, alpha = 10e-9, beta = 1.2;
  const auto scene = single_path_scene(tau);
  const auto s = synth_cfr(scene, 0.0);
  const auto shifted = apply_clock_offsets(s, alpha, beta, scene.radio.subcarrier_spacing_hz);
  const double spacing = scene.radio.subcarrier_spacing_hz;
  const std::vector<double> w(s.values.size(), 1.0);
  // oracle: brute-force DFT before/after over a dense delay scan
  const double peak_before =
      testsupport::oracle_peak_delay(s, spacing, 20e-9, 40e-9, 0.02e-9, w);
  const double peak_after =
      testsupport::oracle_peak_delay(shifted, spacing, 10e-9, 30e-9, 0.02e-9, w);
  EXPECT_NEAR(peak_before - peak_after, alpha, 0.05e-9);
  const cdouble before = oracle_delay_response(s, spacing, tau, w);
  const cdouble after = oracle_delay_response(shifted, spacing, tau - alpha, w);
  EXPECT_NEAR(wrap_phase(std::arg(after) - std::arg(before)), beta, 1e-9);
}

TEST(ApplyClockOffsets, GroupAction) {
  const auto s = synth_cfr(single_path_scene(12e-9), 0.0);
  const double df = 78.125e3;
  const auto a = apply_clock_offsets(apply_clock_offsets(s, 7e-9, 0.9, df), -3e-9, 2.5, df);
  const auto b = apply_clock_offsets(s, 4e-9, 3.4, df);
  EXPECT_LT(testsupport::max_rel_deviation(a.values, b.values), 1e-12);
}

TEST(PacketTimes, NoJitterUniform) {
  PacketTimingModel model;
  model.nominal_interval_s = 1e-3;
  const auto times = generate_packet_times(model, 10e-3);
  ASSERT_EQ(times.size(), 10u);
  for (std::size_t i = 0; i < times.size(); ++i)
    EXPECT_DOUBLE_EQ(times[i], 1e-3 * static_cast<double>(i));
}

TEST(PacketTimes, EmpiricalJitterMatchesMedianAndMad) {
  PacketTimingModel model;
  model.jitter = PacketTimingModel::JitterKind::kEmpirical;
  model.seed = 77;
  const auto times = generate_packet_times(model, 22.0);  // > 2e4 intervals
  ASSERT_GT(times.size(), 10000u);
  std::vector<double> intervals(times.size() - 1);
  for (std::size_t i = 0; i + 1 < times.size(); ++i) intervals[i] = times[i + 1] - times[i];
  const double med = median(intervals);
  EXPECT_GT(med, 1.015e-3);
  EXPECT_LT(med, 1.123e-3);
  const double mad = median_abs_deviation(intervals, med);
  EXPECT_NEAR(mad, 0.017e-3, 0.05 * 0.017e-3);
  for (double iv : intervals) {
    EXPECT_GE(iv, 0.5e-3);
    EXPECT_LE(iv, 6.5e-3);
  }
}

TEST(PacketTimes, DropProbabilityBinomialBounds) {
  PacketTimingModel model;
  model.drop_probability = 0.5;
  model.seed = 5;
  const auto times = generate_packet_times(model, 10.0);  // 1e4 slots
  const double n = 1e4, p = 0.5;
  const double sigma = std::sqrt(n * p * (1 - p));
  EXPECT_NEAR(static_cast<double>(times.size()), n * p, 3.0 * sigma);
  EXPECT_TRUE(std::is_sorted(times.begin(), times.end()));
}

TEST(PacketTimes, SixtySecondRunSnapshotCount) {
  // oracle: duration / median-interval arithmetic, 60 / 1.069e-3 = 56127
  PacketTimingModel model;
  model.jitter = PacketTimingModel::JitterKind::kEmpirical;
  model.seed = 1;
  const auto times = generate_packet_times(model, 60.0);
  EXPECT_NEAR(static_cast<double>(times.size()), 60.0 / 1.069e-3, 0.02 * 56127.0);
}

TEST(PacketTimes, DeterministicUnderSeed) {
  PacketTimingModel model;
  model.jitter = PacketTimingModel::JitterKind::kEmpirical;
  model.seed = 123;
  EXPECT_EQ(generate_packet_times(model, 1.0), generate_packet_times(model, 1.0));
}

TEST(Artifacts, AllTogglesOffIsIdentity) {
  const auto s = synth_cfr(single_path_scene(8e-9), 0.0);
  const auto out = inject_device_artifacts(s, ArtifactConfig{}, 0);
  for (std::size_t p = 0; p < s.values.size(); ++p) EXPECT_EQ(out.values[p], s.values[p]);
}

TEST(Artifacts, EdgeAttenuationPiecewiseModel) {
  auto scene = single_path_scene(0.0);  // flat unit magnitude
  ArtifactConfig cfg;
  cfg.edge_attenuation = true;
  const auto out = inject_device_artifacts(synth_cfr(scene, 0.0), cfg, 0);
  const auto& idx = *out.indices;
  for (std::size_t p = 0; p < idx.size(); ++p) {
    const int k = idx[p];
    const double mag = std::abs(out.values[p]);
    if (std::abs(k) <= 680) EXPECT_NEAR(mag, 1.0, 1e-12);
    if (std::abs(k) == 704) EXPECT_NEAR(mag, 0.6, 1e-12);
    if (std::abs(k) == 692) EXPECT_NEAR(mag, 0.8, 1e-12);  // -(692-680)/60 + 1
    if (std::abs(k) >= 704) EXPECT_NEAR(mag, 0.6, 1e-12);
  }
}

TEST(Artifacts, DcZeroPhaseKeepsMagnitude) {
  const auto s = synth_cfr(single_path_scene(6e-9), 0.0);
  ArtifactConfig cfg;
  cfg.corrupt_dc = true;
  const auto out = inject_device_artifacts(s, cfg, 0);
  for (std::size_t p = 0; p < s.values.size(); ++p) {
    const int k = (*s.indices)[p];
    if (k >= -11 && k <= 11) {
      EXPECT_NEAR(std::abs(out.values[p]), std::abs(s.values[p]), 1e-12);
      EXPECT_NEAR(std::arg(out.values[p]), 0.0, 1e-12);
    } else {
      EXPECT_EQ(out.values[p], s.values[p]);
    }
  }
}

TEST(Artifacts, NotchAndRssiOutlier) {
  const auto s = synth_cfr(single_path_scene(0.0), 0.0);
  ArtifactConfig cfg;
  cfg.notch = true;
  cfg.notch_depth = 0.3;
  cfg.rssi_outliers = {{2, 15.0}};
  const auto plain = inject_device_artifacts(s, cfg, 0);
  const auto notch = make_notch_indices();
  for (std::size_t p = 0; p < plain.values.size(); ++p) {
    const int k = (*s.indices)[p];
    const bool in_notch = std::find(notch.begin(), notch.end(), k) != notch.end();
    EXPECT_NEAR(std::abs(plain.values[p]), in_notch ? 0.3 : 1.0, 1e-12);
  }
  const auto depressed = inject_device_artifacts(s, cfg, 2);
  const double expected = 0.3 * std::pow(10.0, -15.0 / 20.0);
  EXPECT_NEAR(std::abs(depressed.values[0]), std::pow(10.0, -15.0 / 20.0), 1e-12);
  EXPECT_NEAR(std::abs(depressed.values[768 + 1012]), expected, 1e-12);
}

TEST(SceneSeries, DeterministicBitIdentical) {
  SceneConfig scene;
  scene.duration_s = 0.02;
  scene.target.emplace();
  scene.target->trajectory = bistatic_fixture(TrajectoryKind::kStraightLine);
  scene.target->trajectory.position_m = {3.0, 0.5};
  scene.target->trajectory.velocity_m_s = {-1.0, 0.0};
  scene.target->trajectory.duration_s = 0.02;
  scene.target->gain = {0.1, 0.0};
  scene.clock = ClockModel::uniform_random(100e-9, 9);
  scene.timing.jitter = PacketTimingModel::JitterKind::kEmpirical;
  scene.timing.seed = 4;
  scene.seed = 11;
  const auto a = synthesize_series(scene);
  const auto b = synthesize_series(scene);
  ASSERT_EQ(a.snapshots.size(), b.snapshots.size());
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
    EXPECT_EQ(a.snapshots[i].time_s, b.snapshots[i].time_s);
    EXPECT_EQ(a.snapshots[i].rssi_db, b.snapshots[i].rssi_db);
    ASSERT_EQ(a.snapshots[i].values.size(), b.snapshots[i].values.size());
    for (std::size_t p = 0; p < a.snapshots[i].values.size(); ++p)
      ASSERT_EQ(a.snapshots[i].values[p], b.snapshots[i].values[p]);
  }
  a.validate();
}

TEST(SceneSeries, DualityPeaksNearConfiguredDelays) {
  // IDFT of the un-windowed CFR peaks within one base delay bin of each tap
  SceneConfig scene = single_path_scene(40e-9);
  scene.static_paths.push_back({cdouble{0.5, 0.0}, 120e-9});
  const auto s = synth_cfr(scene, 0.0);
  const auto cir = build_cir(s, scene.radio, WindowKind::kRect);
  const double base_bin = 1.0 / (scene.radio.fft_points_base * scene.radio.subcarrier_spacing_hz);
  for (const auto& path : scene.static_paths) {
    const std::size_t center = static_cast<std::size_t>(path.delay_s / cir.grid.spacing_s);
    const std::size_t radius = static_cast<std::size_t>(base_bin / cir.grid.spacing_s);
    std::size_t best = center - radius;
    for (std::size_t n = center - radius; n <= center + radius; ++n)
      if (std::abs(cir.values[n]) > std::abs(cir.values[best])) best = n;
    EXPECT_LE(std::abs(cir.grid.delay(best) - path.delay_s), base_bin);
  }
}

}  // namespace
