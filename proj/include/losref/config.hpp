#pragma once

#include <optional>

#include <json.hpp>

#include "losref/calibration.hpp"
#include "losref/doppler.hpp"
#include "losref/io.hpp"
#include "losref/preprocess.hpp"
#include "losref/scene.hpp"

namespace losref {

/// Output/product options for the orchestrated pipeline.
struct OutputOptions {
  double crop_max_delay_ns = 200.0;  // exported delay window [0, crop]
  std::size_t frame_stride = 1;      // export every Nth delay-Doppler frame
  bool csv_mirror = false;
  double phase_trace_tau_ns = 20.0;  // delay bin of the phase-time trace
};

/// Everything the tool needs for one run. Defaults reproduce the tabulated
/// radio and STFT parameters.
struct PipelineConfig {
  RadioParams radio = default_radio();
  PreprocessConfig preprocess;
  CalibrationConfig calibration;
  StftParams stft;
  std::optional<SceneConfig> scene;
  OutputOptions output;
  std::uint64_t seed = 1;

  void validate() const {
    radio.validate();
    preprocess.validate();
    calibration.validate();
    stft.validate();
    if (scene) scene->validate();
    if (output.crop_max_delay_ns <= 0) throw ConfigError("output: crop window must be positive");
    if (output.frame_stride < 1) throw ConfigError("output: frame stride must be >= 1");
  }
};

namespace config_detail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& where, const std::exception& e) {
  throw ConfigError("config." + where + ": " + e.what());
}

inline cdouble parse_complex(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j.at(0).get<double>(), j.at(1).get<double>()};
  throw ConfigError("complex values are a number or [re, im]");
}

inline Vec2 parse_vec2(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected [x, y]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

inline OffsetLaw parse_offset_law(const json& j, double unit_scale) {
  OffsetLaw law;
  const std::string kind = j.value("law", "fixed");
  if (kind == "fixed") {
    law.kind = OffsetLaw::Kind::kFixed;
    law.fixed_value = j.value("value", 0.0) * unit_scale;
  } else if (kind == "uniform") {
    law.kind = OffsetLaw::Kind::kUniform;
    law.min = j.at("min").get<double>() * unit_scale;
    law.max = j.at("max").get<double>() * unit_scale;
    if (law.max < law.min) throw ConfigError("offset law: max < min");
  } else {
    throw ConfigError("offset law must be 'fixed' or 'uniform'");
  }
  return law;
}

inline Trajectory parse_trajectory(const json& j, const SceneConfig& scene) {
  Trajectory traj;
  const std::string kind = j.value("kind", "static");
  if (kind == "static") {
    traj.kind = TrajectoryKind::kStatic;
  } else if (kind == "straight_line") {
    traj.kind = TrajectoryKind::kStraightLine;
  } else if (kind == "sinusoidal_displacement") {
    traj.kind = TrajectoryKind::kSinusoidal;
  } else {
    throw ConfigError("trajectory kind must be static | straight_line | sinusoidal_displacement");
  }
  if (j.contains("position_m")) traj.position_m = parse_vec2(j.at("position_m"));
  if (j.contains("velocity_m_s")) traj.velocity_m_s = parse_vec2(j.at("velocity_m_s"));
  if (j.contains("direction")) traj.direction = parse_vec2(j.at("direction"));
  traj.amplitude_m = j.value("amplitude_m", 0.0);
  traj.rate_hz = j.value("rate_hz", 0.0);
  traj.duration_s = j.value("duration_s", scene.duration_s);
  traj.tx_position_m = scene.tx_position_m;
  traj.rx_position_m = scene.rx_position_m;
  traj.validate();
  return traj;
}

inline SceneConfig parse_scene(const json& j, const RadioParams& radio, std::uint64_t seed) {
  SceneConfig scene;
  scene.radio = radio;
  scene.seed = seed;
  scene.duration_s = j.value("duration_s", 1.0);
  if (j.contains("tx_position_m")) scene.tx_position_m = parse_vec2(j.at("tx_position_m"));
  if (j.contains("rx_position_m")) scene.rx_position_m = parse_vec2(j.at("rx_position_m"));
  scene.auto_los = j.value("auto_los", true);
  if (j.contains("los_gain")) scene.los_gain = parse_complex(j.at("los_gain"));
  if (j.contains("static_paths")) {
    for (const auto& jp : j.at("static_paths")) {
      PathSpec p;
      p.gain = parse_complex(jp.at("gain"));
      p.delay_s = jp.at("delay_ns").get<double>() * 1e-9;
      scene.static_paths.push_back(p);
    }
  }
  if (j.contains("target")) {
    const auto& jt = j.at("target");
    scene.target.emplace();
    scene.target->gain = parse_complex(jt.at("gain"));
    scene.target->trajectory = parse_trajectory(jt.at("trajectory"), scene);
  }
  if (j.contains("clock")) {
    const auto& jc = j.at("clock");
    if (jc.contains("delay_offset"))
      scene.clock.delay_offset = parse_offset_law(jc.at("delay_offset"), 1e-9);  // ns
    if (jc.contains("phase_offset")) {
      const auto& jp = jc.at("phase_offset");
      if (jp.value("law", "") == "uniform" && !jp.contains("min")) {
        scene.clock.phase_offset = {OffsetLaw::Kind::kUniform, 0.0, 0.0, kTwoPi};
      } else {
        scene.clock.phase_offset = parse_offset_law(jp, 1.0);  // radians
      }
    }
    scene.clock.quantize_to_sample_period = jc.value("quantize_to_sample_period", true);
    scene.clock.seed = jc.value("seed", mix_seed(seed, 101));
  } else {
    scene.clock.seed = mix_seed(seed, 101);
  }
  if (j.contains("timing")) {
    const auto& jt = j.at("timing");
    scene.timing.nominal_interval_s = jt.value("nominal_interval_s", 1e-3);
    if (jt.contains("jitter")) {
      const auto& jj = jt.at("jitter");
      const std::string law = jj.value("law", "none");
      if (law == "empirical") {
        scene.timing.jitter = PacketTimingModel::JitterKind::kEmpirical;
        scene.timing.median_s = jj.value("median_s", 1.069e-3);
        scene.timing.mad_s = jj.value("mad_s", 0.017e-3);
        scene.timing.clip_min_s = jj.value("clip_min_s", 0.5e-3);
        scene.timing.tail_max_s = jj.value("tail_max_s", 6.5e-3);
        scene.timing.tail_probability = jj.value("tail_probability", 0.002);
      } else if (law != "none") {
        throw ConfigError("timing jitter law must be 'none' or 'empirical'");
      }
    }
    scene.timing.drop_probability = jt.value("drop_probability", 0.0);
    scene.timing.seed = jt.value("seed", mix_seed(seed, 102));
  } else {
    scene.timing.seed = mix_seed(seed, 102);
  }
  if (j.contains("artifacts")) {
    const auto& ja = j.at("artifacts");
    auto& art = scene.artifacts;
    art.corrupt_dc = ja.value("corrupt_dc", false);
    const std::string dc_law = ja.value("dc_law", "zero_phase");
    if (dc_law == "zero_phase") {
      art.dc_law = ArtifactConfig::DcJunkLaw::kZeroPhase;
    } else if (dc_law == "random_phase") {
      art.dc_law = ArtifactConfig::DcJunkLaw::kRandomPhase;
    } else {
      throw ConfigError("artifacts dc_law must be 'zero_phase' or 'random_phase'");
    }
    if (ja.contains("notch")) {
      art.notch = ja.at("notch").value("enabled", true);
      art.notch_depth = ja.at("notch").value("depth", 0.3);
      if (ja.at("notch").contains("indices"))
        art.notch_indices = ja.at("notch").at("indices").get<std::vector<int>>();
    }
    art.edge_attenuation = ja.value("edge_attenuation", false);
    if (ja.contains("rssi_outliers")) {
      for (const auto& jo : ja.at("rssi_outliers"))
        art.rssi_outliers.push_back({jo.at("index").get<std::size_t>(),
                                     jo.value("drop_db", 15.0)});
    }
    art.seed = ja.value("seed", mix_seed(seed, 103));
  } else {
    scene.artifacts.seed = mix_seed(seed, 103);
  }
  scene.rssi_offset_db = j.value("rssi_offset_db", -40.0);
  scene.validate();
  return scene;
}

inline PreprocessConfig parse_preprocess(const json& j) {
  PreprocessConfig cfg;
  cfg.outlier_removal = j.value("outlier_removal", true);
  cfg.rssi_drop_threshold_db = j.value("rssi_drop_threshold_db", 10.0);
  cfg.rssi_median_window = j.value("rssi_median_window", 101);
  cfg.dc_interpolation = j.value("dc_interpolation", true);
  if (j.contains("dc_index_range")) {
    cfg.dc_index_min = j.at("dc_index_range").at(0);
    cfg.dc_index_max = j.at("dc_index_range").at(1);
  }
  cfg.notch_repair = j.value("notch_repair", true);
  if (j.contains("notch_indices"))
    cfg.notch_indices = j.at("notch_indices").get<std::vector<int>>();
  cfg.equalize_attenuation = j.value("equalize_attenuation", true);
  if (j.contains("attenuation")) {
    const auto& ja = j.at("attenuation");
    cfg.attenuation.knee_index = ja.value("knee_index", 680);
    cfg.attenuation.floor_index = ja.value("floor_index", 704);
    cfg.attenuation.floor_value = ja.value("floor_value", 0.6);
  }
  cfg.rms_normalize = j.value("rms_normalize", true);
  cfg.rms_reference_index_bound = j.value("rms_reference_index_bound", 680);
  cfg.validate();
  return cfg;
}

inline StftParams parse_stft(const json& j) {
  StftParams p;
  p.segment_length = j.value("segment_length", 256);
  p.overlap = j.value("overlap", 224);
  p.doppler_interp_rate = j.value("doppler_interp_rate", 8);
  const std::string window = j.value("window", "hann");
  if (window == "hann") {
    p.window = WindowKind::kHann;
  } else if (window == "blackman") {
    p.window = WindowKind::kBlackman;
  } else if (window == "rect") {
    p.window = WindowKind::kRect;
  } else {
    throw ConfigError("stft window must be hann | blackman | rect");
  }
  p.mean_removal = j.value("mean_removal", true);
  p.validate();
  return p;
}

}  // namespace config_detail

inline PipelineConfig parse_pipeline_config(const nlohmann::json& j) {
  using config_detail::fail;
  PipelineConfig cfg;
  cfg.seed = j.value("seed", 1);
  try {
    if (j.contains("radio")) cfg.radio = radio_from_json(j.at("radio"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail("radio", e);
  }
  try {
    if (j.contains("preprocess")) cfg.preprocess = config_detail::parse_preprocess(j.at("preprocess"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail("preprocess", e);
  }
  try {
    if (j.contains("calibration")) {
      cfg.calibration.reference_distance_m =
          j.at("calibration").value("reference_distance_m", 1.0);
      cfg.calibration.friis_normalization =
          j.at("calibration").value("friis_normalization", true);
      cfg.calibration.validate();
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail("calibration", e);
  }
  try {
    if (j.contains("stft")) cfg.stft = config_detail::parse_stft(j.at("stft"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail("stft", e);
  }
  try {
    if (j.contains("scene"))
      cfg.scene = config_detail::parse_scene(j.at("scene"), cfg.radio, cfg.seed);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail("scene", e);
  }
  try {
    if (j.contains("output")) {
      const auto& jo = j.at("output");
      cfg.output.crop_max_delay_ns = jo.value("crop_max_delay_ns", 200.0);
      cfg.output.frame_stride = jo.value("frame_stride", 1);
      cfg.output.csv_mirror = jo.value("csv_mirror", false);
      cfg.output.phase_trace_tau_ns = jo.value("phase_trace_tau_ns", 20.0);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail("output", e);
  }
  cfg.validate();
  return cfg;
}

inline PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_pipeline_config(j);
}

}  // namespace losref
