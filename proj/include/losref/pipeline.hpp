#pragma once

#include "losref/baseline.hpp"
#include "losref/calibration.hpp"
#include "losref/clutter.hpp"
#include "losref/config.hpp"
#include "losref/doppler.hpp"
#include "losref/preprocess.hpp"
#include "losref/version.hpp"

namespace losref {

/// Build, calibrate, Friis-normalize and crop each snapshot's CIR in one
/// parallel pass. The full oversampled ring only lives while a snapshot is
/// in flight, which bounds memory for long captures.
inline CirSeries build_calibrate_crop(const CfrSeries& series, const CalibrationConfig& cal,
                                      std::size_t crop_bins,
                                      CalibrationReport* report = nullptr,
                                      WindowKind window = WindowKind::kBlackman) {
  if (series.snapshots.empty()) throw DataError("build_calibrate_crop: empty series");
  const std::size_t full = static_cast<std::size_t>(series.radio.delay_bin_count());
  crop_bins = std::min(crop_bins, full);
  const std::size_t exclusion = static_cast<std::size_t>(
      std::lround(3.0 * delay_resolution(series.radio) / series.radio.delay_spacing_s()));

  CirSeries out;
  out.radio = series.radio;
  out.grid = DelayGrid{series.radio.delay_spacing_s(), crop_bins};
  out.state = CalibrationState::kCalibrated;
  out.cirs.resize(series.snapshots.size());
  std::vector<double> margins(series.snapshots.size(), 0.0);
  parallel_for(series.snapshots.size(), [&](std::size_t i) {
    Cir cir = build_cir(series.snapshots[i], series.radio, window);
    const LosPeak peak = detect_los_peak(cir);
    margins[i] = dominance_margin_db(cir, peak.bin, exclusion);
    cir = calibrate(cir, cal);
    cir = normalize_to_friis(cir, cal, series.radio);
    out.cirs[i] = crop_cir(cir, crop_bins);
  });
  if (report) {
    for (double m : margins) {
      report->min_dominance_margin_db = std::min(report->min_dominance_margin_db, m);
      if (m < 3.0) ++report->low_dominance_count;
    }
  }
  return out;
}

struct PipelineResult {
  CirSeries calibrated;       // cropped delay window
  CirSeries residual_series;  // same window, clutter removed
  ResampleGrid resample_grid;
  std::size_t resample_conflicts = 0;
  // frames are streamed: all frames contribute peaks/map, but only every
  // output.frame_stride-th frame is retained for export
  std::vector<DelayDopplerFrame> frames;
  std::vector<std::size_t> frame_indices;  // original index of each kept frame
  std::vector<double> frame_times;         // center time of every frame
  SpectralMap doppler_time;
  std::vector<PeakEstimate> peaks;  // one per frame
  CalibrationReport calibration_report;
  std::size_t input_snapshots = 0;
  std::size_t kept_snapshots = 0;
  double residual_energy_ratio = 0.0;
  bool residual_empty = false;   // static scene: no motion energy to track
  bool monostatic_ok = true;     // Tx-Rx separation << bistatic range
};

/// Full processing chain: preprocess -> CIR -> LoS referencing -> clutter
/// removal -> uniform resampling -> delay-Doppler STFT -> peak extraction
/// and incoherent integration.
inline PipelineResult run_pipeline(const PipelineConfig& cfg, const CfrSeries& input) {
  cfg.validate();
  PipelineResult result;
  result.input_snapshots = input.snapshots.size();

  const CfrSeries conditioned = preprocess_series(input, cfg.preprocess);
  result.kept_snapshots = conditioned.snapshots.size();

  const std::size_t crop_bins = static_cast<std::size_t>(std::lround(
      cfg.output.crop_max_delay_ns * 1e-9 / cfg.radio.delay_spacing_s()));
  result.calibrated = build_calibrate_crop(conditioned, cfg.calibration, crop_bins,
                                           &result.calibration_report);

  const ClutterProfile clutter = estimate_clutter(result.calibrated);
  result.residual_series = residual(result.calibrated, clutter);

  double calibrated_energy = 0.0, residual_energy = 0.0;
  for (std::size_t i = 0; i < result.calibrated.cirs.size(); ++i)
    for (std::size_t b = 0; b < result.calibrated.grid.size; ++b) {
      calibrated_energy += std::norm(result.calibrated.cirs[i].values[b]);
      residual_energy += std::norm(result.residual_series.cirs[i].values[b]);
    }
  result.residual_energy_ratio =
      calibrated_energy > 0.0 ? residual_energy / calibrated_energy : 0.0;
  result.residual_empty = result.residual_energy_ratio < 1e-20;

  if (result.residual_series.cirs.size() >= 2) {
    ResampleResult resampled = uniform_resample(result.residual_series);
    result.resample_grid = resampled.grid;
    result.resample_conflicts = resampled.conflicts_dropped;
    if (!result.residual_empty && resampled.series.cirs.size() >= cfg.stft.segment_length) {
      const StftLayout layout = stft_layout(resampled.series, cfg.stft);
      const std::size_t nframes = layout.starts.size();
      result.peaks.resize(nframes);
      result.frame_times.resize(nframes);
      std::vector<std::vector<double>> columns(nframes);
      std::vector<DelayDopplerFrame> kept(nframes);  // only strided slots filled
      parallel_for(nframes, [&](std::size_t f) {
        DelayDopplerFrame frame = stft_frame(resampled.series, cfg.stft, layout, f);
        result.frame_times[f] = frame.center_time_s;
        result.peaks[f] = peak_delay_doppler(frame, cfg.radio.wavelength());
        columns[f] = incoherent_column(frame);
        if (f % cfg.output.frame_stride == 0) kept[f] = std::move(frame);
      });
      result.doppler_time =
          assemble_doppler_time(result.frame_times, layout.doppler_grid_hz, columns);
      for (std::size_t f = 0; f < nframes; f += cfg.output.frame_stride) {
        result.frame_indices.push_back(f);
        result.frames.push_back(std::move(kept[f]));
      }
    }
  }

  if (!result.peaks.empty()) {
    double min_range = std::numeric_limits<double>::infinity();
    for (const auto& p : result.peaks)
      min_range = std::min(min_range, p.bistatic_delay_s * cfg.radio.speed_of_light_m_s);
    result.monostatic_ok = cfg.calibration.reference_distance_m < min_range / 5.0;
  }
  return result;
}

namespace pipeline_detail {

inline float clamped_db(double amplitude) {
  return static_cast<float>(amplitude > 0.0 ? std::max(20.0 * std::log10(amplitude), -300.0)
                                            : -300.0);
}

inline MatrixFile range_time_matrix(const CirSeries& series, const std::string& name) {
  MatrixFile m;
  m.name = name;
  m.row_axis_name = "delay";
  m.row_axis_unit = "s";
  m.col_axis_name = "time";
  m.col_axis_unit = "s";
  m.value_unit = "dB (20*log10 amplitude)";
  m.row_axis.resize(series.grid.size);
  for (std::size_t b = 0; b < series.grid.size; ++b) m.row_axis[b] = series.grid.delay(b);
  m.col_axis.resize(series.cirs.size());
  m.payload.resize(series.grid.size * series.cirs.size());
  for (std::size_t t = 0; t < series.cirs.size(); ++t) {
    m.col_axis[t] = series.cirs[t].time_s;
    for (std::size_t b = 0; b < series.grid.size; ++b)
      m.payload[b * series.cirs.size() + t] = clamped_db(std::abs(series.cirs[t].values[b]));
  }
  return m;
}

inline MatrixFile frame_matrix(const DelayDopplerFrame& frame, const std::string& name) {
  MatrixFile m;
  m.name = name;
  m.row_axis_name = "delay";
  m.row_axis_unit = "s";
  m.col_axis_name = "doppler";
  m.col_axis_unit = "Hz";
  m.value_unit = "dB (20*log10 amplitude)";
  m.row_axis.resize(frame.delay_grid.size);
  for (std::size_t b = 0; b < frame.delay_grid.size; ++b) m.row_axis[b] = frame.delay_grid.delay(b);
  m.col_axis = frame.doppler_grid_hz;
  m.payload.resize(frame.values.size());
  for (std::size_t i = 0; i < frame.values.size(); ++i)
    m.payload[i] = clamped_db(std::abs(frame.values[i]));
  return m;
}

inline MatrixFile spectral_map_matrix(const SpectralMap& map, const std::string& name) {
  MatrixFile m;
  m.name = name;
  m.row_axis_name = "doppler";
  m.row_axis_unit = "Hz";
  m.col_axis_name = "time";
  m.col_axis_unit = "s";
  m.value_unit = map.scale == MapScale::kDbRelativeToMax
                     ? "dB (10*log10 power / max)"
                     : "linear power";
  m.row_axis = map.frequency_hz;
  m.col_axis = map.times_s;
  m.payload.assign(map.values.begin(), map.values.end());
  return m;
}

inline void maybe_csv(const std::filesystem::path& path, const MatrixFile& m, bool mirror) {
  write_mat1(path, m);
  if (mirror) {
    auto csv = path;
    csv.replace_extension(".csv");
    write_matrix_csv(csv, m);
  }
}

}  // namespace pipeline_detail

/// Write all cmd_pipeline products and the run manifest; returns the manifest.
inline nlohmann::json write_pipeline_products(const PipelineResult& result,
                                              const PipelineConfig& cfg,
                                              const std::filesystem::path& out_dir,
                                              const std::string& config_hash,
                                              const std::string& input_hash) {
  namespace fs = std::filesystem;
  using pipeline_detail::maybe_csv;
  fs::create_directories(out_dir);
  std::vector<std::string> products;
  std::vector<std::string> warnings;

  maybe_csv(out_dir / "range_time_calibrated.mat1",
            pipeline_detail::range_time_matrix(result.calibrated, "calibrated |h(tau,t)|"),
            cfg.output.csv_mirror);
  products.push_back("range_time_calibrated.mat1");
  maybe_csv(out_dir / "range_time_residual.mat1",
            pipeline_detail::range_time_matrix(result.residual_series, "residual |h~(tau,t)|"),
            cfg.output.csv_mirror);
  products.push_back("range_time_residual.mat1");

  {
    const auto& series = result.residual_series;
    const std::size_t bin = std::min<std::size_t>(
        series.grid.size == 0 ? 0
                              : static_cast<std::size_t>(std::lround(
                                    cfg.output.phase_trace_tau_ns * 1e-9 / series.grid.spacing_s)),
        series.grid.size - 1);
    MatrixFile m;
    m.name = "residual phase arg h~(tau0, t)";
    m.row_axis_name = "delay";
    m.row_axis_unit = "s";
    m.col_axis_name = "time";
    m.col_axis_unit = "s";
    m.value_unit = "rad";
    m.row_axis = {series.grid.delay(bin)};
    m.col_axis.resize(series.cirs.size());
    m.payload.resize(series.cirs.size());
    for (std::size_t t = 0; t < series.cirs.size(); ++t) {
      m.col_axis[t] = series.cirs[t].time_s;
      m.payload[t] = static_cast<float>(std::arg(series.cirs[t].values[bin]));
    }
    maybe_csv(out_dir / "phase_time.mat1", m, cfg.output.csv_mirror);
    products.push_back("phase_time.mat1");
  }

  for (std::size_t k = 0; k < result.frames.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "dd_frame_%05zu.mat1", result.frame_indices[k]);
    char label[64];
    std::snprintf(label, sizeof label, "s(tau, nu; t=%.6f s)", result.frames[k].center_time_s);
    write_mat1(out_dir / name, pipeline_detail::frame_matrix(result.frames[k], label));
    products.push_back(name);
  }

  if (!result.peaks.empty()) {
    maybe_csv(out_dir / "doppler_time.mat1",
              pipeline_detail::spectral_map_matrix(result.doppler_time, "incoherent |s|^2 over tau"),
              cfg.output.csv_mirror);
    products.push_back("doppler_time.mat1");
  }

  {
    std::string csv = "time_s,bistatic_delay_ns,bistatic_range_m,doppler_hz,v_eff_m_s,power_db\n";
    char line[256];
    for (std::size_t f = 0; f < result.peaks.size(); ++f) {
      const auto& p = result.peaks[f];
      const double range = p.bistatic_delay_s * cfg.radio.speed_of_light_m_s;
      if (result.monostatic_ok) {
        std::snprintf(line, sizeof line, "%.9f,%.6f,%.6f,%.6f,%.6f,%.3f\n",
                      result.frame_times[f], p.bistatic_delay_s * 1e9, range,
                      p.doppler_hz, p.effective_radial_velocity_m_s, p.power_db);
      } else {
        std::snprintf(line, sizeof line, "%.9f,%.6f,%.6f,%.6f,,%.3f\n",
                      result.frame_times[f], p.bistatic_delay_s * 1e9, range,
                      p.doppler_hz, p.power_db);
      }
      csv += line;
    }
    write_text_file(out_dir / "peak_track.csv", csv);
    products.push_back("peak_track.csv");
  }

  if (result.calibration_report.low_dominance_count > 0) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "LoS dominance below 3 dB on %zu snapshots (min margin %.2f dB): "
                  "delay/phase referencing may be unreliable",
                  result.calibration_report.low_dominance_count,
                  result.calibration_report.min_dominance_margin_db);
    warnings.push_back(msg);
  }
  if (result.residual_empty)
    warnings.push_back("residual energy is numerically zero: static scene, peak track empty");
  if (!result.monostatic_ok)
    warnings.push_back(
        "Tx-Rx separation exceeds 1/5 of the minimum bistatic range: v_eff omitted, "
        "use doppler_hz with d_dot = -nu*lambda");

  nlohmann::json manifest = {
      {"tool", "losref"},
      {"version", kVersion},
      {"seed", cfg.seed},
      {"config_hash", config_hash},
      {"input_hash", input_hash},
      {"products", products},
      {"warnings", warnings},
      {"stats",
       {{"input_snapshots", result.input_snapshots},
        {"kept_snapshots", result.kept_snapshots},
        {"resample_step_s", result.resample_grid.step_s},
        {"resample_conflicts", result.resample_conflicts},
        {"frames", result.frame_times.size()},
        {"frames_exported", result.frames.size()},
        {"min_dominance_margin_db",
         std::isfinite(result.calibration_report.min_dominance_margin_db)
             ? result.calibration_report.min_dominance_margin_db
             : 1e9},
        {"residual_energy_ratio", result.residual_energy_ratio},
        {"peak_track_empty", result.residual_empty},
        {"monostatic_approximation", result.monostatic_ok}}}};
  write_text_file(out_dir / "run_manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

/// cmd_simulate: synthesize the configured scene and write the CSIR-v1 file.
inline std::filesystem::path simulate_to_file(const PipelineConfig& cfg,
                                              const std::filesystem::path& out_dir,
                                              const std::string& config_hash) {
  if (!cfg.scene) throw ConfigError("simulate: config has no scene");
  const CfrSeries series = synthesize_series(*cfg.scene);
  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / "cfr.csir";
  write_csir(path, series);
  nlohmann::json manifest = {{"tool", "losref"},
                             {"version", kVersion},
                             {"seed", cfg.scene->seed},
                             {"config_hash", config_hash},
                             {"products", {"cfr.csir"}},
                             {"stats",
                              {{"snapshots", series.snapshots.size()},
                               {"duration_s", cfg.scene->duration_s},
                               {"output_hash", hash_file(path)}}}};
  write_text_file(out_dir / "run_manifest.json", manifest.dump(2) + "\n");
  return path;
}

/// cmd_baseline: magnitude/PCA time-frequency map of the preprocessed input.
inline SpectralMap run_baseline(const PipelineConfig& cfg, const CfrSeries& input,
                                BaselineMode mode, int index) {
  const CfrSeries conditioned = preprocess_series(input, cfg.preprocess);
  return baseline_magnitude_stft(conditioned, mode, index, cfg.stft);
}

inline nlohmann::json write_baseline_products(const SpectralMap& map, const PipelineConfig& cfg,
                                              BaselineMode mode, int index,
                                              const std::filesystem::path& out_dir,
                                              const std::string& config_hash,
                                              const std::string& input_hash) {
  std::filesystem::create_directories(out_dir);
  // convert the linear-power map to the documented dB-relative-to-max scale
  SpectralMap db_map = map;
  const double peak = *std::max_element(map.values.begin(), map.values.end());
  if (peak > 0.0)
    for (auto& v : db_map.values) v = power_db(std::max(v, peak * 1e-30) / peak);
  db_map.scale = MapScale::kDbRelativeToMax;
  auto m = pipeline_detail::spectral_map_matrix(db_map, "magnitude-domain baseline spectrum");
  m.row_axis_name = "frequency";
  pipeline_detail::maybe_csv(out_dir / "baseline_map.mat1", m, cfg.output.csv_mirror);
  nlohmann::json manifest = {
      {"tool", "losref"},
      {"version", kVersion},
      {"seed", cfg.seed},
      {"config_hash", config_hash},
      {"input_hash", input_hash},
      {"products", {"baseline_map.mat1"}},
      {"stats",
       {{"mode", mode == BaselineMode::kSubcarrier ? "subcarrier" : "pc"}, {"index", index}}}};
  write_text_file(out_dir / "run_manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace losref
