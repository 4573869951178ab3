// Exercises the installed command-line surface: subcommands, flags, file
// products, exit codes and determinism.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "losref/io.hpp"

#ifndef LOSREF_CLI_PATH
#error "LOSREF_CLI_PATH must be defined by the build"
#endif

namespace {

namespace fs = std::filesystem;

fs::path work_dir(const std::string& leaf) {
  auto d = fs::temp_directory_path() / "losref_cli_test" / leaf;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LOSREF_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

const char* kSceneConfig = R"({
  "seed": 42,
  "scene": {
    "duration_s": 0.4,
    "static_paths": [{"gain": [0.25, -0.1], "delay_ns": 28.0}],
    "target": {
      "gain": [0.1, 0.0],
      "trajectory": {"kind": "straight_line", "position_m": [4.0, 0.0],
                      "velocity_m_s": [-0.807, 0.0]}
    },
    "clock": {"delay_offset": {"law": "uniform", "min": -100, "max": 100},
               "phase_offset": {"law": "uniform"}}
  },
  "output": {"crop_max_delay_ns": 60.0, "frame_stride": 4, "phase_trace_tau_ns": 26.0}
})";

class CliRoundTrip : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(work_dir("roundtrip"));
    config_path_ = new fs::path(*dir_ / "config.json");
    std::ofstream(*config_path_) << kSceneConfig;
    ASSERT_EQ(run_cli("simulate --config " + config_path_->string() + " --out " +
                      (*dir_ / "sim").string()),
              0);
  }
  static void TearDownTestSuite() {
    delete dir_;
    delete config_path_;
  }
  static fs::path* dir_;
  static fs::path* config_path_;
};

fs::path* CliRoundTrip::dir_ = nullptr;
fs::path* CliRoundTrip::config_path_ = nullptr;

TEST_F(CliRoundTrip, SimulateWritesParseableCsir) {
  const auto csir = *dir_ / "sim" / "cfr.csir";
  ASSERT_TRUE(fs::exists(csir));
  const auto series = losref::read_csir(csir);
  EXPECT_NEAR(static_cast<double>(series.snapshots.size()), 400.0, 2.0);
  EXPECT_TRUE(fs::exists(*dir_ / "sim" / "run_manifest.json"));
}

TEST_F(CliRoundTrip, SimulateDeterministicBytes) {
  ASSERT_EQ(run_cli("simulate --config " + config_path_->string() + " --out " +
                    (*dir_ / "sim2").string()),
            0);
  EXPECT_EQ(losref::hash_file(*dir_ / "sim" / "cfr.csir"),
            losref::hash_file(*dir_ / "sim2" / "cfr.csir"));
  // a different seed changes the bytes
  ASSERT_EQ(run_cli("simulate --config " + config_path_->string() + " --seed 999 --out " +
                    (*dir_ / "sim3").string()),
            0);
  EXPECT_NE(losref::hash_file(*dir_ / "sim" / "cfr.csir"),
            losref::hash_file(*dir_ / "sim3" / "cfr.csir"));
}

TEST_F(CliRoundTrip, PipelineEmitsProducts) {
  const auto out = *dir_ / "pipe";
  ASSERT_EQ(run_cli("pipeline --config " + config_path_->string() + " --input " +
                    (*dir_ / "sim" / "cfr.csir").string() + " --out " + out.string() +
                    " --tau 26 --csv --verbose"),
            0);
  for (const std::string name :
       {"range_time_calibrated.mat1", "range_time_residual.mat1", "phase_time.mat1",
        "doppler_time.mat1", "peak_track.csv", "run_manifest.json", "dd_frame_00000.mat1",
        "range_time_residual.csv"})
    EXPECT_TRUE(fs::exists(out / name)) << name;

  const auto manifest = nlohmann::json::parse(file_bytes(out / "run_manifest.json"));
  EXPECT_EQ(manifest.at("tool"), "losref");
  EXPECT_FALSE(manifest.at("stats").at("peak_track_empty").get<bool>());

  // phase trace: one row at the --tau bin, one column per snapshot
  const auto trace = losref::read_mat1(out / "phase_time.mat1");
  EXPECT_EQ(trace.rows(), 1u);
  EXPECT_NEAR(trace.row_axis[0], 26e-9, 0.1e-9);
  EXPECT_GT(trace.cols(), 100u);

  // frame stride 4: frame 1 not exported, frame 4 exported
  EXPECT_FALSE(fs::exists(out / "dd_frame_00001.mat1"));
  EXPECT_TRUE(fs::exists(out / "dd_frame_00004.mat1"));

  // peak track reports ~ +30 Hz while approaching
  std::ifstream csv(out / "peak_track.csv");
  std::string header, first;
  std::getline(csv, header);
  std::getline(csv, first);
  EXPECT_NE(header.find("doppler_hz"), std::string::npos);
  const auto fields = [&] {
    std::vector<double> v;
    std::stringstream ss(first);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(tok.empty() ? NAN : std::stod(tok));
    return v;
  }();
  ASSERT_GE(fields.size(), 5u);
  EXPECT_NEAR(fields[3], 30.0, 4.0);
}

TEST_F(CliRoundTrip, BaselineEmitsSymmetricMap) {
  const auto out = *dir_ / "base";
  ASSERT_EQ(run_cli("baseline --config " + config_path_->string() + " --input " +
                    (*dir_ / "sim" / "cfr.csir").string() + " --out " + out.string() +
                    " --mode subcarrier --index 100"),
            0);
  const auto m = losref::read_mat1(out / "baseline_map.mat1");
  ASSERT_GT(m.rows(), 2u);
  const std::size_t nf = m.rows();
  for (std::size_t q = 1; q < nf; ++q)
    EXPECT_NEAR(m.payload[q * m.cols()], m.payload[(nf - q) * m.cols()], 1e-3);
}

TEST(CliErrors, ExitCodes) {
  const auto dir = work_dir("errors");
  // config error: simulate without a scene
  std::ofstream(dir / "noscene.json") << "{}";
  EXPECT_EQ(run_cli("simulate --config " + (dir / "noscene.json").string() + " --out " +
                    (dir / "o1").string()),
            2);
  // config error: malformed json
  std::ofstream(dir / "bad.json") << "{nope";
  EXPECT_EQ(run_cli("pipeline --config " + (dir / "bad.json").string() + " --input x --out " +
                    (dir / "o2").string()),
            2);
  // data error: missing input file
  EXPECT_EQ(run_cli("pipeline --input " + (dir / "missing.csir").string() + " --out " +
                    (dir / "o3").string()),
            3);
  // data error: corrupt input
  std::ofstream(dir / "corrupt.csir") << "not a csir file";
  EXPECT_EQ(run_cli("pipeline --input " + (dir / "corrupt.csir").string() + " --out " +
                    (dir / "o4").string()),
            3);
}

}  // namespace
