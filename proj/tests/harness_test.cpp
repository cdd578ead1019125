#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "sakf/complexity.hpp"
#include "sakf/errors.hpp"
#include "sakf/experiment_config.hpp"
#include "sakf/results_io.hpp"
#include "sakf/simulation.hpp"
#include "test_support.hpp"

using namespace sakf;
using namespace sakf::harness;

namespace {

ExperimentConfig small_config() {
  auto cfg = ExperimentConfig::defaults();
  cfg.waveform.num_subcarriers = 32;
  cfg.waveform.num_symbols = 8;
  cfg.paths = channel::PathSamplingBounds::defaults_for(cfg.waveform);
  cfg.data_symbols = 8;
  cfg.rhh_ensemble_size = 200;
  cfg.music.step = deg_to_rad(1.0);
  cfg.snr_points_db = {0.0, 6.0};
  cfg.trials_per_point = 4;
  return cfg;
}

std::string csv_of(const BerTable& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

}  // namespace

TEST(ExperimentConfig, DefaultsMirrorSimulationSetup) {
  const auto cfg = ExperimentConfig::defaults();
  EXPECT_EQ(cfg.waveform.carrier_hz, 28e9);
  EXPECT_EQ(cfg.waveform.subcarrier_spacing_hz, 480e3);
  EXPECT_EQ(cfg.waveform.num_subcarriers, 256);
  EXPECT_EQ(cfg.waveform.num_symbols, 64);
  EXPECT_EQ(cfg.waveform.noise_var_w, 4.9177e-12);
  EXPECT_EQ(cfg.waveform.num_paths, 2);
  EXPECT_EQ(cfg.bs_rows, 8);
  EXPECT_EQ(cfg.bs_cols, 8);
  EXPECT_EQ(cfg.ue_rows, 1);
  EXPECT_EQ(cfg.ue_cols, 1);
  EXPECT_EQ(cfg.modulation, modem::QamOrder::Qam4);
  EXPECT_EQ(cfg.trials_per_point, 200);
  const auto bs = cfg.bs_array();
  EXPECT_DOUBLE_EQ(bs.spacing(), bs.wavelength() / 2.0);
  EXPECT_NEAR(cfg.waveform.num_subcarriers * cfg.waveform.subcarrier_spacing_hz, 122.88e6, 1.0);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(ExperimentConfig, Validation) {
  auto cfg = ExperimentConfig::defaults();
  cfg.trials_per_point = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ExperimentConfig::defaults();
  cfg.snr_points_db.clear();
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ExperimentConfig::defaults();
  cfg.methods.clear();
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ExperimentConfig::defaults();
  cfg.waveform.num_paths = 64;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ExperimentConfig, Methods) {
  EXPECT_EQ(parse_method("ls"), Method::LS);
  EXPECT_EQ(parse_method("MMSE"), Method::MMSE);
  EXPECT_EQ(parse_method("sakf"), Method::SAKF);
  EXPECT_THROW(parse_method("zf"), ConfigError);
  EXPECT_EQ(parse_methods("sakf, ls,sakf"), (std::vector<Method>{Method::SAKF, Method::LS}));
  EXPECT_THROW(parse_methods(""), ConfigError);
  EXPECT_EQ(method_name(Method::MMSE), "mmse");
}

TEST(ExperimentConfig, ParseKeyValueText) {
  std::istringstream in(R"(# sweep settings
modulation = 16
snr_db = -2, 0, 2.5
trials = 17   # trailing comment
methods = ls,sakf
seed = 99
num_subcarriers = 64
nlos_gain_db = -6
aoa_reuse = true
bs_rows = 4

music_step_deg = 0.25
)");
  const auto cfg = parse_config(in);
  EXPECT_EQ(cfg.modulation, modem::QamOrder::Qam16);
  EXPECT_EQ(cfg.snr_points_db, (std::vector<double>{-2.0, 0.0, 2.5}));
  EXPECT_EQ(cfg.trials_per_point, 17);
  EXPECT_EQ(cfg.methods, (std::vector<Method>{Method::LS, Method::SAKF}));
  EXPECT_EQ(cfg.master_seed, 99u);
  EXPECT_EQ(cfg.waveform.num_subcarriers, 64);
  EXPECT_NEAR(cfg.paths.nlos_gain_variance, std::pow(10.0, -0.6), 1e-12);
  EXPECT_TRUE(cfg.aoa_reuse);
  EXPECT_EQ(cfg.bs_rows, 4);
  EXPECT_NEAR(cfg.music.step, deg_to_rad(0.25), 1e-15);
}

TEST(ExperimentConfig, ParseErrors) {
  std::istringstream unknown("colour = blue\n");
  EXPECT_THROW(parse_config(unknown), ConfigError);
  std::istringstream no_eq("trials 5\n");
  EXPECT_THROW(parse_config(no_eq), ConfigError);
  std::istringstream bad_int("trials = 5x\n");
  EXPECT_THROW(parse_config(bad_int), ConfigError);
  std::istringstream bad_mod("modulation = 8\n");
  EXPECT_THROW(parse_config(bad_mod), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/sakf.cfg"), ConfigError);
}

TEST(ExperimentConfig, SnrRange) {
  EXPECT_EQ(snr_range(-4, 10, 1).size(), 15u);
  const auto r = snr_range(0.0, 1.0, 0.25);
  ASSERT_EQ(r.size(), 5u);
  EXPECT_DOUBLE_EQ(r.back(), 1.0);
  EXPECT_THROW(snr_range(0, 1, 0), ConfigError);
  EXPECT_THROW(snr_range(2, 1, 1), ConfigError);
}

TEST(RunTrial, DeterministicAndPaired) {
  const auto cfg = small_config();
  const auto a = run_packet(cfg, 3.0, cfg.methods, 5);
  const auto b = run_packet(cfg, 3.0, cfg.methods, 5);
  ASSERT_EQ(a.outcomes.size(), 3u);
  for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
    EXPECT_EQ(a.outcomes[i].bit_errors, b.outcomes[i].bit_errors);
    EXPECT_EQ(a.outcomes[i].channel_mse, b.outcomes[i].channel_mse);
  }
  // Single-method runs see the same realization as the joint run.
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    const auto single = run_trial(cfg, 3.0, cfg.methods[i], 5);
    EXPECT_EQ(single.bit_errors, a.outcomes[i].bit_errors);
    EXPECT_EQ(single.channel_mse, a.outcomes[i].channel_mse);
  }
  // Geometry does not depend on the SNR point.
  const auto c = run_packet(cfg, -3.0, {Method::LS}, 5);
  ASSERT_EQ(c.paths.size(), a.paths.size());
  for (std::size_t l = 0; l < a.paths.size(); ++l) {
    EXPECT_EQ(c.paths[l].gain, a.paths[l].gain);
    EXPECT_EQ(c.paths[l].aoa.azimuth, a.paths[l].aoa.azimuth);
  }
  EXPECT_NEAR(c.tx_power_w / a.tx_power_w, std::pow(10.0, -0.6), 1e-12);
}

TEST(RunTrial, HighSnrIsErrorFree) {
  const auto cfg = small_config();
  std::uint64_t bits = 0;
  for (std::uint64_t t = 0; bits < 10000; ++t) {
    const auto rep = run_packet(cfg, 60.0, cfg.methods, t);
    for (const auto& o : rep.outcomes) EXPECT_EQ(o.bit_errors, 0u) << method_name(o.method) << " trial " << t;
    bits += rep.outcomes.front().bits;
  }
}

TEST(RunTrial, LsMseMatchesNoiseLevel) {
  auto cfg = small_config();
  cfg.data_symbols = 1;
  double sum = 0.0;
  constexpr int kTrials = 1000;
  for (int t = 0; t < kTrials; ++t) sum += run_trial(cfg, 4.0, Method::LS, t).channel_mse;
  const double expected = 64 * cfg.waveform.noise_var_w;
  EXPECT_NEAR(sum / kTrials, expected, 0.05 * expected);
}

TEST(RunTrial, MmseNeverWorseThanLsPerTrial) {
  const auto cfg = small_config();
  for (double snr : {-4.0, 0.0, 10.0, 20.0}) {
    for (std::uint64_t t = 0; t < 6; ++t) {
      const auto rep = run_packet(cfg, snr, {Method::LS, Method::MMSE}, t);
      EXPECT_LE(rep.outcomes[1].channel_mse, rep.outcomes[0].channel_mse) << "snr " << snr << " trial " << t;
    }
  }
}

TEST(RunTrial, AoaReuseKeepsGeometry) {
  auto cfg = small_config();
  cfg.aoa_reuse = true;
  const auto first = run_packet(cfg, 5.0, {Method::SAKF}, 0);
  ASSERT_TRUE(first.aoa.has_value());
  const auto later = run_packet(cfg, 5.0, {Method::SAKF}, 3, &*first.aoa);
  ASSERT_TRUE(later.aoa.has_value());
  EXPECT_EQ(later.aoa->angles.size(), first.aoa->angles.size());
  for (std::size_t l = 0; l < first.paths.size(); ++l) {
    EXPECT_EQ(later.paths[l].aoa.azimuth, first.paths[l].aoa.azimuth);
    EXPECT_EQ(later.paths[l].aoa.elevation, first.paths[l].aoa.elevation);
  }
  EXPECT_NE(later.paths[0].delay, first.paths[0].delay);
}

TEST(GenieRhh, HermitianWithExpectedPower) {
  auto cfg = small_config();
  cfg.rhh_ensemble_size = 4000;
  const auto paths = channel::sample_paths(cfg.waveform, cfg.paths, 8);
  const std::vector<cdouble> chi(paths.size(), 1.0);
  const double pt = 2.0;
  const CMatrix r = genie_rhh(cfg, paths, chi, pt, 3);
  EXPECT_LT(test::max_abs_diff(r, r.adjoint()), 1e-12);
  EXPECT_GE(estimation::hermitian_eigen(r).eigenvalues.minCoeff(), -1e-9);
  const double expected = 64 * pt * (1.0 + cfg.paths.nlos_gain_variance);
  EXPECT_NEAR(r.trace().real(), expected, 0.1 * expected);
}

TEST(BerSweep, TableShapeAndAccounting) {
  auto cfg = small_config();
  cfg.methods = {Method::LS};
  const auto t = ber_sweep(cfg);
  ASSERT_EQ(t.rows.size(), 2u);
  for (const auto& r : t.rows) {
    EXPECT_EQ(r.method, Method::LS);
    EXPECT_EQ(r.num_bits, 4u * 32 * 8 * 2);
    EXPECT_LE(r.num_errors, r.num_bits);
    EXPECT_DOUBLE_EQ(r.ber, static_cast<double>(r.num_errors) / r.num_bits);
    EXPECT_EQ(r.wall_time_s, 0.0);
  }
  EXPECT_LT(t.rows[0].snr_db, t.rows[1].snr_db);

  cfg.trials_per_point = 8;
  const auto doubled = ber_sweep(cfg);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(doubled.rows[i].num_bits, 2 * t.rows[i].num_bits);
}

TEST(BerSweep, ReproducibleAcrossWorkerCounts) {
  auto cfg = small_config();
  cfg.trials_per_point = 3;
  const auto a = csv_of(ber_sweep(cfg));
  const auto b = csv_of(ber_sweep(cfg));
  cfg.workers = 3;
  const auto c = csv_of(ber_sweep(cfg));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);

  cfg.aoa_reuse = true;
  cfg.workers = 1;
  const auto d = csv_of(ber_sweep(cfg));
  cfg.workers = 4;
  EXPECT_EQ(d, csv_of(ber_sweep(cfg)));
}

TEST(BerSweep, TimingOnlyWhenRequested) {
  auto cfg = small_config();
  cfg.trials_per_point = 1;
  cfg.snr_points_db = {0.0};
  cfg.record_timing = true;
  for (const auto& r : ber_sweep(cfg).rows) EXPECT_GT(r.wall_time_s, 0.0);
}

TEST(BerSweep, BerFallsWithSnr) {
  auto cfg = small_config();
  cfg.waveform.num_subcarriers = 64;
  cfg.data_symbols = 16;
  cfg.trials_per_point = 50;  // 50 * 64 * 16 * 2 > 1e5 bits
  cfg.snr_points_db = {-14.0, -8.0, -2.0};
  const auto t = ber_sweep(cfg);
  for (Method m : cfg.methods) {
    const auto rows = t.rows_for(m);
    ASSERT_EQ(rows.size(), 3u);
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      EXPECT_GE(rows[i].num_bits, 100000u);
      EXPECT_LE(rows[i + 1].ber, rows[i].ber) << method_name(m) << " at " << rows[i].snr_db;
    }
  }
}

TEST(BerCrossing, LogInterpolation) {
  std::vector<BerRow> rows = {{Method::LS, 2.0, 100, 0, 1e-3, 0, 0}, {Method::LS, 0.0, 100, 0, 1e-1, 0, 0}};
  EXPECT_NEAR(*ber_crossing(rows, 1e-2), 1.0, 1e-12);
  EXPECT_NEAR(*ber_crossing(rows, 1e-1), 0.0, 1e-12);
  EXPECT_FALSE(ber_crossing(rows, 1e-4).has_value());
  rows[0].ber = 0.0;
  EXPECT_NEAR(*ber_crossing(rows, 5e-2), 1.0, 1e-12);
}

TEST(ResultsIo, CsvHeaderAndRoundTrip) {
  BerTable t;
  t.rows = {{Method::LS, -4.0, 1000, 17, 0.017, 3.1470016517651974e-10, 0.0},
            {Method::SAKF, 0.25, 123456789, 1, 1.0 / 123456789, 1e-300, 12.5}};
  const auto text = csv_of(t);
  EXPECT_EQ(text.substr(0, text.find('\n')), std::string(kCsvHeader));
  EXPECT_EQ(std::string(kCsvHeader), "method,snr_db,num_bits,num_errors,ber,channel_mse,wall_time_s");
  std::istringstream in(text);
  EXPECT_EQ(parse_csv(in), t);

  std::istringstream bad("method,snr\nls,1\n");
  EXPECT_THROW(parse_csv(bad), std::runtime_error);
}

TEST(ResultsIo, EmitCsvAndPlotData) {
  const auto dir = std::filesystem::temp_directory_path() / "sakf_io_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  BerTable t;
  t.rows = {{Method::LS, 0.0, 10, 1, 0.1, 1.0, 0.0}, {Method::LS, 1.0, 10, 0, 0.0, 1.0, 0.0},
            {Method::MMSE, 0.0, 10, 0, 0.0, 0.5, 0.0}};
  emit_results(t, dir / "out.csv", OutputFormat::Csv);
  std::ifstream csv(dir / "out.csv");
  EXPECT_EQ(parse_csv(csv), t);

  emit_results(t, dir / "plots", OutputFormat::PlotData);
  EXPECT_TRUE(std::filesystem::exists(dir / "plots" / "ber_ls.dat"));
  EXPECT_TRUE(std::filesystem::exists(dir / "plots" / "ber_mmse.dat"));
  EXPECT_FALSE(std::filesystem::exists(dir / "plots" / "ber_sakf.dat"));
  std::ifstream ls(dir / "plots" / "ber_ls.dat");
  std::string content((std::istreambuf_iterator<char>(ls)), std::istreambuf_iterator<char>());
  EXPECT_NE(content.find("0 0.1"), std::string::npos);

  EXPECT_THROW(emit_results(BerTable{}, dir / "empty.csv", OutputFormat::Csv), std::runtime_error);
  EXPECT_THROW(emit_results(t, "/nonexistent-dir/x/out.csv", OutputFormat::Csv), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST(ResultsIo, OutputFormatNames) {
  EXPECT_EQ(parse_output_format("csv"), OutputFormat::Csv);
  EXPECT_EQ(parse_output_format("plotdata"), OutputFormat::PlotData);
  EXPECT_EQ(parse_output_format("plot-data"), OutputFormat::PlotData);
  EXPECT_THROW(parse_output_format("json"), ConfigError);
}

TEST(Complexity, Helpers) {
  const std::vector<double> x = {16, 64, 256, 1024};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * v * v);
  EXPECT_NEAR(loglog_slope(x, y), 2.0, 1e-12);
  EXPECT_EQ(array_shape_for(16), std::make_pair(4, 4));
  EXPECT_EQ(array_shape_for(64), std::make_pair(8, 8));
  EXPECT_EQ(array_shape_for(1024), std::make_pair(32, 32));
  EXPECT_EQ(array_shape_for(12), std::make_pair(3, 4));
  const std::vector<int> unsorted = {64, 16};
  EXPECT_THROW(complexity_bench(unsorted, 1), ConfigError);
}

TEST(Complexity, ReportsEveryMethodAndSize) {
  const std::vector<int> sizes = {4, 16};
  const auto report = complexity_bench(sizes, 3);
  EXPECT_EQ(report.rows.size(), 6u);
  for (const auto& r : report.rows) EXPECT_GT(r.median_seconds, 0.0);
  EXPECT_EQ(report.slopes.size(), 3u);
}
