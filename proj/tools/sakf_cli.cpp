// sakf: BER/MSE sweeps, complexity timing and single-packet traces.
//
//   sakf sweep --snr-min -10 --snr-max 0 --methods ls,mmse,sakf --out ber.csv
//   sakf bench --sizes 16,64,256,1024
//   sakf demo --snr 5
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <chrono>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sakf/complexity.hpp"
#include "sakf/errors.hpp"
#include "sakf/experiment_config.hpp"
#include "sakf/results_io.hpp"
#include "sakf/simulation.hpp"

namespace {

using namespace sakf;
using namespace sakf::harness;

struct SweepOptions {
  std::string config_path;
  std::optional<double> snr_min;
  std::optional<double> snr_max;
  double snr_step = 1.0;
  std::optional<int> modulation;
  std::string methods;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out = "ber.csv";
  std::string format = "csv";
  bool timing = false;
  std::optional<double> refine_target;
};

ExperimentConfig build_config(const SweepOptions& o) {
  ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig::defaults() : load_config(o.config_path);
  if (o.snr_min || o.snr_max) {
    const double lo = o.snr_min.value_or(cfg.snr_points_db.front());
    const double hi = o.snr_max.value_or(cfg.snr_points_db.back());
    cfg.snr_points_db = snr_range(lo, hi, o.snr_step);
  }
  if (o.modulation) cfg.modulation = modem::qam_order_from_int(*o.modulation);
  if (!o.methods.empty()) cfg.methods = parse_methods(o.methods);
  if (o.trials) cfg.trials_per_point = *o.trials;
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (o.timing) cfg.record_timing = true;
  cfg.validate();
  return cfg;
}

int run_sweep(const SweepOptions& o) {
  const ExperimentConfig cfg = build_config(o);
  const OutputFormat format = parse_output_format(o.format);
  BerTable table;
  if (o.refine_target) {
    auto result = crossing_sweep(cfg, *o.refine_target);
    table = std::move(result.table);
    for (const auto& [m, snr] : result.crossings) {
      std::cerr << method_name(m) << ": BER " << *o.refine_target << " at ";
      if (snr) std::cerr << std::fixed << std::setprecision(3) << *snr << " dB\n";
      else std::cerr << "(not bracketed)\n";
    }
  } else {
    table = ber_sweep(cfg);
  }
  emit_results(table, o.out, format);
  std::cerr << "wrote " << table.rows.size() << " rows to " << o.out << '\n';
  return 0;
}

int run_bench(const std::vector<int>& sizes, int repetitions) {
  const auto report = complexity_bench(sizes, repetitions);
  std::cout << "method,n,median_seconds\n";
  for (const auto& r : report.rows) {
    std::cout << method_name(r.method) << ',' << r.num_elements << ',' << std::scientific << std::setprecision(4)
              << r.median_seconds << '\n';
  }
  std::cout << std::fixed << std::setprecision(3);
  for (const auto& [m, s] : report.slopes) std::cout << "# slope " << method_name(m) << ' ' << s << '\n';
  return 0;
}

int run_demo(const SweepOptions& o, double snr_db, std::uint64_t trial) {
  const ExperimentConfig cfg = build_config(o);
  const auto report = run_packet(cfg, snr_db, cfg.methods, trial);
  std::cout << std::setprecision(4);
  std::cout << "SNR " << snr_db << " dB, trial " << trial << ", Pt = " << report.tx_power_w << " W\n";
  for (std::size_t l = 0; l < report.paths.size(); ++l) {
    const auto& p = report.paths[l];
    std::cout << "  path " << l << ": |b| = " << std::abs(p.gain) << ", AoA (az, el) = (" << rad_to_deg(p.aoa.azimuth)
              << ", " << rad_to_deg(p.aoa.elevation) << ") deg, delay = " << p.delay << " s, doppler = " << p.doppler
              << " Hz\n";
  }
  if (report.aoa) {
    std::cout << "sensing: L_hat = " << report.aoa->est_num_paths << (report.aoa->degraded ? " (degraded)" : "")
              << ", sigma2_hat = " << report.aoa->est_noise_var << " W (configured " << cfg.waveform.noise_var_w
              << ")\n";
    for (const auto& a : report.aoa->angles) {
      std::cout << "  estimated AoA (az, el) = (" << rad_to_deg(a.azimuth) << ", " << rad_to_deg(a.elevation)
                << ") deg\n";
    }
  }
  const double ls_noise = cfg.bs_rows * cfg.bs_cols * cfg.waveform.noise_var_w;
  for (const auto& out : report.outcomes) {
    std::cout << method_name(out.method) << ": BER = " << static_cast<double>(out.bit_errors) / out.bits << " ("
              << out.bit_errors << "/" << out.bits << "), channel MSE = " << out.channel_mse << " ("
              << 10.0 * std::log10(out.channel_mse / ls_noise) << " dB vs N*sigma2)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensing-aided Kalman-filter CSI estimation: link-level simulator"};
  app.require_subcommand(1);

  SweepOptions sweep_opts;
  auto add_common = [](CLI::App* cmd, SweepOptions& o) {
    cmd->add_option("--config", o.config_path, "key = value configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--mod", o.modulation, "QAM order (4 or 16)");
    cmd->add_option("--methods", o.methods, "comma-separated subset of ls,mmse,sakf");
    cmd->add_option("--seed", o.seed, "master RNG seed");
  };

  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo BER/MSE sweep over SNR");
  add_common(sweep, sweep_opts);
  sweep->add_option("--snr-min", sweep_opts.snr_min, "lowest SNR point (dB)");
  sweep->add_option("--snr-max", sweep_opts.snr_max, "highest SNR point (dB)");
  sweep->add_option("--snr-step", sweep_opts.snr_step, "SNR step (dB)");
  sweep->add_option("--trials", sweep_opts.trials, "packets per SNR point");
  sweep->add_option("--workers", sweep_opts.workers, "worker threads (results do not depend on it)");
  sweep->add_option("--out", sweep_opts.out, "output CSV file, or directory for plotdata");
  sweep->add_option("--format", sweep_opts.format, "csv or plotdata");
  sweep->add_flag("--timing", sweep_opts.timing, "record wall time per row (makes output run-dependent)");
  sweep->add_option("--refine", sweep_opts.refine_target,
                    "add 0.25 dB points around each method's crossing of this BER and report it");

  auto* bench = app.add_subcommand("bench", "estimation cost versus array size");
  std::vector<int> sizes = {16, 64, 256, 1024};
  int repetitions = 5;
  bench->add_option("--sizes", sizes, "element counts N = P*Q, ascending")->delimiter(',');
  bench->add_option("--repetitions", repetitions, "timing samples per point");

  SweepOptions demo_opts;
  auto* demo = app.add_subcommand("demo", "single-packet trace");
  add_common(demo, demo_opts);
  double demo_snr = 5.0;
  std::uint64_t demo_trial = 0;
  demo->add_option("--snr", demo_snr, "SNR (dB)");
  demo->add_option("--trial", demo_trial, "trial index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*sweep) return run_sweep(sweep_opts);
    if (*bench) return run_bench(sizes, repetitions);
    if (*demo) return run_demo(demo_opts, demo_snr, demo_trial);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
