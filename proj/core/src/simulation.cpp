#include "sakf/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "sakf/errors.hpp"
#include "sakf/kalman.hpp"
#include "sakf/rng.hpp"

namespace sakf::harness {

std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t trial, Stream stream) {
  return derive_seed(master_seed, {trial, static_cast<std::uint64_t>(stream)});
}

CMatrix genie_rhh(const ExperimentConfig& cfg, const channel::PathSet& paths, std::span<const cdouble> tx_gains,
                  double tx_power_w, std::uint64_t seed) {
  if (paths.size() != tx_gains.size()) throw DimensionError("path and transmit-gain counts differ");
  const auto bs = cfg.bs_array();
  const auto& wave = cfg.waveform;
  std::vector<CVector> steering;
  for (const auto& path : paths) steering.push_back(array::steering_vector(bs, path.aoa));

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> subcarrier(0, wave.num_subcarriers - 1);
  std::uniform_int_distribution<int> symbol(0, wave.num_symbols - 1);
  const double amp = std::sqrt(tx_power_w);
  const double ts = wave.symbol_duration();

  CMatrix samples = CMatrix::Zero(bs.size(), cfg.rhh_ensemble_size);
  for (int r = 0; r < cfg.rhh_ensemble_size; ++r) {
    for (std::size_t l = 0; l < paths.size(); ++l) {
      const cdouble gain = (l == 0) ? cdouble(1.0, 0.0) : ComplexNormal(paths[l].gain_variance)(rng);
      const double delay = unit(rng) * cfg.paths.max_delay_s;
      const double doppler = (2.0 * unit(rng) - 1.0) * cfg.paths.max_doppler_hz;
      const int n = subcarrier(rng);
      const int m = symbol(rng);
      const cdouble phase = std::polar(1.0, 2.0 * kPi * m * ts * doppler - 2.0 * kPi * n * wave.subcarrier_spacing_hz * delay);
      samples.col(r) += (phase * gain * amp * tx_gains[l]) * steering[l];
    }
  }
  return estimation::estimate_rhh(samples);
}

namespace {

using Clock = std::chrono::steady_clock;

bool needs_sensing(const std::vector<Method>& methods) {
  return std::any_of(methods.begin(), methods.end(), [](Method m) { return m != Method::LS; });
}

channel::OffsetProcess draw_offsets(const ExperimentConfig& cfg, std::uint64_t seed) {
  const int ms = cfg.waveform.num_symbols;
  if (cfg.max_freq_offset_hz == 0.0 && cfg.max_timing_offset_s == 0.0) return channel::OffsetProcess::zero(ms);
  Rng rng(seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  const double df = sym(rng) * cfg.max_freq_offset_hz;
  const double dt = sym(rng) * cfg.max_timing_offset_s;
  return channel::OffsetProcess::constant(ms, df, dt);
}

// Channel seen by ULD symbol m is the ULP channel at symbol m mod Ms.
channel::CsiGrid data_channel(const channel::CsiGrid& truth, int data_symbols) {
  if (data_symbols == truth.num_symbols()) return truth;
  channel::CsiGrid out(truth.num_subcarriers(), data_symbols, truth.num_elements());
  for (int m = 0; m < data_symbols; ++m) {
    for (int n = 0; n < truth.num_subcarriers(); ++n) out.at(n, m) = truth.at(n, m % truth.num_symbols());
  }
  return out;
}

}  // namespace

PacketReport run_packet(const ExperimentConfig& cfg, double snr_db, const std::vector<Method>& methods,
                        std::uint64_t trial, const estimation::AoaEstimate* reused_aoa) {
  if (methods.empty()) throw ConfigError("method list is empty");
  const auto bs = cfg.bs_array();
  const auto ue = cfg.ue_array();
  channel::SimWaveformConfig wave = cfg.waveform;
  const double noise_var = wave.noise_var_w;
  const std::uint64_t seed = cfg.master_seed;

  PacketReport report;
  report.paths = channel::sample_paths(wave, cfg.paths, stream_seed(seed, trial, Stream::Paths));
  if (cfg.aoa_reuse && trial != 0) {
    // Fixed geometry across packets so a sensed AoA stays valid.
    const auto first = channel::sample_paths(wave, cfg.paths, stream_seed(seed, 0, Stream::Paths));
    for (std::size_t l = 0; l < report.paths.size(); ++l) {
      report.paths[l].aoa = first[l].aoa;
      report.paths[l].aod = first[l].aod;
    }
  }
  const auto chi = channel::tx_bf_gains(report.paths, ue);
  report.tx_power_w = channel::power_for_snr(std::pow(10.0, snr_db / 10.0), report.paths, chi, noise_var);
  wave.tx_power_w = report.tx_power_w;

  const auto offsets = draw_offsets(cfg, stream_seed(seed, trial, Stream::Offsets));
  const auto truth = channel::true_csi(report.paths, offsets, wave, bs, chi);
  const auto preamble = modem::preamble_grid(wave.num_subcarriers, wave.num_symbols,
                                             stream_seed(seed, trial, Stream::Preamble));
  const auto received =
      channel::received_preamble(truth, preamble.values, noise_var, stream_seed(seed, trial, Stream::PreambleNoise));
  const auto ls = estimation::ls_estimate_grid(received, preamble.values);

  const int bps = modem::bits_per_symbol(cfg.modulation);
  const auto data_positions = static_cast<std::size_t>(wave.num_subcarriers) * static_cast<std::size_t>(cfg.data_symbols);
  const auto bits = modem::random_bits(data_positions * static_cast<std::size_t>(bps),
                                       stream_seed(seed, trial, Stream::Bits));
  const auto data = modem::data_grid(bits, wave.num_subcarriers, cfg.data_symbols, cfg.modulation);
  const auto rx_data =
      channel::apply_channel(data_channel(truth, cfg.data_symbols), data.values, noise_var,
                             stream_seed(seed, trial, Stream::DataNoise));

  if (needs_sensing(methods)) {
    report.aoa = reused_aoa ? *reused_aoa : estimation::sense_paths(ls.matrix(), bs, cfg.music);
  }

  std::vector<cdouble> detected(data_positions);
  const double positions = static_cast<double>(truth.num_positions());
  for (Method method : methods) {
    // Genie covariance synthesis is not part of the estimator's cost.
    CMatrix rhh;
    if (method == Method::MMSE) rhh = genie_rhh(cfg, report.paths, chi, report.tx_power_w, stream_seed(seed, trial, Stream::Rhh));

    const auto start = Clock::now();
    channel::CsiGrid estimate_storage;
    const channel::CsiGrid* estimate = &ls;
    if (method == Method::MMSE) {
      const estimation::MmseFilter filter(rhh, report.aoa->est_noise_var);
      estimate_storage = channel::CsiGrid(wave.num_subcarriers, wave.num_symbols, filter.apply_all(ls.matrix()));
      estimate = &estimate_storage;
    } else if (method == Method::SAKF) {
      estimate_storage = kalman::sakf_estimate_grid(ls, *report.aoa, bs);
      estimate = &estimate_storage;
    }

    for (int m = 0; m < cfg.data_symbols; ++m) {
      for (int n = 0; n < wave.num_subcarriers; ++n) {
        detected[static_cast<std::size_t>(m) * wave.num_subcarriers + n] =
            modem::zf_detect(rx_data.at(n, m), estimate->at(n, m % wave.num_symbols));
      }
    }
    const auto decided = modem::qam_demodulate(detected, cfg.modulation);
    const auto count = modem::bit_error_rate(bits, decided);
    const double mse = (estimate->matrix() - truth.matrix()).squaredNorm() / positions;
    const std::chrono::duration<double> elapsed = Clock::now() - start;
    report.outcomes.push_back({method, count.errors, count.total, mse, elapsed.count()});
  }
  return report;
}

TrialOutcome run_trial(const ExperimentConfig& cfg, double snr_db, Method method, std::uint64_t trial) {
  return run_packet(cfg, snr_db, {method}, trial).outcomes.front();
}

std::vector<BerRow> BerTable::rows_for(Method m) const {
  std::vector<BerRow> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out), [m](const BerRow& r) { return r.method == m; });
  std::sort(out.begin(), out.end(), [](const BerRow& a, const BerRow& b) { return a.snr_db < b.snr_db; });
  return out;
}

SweepTrials run_trials(const ExperimentConfig& cfg) {
  cfg.validate();
  SweepTrials result;
  result.snr_db = cfg.snr_points_db;
  std::sort(result.snr_db.begin(), result.snr_db.end());
  result.snr_db.erase(std::unique(result.snr_db.begin(), result.snr_db.end()), result.snr_db.end());

  const std::size_t points = result.snr_db.size();
  const auto trials = static_cast<std::size_t>(cfg.trials_per_point);
  result.outcomes.assign(points, std::vector<std::vector<TrialOutcome>>(trials));
  std::vector<std::optional<estimation::AoaEstimate>> reused(points);

  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto run_jobs = [&](const std::vector<std::pair<std::size_t, std::size_t>>& jobs) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t j = next++; j < jobs.size(); j = next++) {
        const auto [s, t] = jobs[j];
        try {
          const estimation::AoaEstimate* aoa = reused[s] ? &*reused[s] : nullptr;
          auto report = run_packet(cfg, result.snr_db[s], cfg.methods, t, aoa);
          if (cfg.aoa_reuse && t == 0) reused[s] = report.aoa;
          result.outcomes[s][t] = std::move(report.outcomes);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    };
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), jobs.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < count; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  };

  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  const std::size_t first_trial = cfg.aoa_reuse ? 1 : 0;
  if (cfg.aoa_reuse) {
    for (std::size_t s = 0; s < points; ++s) jobs.emplace_back(s, 0);
    run_jobs(jobs);
    jobs.clear();
  }
  for (std::size_t s = 0; s < points; ++s) {
    for (std::size_t t = first_trial; t < trials; ++t) jobs.emplace_back(s, t);
  }
  run_jobs(jobs);
  return result;
}

BerTable aggregate(const ExperimentConfig& cfg, const SweepTrials& trials) {
  BerTable table;
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    for (std::size_t s = 0; s < trials.snr_db.size(); ++s) {
      BerRow row;
      row.method = cfg.methods[mi];
      row.snr_db = trials.snr_db[s];
      double mse_sum = 0.0;
      double time_sum = 0.0;
      for (const auto& per_trial : trials.outcomes[s]) {
        const TrialOutcome& o = per_trial.at(mi);
        row.num_bits += o.bits;
        row.num_errors += o.bit_errors;
        mse_sum += o.channel_mse;
        time_sum += o.wall_time_s;
      }
      row.ber = row.num_bits ? static_cast<double>(row.num_errors) / static_cast<double>(row.num_bits) : 0.0;
      row.channel_mse = mse_sum / static_cast<double>(trials.outcomes[s].size());
      row.wall_time_s = cfg.record_timing ? time_sum : 0.0;
      table.rows.push_back(row);
    }
  }
  return table;
}

BerTable ber_sweep(const ExperimentConfig& cfg) { return aggregate(cfg, run_trials(cfg)); }

std::optional<double> ber_crossing(const std::vector<BerRow>& rows_in, double target_ber) {
  auto rows = rows_in;
  std::sort(rows.begin(), rows.end(), [](const BerRow& a, const BerRow& b) { return a.snr_db < b.snr_db; });
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double hi = rows[i].ber;
    const double lo = rows[i + 1].ber;
    if (hi == target_ber) return rows[i].snr_db;
    if (hi > target_ber && lo <= target_ber) {
      double frac;
      if (lo > 0.0) {
        frac = (std::log10(hi) - std::log10(target_ber)) / (std::log10(hi) - std::log10(lo));
      } else {
        frac = (hi - target_ber) / (hi - lo);
      }
      return rows[i].snr_db + frac * (rows[i + 1].snr_db - rows[i].snr_db);
    }
  }
  if (!rows.empty() && rows.back().ber == target_ber) return rows.back().snr_db;
  return std::nullopt;
}

namespace {

std::optional<std::pair<double, double>> bracket(const std::vector<BerRow>& rows, double target) {
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    if (rows[i].ber >= target && rows[i + 1].ber <= target) return std::make_pair(rows[i].snr_db, rows[i + 1].snr_db);
  }
  return std::nullopt;
}

}  // namespace

CrossingResult crossing_sweep(ExperimentConfig cfg, double target_ber, double fine_step_db) {
  if (!(fine_step_db > 0.0)) throw ConfigError("refinement step must be positive");
  CrossingResult result;
  result.table = ber_sweep(cfg);

  // Extra SNR points per method, grouped so each point runs only the methods that need it.
  std::map<double, std::vector<Method>> extra;
  for (Method m : cfg.methods) {
    const auto rows = result.table.rows_for(m);
    const auto br = bracket(rows, target_ber);
    if (!br) continue;
    for (double s = br->first + fine_step_db; s < br->second - 1e-9; s += fine_step_db) {
      const bool present = std::any_of(rows.begin(), rows.end(), [&](const BerRow& r) { return std::abs(r.snr_db - s) < 1e-9; });
      if (!present) extra[std::round(s * 1e6) / 1e6].push_back(m);
    }
  }
  const auto methods_all = cfg.methods;
  for (const auto& [snr, methods] : extra) {
    cfg.snr_points_db = {snr};
    cfg.methods = methods;
    const auto part = ber_sweep(cfg);
    result.table.rows.insert(result.table.rows.end(), part.rows.begin(), part.rows.end());
  }
  std::stable_sort(result.table.rows.begin(), result.table.rows.end(), [&](const BerRow& a, const BerRow& b) {
    const auto ia = std::find(methods_all.begin(), methods_all.end(), a.method) - methods_all.begin();
    const auto ib = std::find(methods_all.begin(), methods_all.end(), b.method) - methods_all.begin();
    if (ia != ib) return ia < ib;
    return a.snr_db < b.snr_db;
  });
  for (Method m : methods_all) result.crossings.emplace_back(m, ber_crossing(result.table.rows_for(m), target_ber));
  return result;
}

}  // namespace sakf::harness
