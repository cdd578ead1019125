#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sakf/experiment_config.hpp"

namespace sakf::harness {

struct TrialOutcome {
  Method method = Method::LS;
  std::uint64_t bit_errors = 0;
  std::uint64_t bits = 0;
  double channel_mse = 0.0;   // mean |h_hat - h|^2 per CSI vector over the preamble grid
  double wall_time_s = 0.0;   // estimation + detection time for this method
};

struct PacketReport {
  std::vector<TrialOutcome> outcomes;  // in the order of the requested methods
  channel::PathSet paths;
  double tx_power_w = 0.0;
  std::optional<estimation::AoaEstimate> aoa;  // sensing result, when a method needed it
};

// Independent RNG streams of one packet.
enum class Stream : std::uint64_t { Paths = 1, Offsets, Preamble, PreambleNoise, Bits, DataNoise, Rhh };

// Seed of a packet stream; depends only on the master seed and trial index,
// so every method and every SNR point sees the same realization.
std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t trial, Stream stream);

// Genie channel covariance: ensemble of channel vectors drawn with the
// packet's path angles and gain statistics, fresh gains, delays and Dopplers.
CMatrix genie_rhh(const ExperimentConfig& cfg, const channel::PathSet& paths, std::span<const cdouble> tx_gains,
                  double tx_power_w, std::uint64_t seed);

// One packet through every requested method on a shared channel/noise realization.
PacketReport run_packet(const ExperimentConfig& cfg, double snr_db, const std::vector<Method>& methods,
                        std::uint64_t trial, const estimation::AoaEstimate* reused_aoa = nullptr);

TrialOutcome run_trial(const ExperimentConfig& cfg, double snr_db, Method method, std::uint64_t trial);

struct BerRow {
  Method method = Method::LS;
  double snr_db = 0.0;
  std::uint64_t num_bits = 0;
  std::uint64_t num_errors = 0;
  double ber = 0.0;
  double channel_mse = 0.0;
  double wall_time_s = 0.0;

  bool operator==(const BerRow&) const = default;
};

struct BerTable {
  std::vector<BerRow> rows;  // method-major, SNR ascending within a method

  std::vector<BerRow> rows_for(Method m) const;
  bool operator==(const BerTable&) const = default;
};

// Trials at every SNR point; per-trial outcomes for paired comparisons.
struct SweepTrials {
  std::vector<double> snr_db;
  // outcomes[snr index][trial] -> per-method outcomes in cfg.methods order
  std::vector<std::vector<std::vector<TrialOutcome>>> outcomes;
};

SweepTrials run_trials(const ExperimentConfig& cfg);
BerTable aggregate(const ExperimentConfig& cfg, const SweepTrials& trials);
BerTable ber_sweep(const ExperimentConfig& cfg);

// SNR where BER crosses target, by linear interpolation of log10(BER) between
// the bracketing points. Empty if the rows never bracket the target.
std::optional<double> ber_crossing(const std::vector<BerRow>& rows, double target_ber);

struct CrossingResult {
  BerTable table;
  std::vector<std::pair<Method, std::optional<double>>> crossings;
};

// Coarse sweep, then extra points at fine_step inside each method's bracketing interval.
CrossingResult crossing_sweep(ExperimentConfig cfg, double target_ber, double fine_step_db = 0.25);

}  // namespace sakf::harness
