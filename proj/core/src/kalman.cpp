#include "sakf/kalman.hpp"

#include <cmath>

#include "sakf/errors.hpp"

namespace sakf::kalman {

namespace {

constexpr double kUnitModulusTol = 1e-9;

void check_inputs(cdouble transfer, double noise_var) {
  if (std::abs(std::abs(transfer) - 1.0) > kUnitModulusTol)
    throw ContractViolation("transfer factor must have unit modulus");
  if (!(noise_var >= 0.0)) throw DomainError("observation noise variance must be non-negative");
}

// K = p^- (p^- + s^2)^{-1}; the 0/0 case (no prior uncertainty, no noise) trusts the observation.
double fusion_gain(double prior_var, double noise_var) {
  const double denom = prior_var + noise_var;
  return denom > 0.0 ? prior_var / denom : 1.0;
}

template <class Seq>
double initial_variance(const Seq& obs, Eigen::Index length, cdouble transfer) {
  const cdouble back = std::conj(transfer);
  cdouble rotation = 1.0;
  double sum = 0.0;
  for (Eigen::Index p = 0; p < length; ++p) {
    sum += std::norm(obs(p) * rotation - obs(0));
    rotation *= back;
  }
  return sum / static_cast<double>(length);
}

// Runs both passes of the scalar filter. obs and out must not alias.
template <class In, class Out>
void run_filter(const In& obs, Out&& out, Eigen::Index length, cdouble transfer, double noise_var,
                KfTrace* trace) {
  double pw = initial_variance(obs, length, transfer);
  out(0) = obs(0);
  if (trace) trace->initial_var = pw;

  for (Eigen::Index p = 1; p < length; ++p) {
    const cdouble prior = transfer * out(p - 1);
    const double prior_var = (transfer * pw * std::conj(transfer)).real();
    const double gain = fusion_gain(prior_var, noise_var);
    out(p) = prior + gain * (obs(p) - prior);
    pw = (1.0 - gain) * prior_var;
    if (trace) trace->forward_steps.push_back({prior_var, pw, gain});
  }
  if (trace) {
    trace->forward.resize(static_cast<std::size_t>(length));
    for (Eigen::Index p = 0; p < length; ++p) trace->forward[static_cast<std::size_t>(p)] = out(p);
  }

  const cdouble inverse = std::conj(transfer);
  for (Eigen::Index p = length - 1; p >= 1; --p) {
    const cdouble prior = inverse * out(p);
    const double prior_var = (inverse * pw * std::conj(inverse)).real();
    const double gain = fusion_gain(prior_var, noise_var);
    out(p - 1) = prior + gain * (obs(p - 1) - prior);
    pw = (1.0 - gain) * prior_var;
    if (trace) trace->backward_steps.push_back({prior_var, pw, gain});
  }
}

template <class Matrix>
void filter_matrix_into(const Matrix& observed, const estimation::TransferFactors& factors, double noise_var,
                        CsiMatrixView& stage, CsiMatrixView& out) {
  const Eigen::Index rows = observed.rows();
  const Eigen::Index cols = observed.cols();
  stage.resize(rows, cols);
  out.resize(rows, cols);
  for (Eigen::Index q = 0; q < cols; ++q) {
    run_filter(observed.col(q), stage.col(q), rows, factors.along_p, noise_var, nullptr);
  }
  for (Eigen::Index p = 0; p < rows; ++p) {
    run_filter(stage.row(p), out.row(p), cols, factors.along_q, noise_var, nullptr);
  }
}

struct SpanSeq {
  std::span<const cdouble> s;
  cdouble operator()(Eigen::Index i) const { return s[static_cast<std::size_t>(i)]; }
};

struct VecSeq {
  std::vector<cdouble>& v;
  cdouble& operator()(Eigen::Index i) const { return v[static_cast<std::size_t>(i)]; }
};

std::vector<estimation::TransferFactors> path_factors(const estimation::AoaEstimate& aoa,
                                                      const array::ArrayConfig& array) {
  if (aoa.angles.empty()) throw DimensionError("no estimated paths to filter with");
  if (!(aoa.est_noise_var >= 0.0)) throw DomainError("estimated noise variance must be non-negative");
  std::vector<estimation::TransferFactors> factors;
  factors.reserve(aoa.angles.size());
  for (const auto& angles : aoa.angles) factors.push_back(estimation::transfer_factors(angles, array));
  return factors;
}

}  // namespace

double kf_initial_variance(std::span<const cdouble> observations, cdouble transfer) {
  if (observations.empty()) throw DimensionError("empty observation sequence");
  if (std::abs(std::abs(transfer) - 1.0) > kUnitModulusTol)
    throw ContractViolation("transfer factor must have unit modulus");
  return initial_variance(SpanSeq{observations}, static_cast<Eigen::Index>(observations.size()), transfer);
}

KfTrace kf_filter_sequence_traced(std::span<const cdouble> observations, cdouble transfer, double noise_var) {
  if (observations.empty()) throw DimensionError("empty observation sequence");
  check_inputs(transfer, noise_var);
  KfTrace trace;
  trace.output.resize(observations.size());
  run_filter(SpanSeq{observations}, VecSeq{trace.output}, static_cast<Eigen::Index>(observations.size()), transfer,
             noise_var, &trace);
  return trace;
}

std::vector<cdouble> kf_filter_sequence(std::span<const cdouble> observations, cdouble transfer, double noise_var) {
  if (observations.empty()) throw DimensionError("empty observation sequence");
  check_inputs(transfer, noise_var);
  std::vector<cdouble> out(observations.size());
  run_filter(SpanSeq{observations}, VecSeq{out}, static_cast<Eigen::Index>(observations.size()), transfer, noise_var,
             nullptr);
  return out;
}

CsiMatrixView reshape(const Eigen::Ref<const CVector>& csi, const array::ArrayConfig& array) {
  if (csi.size() != array.size()) throw DimensionError("CSI vector does not match the array size");
  return Eigen::Map<const CsiMatrixView>(csi.data(), array.rows(), array.cols());
}

CVector vectorize(const CsiMatrixView& matrix) {
  return Eigen::Map<const CVector>(matrix.data(), matrix.size());
}

CsiMatrixView filter_matrix(const CsiMatrixView& observed, const estimation::TransferFactors& factors,
                            double noise_var) {
  if (observed.size() == 0) throw DimensionError("empty CSI matrix");
  check_inputs(factors.along_p, noise_var);
  check_inputs(factors.along_q, noise_var);
  CsiMatrixView stage;
  CsiMatrixView out;
  filter_matrix_into(observed, factors, noise_var, stage, out);
  return out;
}

void filter_matrix(const CsiMatrixView& observed, const estimation::TransferFactors& factors, double noise_var,
                   CsiMatrixView& out, CsiMatrixView& stage) {
  if (observed.size() == 0) throw DimensionError("empty CSI matrix");
  check_inputs(factors.along_p, noise_var);
  check_inputs(factors.along_q, noise_var);
  filter_matrix_into(observed, factors, noise_var, stage, out);
}

std::vector<CsiMatrixView> sakf_path_components(const CsiMatrixView& observed, const estimation::AoaEstimate& aoa,
                                                const array::ArrayConfig& array) {
  if (observed.rows() != array.rows() || observed.cols() != array.cols())
    throw DimensionError("CSI matrix does not match the array");
  std::vector<CsiMatrixView> parts;
  for (const auto& f : path_factors(aoa, array)) parts.push_back(filter_matrix(observed, f, aoa.est_noise_var));
  return parts;
}

CVector sakf_estimate(const CsiMatrixView& observed, const estimation::AoaEstimate& aoa,
                      const array::ArrayConfig& array) {
  const auto parts = sakf_path_components(observed, aoa, array);
  CsiMatrixView sum = CsiMatrixView::Zero(array.rows(), array.cols());
  for (const auto& part : parts) sum += part;
  return vectorize(sum);
}

channel::CsiGrid sakf_estimate_grid(const channel::CsiGrid& ls, const estimation::AoaEstimate& aoa,
                                    const array::ArrayConfig& array) {
  if (ls.num_elements() != array.size()) throw DimensionError("CSI grid does not match the array size");
  const auto factors = path_factors(aoa, array);
  for (const auto& f : factors) {
    check_inputs(f.along_p, aoa.est_noise_var);
    check_inputs(f.along_q, aoa.est_noise_var);
  }

  channel::CsiGrid out(ls.num_subcarriers(), ls.num_symbols(), array.size());
  CsiMatrixView stage;
  CsiMatrixView filtered;
  const CMatrix& in = ls.matrix();
  CMatrix& dst = out.matrix();
  for (Eigen::Index k = 0; k < in.cols(); ++k) {
    Eigen::Map<const CsiMatrixView> observed(in.col(k).data(), array.rows(), array.cols());
    Eigen::Map<CsiMatrixView> sum(dst.col(k).data(), array.rows(), array.cols());
    for (const auto& f : factors) {
      filter_matrix_into(observed, f, aoa.est_noise_var, stage, filtered);
      sum += filtered;
    }
  }
  return out;
}

}  // namespace sakf::kalman
