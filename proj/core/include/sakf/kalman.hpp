#pragma once

#include <span>
#include <vector>

#include "sakf/array_geometry.hpp"
#include "sakf/channel.hpp"
#include "sakf/estimation.hpp"
#include "sakf/types.hpp"

namespace sakf::kalman {

// One step of the scalar recursion along an antenna axis.
struct KfState {
  double prior_var = 0.0;      // p^-_{w,p}
  double posterior_var = 0.0;  // p_{w,p}
  double gain = 0.0;           // K_p
};

// p_{w,0} = (1/P) sum_p |h_p A^{-p} - h_0|^2.
double kf_initial_variance(std::span<const cdouble> observations, cdouble transfer);

// Forward pass along the axis, then a reverse pass with A^{-1}; returns the
// reverse-pass output. Requires |A| = 1 and noise_var >= 0.
std::vector<cdouble> kf_filter_sequence(std::span<const cdouble> observations, cdouble transfer, double noise_var);

struct KfTrace {
  double initial_var = 0.0;
  std::vector<cdouble> forward;          // sequence after the forward pass
  std::vector<cdouble> output;           // sequence after the reverse pass
  std::vector<KfState> forward_steps;    // p = 1 .. P-1
  std::vector<KfState> backward_steps;   // p-1 = P-2 .. 0
};

KfTrace kf_filter_sequence_traced(std::span<const cdouble> observations, cdouble transfer, double noise_var);

// Reshape of a CSI vector: entry (p, q) = vector entry p*Q + q.
using CsiMatrixView = CArrayMatrix;

CsiMatrixView reshape(const Eigen::Ref<const CVector>& csi, const array::ArrayConfig& array);
CVector vectorize(const CsiMatrixView& matrix);

// Columns filtered with A_P, then rows of the result with A_Q.
CsiMatrixView filter_matrix(const CsiMatrixView& observed, const estimation::TransferFactors& factors,
                            double noise_var);

// As above, writing into caller-owned buffers (stage receives the column-filtered matrix).
void filter_matrix(const CsiMatrixView& observed, const estimation::TransferFactors& factors, double noise_var,
                   CsiMatrixView& out, CsiMatrixView& stage);

// Sum over estimated paths of the per-path filtered matrices, vectorized.
CVector sakf_estimate(const CsiMatrixView& observed, const estimation::AoaEstimate& aoa,
                      const array::ArrayConfig& array);

// Per-path filtered matrices before aggregation.
std::vector<CsiMatrixView> sakf_path_components(const CsiMatrixView& observed, const estimation::AoaEstimate& aoa,
                                                const array::ArrayConfig& array);

// sakf_estimate applied at every (n, m) of an LS grid.
channel::CsiGrid sakf_estimate_grid(const channel::CsiGrid& ls, const estimation::AoaEstimate& aoa,
                                    const array::ArrayConfig& array);

}  // namespace sakf::kalman
