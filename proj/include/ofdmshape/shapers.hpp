#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ofdmshape/core.hpp"
#include "ofdmshape/solution.hpp"
#include "ofdmshape/spectrum.hpp"

namespace ofdmshape {

/// Frequencies (internal axis, [-1/2, 1/2)) to be nulled exactly.
struct NotchSet {
  std::vector<double> freqs;

  void validate(std::size_t active_count) const;
};

struct PrecoderSpec {
  double rate = 1.0;            ///< lambda = |D| / |K| for orthogonal precoders
  std::vector<double> weights;  ///< one per active carrier, weighted variant
};

struct SolveOptions {
  /// Absolute ridge epsilon; unset selects ridge_scale * trace / dim of the
  /// Gram matrix.
  std::optional<double> ridge;
  double ridge_scale = 1e-12;
  /// Solve real-valued formulations when the problem data are real.
  bool exploit_realness = true;
  double realness_threshold = kRealnessThreshold;
};

/// sum_k sigma_k^2 integral M0 |H_k|^2 df, i.e. N_s masked_power(psd, mask0).
double framework_objective(const PulseFamily& family, const ShaperSolution& sol, const SpectralMask& mask0,
                           const PowerAllocation& power);

ShaperSolution solve_aic(const PulseFamily& family, const CarrierSets& sets, const SpectralMask& mask0,
                         const SolveOptions& opt = {});

ShaperSolution solve_ast(const PulseFamily& family, std::span<const int> data, const SpectralMask& mask0,
                         const SolveOptions& opt = {});

/// Joint AIC + transition design. Each constraint mask must carry a bound
/// on masked_power; at most one may be active at the optimum.
ShaperSolution solve_aic_ast(const PulseFamily& family, const CarrierSets& sets, const SpectralMask& mask0,
                             std::span<const SpectralMask> constraints, const PowerAllocation& power,
                             const SolveOptions& opt = {});

/// Rows of A: A[m, i] = P_i(phi_m) for the active carriers.
Eigen::MatrixXcd notch_matrix(const PulseFamily& family, std::span<const int> active, const NotchSet& notch);

/// G = I - A^H (A A^H)^{-1} A on the active carriers.
ShaperSolution solve_nullspace_precoder(const PulseFamily& family, std::span<const int> active, const NotchSet& notch,
                                        const SolveOptions& opt = {});

/// G = I - W^{-1} A^H (A W^{-1} A^H)^{-1} A.
ShaperSolution solve_weighted_precoder(const PulseFamily& family, std::span<const int> active, const NotchSet& notch,
                                       const PrecoderSpec& spec, const SolveOptions& opt = {});

/// Columns of V for the lambda |K| smallest singular values of
/// C[m, i] = sqrt(M(f_m) df) P_i(f_m).
ShaperSolution solve_orthogonal_precoder(const PulseFamily& family, std::span<const int> active,
                                         const SpectralMask& mask, const PrecoderSpec& spec,
                                         const SolveOptions& opt = {});

/// Same with C = notch_matrix().
ShaperSolution solve_orthogonal_precoder(const PulseFamily& family, std::span<const int> active, const NotchSet& notch,
                                         const PrecoderSpec& spec, const SolveOptions& opt = {});

/// Maps a Hermitian-pulse solution to the conventional pulse:
/// g_ik -> g_ik e^{j 2 pi (k - i) s / N}, t_k -> t_k e^{j 2 pi k s / N}, with
/// s = eta - N_GI and k = 0 for streams not tied to a carrier.
ShaperSolution transform_solution(const ShaperSolution& sol, const SystemConfig& cfg);

}  // namespace ofdmshape
