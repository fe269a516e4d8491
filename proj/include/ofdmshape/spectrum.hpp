#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ofdmshape/core.hpp"
#include "ofdmshape/solution.hpp"

namespace ofdmshape {

/// Normalized frequencies in [-1/2, 1/2). Uniform grids hold
/// f_m = -1/2 + m / (Q N), m = 0..QN-1.
struct FrequencyGrid {
  std::vector<double> points;
  int samples_per_bin = 0;  ///< Q; 0 for an explicit point list
  int fft_size = 0;         ///< N; 0 for an explicit point list

  static FrequencyGrid uniform(int fft_size, int samples_per_bin);
  static FrequencyGrid explicit_points(std::vector<double> points);

  std::size_t size() const noexcept { return points.size(); }
  bool is_uniform() const noexcept { return samples_per_bin > 0; }
  /// QN for uniform grids.
  int lattice_size() const noexcept { return samples_per_bin * fft_size; }

  /// Integration weight of each point: 1/(QN) on uniform grids, half the
  /// circular distance to the two neighbours otherwise.
  std::vector<double> weights() const;

  bool same_as(const FrequencyGrid& other) const;
};

struct SpectralMask {
  std::string name;
  FrequencyGrid grid;
  std::vector<double> weight;    ///< M(f_m) in [0, 1]
  std::optional<double> bound;   ///< delta, in masked_power units

  void validate() const;
};

/// Inclusive carrier-index interval.
using CarrierRange = std::pair<int, int>;

/// M(f_m) = 1 when f_m falls in the cell [(k - 1/2)/N, (k + 1/2)/N) (wrapped)
/// of a listed carrier k.
SpectralMask band_mask(const SystemConfig& cfg, std::span<const CarrierRange> ranges, const FrequencyGrid& grid,
                       std::string name = "band");

struct PsdCurve {
  FrequencyGrid grid;
  std::vector<double> values;  ///< linear, power per unit normalized frequency

  double peak() const;
  /// 10 log10(S / peak); -inf where S = 0.
  std::vector<double> normalized_db() const;
};

/// Carrier spectra on a uniform grid via one window-transform table:
/// P_k(f_m) depends on m - kQ only (up to a carrier phase).
class GridSpectra {
 public:
  GridSpectra(const PulseFamily& family, const FrequencyGrid& grid);

  const FrequencyGrid& grid() const noexcept { return grid_; }
  PulseKind kind() const noexcept { return kind_; }

  /// P_k(f_m).
  cplx operator()(int k, int m) const;

  /// Window transform at f_m - k/N.
  double envelope(int k, int m) const;

  /// Fills out[m] = scale[m] * P_k(f_m) for all m.
  void fill(int k, std::span<const double> scale, std::span<cplx> out) const;

 private:
  FrequencyGrid grid_;
  PulseKind kind_;
  int fft_size_, guard_, length_, q_, qn_;
  std::vector<double> table_;  ///< window transform at f_j
};

/// Composite-pulse PSD: S(f) = (1/N_s) sum_s sigma_s^2 |H_s(f)|^2, evaluated
/// through an N-point IDFT of the carrier amplitudes and one Q N-point FFT per
/// stream on uniform grids, by direct summation otherwise.
PsdCurve analytic_psd(const PulseFamily& family, const ShaperSolution& sol, const PowerAllocation& power,
                      const FrequencyGrid& grid);

/// Same quantity from explicit composite pulses (columns of H, stored-index
/// aligned).
PsdCurve composite_psd(const Eigen::MatrixXcd& H, std::span<const double> variances, int symbol_period,
                       const FrequencyGrid& grid);

/// Stream variances: carrier-tied streams use the carrier's variance, free
/// streams the default.
std::vector<double> stream_variances(const ShaperSolution& sol, const PowerAllocation& power);

double masked_power(const PsdCurve& psd, const SpectralMask& mask);

struct WelchOptions {
  int segment = 0;        ///< 0 selects 4L at the call site
  double overlap = 0.5;
  WindowShape window = WindowShape::RaisedCosine;  ///< RaisedCosine selects Hann
};

/// Averaged Hann-windowed periodogram, scaled to power per unit normalized
/// frequency and evaluated exactly on the grid points.
PsdCurve welch_psd(std::span<const cplx> signal, const WelchOptions& opt, const FrequencyGrid& grid);

/// max_m |a_m - b_m| / max(a_m, b_m), with 0/0 counted as 0.
double max_relative_difference(std::span<const double> a, std::span<const double> b);

/// CSV with header `freq_normalized,psd_db`.
void write_psd_csv(std::ostream& out, const PsdCurve& psd);

}  // namespace ofdmshape
