#include "ofdmshape/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "ofdmshape/fft.hpp"

namespace ofdmshape {

FrequencyGrid FrequencyGrid::uniform(int fft_size, int samples_per_bin) {
  if (fft_size < 1 || samples_per_bin < 1) throw InvalidConfig("grid needs N >= 1 and Q >= 1");
  FrequencyGrid g;
  g.fft_size = fft_size;
  g.samples_per_bin = samples_per_bin;
  const int qn = fft_size * samples_per_bin;
  g.points.resize(static_cast<std::size_t>(qn));
  for (int m = 0; m < qn; ++m) {
    g.points[static_cast<std::size_t>(m)] = (2.0 * m - qn) / (2.0 * qn);
  }
  return g;
}

FrequencyGrid FrequencyGrid::explicit_points(std::vector<double> points) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double f = points[i];
    if (!(f >= -0.5 && f < 0.5)) throw InvalidConfig("grid point outside [-1/2, 1/2)");
    if (i && !(f > points[i - 1])) throw InvalidConfig("grid points must be strictly increasing");
  }
  FrequencyGrid g;
  g.points = std::move(points);
  return g;
}

std::vector<double> FrequencyGrid::weights() const {
  const std::size_t n = points.size();
  if (is_uniform()) return std::vector<double>(n, 1.0 / lattice_size());
  std::vector<double> w(n, 0.0);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double prev = i ? points[i - 1] : points[n - 1] - 1.0;
    const double next = i + 1 < n ? points[i + 1] : points[0] + 1.0;
    w[i] = 0.5 * (next - prev);
  }
  return w;
}

bool FrequencyGrid::same_as(const FrequencyGrid& other) const {
  if (is_uniform() || other.is_uniform()) {
    return samples_per_bin == other.samples_per_bin && fft_size == other.fft_size;
  }
  return points == other.points;
}

void SpectralMask::validate() const {
  if (weight.size() != grid.size()) throw GridMismatch("mask '" + name + "' does not match its grid");
  for (double v : weight) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidConfig("mask '" + name + "' has a weight outside [0, 1]");
  }
}

SpectralMask band_mask(const SystemConfig& cfg, std::span<const CarrierRange> ranges, const FrequencyGrid& grid,
                       std::string name) {
  if (grid.size() == 0) throw InvalidConfig("band mask on an empty grid");
  const int N = cfg.fft_size;
  std::vector<char> in_band(static_cast<std::size_t>(N), 0);
  for (const auto& [lo, hi] : ranges) {
    if (lo < 0 || hi >= N || lo > hi) {
      throw InvalidConfig("band " + std::to_string(lo) + ".." + std::to_string(hi) + " outside [0, N)");
    }
    for (int k = lo; k <= hi; ++k) in_band[static_cast<std::size_t>(k)] = 1;
  }
  SpectralMask mask;
  mask.name = std::move(name);
  mask.grid = grid;
  mask.weight.assign(grid.size(), 0.0);
  auto carrier_of_uniform = [&](std::int64_t m) {
    // Points and cell edges in units of 1/(2 Q N).
    const std::int64_t q = grid.samples_per_bin;
    const std::int64_t two_qn = 2 * q * N;
    const std::int64_t v = mod_floor(2 * m - q * N + q, two_qn);
    return static_cast<int>(v / (2 * q));
  };
  for (std::size_t m = 0; m < grid.size(); ++m) {
    int k;
    if (grid.is_uniform() && grid.fft_size == N) {
      k = carrier_of_uniform(static_cast<std::int64_t>(m));
    } else {
      k = static_cast<int>(mod_floor(static_cast<std::int64_t>(std::floor(grid.points[m] * N + 0.5)), N));
    }
    mask.weight[m] = in_band[static_cast<std::size_t>(k)] ? 1.0 : 0.0;
  }
  return mask;
}

double PsdCurve::peak() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

std::vector<double> PsdCurve::normalized_db() const {
  const double p = peak();
  std::vector<double> db(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    db[i] = values[i] > 0.0 ? 10.0 * std::log10(values[i] / p) : -std::numeric_limits<double>::infinity();
  }
  return db;
}

GridSpectra::GridSpectra(const PulseFamily& family, const FrequencyGrid& grid)
    : grid_(grid),
      kind_(family.kind()),
      fft_size_(family.config().fft_size),
      guard_(family.config().guard),
      length_(family.length()),
      q_(grid.samples_per_bin),
      qn_(grid.lattice_size()) {
  if (!grid.is_uniform() || grid.fft_size != fft_size_) {
    throw GridMismatch("grid spectra need a uniform grid with the system's N");
  }
  // table_[j] = W(f_j) = Re(e^{j 2 pi f_j c} sum_n w(n) e^{-j 2 pi f_j n})
  std::vector<cplx> buf(static_cast<std::size_t>(qn_), cplx{});
  const auto& w = family.window().samples;
  for (int n = 0; n < length_; ++n) {
    buf[static_cast<std::size_t>(n % qn_)] += (n % 2 ? -1.0 : 1.0) * w[static_cast<std::size_t>(n)];
  }
  Fft(qn_, FftDirection::Forward).execute(buf);
  table_.resize(static_cast<std::size_t>(qn_));
  const std::int64_t four_qn = 4LL * qn_;
  for (int j = 0; j < qn_; ++j) {
    const std::int64_t r = mod_floor((2LL * j - qn_) * (length_ - 1), four_qn);
    const double a = kTwoPi * static_cast<double>(r) / static_cast<double>(four_qn);
    table_[static_cast<std::size_t>(j)] = (buf[static_cast<std::size_t>(j)] * cplx(std::cos(a), std::sin(a))).real();
  }
}

double GridSpectra::envelope(int k, int m) const {
  int d = m - k * q_;
  if (d >= 0) return table_[static_cast<std::size_t>(d)];
  // W(nu - 1) = (-1)^(L-1) W(nu)
  const double v = table_[static_cast<std::size_t>(d + qn_)];
  return length_ % 2 ? v : -v;
}

cplx GridSpectra::operator()(int k, int m) const {
  const double amp = envelope(k, m);
  if (kind_ == PulseKind::Hermitian) return {amp, 0.0};
  const std::int64_t d = m - static_cast<std::int64_t>(k) * q_;
  const std::int64_t four_qn = 4LL * qn_;
  const std::int64_t r = mod_floor(-(2 * d - qn_) * (length_ - 1), four_qn);
  const std::int64_t rk = mod_floor(-static_cast<std::int64_t>(k) * guard_, fft_size_);
  const double a = kTwoPi * (static_cast<double>(r) / static_cast<double>(four_qn) +
                             static_cast<double>(rk) / static_cast<double>(fft_size_));
  return amp * cplx(std::cos(a), std::sin(a));
}

void GridSpectra::fill(int k, std::span<const double> scale, std::span<cplx> out) const {
  if (static_cast<int>(scale.size()) != qn_ || static_cast<int>(out.size()) != qn_) {
    throw DimensionMismatch("grid spectra fill buffers");
  }
  for (int m = 0; m < qn_; ++m) {
    const double s = scale[static_cast<std::size_t>(m)];
    out[static_cast<std::size_t>(m)] = s == 0.0 ? cplx{} : s * (*this)(k, m);
  }
}

namespace {

class PsdAccumulator {
 public:
  PsdAccumulator(int length, const FrequencyGrid& grid) : grid_(grid), values_(grid.size(), 0.0) {
    if (grid.is_uniform()) {
      fft_.emplace(grid.lattice_size(), FftDirection::Forward);
      buf_.resize(static_cast<std::size_t>(grid.lattice_size()));
    }
    (void)length;
  }

  void add(std::span<const cplx> h, double variance) {
    if (fft_) {
      const int qn = fft_->size();
      std::fill(buf_.begin(), buf_.end(), cplx{});
      for (std::size_t n = 0; n < h.size(); ++n) {
        buf_[n % static_cast<std::size_t>(qn)] += (n % 2 ? -1.0 : 1.0) * h[n];
      }
      fft_->execute(buf_);
      for (int m = 0; m < qn; ++m) values_[static_cast<std::size_t>(m)] += variance * std::norm(buf_[static_cast<std::size_t>(m)]);
      return;
    }
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      const double f = grid_.points[i];
      cplx acc{};
      for (std::size_t n = 0; n < h.size(); ++n) {
        double x = f * static_cast<double>(n);
        x -= std::nearbyint(x);
        acc += h[n] * std::polar(1.0, -kTwoPi * x);
      }
      values_[i] += variance * std::norm(acc);
    }
  }

  PsdCurve finish(int symbol_period) {
    PsdCurve psd;
    psd.grid = grid_;
    psd.values = std::move(values_);
    for (double& v : psd.values) v /= symbol_period;
    return psd;
  }

 private:
  const FrequencyGrid& grid_;
  std::vector<double> values_;
  std::optional<Fft> fft_;
  std::vector<cplx> buf_;
};

}  // namespace

std::vector<double> stream_variances(const ShaperSolution& sol, const PowerAllocation& power) {
  std::vector<double> v;
  v.reserve(sol.streams.size());
  for (int k : sol.streams) v.push_back(k >= 0 ? power.of(k) : power.default_variance);
  for (double x : v) {
    if (!(x > 0.0)) throw InvalidConfig("stream variances must be positive");
  }
  return v;
}

PsdCurve analytic_psd(const PulseFamily& family, const ShaperSolution& sol, const PowerAllocation& power,
                      const FrequencyGrid& grid) {
  const CompositeBuilder builder(family, sol);
  const std::vector<double> var = stream_variances(sol, power);
  PsdAccumulator acc(builder.length(), grid);
  std::vector<cplx> h(static_cast<std::size_t>(builder.length()));
  for (int s = 0; s < sol.stream_count(); ++s) {
    builder.column(s, h);
    acc.add(h, var[static_cast<std::size_t>(s)]);
  }
  return acc.finish(family.config().symbol_period());
}

PsdCurve composite_psd(const Eigen::MatrixXcd& H, std::span<const double> variances, int symbol_period,
                       const FrequencyGrid& grid) {
  if (static_cast<Eigen::Index>(variances.size()) != H.cols()) throw DimensionMismatch("one variance per column");
  PsdAccumulator acc(static_cast<int>(H.rows()), grid);
  for (Eigen::Index s = 0; s < H.cols(); ++s) {
    const Eigen::VectorXcd col = H.col(s);
    acc.add(std::span<const cplx>(col.data(), static_cast<std::size_t>(col.size())), variances[static_cast<std::size_t>(s)]);
  }
  return acc.finish(symbol_period);
}

double masked_power(const PsdCurve& psd, const SpectralMask& mask) {
  if (!psd.grid.same_as(mask.grid) || psd.values.size() != mask.weight.size()) {
    throw GridMismatch("PSD and mask '" + mask.name + "' use different grids");
  }
  const std::vector<double> w = psd.grid.weights();
  double acc = 0.0;
  for (std::size_t m = 0; m < psd.values.size(); ++m) acc += mask.weight[m] * psd.values[m] * w[m];
  return acc;
}

PsdCurve welch_psd(std::span<const cplx> signal, const WelchOptions& opt, const FrequencyGrid& grid) {
  const int seg = opt.segment;
  if (seg < 2) throw InvalidConfig("Welch segment must have at least 2 samples");
  if (!(opt.overlap >= 0.0 && opt.overlap < 1.0)) throw InvalidConfig("Welch overlap must lie in [0, 1)");
  if (signal.size() < 2 * static_cast<std::size_t>(seg)) {
    throw InvalidConfig("signal of " + std::to_string(signal.size()) + " samples is shorter than two segments");
  }
  const int hop = std::max(1, static_cast<int>(std::lround(seg * (1.0 - opt.overlap))));
  std::vector<double> win(static_cast<std::size_t>(seg), 1.0);
  if (opt.window == WindowShape::RaisedCosine) {
    for (int n = 0; n < seg; ++n) win[static_cast<std::size_t>(n)] = 0.5 - 0.5 * std::cos(kTwoPi * n / seg);
  }
  double energy = 0.0;
  for (double v : win) energy += v * v;

  const std::size_t count = (signal.size() - static_cast<std::size_t>(seg)) / static_cast<std::size_t>(hop) + 1;
  std::vector<double> acc(grid.size(), 0.0);
  if (grid.is_uniform()) {
    const int qn = grid.lattice_size();
    const int M = qn * ((seg + qn - 1) / qn);
    const int stride = M / qn;
    Fft fft(M, FftDirection::Forward);
    std::vector<cplx> buf(static_cast<std::size_t>(M));
    for (std::size_t u = 0; u < count; ++u) {
      const std::size_t start = u * static_cast<std::size_t>(hop);
      std::fill(buf.begin(), buf.end(), cplx{});
      for (int n = 0; n < seg; ++n) {
        buf[static_cast<std::size_t>(n)] = (n % 2 ? -1.0 : 1.0) * win[static_cast<std::size_t>(n)] * signal[start + static_cast<std::size_t>(n)];
      }
      fft.execute(buf);
      for (int m = 0; m < qn; ++m) acc[static_cast<std::size_t>(m)] += std::norm(buf[static_cast<std::size_t>(m * stride)]);
    }
  } else {
    for (std::size_t u = 0; u < count; ++u) {
      const std::size_t start = u * static_cast<std::size_t>(hop);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        cplx a{};
        for (int n = 0; n < seg; ++n) {
          double x = grid.points[i] * n;
          x -= std::nearbyint(x);
          a += win[static_cast<std::size_t>(n)] * signal[start + static_cast<std::size_t>(n)] * std::polar(1.0, -kTwoPi * x);
        }
        acc[i] += std::norm(a);
      }
    }
  }
  PsdCurve psd;
  psd.grid = grid;
  psd.values = std::move(acc);
  const double scale = 1.0 / (static_cast<double>(count) * energy);
  for (double& v : psd.values) v *= scale;
  return psd;
}

double max_relative_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("curves of different length");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double den = std::max(std::abs(a[i]), std::abs(b[i]));
    if (den == 0.0) continue;
    worst = std::max(worst, std::abs(a[i] - b[i]) / den);
  }
  return worst;
}

void write_psd_csv(std::ostream& out, const PsdCurve& psd) {
  out << "freq_normalized,psd_db\n";
  const std::vector<double> db = psd.normalized_db();
  char line[96];
  for (std::size_t m = 0; m < db.size(); ++m) {
    std::snprintf(line, sizeof line, "%.12g,%.12g\n", psd.grid.points[m], db[m]);
    out << line;
  }
}

}  // namespace ofdmshape
