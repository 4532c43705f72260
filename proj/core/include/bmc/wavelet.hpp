#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "bmc/interval.hpp"

namespace bmc {

/// Extremal-phase Daubechies lowpass filter with p vanishing moments (2p
/// taps, summing to sqrt 2). Supported orders: 1..10.
std::vector<double> daubechies_filter(int p);

/// Quadrature-mirror highpass g_k = (-1)^k h_{L-1-k}.
std::vector<double> quadrature_mirror(std::span<const double> lowpass);

struct WaveletSpec {
  int order = 8;
  std::vector<double> lowpass;
  std::vector<double> highpass;
  int j0 = 2;  // coarsest level kept as the untouched approximation block
};

WaveletSpec make_wavelet(int order = 8, int j0 = 2);

/// Product of intervals, one per axis (1 <= dim <= 3).
struct Box {
  std::vector<Interval> axes;

  Box() = default;
  explicit Box(std::vector<Interval> a);
  static Box cube(Interval side, int dim) { return Box(std::vector<Interval>(static_cast<std::size_t>(dim), side)); }

  int dim() const noexcept { return static_cast<int>(axes.size()); }
  double volume() const noexcept;
  bool contains(std::span<const double> point) const noexcept;

  friend bool operator==(const Box&, const Box&) = default;
};

/// Flat row-major array of 2^(J d) values over `domain`; axis 0 varies slowest.
/// After dwt_forward the array holds the Mallat layout: the approximation
/// block [0, 2^j0)^d, then for each level j0 <= j < J the shell
/// [0, 2^(j+1))^d minus [0, 2^j)^d, split into 2^d - 1 orientations.
struct CoeffPyramid {
  int dim = 1;
  int J = 0;
  int j0 = 0;
  Box domain;
  std::vector<double> values;
  double kept_fraction = 1.0;  // nonzero detail coefficients / all detail coefficients

  std::size_t side() const noexcept { return std::size_t{1} << J; }
  std::size_t detail_count() const noexcept;
  std::size_t nonzero_details() const noexcept;
  /// Fraction of all coefficients (approximation included) equal to zero.
  double zero_fraction() const noexcept;
};

struct CoeffPosition {
  int level;        // -1 for the approximation block, else j in [j0, J)
  int orientation;  // bit a set when the axis-a index lies in the highpass half
  std::array<std::size_t, 3> index;  // position within the subband
};

/// Decodes a flat pyramid index.
CoeffPosition coeff_position(const CoeffPyramid& p, std::size_t flat);

struct BinnedCoefficients {
  int dim = 1;
  int J = 0;
  Box domain;
  std::vector<double> coeffs;       // level-J scaling coefficients
  std::size_t sample_size = 0;      // N, including out-of-domain points
  double out_of_domain_fraction = 0;
};

/// Histogram projection of the empirical measure on the level-J Haar
/// scaling functions of `domain`. `points` holds N d-tuples back to back.
BinnedCoefficients bin_empirical(std::span<const double> points, const Box& domain, int J);

/// Separable periodized pyramid transform. `axis_order` fixes the order in
/// which the axes are filtered at each level (default 0, 1, ..., d-1).
CoeffPyramid dwt_forward(std::span<const double> coeffs, const Box& domain, const WaveletSpec& spec,
                         std::span<const int> axis_order = {});
CoeffPyramid dwt_forward(const BinnedCoefficients& binned, const WaveletSpec& spec);
std::vector<double> dwt_inverse(const CoeffPyramid& pyramid, const WaveletSpec& spec);

/// Zeroes detail coefficients with |c| < eta; the approximation block is kept.
CoeffPyramid hard_threshold(CoeffPyramid pyramid, double eta);

/// Zeroes every detail coefficient of level >= J (projection onto V_J).
CoeffPyramid truncate_levels(CoeffPyramid pyramid, int J);

struct DensityEstimate {
  int dim = 1;
  int J = 0;
  Box domain;
  std::vector<double> values;  // one per bin centre, row-major
  CoeffPyramid pyramid;
  double kept_fraction = 1.0;

  std::size_t side() const noexcept { return std::size_t{1} << J; }
  double grid_point(int axis, std::size_t k) const noexcept;
  /// Multilinear interpolation between bin centres, extrapolated linearly
  /// beyond the outermost centres.
  double value_at(std::span<const double> x) const;
  double value_at(double x) const { return value_at(std::span<const double>(&x, 1)); }
  /// Riemann sum of the values over the domain.
  double integral() const noexcept;
};

DensityEstimate evaluate_on_grid(const CoeffPyramid& pyramid, const WaveletSpec& spec);

void write_pyramid_csv(std::ostream& out, const CoeffPyramid& pyramid);
void write_grid_csv(std::ostream& out, const DensityEstimate& estimate);

}  // namespace bmc
