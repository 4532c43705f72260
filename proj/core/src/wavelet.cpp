#include "bmc/wavelet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "bmc/csv.hpp"

namespace bmc {

namespace {

using cplx = std::complex<double>;

// Horner evaluation of sum c_k z^k.
cplx poly_eval(const std::vector<cplx>& c, cplx z) {
  cplx acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}

// All roots of sum c_k z^k by Weierstrass (Durand-Kerner) iteration followed
// by a few Newton steps on the original polynomial.
std::vector<cplx> poly_roots(std::vector<cplx> c) {
  const std::size_t deg = c.size() - 1;
  if (deg == 0) return {};
  const cplx lead = c.back();
  for (auto& v : c) v /= lead;
  std::vector<cplx> r(deg);
  const cplx seed(0.4, 0.9);
  for (std::size_t i = 0; i < deg; ++i) r[i] = std::pow(seed, static_cast<double>(i)) * 2.0;
  for (int it = 0; it < 2000; ++it) {
    double change = 0.0;
    for (std::size_t i = 0; i < deg; ++i) {
      cplx denom = 1.0;
      for (std::size_t k = 0; k < deg; ++k)
        if (k != i) denom *= r[i] - r[k];
      const cplx step = poly_eval(c, r[i]) / denom;
      r[i] -= step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-15) break;
  }
  std::vector<cplx> dc(deg);
  for (std::size_t k = 1; k <= deg; ++k) dc[k - 1] = c[k] * static_cast<double>(k);
  for (auto& z : r) {
    for (int it = 0; it < 5; ++it) {
      const cplx d = poly_eval(dc, z);
      if (std::abs(d) == 0.0) break;
      z -= poly_eval(c, z) / d;
    }
  }
  return r;
}

std::vector<cplx> poly_mul_linear(const std::vector<cplx>& p, cplx root) {
  // p(z) * (z - root)
  std::vector<cplx> out(p.size() + 1, 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    out[k + 1] += p[k];
    out[k] -= root * p[k];
  }
  return out;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// One periodized analysis step on a line of even length m.
void analysis_step(const double* in, double* out, std::size_t m, const std::vector<double>& h,
                   const std::vector<double>& g) {
  const std::size_t half = m / 2;
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0, d = 0.0;
    for (std::size_t l = 0; l < h.size(); ++l) {
      const double x = in[(2 * k + l) % m];
      a += h[l] * x;
      d += g[l] * x;
    }
    out[k] = a;
    out[half + k] = d;
  }
}

void synthesis_step(const double* in, double* out, std::size_t m, const std::vector<double>& h,
                    const std::vector<double>& g) {
  const std::size_t half = m / 2;
  std::fill(out, out + m, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    const double a = in[k];
    const double d = in[half + k];
    for (std::size_t l = 0; l < h.size(); ++l) out[(2 * k + l) % m] += h[l] * a + g[l] * d;
  }
}

// Applies `step` along `axis` to every line of the sub-cube [0, m)^dim of a
// row-major array with `side` entries per axis.
template <class Step>
void apply_along_axis(std::vector<double>& data, int dim, std::size_t side, std::size_t m, int axis,
                      Step step) {
  std::size_t stride = 1;
  for (int a = dim - 1; a > axis; --a) stride *= side;
  std::vector<double> line(m), result(m);
  const std::size_t lines = ipow(m, dim - 1);
  for (std::size_t t = 0; t < lines; ++t) {
    // Decode t into the indices of the remaining axes.
    std::size_t rest = t, base = 0, axis_stride = 1;
    for (int a = dim - 1; a >= 0; --a) {
      if (a != axis) {
        base += (rest % m) * axis_stride;
        rest /= m;
      }
      axis_stride *= side;
    }
    for (std::size_t i = 0; i < m; ++i) line[i] = data[base + i * stride];
    step(line.data(), result.data(), m);
    for (std::size_t i = 0; i < m; ++i) data[base + i * stride] = result[i];
  }
}

int infer_level(std::size_t count, int dim) {
  if (count == 0 || !std::has_single_bit(count)) {
    throw std::invalid_argument("coefficient count " + std::to_string(count) + " is not a power of two");
  }
  const int bits = std::bit_width(count) - 1;
  if (bits % dim != 0) {
    throw std::invalid_argument("coefficient count " + std::to_string(count) + " is not 2^(J d) for d = " +
                                std::to_string(dim));
  }
  return bits / dim;
}

std::vector<int> resolve_axis_order(std::span<const int> order, int dim) {
  std::vector<int> axes(static_cast<std::size_t>(dim));
  if (order.empty()) {
    std::iota(axes.begin(), axes.end(), 0);
    return axes;
  }
  axes.assign(order.begin(), order.end());
  auto sorted = axes;
  std::sort(sorted.begin(), sorted.end());
  for (int a = 0; a < dim; ++a)
    if (static_cast<int>(sorted.size()) != dim || sorted[static_cast<std::size_t>(a)] != a)
      throw std::invalid_argument("axis order must be a permutation of 0..d-1");
  return axes;
}

std::array<std::size_t, 3> unflatten(std::size_t flat, int dim, std::size_t side) {
  std::array<std::size_t, 3> idx{};
  for (int a = dim - 1; a >= 0; --a) {
    idx[static_cast<std::size_t>(a)] = flat % side;
    flat /= side;
  }
  return idx;
}

}  // namespace

std::vector<double> daubechies_filter(int p) {
  if (p < 1 || p > 10) throw std::invalid_argument("unsupported Daubechies order " + std::to_string(p));
  // P(y) = sum_{k<p} C(p-1+k, k) y^k; each root y gives a pair z, 1/z with
  // y = (2 - z - 1/z)/4. Keep the root inside the unit circle.
  std::vector<cplx> P(static_cast<std::size_t>(p));
  for (int k = 0; k < p; ++k) P[static_cast<std::size_t>(k)] = binomial(p - 1 + k, k);
  std::vector<cplx> poly{1.0};
  for (int k = 0; k < p; ++k) poly = poly_mul_linear(poly, -1.0);
  for (const cplx y : poly_roots(P)) {
    const cplx b = 2.0 - 4.0 * y;
    const cplx disc = std::sqrt(b * b - 4.0);
    cplx z = (b + disc) / 2.0;
    if (std::abs(z) > 1.0) z = (b - disc) / 2.0;
    poly = poly_mul_linear(poly, z);
  }
  std::vector<double> h(poly.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    h[k] = poly[k].real();
    sum += h[k];
  }
  for (auto& v : h) v *= std::sqrt(2.0) / sum;
  std::reverse(h.begin(), h.end());
  return h;
}

std::vector<double> quadrature_mirror(std::span<const double> lowpass) {
  const std::size_t L = lowpass.size();
  std::vector<double> g(L);
  for (std::size_t k = 0; k < L; ++k) g[k] = (k % 2 == 0 ? 1.0 : -1.0) * lowpass[L - 1 - k];
  return g;
}

WaveletSpec make_wavelet(int order, int j0) {
  if (j0 < 0) throw std::invalid_argument("coarsest level j0 must be non-negative");
  WaveletSpec spec;
  spec.order = order;
  spec.lowpass = daubechies_filter(order);
  spec.highpass = quadrature_mirror(spec.lowpass);
  spec.j0 = j0;
  return spec;
}

Box::Box(std::vector<Interval> a) : axes(std::move(a)) {
  if (axes.empty() || axes.size() > 3) throw std::invalid_argument("box dimension must be 1, 2 or 3");
  for (const auto& iv : axes) iv.validate("box axis");
}

double Box::volume() const noexcept {
  double v = 1.0;
  for (const auto& iv : axes) v *= iv.length();
  return v;
}

bool Box::contains(std::span<const double> point) const noexcept {
  for (std::size_t a = 0; a < axes.size(); ++a)
    if (!axes[a].contains(point[a])) return false;
  return true;
}

std::size_t CoeffPyramid::detail_count() const noexcept {
  return values.size() - ipow(std::size_t{1} << j0, dim);
}

std::size_t CoeffPyramid::nonzero_details() const noexcept {
  std::size_t nz = 0;
  const std::size_t approx_side = std::size_t{1} << j0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == 0.0) continue;
    const auto idx = unflatten(i, dim, side());
    bool approx = true;
    for (int a = 0; a < dim; ++a) approx = approx && idx[static_cast<std::size_t>(a)] < approx_side;
    if (!approx) ++nz;
  }
  return nz;
}

double CoeffPyramid::zero_fraction() const noexcept {
  const auto zeros = std::count(values.begin(), values.end(), 0.0);
  return static_cast<double>(zeros) / static_cast<double>(values.size());
}

CoeffPosition coeff_position(const CoeffPyramid& p, std::size_t flat) {
  if (flat >= p.values.size()) throw std::out_of_range("pyramid index out of range");
  auto idx = unflatten(flat, p.dim, p.side());
  std::size_t top = 0;
  for (int a = 0; a < p.dim; ++a) top = std::max(top, idx[static_cast<std::size_t>(a)]);
  if (top < (std::size_t{1} << p.j0)) return {-1, 0, idx};
  const int j = std::bit_width(top) - 1;
  const std::size_t half = std::size_t{1} << j;
  int orientation = 0;
  for (int a = 0; a < p.dim; ++a) {
    auto& i = idx[static_cast<std::size_t>(a)];
    if (i >= half) {
      orientation |= 1 << a;
      i -= half;
    }
  }
  return {j, orientation, idx};
}

BinnedCoefficients bin_empirical(std::span<const double> points, const Box& domain, int J) {
  const int d = domain.dim();
  if (d < 1) throw std::invalid_argument("bin_empirical needs a non-empty domain");
  if (J < 0 || J * d > 30) throw std::invalid_argument("bin_empirical: level out of range");
  if (points.size() % static_cast<std::size_t>(d) != 0)
    throw std::invalid_argument("point array length is not a multiple of the dimension");
  const std::size_t N = points.size() / static_cast<std::size_t>(d);
  if (N == 0) throw std::invalid_argument("bin_empirical needs at least one point");

  const std::size_t side = std::size_t{1} << J;
  BinnedCoefficients out;
  out.dim = d;
  out.J = J;
  out.domain = domain;
  out.sample_size = N;
  std::vector<std::size_t> counts(ipow(side, d), 0);
  std::size_t outside = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const auto pt = points.subspan(i * static_cast<std::size_t>(d), static_cast<std::size_t>(d));
    if (!domain.contains(pt)) {
      ++outside;
      continue;
    }
    std::size_t flat = 0;
    for (int a = 0; a < d; ++a) {
      const auto& iv = domain.axes[static_cast<std::size_t>(a)];
      auto k = static_cast<std::size_t>((pt[static_cast<std::size_t>(a)] - iv.lo) / iv.length() * static_cast<double>(side));
      flat = flat * side + std::min(k, side - 1);
    }
    ++counts[flat];
  }
  const double scale =
      std::sqrt(std::ldexp(1.0, J * d)) / std::sqrt(domain.volume()) / static_cast<double>(N);
  out.coeffs.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) out.coeffs[k] = scale * static_cast<double>(counts[k]);
  out.out_of_domain_fraction = static_cast<double>(outside) / static_cast<double>(N);
  return out;
}

CoeffPyramid dwt_forward(std::span<const double> coeffs, const Box& domain, const WaveletSpec& spec,
                         std::span<const int> axis_order) {
  const int d = domain.dim();
  const int J = infer_level(coeffs.size(), d);
  if (J < spec.j0) {
    throw std::invalid_argument("finest level " + std::to_string(J) + " is below the coarsest level " +
                                std::to_string(spec.j0));
  }
  const auto axes = resolve_axis_order(axis_order, d);
  CoeffPyramid p;
  p.dim = d;
  p.J = J;
  p.j0 = spec.j0;
  p.domain = domain;
  p.values.assign(coeffs.begin(), coeffs.end());
  const std::size_t side = p.side();
  for (int j = J - 1; j >= spec.j0; --j) {
    const std::size_t m = std::size_t{2} << j;
    for (int axis : axes) {
      apply_along_axis(p.values, d, side, m, axis, [&](const double* in, double* out, std::size_t len) {
        analysis_step(in, out, len, spec.lowpass, spec.highpass);
      });
    }
  }
  p.kept_fraction = p.detail_count() ? static_cast<double>(p.nonzero_details()) / static_cast<double>(p.detail_count()) : 1.0;
  return p;
}

CoeffPyramid dwt_forward(const BinnedCoefficients& binned, const WaveletSpec& spec) {
  return dwt_forward(binned.coeffs, binned.domain, spec);
}

std::vector<double> dwt_inverse(const CoeffPyramid& pyramid, const WaveletSpec& spec) {
  const int d = pyramid.dim;
  if (infer_level(pyramid.values.size(), d) != pyramid.J) throw std::invalid_argument("pyramid size mismatch");
  std::vector<double> data = pyramid.values;
  const std::size_t side = pyramid.side();
  for (int j = pyramid.j0; j < pyramid.J; ++j) {
    const std::size_t m = std::size_t{2} << j;
    for (int axis = d - 1; axis >= 0; --axis) {
      apply_along_axis(data, d, side, m, axis, [&](const double* in, double* out, std::size_t len) {
        synthesis_step(in, out, len, spec.lowpass, spec.highpass);
      });
    }
  }
  return data;
}

CoeffPyramid hard_threshold(CoeffPyramid pyramid, double eta) {
  if (!(eta >= 0.0)) throw std::invalid_argument("threshold must be non-negative");
  const std::size_t approx_side = std::size_t{1} << pyramid.j0;
  const std::size_t side = pyramid.side();
  for (std::size_t i = 0; i < pyramid.values.size(); ++i) {
    const auto idx = unflatten(i, pyramid.dim, side);
    bool approx = true;
    for (int a = 0; a < pyramid.dim; ++a) approx = approx && idx[static_cast<std::size_t>(a)] < approx_side;
    if (!approx && std::abs(pyramid.values[i]) < eta) pyramid.values[i] = 0.0;
  }
  const auto total = pyramid.detail_count();
  pyramid.kept_fraction = total ? static_cast<double>(pyramid.nonzero_details()) / static_cast<double>(total) : 1.0;
  return pyramid;
}

CoeffPyramid truncate_levels(CoeffPyramid pyramid, int J) {
  for (std::size_t i = 0; i < pyramid.values.size(); ++i)
    if (coeff_position(pyramid, i).level >= J) pyramid.values[i] = 0.0;
  const auto total = pyramid.detail_count();
  pyramid.kept_fraction = total ? static_cast<double>(pyramid.nonzero_details()) / static_cast<double>(total) : 1.0;
  return pyramid;
}

double DensityEstimate::grid_point(int axis, std::size_t k) const noexcept {
  const auto& iv = domain.axes[static_cast<std::size_t>(axis)];
  return iv.lo + (static_cast<double>(k) + 0.5) * iv.length() / static_cast<double>(side());
}

double DensityEstimate::value_at(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dim)) throw std::invalid_argument("evaluation point has wrong dimension");
  const std::size_t n = side();
  std::array<std::size_t, 3> i0{};
  std::array<double, 3> w{};
  for (int a = 0; a < dim; ++a) {
    const auto& iv = domain.axes[static_cast<std::size_t>(a)];
    const double t = (x[static_cast<std::size_t>(a)] - iv.lo) / iv.length() * static_cast<double>(n) - 0.5;
    if (n == 1) {
      i0[static_cast<std::size_t>(a)] = 0;
      w[static_cast<std::size_t>(a)] = 0.0;
      continue;
    }
    const double fl = std::clamp(std::floor(t), 0.0, static_cast<double>(n - 2));
    i0[static_cast<std::size_t>(a)] = static_cast<std::size_t>(fl);
    w[static_cast<std::size_t>(a)] = t - fl;
  }
  double acc = 0.0;
  for (int corner = 0; corner < (1 << dim); ++corner) {
    double weight = 1.0;
    std::size_t flat = 0;
    for (int a = 0; a < dim; ++a) {
      const bool up = (corner >> a) & 1;
      const auto ua = static_cast<std::size_t>(a);
      if (up && n == 1) {
        weight = 0.0;
        break;
      }
      weight *= up ? w[ua] : 1.0 - w[ua];
      flat = flat * n + i0[ua] + (up ? 1 : 0);
    }
    if (weight != 0.0) acc += weight * values[flat];
  }
  return acc;
}

double DensityEstimate::integral() const noexcept {
  double s = 0.0;
  for (double v : values) s += v;
  return s * domain.volume() / static_cast<double>(values.size());
}

DensityEstimate evaluate_on_grid(const CoeffPyramid& pyramid, const WaveletSpec& spec) {
  DensityEstimate est;
  est.dim = pyramid.dim;
  est.J = pyramid.J;
  est.domain = pyramid.domain;
  est.values = dwt_inverse(pyramid, spec);
  const double scale = std::sqrt(std::ldexp(1.0, pyramid.J * pyramid.dim)) / std::sqrt(pyramid.domain.volume());
  for (auto& v : est.values) v *= scale;
  est.pyramid = pyramid;
  est.kept_fraction = pyramid.kept_fraction;
  return est;
}

void write_pyramid_csv(std::ostream& out, const CoeffPyramid& pyramid) {
  out << "level,orientation";
  if (pyramid.dim == 1) {
    out << ",index";
  } else {
    for (int a = 0; a < pyramid.dim; ++a) out << ",index" << a;
  }
  out << ",value\n";
  for (std::size_t i = 0; i < pyramid.values.size(); ++i) {
    const auto pos = coeff_position(pyramid, i);
    out << pos.level << ',' << pos.orientation;
    for (int a = 0; a < pyramid.dim; ++a) out << ',' << pos.index[static_cast<std::size_t>(a)];
    out << ',' << csv::format_double(pyramid.values[i]) << '\n';
  }
}

void write_grid_csv(std::ostream& out, const DensityEstimate& estimate) {
  static constexpr const char* names[] = {"x", "y", "z"};
  for (int a = 0; a < estimate.dim; ++a) out << names[a] << ',';
  out << "value\n";
  for (std::size_t i = 0; i < estimate.values.size(); ++i) {
    const auto idx = unflatten(i, estimate.dim, estimate.side());
    for (int a = 0; a < estimate.dim; ++a)
      out << csv::format_double(estimate.grid_point(a, idx[static_cast<std::size_t>(a)])) << ',';
    out << csv::format_double(estimate.values[i]) << '\n';
  }
}

}  // namespace bmc
