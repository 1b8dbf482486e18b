#pragma once

// Straight-line reference implementations used only by the tests. They share
// no code with the library so agreement is meaningful.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

#include "repgeo/layers.hpp"
#include "repgeo/path.hpp"
#include "repgeo/stack.hpp"
#include "repgeo/tensor.hpp"

namespace oracle {

using repgeo::Shape;
using repgeo::Tensor;

inline Tensor uniform(Shape shape, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(std::move(shape));
  for (auto& v : t.storage()) v = u(rng);
  return t;
}

// Values bounded away from zero with random sign, so rectifiers and pooling
// ties stay clear of their kinks.
inline Tensor signed_away_from_zero(Shape shape, std::uint64_t seed, double gap = 0.05) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(gap, 1.0);
  std::bernoulli_distribution coin(0.5);
  Tensor t(std::move(shape));
  for (auto& v : t.storage()) v = coin(rng) ? u(rng) : -u(rng);
  return t;
}

// Cross-correlation by direct summation. pad is the number of zero rows and
// columns added before the first sample.
inline Tensor conv2d(const Tensor& x, const Tensor& w, std::size_t stride, std::size_t pad,
                     std::size_t out_h, std::size_t out_w) {
  const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const std::size_t CO = w.dim(0), KH = w.dim(2), KW = w.dim(3);
  Tensor y({CO, out_h, out_w});
  for (std::size_t o = 0; o < CO; ++o)
    for (std::size_t i = 0; i < out_h; ++i)
      for (std::size_t j = 0; j < out_w; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t a = 0; a < KH; ++a)
            for (std::size_t b = 0; b < KW; ++b) {
              const long yy = static_cast<long>(i * stride + a) - static_cast<long>(pad);
              const long xx = static_cast<long>(j * stride + b) - static_cast<long>(pad);
              if (yy < 0 || xx < 0 || yy >= static_cast<long>(H) || xx >= static_cast<long>(W))
                continue;
              s += w[((o * C + c) * KH + a) * KW + b] * x.at(c, yy, xx);
            }
        y.at(o, i, j) = s;
      }
  return y;
}

inline Tensor block_max(const Tensor& x, std::size_t k) {
  Tensor y({x.dim(0), x.dim(1) / k, x.dim(2) / k});
  for (std::size_t c = 0; c < y.dim(0); ++c)
    for (std::size_t i = 0; i < y.dim(1); ++i)
      for (std::size_t j = 0; j < y.dim(2); ++j) {
        double m = -INFINITY;
        for (std::size_t a = 0; a < k; ++a)
          for (std::size_t b = 0; b < k; ++b) m = std::max(m, x.at(c, i * k + a, j * k + b));
        y.at(c, i, j) = m;
      }
  return y;
}

inline Tensor hann(std::size_t m) {
  std::vector<double> w(m);
  for (std::size_t i = 0; i < m; ++i)
    w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                 static_cast<double>(m - 1)));
  Tensor g({m, m});
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) s += (g[i * m + j] = w[i] * w[j]);
  for (auto& v : g.storage()) v /= s;
  return g;
}

// Square, blur with g (zero padded, (K - stride) / 2 leading pad), subsample,
// then sqrt(. + eps).
inline Tensor l2pool(const Tensor& x, const Tensor& g, std::size_t stride, double eps) {
  const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2), K = g.dim(0);
  const std::size_t OH = (H + stride - 1) / stride, OW = (W + stride - 1) / stride;
  const std::size_t total_y = std::max<long>(0, static_cast<long>((OH - 1) * stride + K) -
                                                    static_cast<long>(H));
  const std::size_t total_x = std::max<long>(0, static_cast<long>((OW - 1) * stride + K) -
                                                    static_cast<long>(W));
  const long py = static_cast<long>(total_y / 2), px = static_cast<long>(total_x / 2);
  Tensor y({C, OH, OW});
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < OH; ++i)
      for (std::size_t j = 0; j < OW; ++j) {
        double s = 0.0;
        for (std::size_t a = 0; a < K; ++a)
          for (std::size_t b = 0; b < K; ++b) {
            const long yy = static_cast<long>(i * stride + a) - py;
            const long xx = static_cast<long>(j * stride + b) - px;
            if (yy < 0 || xx < 0 || yy >= static_cast<long>(H) || xx >= static_cast<long>(W))
              continue;
            const double v = x.at(c, yy, xx);
            s += g[a * K + b] * v * v;
          }
        y.at(c, i, j) = std::sqrt(s + eps);
      }
  return y;
}

// |DFT| by the O(n^4) double sum.
inline Tensor dft_magnitude(const Tensor& x) {
  const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
  Tensor y(x.shape());
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t u = 0; u < H; ++u)
      for (std::size_t v = 0; v < W; ++v) {
        std::complex<double> s = 0.0;
        for (std::size_t m = 0; m < H; ++m)
          for (std::size_t n = 0; n < W; ++n) {
            const double ph = -2.0 * std::numbers::pi *
                              (static_cast<double>(u * m) / static_cast<double>(H) +
                               static_cast<double>(v * n) / static_cast<double>(W));
            s += x.at(c, m, n) * std::polar(1.0, ph);
          }
        y.at(c, u, v) = std::abs(s);
      }
  return y;
}

inline Tensor roll(const Tensor& x, long dy, long dx) {
  const long H = static_cast<long>(x.dim(1)), W = static_cast<long>(x.dim(2));
  Tensor y(x.shape());
  for (std::size_t c = 0; c < x.dim(0); ++c)
    for (long i = 0; i < H; ++i)
      for (long j = 0; j < W; ++j)
        y.at(c, static_cast<std::size_t>(((i + dy) % H + H) % H),
             static_cast<std::size_t>(((j + dx) % W + W) % W)) = x.at(c, i, j);
  return y;
}

// Random orthogonal n x n matrix (QR of a Gaussian matrix by Gram-Schmidt).
inline std::vector<double> random_orthogonal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> q(n * n);
  for (auto& v : q) v = g(rng);
  for (std::size_t i = 0; i < n; ++i) {
    double* r = q.data() + i * n;
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t k = 0; k < i; ++k) {
        const double* p = q.data() + k * n;
        double d = 0.0;
        for (std::size_t j = 0; j < n; ++j) d += r[j] * p[j];
        for (std::size_t j = 0; j < n; ++j) r[j] -= d * p[j];
      }
    double nn = 0.0;
    for (std::size_t j = 0; j < n; ++j) nn += r[j] * r[j];
    nn = std::sqrt(nn);
    for (std::size_t j = 0; j < n; ++j) r[j] /= nn;
  }
  return q;
}

// rep'(x) = Q rep(x) for a fixed orthogonal Q.
class RotatedRepresentation final : public repgeo::Representation {
 public:
  RotatedRepresentation(const repgeo::Representation& inner, std::uint64_t seed)
      : inner_(inner), n_(inner.dimension()), q_(random_orthogonal(n_, seed)) {}

  const Shape& input_shape() const override { return inner_.input_shape(); }
  std::size_t dimension() const override { return n_; }

  Tensor evaluate(const Tensor& x) const override { return rotate(inner_.evaluate(x), false); }

  repgeo::Linearization linearize(const Tensor& x) const override {
    auto lin = inner_.linearize(x);
    auto back = lin.pullback;
    return {rotate(lin.value, false),
            [this, back](const Tensor& c) { return back(rotate(c, true)); }};
  }

 private:
  Tensor rotate(const Tensor& v, bool transpose) const {
    Tensor out({n_});
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_; ++j) s += (transpose ? q_[j * n_ + i] : q_[i * n_ + j]) * v[j];
      out[i] = s;
    }
    return out;
  }

  const repgeo::Representation& inner_;
  std::size_t n_;
  std::vector<double> q_;
};

}  // namespace oracle
