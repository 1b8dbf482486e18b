#include "repgeo/layers.hpp"

#include <fftw3.h>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

#include "repgeo/error.hpp"

namespace repgeo {

namespace {

struct Window {
  std::size_t out = 0;
  std::size_t pad_before = 0;
};

// Output extent and leading zero padding along one axis.
Window conv_window(std::size_t in, std::size_t k, std::size_t stride, Padding padding) {
  if (padding == Padding::valid) {
    if (in < k) return {0, 0};
    return {(in - k) / stride + 1, 0};
  }
  const std::size_t out = (in + stride - 1) / stride;
  const std::ptrdiff_t total =
      std::max<std::ptrdiff_t>(static_cast<std::ptrdiff_t>((out - 1) * stride + k) -
                                   static_cast<std::ptrdiff_t>(in),
                               0);
  return {out, static_cast<std::size_t>(total / 2)};
}

void require_image(const Shape& s, const char* what) {
  if (s.size() != 3) {
    throw ShapeError(std::string(what) + ": expected a (channels, height, width) tensor, got " +
                     shape_to_string(s));
  }
}

void require_cotangent(const Tensor& cot, const Shape& expected, const char* what) {
  if (cot.shape() != expected) {
    throw ShapeError(std::string(what) + ": cotangent shape " + shape_to_string(cot.shape()) +
                     " does not match output shape " + shape_to_string(expected));
  }
}

Shape conv2d_shape(const Shape& in, const Tensor& filters, std::size_t stride, Padding padding) {
  require_image(in, "conv2d");
  if (filters.rank() != 4) {
    throw ConfigError("conv2d: filters must be (out, in, kh, kw), got " +
                      shape_to_string(filters.shape()));
  }
  if (stride < 1) throw ConfigError("conv2d: stride must be >= 1");
  if (filters.dim(1) != in[0]) {
    throw ShapeError("conv2d: filter input channels " + std::to_string(filters.dim(1)) +
                     " != image channels " + std::to_string(in[0]));
  }
  const auto wy = conv_window(in[1], filters.dim(2), stride, padding);
  const auto wx = conv_window(in[2], filters.dim(3), stride, padding);
  if (wy.out == 0 || wx.out == 0) {
    throw ShapeError("conv2d: kernel " + std::to_string(filters.dim(2)) + "x" +
                     std::to_string(filters.dim(3)) + " larger than input " +
                     std::to_string(in[1]) + "x" + std::to_string(in[2]) + " with valid padding");
  }
  return {filters.dim(0), wy.out, wx.out};
}

Shape maxpool_shape(const Shape& in, std::size_t extent, std::size_t stride) {
  require_image(in, "maxpool");
  if (extent < 1 || stride < 1) throw ConfigError("maxpool: extent and stride must be >= 1");
  if (in[1] < extent || in[2] < extent) {
    throw ConfigError("maxpool: input " + std::to_string(in[1]) + "x" + std::to_string(in[2]) +
                      " smaller than pooling extent " + std::to_string(extent));
  }
  return {in[0], (in[1] - extent) / stride + 1, (in[2] - extent) / stride + 1};
}

void validate_l2_kernel(const Tensor& kernel, double eps) {
  if (kernel.rank() != 2) {
    throw ConfigError("l2pool: kernel must be 2D, got " + shape_to_string(kernel.shape()));
  }
  double sum = 0.0;
  for (double v : kernel.values()) {
    if (v < 0.0 || !std::isfinite(v)) throw ConfigError("l2pool: kernel has a negative entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("l2pool: kernel must have unit sum, got " + std::to_string(sum));
  }
  if (!(eps > 0.0)) throw ConfigError("l2pool: eps must be positive");
}

Shape l2pool_shape(const Shape& in, const Tensor& kernel, std::size_t stride) {
  require_image(in, "l2pool");
  if (stride < 1) throw ConfigError("l2pool: stride must be >= 1");
  return {in[0], conv_window(in[1], kernel.dim(0), stride, Padding::same).out,
          conv_window(in[2], kernel.dim(1), stride, Padding::same).out};
}

void validate_affine(const AffinePreprocess& p) {
  const std::size_t n = p.permutation.size();
  if (p.means.size() != n) {
    throw ConfigError("affine_preprocess: " + std::to_string(p.means.size()) +
                      " channel means for " + std::to_string(n) + " channels");
  }
  std::vector<bool> seen(n, false);
  for (auto idx : p.permutation) {
    if (idx >= n || seen[idx]) {
      throw ConfigError("affine_preprocess: channel permutation is not a bijection");
    }
    seen[idx] = true;
  }
}

// Depthwise correlation of `sq` with `kernel` on the strided output grid.
// `acc` has the pooled shape.
// Zero-bordered copy of one plane set so the pooling loops need no bounds checks.
struct PaddedPlanes {
  std::size_t C, H, W, PH, PW, pad_y, pad_x;
  std::vector<double> data;

  PaddedPlanes(std::size_t c, std::size_t h, std::size_t w, std::size_t kh, std::size_t kw,
               std::size_t stride)
      : C(c), H(h), W(w) {
    const auto wy = conv_window(h, kh, stride, Padding::same);
    const auto wx = conv_window(w, kw, stride, Padding::same);
    pad_y = wy.pad_before;
    pad_x = wx.pad_before;
    PH = std::max(pad_y + h, (wy.out - 1) * stride + kh);
    PW = std::max(pad_x + w, (wx.out - 1) * stride + kw);
    data.assign(C * PH * PW, 0.0);
  }

  double* plane(std::size_t c) { return data.data() + c * PH * PW; }
  double* interior(std::size_t c) { return plane(c) + pad_y * PW + pad_x; }
};

// A kernel k with k_ij = u_i v_j lets both passes run as a column pass
// followed by a row pass. Returns false (leaving u, v untouched) otherwise.
bool separable_factors(const Tensor& kernel, std::vector<double>& u, std::vector<double>& v) {
  const std::size_t KH = kernel.dim(0), KW = kernel.dim(1);
  std::vector<double> rows(KH, 0.0), cols(KW, 0.0);
  double total = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < KH; ++i) {
    for (std::size_t j = 0; j < KW; ++j) {
      const double k = kernel[i * KW + j];
      rows[i] += k;
      cols[j] += k;
      total += k;
      peak = std::max(peak, std::abs(k));
    }
  }
  if (!(std::abs(total) > 0.0)) return false;
  for (std::size_t i = 0; i < KH; ++i) {
    for (std::size_t j = 0; j < KW; ++j) {
      if (std::abs(kernel[i * KW + j] - rows[i] * cols[j] / total) > 1e-14 * peak) return false;
    }
  }
  for (auto& r : rows) r /= total;
  u = std::move(rows);
  v = std::move(cols);
  return true;
}

void depthwise_strided(const Tensor& sq, const Tensor& kernel, std::size_t stride, Tensor& acc) {
  const std::size_t C = sq.channels(), H = sq.height(), W = sq.width();
  const std::size_t KH = kernel.dim(0), KW = kernel.dim(1);
  const std::size_t OH = acc.height(), OW = acc.width();
  PaddedPlanes pad(C, H, W, KH, KW, stride);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t y = 0; y < H; ++y) {
      std::copy_n(sq.data() + (c * H + y) * W, W, pad.interior(c) + y * pad.PW);
    }
  }
  std::vector<double> u, v;
  if (separable_factors(kernel, u, v)) {
    std::vector<double> tmp(pad.PW);
    for (std::size_t c = 0; c < C; ++c) {
      const double* src = pad.plane(c);
      double* dst = acc.data() + c * OH * OW;
      for (std::size_t oy = 0; oy < OH; ++oy) {
        std::fill(tmp.begin(), tmp.end(), 0.0);
        for (std::size_t ky = 0; ky < KH; ++ky) {
          const double* row = src + (oy * stride + ky) * pad.PW;
          for (std::size_t x = 0; x < pad.PW; ++x) tmp[x] += u[ky] * row[x];
        }
        double* out = dst + oy * OW;
        for (std::size_t kx = 0; kx < KW; ++kx) {
          const double* r = tmp.data() + kx;
          for (std::size_t ox = 0; ox < OW; ++ox) out[ox] += v[kx] * r[ox * stride];
        }
      }
    }
    return;
  }
  for (std::size_t c = 0; c < C; ++c) {
    const double* src = pad.plane(c);
    double* dst = acc.data() + c * OH * OW;
    for (std::size_t oy = 0; oy < OH; ++oy) {
      double* out = dst + oy * OW;
      for (std::size_t ky = 0; ky < KH; ++ky) {
        const double* row = src + (oy * stride + ky) * pad.PW;
        for (std::size_t kx = 0; kx < KW; ++kx) {
          const double g = kernel[ky * KW + kx];
          const double* r = row + kx;
          for (std::size_t ox = 0; ox < OW; ++ox) out[ox] += g * r[ox * stride];
        }
      }
    }
  }
}

// Adjoint of depthwise_strided.
void depthwise_strided_adjoint(const Tensor& g_out, const Tensor& kernel, std::size_t stride,
                               Tensor& g_in) {
  const std::size_t C = g_in.channels(), H = g_in.height(), W = g_in.width();
  const std::size_t KH = kernel.dim(0), KW = kernel.dim(1);
  const std::size_t OH = g_out.height(), OW = g_out.width();
  PaddedPlanes pad(C, H, W, KH, KW, stride);
  std::vector<double> u, v;
  const bool separable = separable_factors(kernel, u, v);
  std::vector<double> tmp(separable ? pad.PW : 0);
  for (std::size_t c = 0; c < C; ++c) {
    const double* src = g_out.data() + c * OH * OW;
    double* dst = pad.plane(c);
    for (std::size_t oy = 0; oy < OH && separable; ++oy) {
      std::fill(tmp.begin(), tmp.end(), 0.0);
      const double* gr = src + oy * OW;
      for (std::size_t kx = 0; kx < KW; ++kx) {
        double* r = tmp.data() + kx;
        for (std::size_t ox = 0; ox < OW; ++ox) r[ox * stride] += v[kx] * gr[ox];
      }
      for (std::size_t ky = 0; ky < KH; ++ky) {
        double* row = dst + (oy * stride + ky) * pad.PW;
        for (std::size_t x = 0; x < pad.PW; ++x) row[x] += u[ky] * tmp[x];
      }
    }
    for (std::size_t oy = 0; oy < OH && !separable; ++oy) {
      const double* gr = src + oy * OW;
      for (std::size_t ky = 0; ky < KH; ++ky) {
        double* row = dst + (oy * stride + ky) * pad.PW;
        for (std::size_t kx = 0; kx < KW; ++kx) {
          const double g = kernel[ky * KW + kx];
          double* r = row + kx;
          for (std::size_t ox = 0; ox < OW; ++ox) r[ox * stride] += g * gr[ox];
        }
      }
    }
    for (std::size_t y = 0; y < H; ++y) {
      std::copy_n(pad.interior(c) + y * pad.PW, W, g_in.data() + (c * H + y) * W);
    }
  }
}

// FFTW plans are cached per image size; planning is not thread safe but
// executing an existing plan on new arrays is.
class FftPlans {
 public:
  static FftPlans& instance() {
    static FftPlans plans;
    return plans;
  }

  fftw_plan forward(int h, int w) {
    std::lock_guard lock(mu_);
    auto it = plans_.find({h, w});
    if (it != plans_.end()) return it->second;
    std::vector<fftw_complex> a(static_cast<std::size_t>(h) * w), b(a.size());
    fftw_plan p = fftw_plan_dft_2d(h, w, a.data(), b.data(), FFTW_FORWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(std::make_pair(h, w), p);
    return p;
  }

  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

 private:
  FftPlans() = default;
  ~FftPlans() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mu_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

using Complex = std::complex<double>;

void forward_dft(std::size_t h, std::size_t w, std::vector<Complex>& in, std::vector<Complex>& out) {
  fftw_plan plan = FftPlans::instance().forward(static_cast<int>(h), static_cast<int>(w));
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace

std::string_view to_string(Padding padding) {
  return padding == Padding::same ? "same" : "valid";
}

Padding padding_from_string(std::string_view name) {
  if (name == "same") return Padding::same;
  if (name == "valid") return Padding::valid;
  throw ConfigError("unknown padding policy '" + std::string(name) + "'");
}

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::halfwave: return "halfwave";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::l2pool: return "l2pool";
    case LayerKind::fourier_magnitude: return "fourier_magnitude";
    case LayerKind::identity: return "identity";
    case LayerKind::affine_preprocess: return "affine_preprocess";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// conv2d

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

struct ConvGeometry {
  std::size_t C, H, W, CO, KH, KW, OH, OW, stride;
  std::ptrdiff_t pad_y, pad_x;
};

ConvGeometry conv_geometry(const Tensor& x, const Tensor& filters, std::size_t stride,
                           Padding padding, const Shape& out_shape) {
  const std::size_t H = x.height(), W = x.width(), KH = filters.dim(2), KW = filters.dim(3);
  return {x.channels(),
          H,
          W,
          filters.dim(0),
          KH,
          KW,
          out_shape[1],
          out_shape[2],
          stride,
          static_cast<std::ptrdiff_t>(conv_window(H, KH, stride, padding).pad_before),
          static_cast<std::ptrdiff_t>(conv_window(W, KW, stride, padding).pad_before)};
}

// Unfolds x into a (C*KH*KW, OH*OW) patch matrix; out-of-image taps are 0.
RowMatrix im2col(const Tensor& x, const ConvGeometry& g) {
  RowMatrix cols = RowMatrix::Zero(static_cast<Eigen::Index>(g.C * g.KH * g.KW),
                                   static_cast<Eigen::Index>(g.OH * g.OW));
  for (std::size_t c = 0; c < g.C; ++c) {
    const double* src = x.data() + c * g.H * g.W;
    for (std::size_t ky = 0; ky < g.KH; ++ky) {
      for (std::size_t kx = 0; kx < g.KW; ++kx) {
        double* dst = cols.data() + ((c * g.KH + ky) * g.KW + kx) * g.OH * g.OW;
        for (std::size_t oy = 0; oy < g.OH; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - g.pad_y;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.H)) continue;
          const double* row = src + iy * static_cast<std::ptrdiff_t>(g.W);
          double* out = dst + oy * g.OW;
          for (std::size_t ox = 0; ox < g.OW; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - g.pad_x;
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.W)) out[ox] = row[ix];
          }
        }
      }
    }
  }
  return cols;
}

// Adjoint of im2col: scatter-adds patch columns back onto the image grid.
void col2im(const RowMatrix& cols, const ConvGeometry& g, Tensor& gx) {
  for (std::size_t c = 0; c < g.C; ++c) {
    double* dst = gx.data() + c * g.H * g.W;
    for (std::size_t ky = 0; ky < g.KH; ++ky) {
      for (std::size_t kx = 0; kx < g.KW; ++kx) {
        const double* src = cols.data() + ((c * g.KH + ky) * g.KW + kx) * g.OH * g.OW;
        for (std::size_t oy = 0; oy < g.OH; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - g.pad_y;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.H)) continue;
          double* row = dst + iy * static_cast<std::ptrdiff_t>(g.W);
          const double* in = src + oy * g.OW;
          for (std::size_t ox = 0; ox < g.OW; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - g.pad_x;
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.W)) row[ix] += in[ox];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d_forward(const Tensor& x, const Tensor& filters, std::size_t stride,
                      Padding padding) {
  const Shape out_shape = conv2d_shape(x.shape(), filters, stride, padding);
  const ConvGeometry g = conv_geometry(x, filters, stride, padding, out_shape);
  const RowMatrix cols = im2col(x, g);
  const ConstMatrixMap w(filters.data(), static_cast<Eigen::Index>(g.CO),
                         static_cast<Eigen::Index>(g.C * g.KH * g.KW));
  Tensor y(out_shape);
  MatrixMap out(y.data(), static_cast<Eigen::Index>(g.CO), static_cast<Eigen::Index>(g.OH * g.OW));
  out.noalias() = w * cols;
  return y;
}

Tensor conv2d_vjp(const Tensor& x, const Tensor& filters, std::size_t stride, Padding padding,
                  const Tensor& cotangent) {
  const Shape out_shape = conv2d_shape(x.shape(), filters, stride, padding);
  require_cotangent(cotangent, out_shape, "conv2d vjp");
  const ConvGeometry g = conv_geometry(x, filters, stride, padding, out_shape);
  const ConstMatrixMap w(filters.data(), static_cast<Eigen::Index>(g.CO),
                         static_cast<Eigen::Index>(g.C * g.KH * g.KW));
  const ConstMatrixMap gy(cotangent.data(), static_cast<Eigen::Index>(g.CO),
                          static_cast<Eigen::Index>(g.OH * g.OW));
  const RowMatrix gcols = w.transpose() * gy;
  Tensor gx(x.shape());
  col2im(gcols, g, gx);
  return gx;
}

// ---------------------------------------------------------------------------
// halfwave

Tensor halfwave_forward(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.storage()) v = std::max(v, 0.0);
  return y;
}

Tensor halfwave_vjp(const Tensor& x, const Tensor& cotangent) {
  require_cotangent(cotangent, x.shape(), "halfwave vjp");
  Tensor g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] > 0.0 ? cotangent[i] : 0.0;
  return g;
}

// ---------------------------------------------------------------------------
// maxpool

Tensor maxpool_forward(const Tensor& x, std::size_t extent, std::size_t stride) {
  const Shape out_shape = maxpool_shape(x.shape(), extent, stride);
  const std::size_t C = x.channels(), H = x.height(), W = x.width();
  const std::size_t OH = out_shape[1], OW = out_shape[2];
  Tensor y(out_shape);
  for (std::size_t c = 0; c < C; ++c) {
    const double* src = x.data() + c * H * W;
    for (std::size_t oy = 0; oy < OH; ++oy) {
      for (std::size_t ox = 0; ox < OW; ++ox) {
        double best = src[oy * stride * W + ox * stride];
        for (std::size_t dy = 0; dy < extent; ++dy) {
          const double* row = src + (oy * stride + dy) * W + ox * stride;
          for (std::size_t dx = 0; dx < extent; ++dx) best = std::max(best, row[dx]);
        }
        y[(c * OH + oy) * OW + ox] = best;
      }
    }
  }
  return y;
}

Tensor maxpool_vjp(const Tensor& x, std::size_t extent, std::size_t stride,
                   const Tensor& cotangent) {
  const Shape out_shape = maxpool_shape(x.shape(), extent, stride);
  require_cotangent(cotangent, out_shape, "maxpool vjp");
  const std::size_t C = x.channels(), H = x.height(), W = x.width();
  const std::size_t OH = out_shape[1], OW = out_shape[2];
  Tensor g(x.shape());
  for (std::size_t c = 0; c < C; ++c) {
    const double* src = x.data() + c * H * W;
    double* dst = g.data() + c * H * W;
    for (std::size_t oy = 0; oy < OH; ++oy) {
      for (std::size_t ox = 0; ox < OW; ++ox) {
        std::size_t arg = oy * stride * W + ox * stride;
        double best = src[arg];
        for (std::size_t dy = 0; dy < extent; ++dy) {
          for (std::size_t dx = 0; dx < extent; ++dx) {
            const std::size_t idx = (oy * stride + dy) * W + ox * stride + dx;
            if (src[idx] > best) {
              best = src[idx];
              arg = idx;
            }
          }
        }
        dst[arg] += cotangent[(c * OH + oy) * OW + ox];
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// l2pool

Tensor l2pool_forward(const Tensor& x, const Tensor& kernel, std::size_t stride, double eps) {
  validate_l2_kernel(kernel, eps);
  Tensor pooled(l2pool_shape(x.shape(), kernel, stride));
  Tensor sq = x;
  for (auto& v : sq.storage()) v *= v;
  depthwise_strided(sq, kernel, stride, pooled);
  for (auto& v : pooled.storage()) v = std::sqrt(v + eps);
  return pooled;
}

Tensor l2pool_vjp(const Tensor& x, const Tensor& kernel, std::size_t stride, double eps,
                  const Tensor& cotangent) {
  return l2pool_vjp(x, l2pool_forward(x, kernel, stride, eps), kernel, stride, cotangent);
}

Tensor l2pool_vjp(const Tensor& x, const Tensor& y, const Tensor& kernel, std::size_t stride,
                  const Tensor& cotangent) {
  if (y.shape() != l2pool_shape(x.shape(), kernel, stride)) {
    throw ShapeError("l2pool vjp: output shape " + shape_to_string(y.shape()) +
                     " inconsistent with input " + shape_to_string(x.shape()));
  }
  require_cotangent(cotangent, y.shape(), "l2pool vjp");
  // d sqrt(p + eps) / dp = 1 / (2 y)
  Tensor gp(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) gp[i] = cotangent[i] / (2.0 * y[i]);

  Tensor gx(x.shape());
  depthwise_strided_adjoint(gp, kernel, stride, gx);
  // d x^2 / dx = 2 x
  for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= 2.0 * x[i];
  return gx;
}

Tensor hanning_kernel(std::size_t extent) {
  if (extent < 2) throw ConfigError("hanning window needs extent >= 2");
  std::vector<double> w(extent);
  for (std::size_t i = 0; i < extent; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                 static_cast<double>(extent - 1)));
  }
  Tensor k({extent, extent});
  double sum = 0.0;
  for (std::size_t i = 0; i < extent; ++i) {
    for (std::size_t j = 0; j < extent; ++j) {
      k[i * extent + j] = w[i] * w[j];
      sum += w[i] * w[j];
    }
  }
  k *= 1.0 / sum;
  return k;
}

// ---------------------------------------------------------------------------
// fourier magnitude

Tensor fourier_magnitude_forward(const Tensor& x) {
  require_image(x.shape(), "fourier_magnitude");
  const std::size_t C = x.channels(), H = x.height(), W = x.width(), n = H * W;
  Tensor y(x.shape());
  std::vector<Complex> in(n), out(n);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < n; ++i) in[i] = x[c * n + i];
    forward_dft(H, W, in, out);
    for (std::size_t i = 0; i < n; ++i) y[c * n + i] = std::abs(out[i]);
  }
  return y;
}

Tensor fourier_magnitude_vjp(const Tensor& x, const Tensor& cotangent, double guard) {
  require_image(x.shape(), "fourier_magnitude vjp");
  require_cotangent(cotangent, x.shape(), "fourier_magnitude vjp");
  const std::size_t C = x.channels(), H = x.height(), W = x.width(), n = H * W;
  Tensor g(x.shape());
  std::vector<Complex> in(n), spectrum(n), back(n);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < n; ++i) in[i] = x[c * n + i];
    forward_dft(H, W, in, spectrum);
    // d|Y_k|/dx_j = Re(conj(Y_k) e^{-i w_k j}) / |Y_k|, summed against the
    // cotangent this is Re(DFT(c * conj(Y) / |Y|)).
    for (std::size_t k = 0; k < n; ++k) {
      const double mag = std::abs(spectrum[k]);
      in[k] = mag < guard ? Complex{} : cotangent[c * n + k] * std::conj(spectrum[k]) / mag;
    }
    forward_dft(H, W, in, back);
    for (std::size_t i = 0; i < n; ++i) g[c * n + i] = back[i].real();
  }
  return g;
}

// ---------------------------------------------------------------------------
// Layer

Layer::Layer(Params params) : params_(std::move(params)) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Conv2d>) {
          if (p.filters.rank() != 4) {
            throw ConfigError("conv2d: filters must be (out, in, kh, kw), got " +
                              shape_to_string(p.filters.shape()));
          }
          if (p.stride < 1) throw ConfigError("conv2d: stride must be >= 1");
        } else if constexpr (std::is_same_v<T, MaxPool>) {
          if (p.extent < 1 || p.stride < 1) {
            throw ConfigError("maxpool: extent and stride must be >= 1");
          }
        } else if constexpr (std::is_same_v<T, L2Pool>) {
          validate_l2_kernel(p.kernel, p.eps);
          if (p.stride < 1) throw ConfigError("l2pool: stride must be >= 1");
        } else if constexpr (std::is_same_v<T, FourierMagnitude>) {
          if (!(p.guard >= 0.0)) throw ConfigError("fourier_magnitude: guard must be >= 0");
        } else if constexpr (std::is_same_v<T, AffinePreprocess>) {
          validate_affine(p);
        }
      },
      params_);
}

LayerKind Layer::kind() const {
  return static_cast<LayerKind>(params_.index());
}

Shape Layer::output_shape(const Shape& in) const {
  return std::visit(
      [&](const auto& p) -> Shape {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Conv2d>) {
          return conv2d_shape(in, p.filters, p.stride, p.padding);
        } else if constexpr (std::is_same_v<T, MaxPool>) {
          return maxpool_shape(in, p.extent, p.stride);
        } else if constexpr (std::is_same_v<T, L2Pool>) {
          return l2pool_shape(in, p.kernel, p.stride);
        } else if constexpr (std::is_same_v<T, FourierMagnitude>) {
          require_image(in, "fourier_magnitude");
          return in;
        } else if constexpr (std::is_same_v<T, AffinePreprocess>) {
          require_image(in, "affine_preprocess");
          if (in[0] != p.permutation.size()) {
            throw ShapeError("affine_preprocess: configured for " +
                             std::to_string(p.permutation.size()) + " channels, input has " +
                             std::to_string(in[0]));
          }
          return in;
        } else {
          return in;
        }
      },
      params_);
}

Tensor Layer::forward(const Tensor& x) const {
  return std::visit(
      [&](const auto& p) -> Tensor {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Conv2d>) {
          return conv2d_forward(x, p.filters, p.stride, p.padding);
        } else if constexpr (std::is_same_v<T, HalfWave>) {
          return halfwave_forward(x);
        } else if constexpr (std::is_same_v<T, MaxPool>) {
          return maxpool_forward(x, p.extent, p.stride);
        } else if constexpr (std::is_same_v<T, L2Pool>) {
          return l2pool_forward(x, p.kernel, p.stride, p.eps);
        } else if constexpr (std::is_same_v<T, FourierMagnitude>) {
          return fourier_magnitude_forward(x);
        } else if constexpr (std::is_same_v<T, Identity>) {
          return x;
        } else {
          const Shape s = output_shape(x.shape());
          const std::size_t plane = s[1] * s[2];
          Tensor y(s);
          for (std::size_t c = 0; c < s[0]; ++c) {
            const double* src = x.data() + p.permutation[c] * plane;
            double* dst = y.data() + c * plane;
            for (std::size_t i = 0; i < plane; ++i) dst[i] = p.scale * src[i] - p.means[c];
          }
          return y;
        }
      },
      params_);
}

Tensor Layer::vjp(const Tensor& x, const Tensor& cotangent) const {
  return std::visit(
      [&](const auto& p) -> Tensor {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Conv2d>) {
          return conv2d_vjp(x, p.filters, p.stride, p.padding, cotangent);
        } else if constexpr (std::is_same_v<T, HalfWave>) {
          return halfwave_vjp(x, cotangent);
        } else if constexpr (std::is_same_v<T, MaxPool>) {
          return maxpool_vjp(x, p.extent, p.stride, cotangent);
        } else if constexpr (std::is_same_v<T, L2Pool>) {
          return l2pool_vjp(x, p.kernel, p.stride, p.eps, cotangent);
        } else if constexpr (std::is_same_v<T, FourierMagnitude>) {
          return fourier_magnitude_vjp(x, cotangent, p.guard);
        } else if constexpr (std::is_same_v<T, Identity>) {
          require_cotangent(cotangent, x.shape(), "identity vjp");
          return cotangent;
        } else {
          const Shape s = output_shape(x.shape());
          require_cotangent(cotangent, s, "affine_preprocess vjp");
          const std::size_t plane = s[1] * s[2];
          Tensor g(x.shape());
          for (std::size_t c = 0; c < s[0]; ++c) {
            const double* src = cotangent.data() + c * plane;
            double* dst = g.data() + p.permutation[c] * plane;
            for (std::size_t i = 0; i < plane; ++i) dst[i] += p.scale * src[i];
          }
          return g;
        }
      },
      params_);
}

Tensor Layer::vjp(const Tensor& x, const Tensor& y, const Tensor& cotangent) const {
  if (const auto* p = std::get_if<L2Pool>(&params_)) {
    return l2pool_vjp(x, y, p->kernel, p->stride, cotangent);
  }
  return vjp(x, cotangent);
}

Tensor vjp(const Layer& layer, const Tensor& x, const Tensor& cotangent) {
  return layer.vjp(x, cotangent);
}

}  // namespace repgeo
