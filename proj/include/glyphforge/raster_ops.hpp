// Raster primitives: thresholding, exact Euclidean distance transform
// (two-pass Felzenszwalb-Huttenlocher lower-envelope method), integral-image
// box sums, factor-2 pyramids and bicubic/nearest resampling.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "glyphforge/core.hpp"

namespace glyphforge {

// out(x) = 1 iff field(x) >= threshold. threshold must lie in (0,1).
inline BinaryMask binarize(const ScalarField& field, double threshold) {
  assert(threshold > 0.0 && threshold < 1.0);
  BinaryMask out(field.width(), field.height());
  const double* src = field.data();
  uint8_t* dst = out.data();
  for (size_t i = 0; i < field.size(); ++i) dst[i] = src[i] >= threshold ? 1 : 0;
  return out;
}

namespace detail {

// 1D squared distance transform of a sampled function f, Felzenszwalb &
// Huttenlocher lower envelope of parabolas.
inline void edt_1d(const double* f, double* d, int* v, double* z, int n) {
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

// Squared distance from every pixel to the nearest seed (pixels where
// seed(x,y) != 0). Exact Euclidean metric.
inline ScalarField squared_edt_to_seeds(const BinaryMask& seeds) {
  const int w = seeds.width(), h = seeds.height();
  const double inf = 1e18;
  ScalarField d(w, h);
  // columns first
  {
    std::vector<double> f(h), out(h), z(h + 1);
    std::vector<int> v(h);
    for (int x = 0; x < w; ++x) {
      for (int y = 0; y < h; ++y) f[y] = seeds(x, y) ? 0.0 : inf;
      edt_1d(f.data(), out.data(), v.data(), z.data(), h);
      for (int y = 0; y < h; ++y) d(x, y) = out[y];
    }
  }
  // then rows
  {
    std::vector<double> f(w), out(w), z(w + 1);
    std::vector<int> v(w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) f[x] = d(x, y);
      edt_1d(f.data(), out.data(), v.data(), z.data(), w);
      for (int x = 0; x < w; ++x) d(x, y) = out[x];
    }
  }
  return d;
}

}  // namespace detail

// Distance from each pixel to the nearest pixel on the opposite side of the
// mask: foreground pixels measure to the nearest background pixel and vice
// versa. The minimum possible value is 1 (4-adjacent to the opposite side).
// Throws UniformMaskError when no boundary exists.
inline ScalarField distance_transform(const BinaryMask& mask) {
  if (mask.uniform()) throw UniformMaskError();
  const int w = mask.width(), h = mask.height();
  BinaryMask fg(w, h), bg(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      fg(x, y) = mask(x, y);
      bg(x, y) = mask(x, y) ? 0 : 1;
    }
  ScalarField d_to_fg = detail::squared_edt_to_seeds(fg);
  ScalarField d_to_bg = detail::squared_edt_to_seeds(bg);
  ScalarField out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      out(x, y) = std::sqrt(mask(x, y) ? d_to_bg(x, y) : d_to_fg(x, y));
  return out;
}

// Windowed sums with top-left anchoring, computed from a double integral
// image. sum has one entry per anchor whose window lies fully inside the
// field, i.e. dimensions (W-rect_w+1) x (H-rect_h+1).
inline ScalarField box_sum(const ScalarField& field, int rect_w, int rect_h) {
  const int w = field.width(), h = field.height();
  if (rect_w > w || rect_h > h)
    throw RectTooLargeError("box_sum: window " + std::to_string(rect_w) + "x" +
                            std::to_string(rect_h) + " exceeds field " + std::to_string(w) + "x" +
                            std::to_string(h));
  assert(rect_w >= 1 && rect_h >= 1);
  // integral(x,y) = sum of field over [0,x) x [0,y)
  std::vector<double> integral(static_cast<size_t>(w + 1) * (h + 1), 0.0);
  auto I = [&](int x, int y) -> double& { return integral[static_cast<size_t>(y) * (w + 1) + x]; };
  for (int y = 0; y < h; ++y) {
    double rowsum = 0.0;
    for (int x = 0; x < w; ++x) {
      rowsum += field(x, y);
      I(x + 1, y + 1) = I(x + 1, y) + rowsum;
    }
  }
  ScalarField out(w - rect_w + 1, h - rect_h + 1);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      out(x, y) = I(x + rect_w, y + rect_h) - I(x, y + rect_h) - I(x + rect_w, y) + I(x, y);
  return out;
}

struct MaskedBoxSum {
  ScalarField sum;   // anchor-indexed window sums (undefined entries are 0)
  BinaryMask valid;  // 1 where every pixel of the window is defined
};

// Same as box_sum but over a field with undefined pixels. An anchor is valid
// only when its whole window is defined.
inline MaskedBoxSum box_sum_masked(const ScalarField& field, const BinaryMask& defined, int rect_w,
                                   int rect_h) {
  const int w = field.width(), h = field.height();
  assert(defined.width() == w && defined.height() == h);
  if (rect_w > w || rect_h > h)
    throw RectTooLargeError("box_sum_masked: window exceeds field");
  std::vector<double> integral(static_cast<size_t>(w + 1) * (h + 1), 0.0);
  std::vector<int64_t> counts(static_cast<size_t>(w + 1) * (h + 1), 0);
  auto I = [&](int x, int y) -> double& { return integral[static_cast<size_t>(y) * (w + 1) + x]; };
  auto C = [&](int x, int y) -> int64_t& { return counts[static_cast<size_t>(y) * (w + 1) + x]; };
  for (int y = 0; y < h; ++y) {
    double rowsum = 0.0;
    int64_t rowcnt = 0;
    for (int x = 0; x < w; ++x) {
      if (defined(x, y)) {
        rowsum += field(x, y);
        ++rowcnt;
      }
      I(x + 1, y + 1) = I(x + 1, y) + rowsum;
      C(x + 1, y + 1) = C(x + 1, y) + rowcnt;
    }
  }
  MaskedBoxSum out{ScalarField(w - rect_w + 1, h - rect_h + 1),
                   BinaryMask(w - rect_w + 1, h - rect_h + 1)};
  const int64_t full = static_cast<int64_t>(rect_w) * rect_h;
  for (int y = 0; y < out.sum.height(); ++y)
    for (int x = 0; x < out.sum.width(); ++x) {
      int64_t cnt = C(x + rect_w, y + rect_h) - C(x, y + rect_h) - C(x + rect_w, y) + C(x, y);
      if (cnt == full) {
        out.valid(x, y) = 1;
        out.sum(x, y) =
            I(x + rect_w, y + rect_h) - I(x, y + rect_h) - I(x + rect_w, y) + I(x, y);
      }
    }
  return out;
}

namespace detail {

// Box average halving with ceil dimensions; odd trailing rows/cols average a
// partial block.
inline ScalarField downsample_half(const ScalarField& in) {
  ScalarField out(ceil_div2(in.width()), ceil_div2(in.height()));
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) {
      int x0 = 2 * x, y0 = 2 * y;
      int x1 = std::min(x0 + 1, in.width() - 1), y1 = std::min(y0 + 1, in.height() - 1);
      double acc = 0.0;
      int n = 0;
      for (int yy = y0; yy <= y1; ++yy)
        for (int xx = x0; xx <= x1; ++xx) {
          acc += in(xx, yy);
          ++n;
        }
      out(x, y) = acc / n;
    }
  return out;
}

inline RasterImage downsample_half(const RasterImage& in) {
  RasterImage out(ceil_div2(in.width()), ceil_div2(in.height()), in.space());
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) {
      int x0 = 2 * x, y0 = 2 * y;
      int x1 = std::min(x0 + 1, in.width() - 1), y1 = std::min(y0 + 1, in.height() - 1);
      double acc[3] = {0, 0, 0};
      int n = 0;
      for (int yy = y0; yy <= y1; ++yy)
        for (int xx = x0; xx <= x1; ++xx) {
          const double* p = in.pixel(xx, yy);
          acc[0] += p[0];
          acc[1] += p[1];
          acc[2] += p[2];
          ++n;
        }
      double* q = out.pixel(x, y);
      q[0] = acc[0] / n;
      q[1] = acc[1] / n;
      q[2] = acc[2] / n;
    }
  return out;
}

inline BinaryMask downsample_half(const BinaryMask& in) {
  ScalarField f(in.width(), in.height());
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) f(x, y) = in(x, y);
  return binarize(downsample_half(f), 0.5);
}

template <typename T>
void check_pyramid_depth(const T& base, int levels) {
  int w = base.width(), h = base.height();
  for (int l = 0; l < levels; ++l) {
    w = ceil_div2(w);
    h = ceil_div2(h);
  }
  if (w < 8 || h < 8)
    throw TooManyLevelsError("build_pyramid: level " + std::to_string(levels) +
                             " would be " + std::to_string(w) + "x" + std::to_string(h) +
                             " (minimum 8x8)");
}

}  // namespace detail

// Successive factor-2 box-average downsampling, L+1 levels. Masks are
// re-binarized at 0.5 per level. Throws TooManyLevelsError when the top level
// would fall below 8x8.
template <typename T>
Pyramid<T> build_pyramid(const T& base, int levels) {
  assert(levels >= 0);
  detail::check_pyramid_depth(base, levels);
  Pyramid<T> pyr;
  pyr.levels.reserve(levels + 1);
  pyr.levels.push_back(base);
  for (int l = 0; l < levels; ++l)
    pyr.levels.push_back(detail::downsample_half(pyr.levels.back()));
  return pyr;
}

enum class Resample { Bicubic, Nearest };

namespace detail {

// Keys cubic kernel, a = -0.5 (Catmull-Rom). w(0)=1, w(+-1)=w(+-2)=0, so
// integer-aligned resampling is exact.
inline double cubic_weight(double t) {
  t = std::abs(t);
  if (t < 1.0) return 1.0 + t * t * (1.5 * t - 2.5);
  if (t < 2.0) return 2.0 - t * (4.0 - t * (2.5 - 0.5 * t));
  return 0.0;
}

template <typename Fetch>
double bicubic_sample(double sx, double sy, int w, int h, Fetch fetch) {
  int x0 = static_cast<int>(std::floor(sx));
  int y0 = static_cast<int>(std::floor(sy));
  double acc = 0.0;
  for (int j = -1; j <= 2; ++j) {
    double wy = cubic_weight(sy - (y0 + j));
    if (wy == 0.0) continue;
    int yy = clamp(y0 + j, 0, h - 1);
    for (int i = -1; i <= 2; ++i) {
      double wx = cubic_weight(sx - (x0 + i));
      if (wx == 0.0) continue;
      int xx = clamp(x0 + i, 0, w - 1);
      acc += wx * wy * fetch(xx, yy);
    }
  }
  return acc;
}

inline void check_dims(int out_w, int out_h) {
  if (out_w < 1 || out_h < 1)
    throw DegenerateOutputError("resample: output dimension would be < 1");
}

}  // namespace detail

// Resample to explicit output dimensions (pixel-center aligned).
inline ScalarField resample_to(const ScalarField& in, int out_w, int out_h, Resample method) {
  detail::check_dims(out_w, out_h);
  ScalarField out(out_w, out_h);
  const double fx = static_cast<double>(in.width()) / out_w;
  const double fy = static_cast<double>(in.height()) / out_h;
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) {
      double sx = (x + 0.5) * fx - 0.5;
      double sy = (y + 0.5) * fy - 0.5;
      if (method == Resample::Nearest) {
        int ix = clamp(static_cast<int>(std::lround(sx)), 0, in.width() - 1);
        int iy = clamp(static_cast<int>(std::lround(sy)), 0, in.height() - 1);
        out(x, y) = in(ix, iy);
      } else {
        out(x, y) = detail::bicubic_sample(sx, sy, in.width(), in.height(),
                                           [&](int xx, int yy) { return in(xx, yy); });
      }
    }
  return out;
}

inline RasterImage resample_to(const RasterImage& in, int out_w, int out_h, Resample method) {
  detail::check_dims(out_w, out_h);
  RasterImage out(out_w, out_h, in.space());
  const double fx = static_cast<double>(in.width()) / out_w;
  const double fy = static_cast<double>(in.height()) / out_h;
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) {
      double sx = (x + 0.5) * fx - 0.5;
      double sy = (y + 0.5) * fy - 0.5;
      double* q = out.pixel(x, y);
      if (method == Resample::Nearest) {
        int ix = clamp(static_cast<int>(std::lround(sx)), 0, in.width() - 1);
        int iy = clamp(static_cast<int>(std::lround(sy)), 0, in.height() - 1);
        const double* p = in.pixel(ix, iy);
        q[0] = p[0];
        q[1] = p[1];
        q[2] = p[2];
      } else {
        for (int c = 0; c < 3; ++c)
          q[c] = detail::bicubic_sample(sx, sy, in.width(), in.height(),
                                        [&](int xx, int yy) { return in(xx, yy, c); });
      }
    }
  return out;
}

// Masks resampled bicubically are re-binarized at 0.5.
inline BinaryMask resample_to(const BinaryMask& in, int out_w, int out_h, Resample method) {
  detail::check_dims(out_w, out_h);
  if (method == Resample::Nearest) {
    BinaryMask out(out_w, out_h);
    const double fx = static_cast<double>(in.width()) / out_w;
    const double fy = static_cast<double>(in.height()) / out_h;
    for (int y = 0; y < out_h; ++y)
      for (int x = 0; x < out_w; ++x) {
        int ix = clamp(static_cast<int>(std::lround((x + 0.5) * fx - 0.5)), 0, in.width() - 1);
        int iy = clamp(static_cast<int>(std::lround((y + 0.5) * fy - 0.5)), 0, in.height() - 1);
        out(x, y) = in(ix, iy);
      }
    return out;
  }
  ScalarField f(in.width(), in.height());
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) f(x, y) = in(x, y);
  return binarize(resample_to(f, out_w, out_h, method), 0.5);
}

template <typename T>
T resample(const T& in, double factor, Resample method) {
  assert(factor > 0.0);
  int out_w = static_cast<int>(std::lround(in.width() * factor));
  int out_h = static_cast<int>(std::lround(in.height() * factor));
  detail::check_dims(out_w, out_h);
  return resample_to(in, out_w, out_h, method);
}

// Separable Gaussian blur with clamped borders, radius = ceil(3 sigma).
inline ScalarField gaussian_blur(const ScalarField& in, double sigma) {
  if (sigma <= 0.0) return in;
  int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  const int w = in.width(), h = in.height();
  ScalarField tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * in(clamp(x + i, 0, w - 1), y);
      tmp(x, y) = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * tmp(x, clamp(y + i, 0, h - 1));
      out(x, y) = acc;
    }
  return out;
}

}  // namespace glyphforge
