// Independent reference implementations used to freeze expected values.
// Everything here is a direct loop over definitions; none of it shares code
// with the library paths it checks.
#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "glyphforge/core.hpp"

namespace oracles {

using glyphforge::BinaryMask;
using glyphforge::RasterImage;
using glyphforge::ScalarField;

// O(N^2) nearest-opposite-side scan: for every pixel, the min Euclidean
// distance to any pixel with the opposite mask value.
inline ScalarField brute_force_distance(const BinaryMask& mask) {
  const int w = mask.width(), h = mask.height();
  ScalarField out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      uint8_t side = mask(x, y);
      long best = std::numeric_limits<long>::max();
      for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u)
          if (mask(u, v) != side) {
            long d2 = static_cast<long>(u - x) * (u - x) + static_cast<long>(v - y) * (v - y);
            best = std::min(best, d2);
          }
      out(x, y) = std::sqrt(static_cast<double>(best));
    }
  return out;
}

// Naive windowed sum with top-left anchoring.
inline ScalarField naive_box_sum(const ScalarField& f, int rw, int rh) {
  ScalarField out(f.width() - rw + 1, f.height() - rh + 1);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) {
      double acc = 0.0;
      for (int v = 0; v < rh; ++v)
        for (int u = 0; u < rw; ++u) acc += f(x + u, y + v);
      out(x, y) = acc;
    }
  return out;
}

// Naive centered windowed variance with clamped borders (partial windows use
// the pixels that exist).
inline ScalarField naive_local_variance(const ScalarField& f, int window) {
  const int r = window / 2;
  ScalarField out(f.width(), f.height());
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x) {
      double sum = 0.0, sum2 = 0.0;
      int n = 0;
      for (int v = -r; v <= r; ++v)
        for (int u = -r; u <= r; ++u) {
          int xx = x + u, yy = y + v;
          if (xx < 0 || xx >= f.width() || yy < 0 || yy >= f.height()) continue;
          sum += f(xx, yy);
          sum2 += f(xx, yy) * f(xx, yy);
          ++n;
        }
      double mean = sum / n;
      out(x, y) = std::max(0.0, sum2 / n - mean * mean);
    }
  return out;
}

inline ScalarField random_field(int w, int h, uint32_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  ScalarField out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out(x, y) = dist(rng);
  return out;
}

inline BinaryMask random_mask(int w, int h, uint32_t seed, double p_one = 0.5) {
  std::mt19937 rng(seed);
  std::bernoulli_distribution dist(p_one);
  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out(x, y) = dist(rng) ? 1 : 0;
  return out;
}

inline RasterImage random_image(int w, int h, uint32_t seed,
                                glyphforge::ColorSpace space = glyphforge::ColorSpace::SRGB) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  RasterImage out(w, h, space);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) out(x, y, c) = dist(rng);
  return out;
}

inline double iou(const BinaryMask& a, const BinaryMask& b) {
  size_t inter = 0, uni = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    inter += a.data()[i] && b.data()[i];
    uni += a.data()[i] || b.data()[i];
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
}

}  // namespace oracles
