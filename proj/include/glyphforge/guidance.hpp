// Guidance map extraction: abstract a binary foreground/background imagery S
// from an arbitrary style photograph. Two stages on top of an edge-preserving
// structure smoother: fine-grained SLIC superpixels (features = mean smoothed
// Lab), then 2-means clustering of the superpixel features. The cluster with
// the higher mean spectral-residual saliency becomes the foreground.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <random>

#include "glyphforge/color_space.hpp"
#include "glyphforge/core.hpp"
#include "glyphforge/raster_ops.hpp"

namespace glyphforge {

struct GuidanceConfig {
  double smoothing_strength = 20.0;  // lambda of the smoothing solve; 0 = identity
  int superpixel_cell = 16;          // target superpixel side in pixels, >= 4
  uint32_t kmeans_seed = 7;

  void validate() const {
    if (smoothing_strength < 0.0) throw InvalidInput("smoothing_strength must be >= 0");
    if (superpixel_cell < 4) throw InvalidInput("superpixel_cell must be >= 4");
  }
};

struct SuperpixelMap {
  int width = 0;
  int height = 0;
  std::vector<int> labels;                       // one label per pixel, 0..count-1
  int count = 0;
  std::vector<std::array<double, 3>> features;   // mean smoothed Lab (native units)

  int label(int x, int y) const { return labels[static_cast<size_t>(y) * width + x]; }
};

// ---------------------------------------------------------------------------
// Structure smoothing: iteratively reweighted screened Poisson. Edge weights
// follow a Perona-Malik falloff on the current luminance gradient, so texture
// oscillations are flattened while large inter-region steps survive. The
// solve is plain Gauss-Seidel with a fixed sweep order (deterministic).
// ---------------------------------------------------------------------------
inline RasterImage smooth_structure(const RasterImage& style, double strength) {
  if (strength < 0.0) throw InvalidInput("smoothing strength must be >= 0");
  const int w = style.width(), h = style.height();
  RasterImage u = style;
  if (strength == 0.0) return u;

  constexpr int kOuter = 4;
  constexpr int kSweeps = 40;
  constexpr double kEdgeScale = 0.05;  // luminance gradient where smoothing halves

  for (int outer = 0; outer < kOuter; ++outer) {
    ScalarField lum = luminance(u);
    ScalarField wx(w, h, 0.0), wy(w, h, 0.0);  // wx(x,y): weight of edge (x,y)-(x+1,y)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (x + 1 < w) {
          double g = (lum(x + 1, y) - lum(x, y)) / kEdgeScale;
          wx(x, y) = 1.0 / (1.0 + g * g);
        }
        if (y + 1 < h) {
          double g = (lum(x, y + 1) - lum(x, y)) / kEdgeScale;
          wy(x, y) = 1.0 / (1.0 + g * g);
        }
      }
    for (int c = 0; c < 3; ++c) {
      for (int sweep = 0; sweep < kSweeps; ++sweep) {
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) {
            double num = style(x, y, c);
            double den = 1.0;
            if (x + 1 < w) {
              num += strength * wx(x, y) * u(x + 1, y, c);
              den += strength * wx(x, y);
            }
            if (x > 0) {
              num += strength * wx(x - 1, y) * u(x - 1, y, c);
              den += strength * wx(x - 1, y);
            }
            if (y + 1 < h) {
              num += strength * wy(x, y) * u(x, y + 1, c);
              den += strength * wy(x, y);
            }
            if (y > 0) {
              num += strength * wy(x, y - 1) * u(x, y - 1, c);
              den += strength * wy(x, y - 1);
            }
            u(x, y, c) = num / den;
          }
      }
    }
  }
  return u;
}

// ---------------------------------------------------------------------------
// SLIC superpixels over (Lab, xy) with fixed compactness 10. Features are the
// mean smoothed Lab of each region in native units (L in [0,100]).
// ---------------------------------------------------------------------------
inline SuperpixelMap superpixels(const RasterImage& smoothed, int cell) {
  if (cell < 4) throw InvalidInput("superpixel cell must be >= 4");
  const int w = smoothed.width(), h = smoothed.height();
  const double compactness = 10.0;

  // native-unit Lab per pixel
  std::vector<std::array<double, 3>> lab(static_cast<size_t>(w) * h);
  {
    RasterImage lab_img = to_lab(smoothed);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double* p = lab_img.pixel(x, y);
        auto& t = lab[static_cast<size_t>(y) * w + x];
        lab_native_from_stored(p[0], p[1], p[2], t[0], t[1], t[2]);
      }
  }
  auto lab_at = [&](int x, int y) -> const std::array<double, 3>& {
    return lab[static_cast<size_t>(y) * w + x];
  };
  auto grad2 = [&](int x, int y) {
    int xl = std::max(0, x - 1), xr = std::min(w - 1, x + 1);
    int yu = std::max(0, y - 1), yd = std::min(h - 1, y + 1);
    double g = 0.0;
    for (int c = 0; c < 3; ++c) {
      double dx = lab_at(xr, y)[c] - lab_at(xl, y)[c];
      double dy = lab_at(x, yd)[c] - lab_at(x, yu)[c];
      g += dx * dx + dy * dy;
    }
    return g;
  };

  struct Center {
    double l, a, b, x, y;
  };
  std::vector<Center> centers;
  for (int cy = cell / 2; cy < h; cy += cell)
    for (int cx = cell / 2; cx < w; cx += cell) {
      // nudge to the lowest-gradient spot in a 3x3 neighborhood
      int bx = cx, by = cy;
      double bg = grad2(cx, cy);
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          int nx = cx + dx, ny = cy + dy;
          if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
          double g = grad2(nx, ny);
          if (g < bg) {
            bg = g;
            bx = nx;
            by = ny;
          }
        }
      const auto& t = lab_at(bx, by);
      centers.push_back({t[0], t[1], t[2], static_cast<double>(bx), static_cast<double>(by)});
    }
  if (centers.empty()) {
    const auto& t = lab_at(w / 2, h / 2);
    centers.push_back({t[0], t[1], t[2], w / 2.0, h / 2.0});
  }

  std::vector<int> labels(static_cast<size_t>(w) * h, 0);
  std::vector<double> best(static_cast<size_t>(w) * h);
  const double spatial = (compactness / cell) * (compactness / cell);
  constexpr int kIterations = 10;
  for (int iter = 0; iter < kIterations; ++iter) {
    std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
    for (size_t k = 0; k < centers.size(); ++k) {
      const Center& c = centers[k];
      int x0 = std::max(0, static_cast<int>(c.x) - 2 * cell);
      int x1 = std::min(w - 1, static_cast<int>(c.x) + 2 * cell);
      int y0 = std::max(0, static_cast<int>(c.y) - 2 * cell);
      int y1 = std::min(h - 1, static_cast<int>(c.y) + 2 * cell);
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          const auto& t = lab_at(x, y);
          double dl = t[0] - c.l, da = t[1] - c.a, db = t[2] - c.b;
          double dx = x - c.x, dy = y - c.y;
          double d = dl * dl + da * da + db * db + spatial * (dx * dx + dy * dy);
          size_t idx = static_cast<size_t>(y) * w + x;
          if (d < best[idx]) {
            best[idx] = d;
            labels[idx] = static_cast<int>(k);
          }
        }
    }
    std::vector<std::array<double, 6>> acc(centers.size(), {0, 0, 0, 0, 0, 0});
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        auto& a = acc[labels[static_cast<size_t>(y) * w + x]];
        const auto& t = lab_at(x, y);
        a[0] += t[0];
        a[1] += t[1];
        a[2] += t[2];
        a[3] += x;
        a[4] += y;
        a[5] += 1.0;
      }
    for (size_t k = 0; k < centers.size(); ++k)
      if (acc[k][5] > 0.0)
        centers[k] = {acc[k][0] / acc[k][5], acc[k][1] / acc[k][5], acc[k][2] / acc[k][5],
                      acc[k][3] / acc[k][5], acc[k][4] / acc[k][5]};
  }

  // Connectivity: relabel 4-connected components, absorbing fragments smaller
  // than cell^2/4 into the previously visited neighbor region.
  std::vector<int> final_labels(labels.size(), -1);
  int next = 0;
  const int min_size = cell * cell / 4;
  std::vector<int> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      size_t idx = static_cast<size_t>(y) * w + x;
      if (final_labels[idx] >= 0) continue;
      int adjacent = -1;  // a finalized neighbor label, if any
      if (x > 0) adjacent = final_labels[idx - 1];
      else if (y > 0) adjacent = final_labels[idx - w];
      stack.clear();
      stack.push_back(static_cast<int>(idx));
      final_labels[idx] = next;
      size_t count = 0;
      while (count < stack.size()) {
        int p = stack[count++];
        int px = p % w, py = p / w;
        const int nx[4] = {px - 1, px + 1, px, px};
        const int ny[4] = {py, py, py - 1, py + 1};
        for (int n = 0; n < 4; ++n) {
          if (nx[n] < 0 || nx[n] >= w || ny[n] < 0 || ny[n] >= h) continue;
          size_t nidx = static_cast<size_t>(ny[n]) * w + nx[n];
          if (final_labels[nidx] < 0 && labels[nidx] == labels[idx]) {
            final_labels[nidx] = next;
            stack.push_back(static_cast<int>(nidx));
          }
        }
      }
      if (static_cast<int>(stack.size()) < min_size && adjacent >= 0) {
        for (int p : stack) final_labels[p] = adjacent;
      } else {
        ++next;
      }
    }

  SuperpixelMap map;
  map.width = w;
  map.height = h;
  map.labels = std::move(final_labels);
  map.count = std::max(1, next);
  map.features.assign(map.count, {0, 0, 0});
  std::vector<double> sizes(map.count, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int l = map.label(x, y);
      const auto& t = lab_at(x, y);
      map.features[l][0] += t[0];
      map.features[l][1] += t[1];
      map.features[l][2] += t[2];
      sizes[l] += 1.0;
    }
  for (int k = 0; k < map.count; ++k)
    if (sizes[k] > 0.0)
      for (int c = 0; c < 3; ++c) map.features[k][c] /= sizes[k];
  return map;
}

// ---------------------------------------------------------------------------
// 2-means over superpixel features. k-means++ seeding with a fixed RNG, 8
// restarts, best inertia kept; ties keep the earlier restart so the result is
// reproducible for a given seed.
// ---------------------------------------------------------------------------
inline BinaryMask cluster_two(const SuperpixelMap& map, uint32_t seed) {
  if (map.count < 2) throw DegenerateFeaturesError("need at least two superpixels");
  const auto& feats = map.features;
  bool all_same = true;
  for (const auto& f : feats) {
    // identical up to accumulation noise (features are means of equal values)
    if (std::abs(f[0] - feats[0][0]) > 1e-9 || std::abs(f[1] - feats[0][1]) > 1e-9 ||
        std::abs(f[2] - feats[0][2]) > 1e-9) {
      all_same = false;
      break;
    }
  }
  if (all_same) throw DegenerateFeaturesError();

  auto dist2 = [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
    double d = 0.0;
    for (int c = 0; c < 3; ++c) d += (a[c] - b[c]) * (a[c] - b[c]);
    return d;
  };

  std::vector<int> best_assign_out(feats.size(), 0);

  if (map.count <= 16) {
    // Tiny instances: enumerate every bipartition and take the global
    // minimum-inertia split. Lloyd restarts can stall in local minima here.
    const int n = map.count;
    double best = std::numeric_limits<double>::infinity();
    for (uint32_t bits = 1; bits < (1u << (n - 1)); ++bits) {
      std::array<double, 3> c0{0, 0, 0}, c1{0, 0, 0};
      int n0 = 0, n1 = 0;
      for (int i = 0; i < n; ++i) {
        bool side = (bits >> i) & 1u;
        auto& c = side ? c1 : c0;
        for (int k = 0; k < 3; ++k) c[k] += feats[i][k];
        (side ? n1 : n0)++;
      }
      if (n0 == 0 || n1 == 0) continue;
      for (int k = 0; k < 3; ++k) {
        c0[k] /= n0;
        c1[k] /= n1;
      }
      double inertia = 0.0;
      for (int i = 0; i < n; ++i) {
        const auto& c = ((bits >> i) & 1u) ? c1 : c0;
        for (int k = 0; k < 3; ++k) inertia += (feats[i][k] - c[k]) * (feats[i][k] - c[k]);
      }
      if (inertia < best) {
        best = inertia;
        for (int i = 0; i < n; ++i) best_assign_out[i] = (bits >> i) & 1u;
      }
    }
    BinaryMask out(map.width, map.height);
    for (int y = 0; y < map.height; ++y)
      for (int x = 0; x < map.width; ++x)
        out(x, y) = static_cast<uint8_t>(best_assign_out[map.label(x, y)]);
    return out;
  }

  std::mt19937 rng(seed);
  constexpr int kRestarts = 8;
  constexpr int kMaxIters = 50;
  std::vector<int> best_assign(feats.size(), 0);
  double best_inertia = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart < kRestarts; ++restart) {
    // k-means++ init
    std::array<std::array<double, 3>, 2> centers;
    std::uniform_int_distribution<size_t> uni(0, feats.size() - 1);
    centers[0] = feats[uni(rng)];
    std::vector<double> d2(feats.size());
    double total = 0.0;
    for (size_t i = 0; i < feats.size(); ++i) {
      d2[i] = dist2(feats[i], centers[0]);
      total += d2[i];
    }
    if (total <= 0.0) {
      centers[1] = feats[(uni(rng) + 1) % feats.size()];
    } else {
      std::uniform_real_distribution<double> ud(0.0, total);
      double r = ud(rng), acc = 0.0;
      size_t pick = feats.size() - 1;
      for (size_t i = 0; i < feats.size(); ++i) {
        acc += d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
      centers[1] = feats[pick];
    }

    std::vector<int> assign(feats.size(), 0);
    for (int iter = 0; iter < kMaxIters; ++iter) {
      bool changed = false;
      for (size_t i = 0; i < feats.size(); ++i) {
        int a = dist2(feats[i], centers[0]) <= dist2(feats[i], centers[1]) ? 0 : 1;
        if (a != assign[i]) {
          assign[i] = a;
          changed = true;
        }
      }
      std::array<std::array<double, 4>, 2> acc{{{0, 0, 0, 0}, {0, 0, 0, 0}}};
      for (size_t i = 0; i < feats.size(); ++i) {
        auto& a = acc[assign[i]];
        for (int c = 0; c < 3; ++c) a[c] += feats[i][c];
        a[3] += 1.0;
      }
      for (int k = 0; k < 2; ++k) {
        if (acc[k][3] == 0.0) {
          // empty cluster: seize the point farthest from the other center
          size_t far = 0;
          double fd = -1.0;
          for (size_t i = 0; i < feats.size(); ++i) {
            double d = dist2(feats[i], centers[1 - k]);
            if (d > fd) {
              fd = d;
              far = i;
            }
          }
          centers[k] = feats[far];
          assign[far] = k;
          changed = true;
        } else {
          for (int c = 0; c < 3; ++c) centers[k][c] = acc[k][c] / acc[k][3];
        }
      }
      if (!changed) break;
    }
    double inertia = 0.0;
    for (size_t i = 0; i < feats.size(); ++i) inertia += dist2(feats[i], centers[assign[i]]);
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_assign = assign;
    }
  }

  BinaryMask out(map.width, map.height);
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x)
      out(x, y) = static_cast<uint8_t>(best_assign[map.label(x, y)]);
  return out;
}

// ---------------------------------------------------------------------------
// Spectral residual saliency at a fixed 64x64 working resolution, bicubically
// upsampled back and lightly smoothed. The DC component is removed first; a
// flat spectrum (constant image) yields an all-zero map.
// ---------------------------------------------------------------------------
namespace detail {

// In-place radix-2 complex FFT, n a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  assert((n & (n - 1)) == 0);
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * M_PI / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[i + j];
        std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& v : a) v /= static_cast<double>(n);
}

inline void fft_2d(std::vector<std::complex<double>>& grid, int n, bool inverse) {
  std::vector<std::complex<double>> line(n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) line[x] = grid[static_cast<size_t>(y) * n + x];
    fft_radix2(line, inverse);
    for (int x = 0; x < n; ++x) grid[static_cast<size_t>(y) * n + x] = line[x];
  }
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) line[y] = grid[static_cast<size_t>(y) * n + x];
    fft_radix2(line, inverse);
    for (int y = 0; y < n; ++y) grid[static_cast<size_t>(y) * n + x] = line[y];
  }
}

}  // namespace detail

inline ScalarField saliency(const RasterImage& image) {
  constexpr int kN = 64;
  ScalarField gray = resample_to(luminance(image), kN, kN, Resample::Bicubic);

  double mean = 0.0;
  for (int y = 0; y < kN; ++y)
    for (int x = 0; x < kN; ++x) mean += gray(x, y);
  mean /= kN * kN;

  std::vector<std::complex<double>> grid(static_cast<size_t>(kN) * kN);
  double peak = 0.0;
  for (int y = 0; y < kN; ++y)
    for (int x = 0; x < kN; ++x) {
      double v = gray(x, y) - mean;
      grid[static_cast<size_t>(y) * kN + x] = v;
      peak = std::max(peak, std::abs(v));
    }
  if (peak < 1e-12) return ScalarField(image.width(), image.height(), 0.0);

  detail::fft_2d(grid, kN, false);

  ScalarField log_amp(kN, kN), phase(kN, kN);
  for (int y = 0; y < kN; ++y)
    for (int x = 0; x < kN; ++x) {
      const auto& v = grid[static_cast<size_t>(y) * kN + x];
      log_amp(x, y) = std::log(1.0 + std::abs(v));
      phase(x, y) = std::atan2(v.imag(), v.real());
    }

  // spectral residual: log amplitude minus its 3x3 box average
  for (int y = 0; y < kN; ++y)
    for (int x = 0; x < kN; ++x) {
      double acc = 0.0;
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          int xx = x + dx, yy = y + dy;
          if (xx < 0 || xx >= kN || yy < 0 || yy >= kN) continue;
          acc += log_amp(xx, yy);
          ++n;
        }
      double residual = log_amp(x, y) - acc / n;
      double mag = std::exp(residual);
      grid[static_cast<size_t>(y) * kN + x] =
          std::complex<double>(mag * std::cos(phase(x, y)), mag * std::sin(phase(x, y)));
    }

  detail::fft_2d(grid, kN, true);

  ScalarField sal(kN, kN);
  for (int y = 0; y < kN; ++y)
    for (int x = 0; x < kN; ++x) {
      double m = std::abs(grid[static_cast<size_t>(y) * kN + x]);
      sal(x, y) = m * m;
    }
  sal = gaussian_blur(sal, 2.5);
  double mx = 0.0;
  for (int y = 0; y < kN; ++y)
    for (int x = 0; x < kN; ++x) mx = std::max(mx, sal(x, y));
  if (mx > 0.0)
    for (int y = 0; y < kN; ++y)
      for (int x = 0; x < kN; ++x) sal(x, y) /= mx;

  ScalarField full = resample_to(sal, image.width(), image.height(), Resample::Bicubic);
  full = gaussian_blur(full, std::max(image.width(), image.height()) / 128.0);
  for (int y = 0; y < full.height(); ++y)
    for (int x = 0; x < full.width(); ++x) full(x, y) = clamp(full(x, y), 0.0, 1.0);
  return full;
}

// Orient the mask so the mean saliency over 1-pixels is >= the mean over
// 0-pixels. Exact ties keep the input orientation.
inline BinaryMask pick_foreground(const BinaryMask& mask, const ScalarField& sal) {
  assert(mask.width() == sal.width() && mask.height() == sal.height());
  double sum1 = 0.0, sum0 = 0.0;
  size_t n1 = 0, n0 = 0;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) {
      if (mask(x, y)) {
        sum1 += sal(x, y);
        ++n1;
      } else {
        sum0 += sal(x, y);
        ++n0;
      }
    }
  double mean1 = n1 ? sum1 / n1 : 0.0;
  double mean0 = n0 ? sum0 / n0 : 0.0;
  if (mean1 >= mean0) return mask;
  BinaryMask flipped(mask.width(), mask.height());
  for (size_t i = 0; i < mask.size(); ++i) flipped.data()[i] = mask.data()[i] ? 0 : 1;
  return flipped;
}

// Full two-stage extraction: S' -> S.
inline BinaryMask extract_guidance(const RasterImage& style, const GuidanceConfig& cfg) {
  cfg.validate();
  RasterImage smoothed = smooth_structure(style, cfg.smoothing_strength);
  SuperpixelMap sp = superpixels(smoothed, cfg.superpixel_cell);
  BinaryMask clusters = cluster_two(sp, cfg.kmeans_seed);
  ScalarField sal = saliency(style);
  return pick_foreground(clusters, sal);
}

}  // namespace glyphforge
