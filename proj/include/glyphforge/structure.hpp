// Legibility-preserving structure transfer between binary shapes.
//
// The deformation engine is boundary-patch shape synthesis: contour patches,
// canonicalized by their local normal (16 quantized directions), vote binary
// values bidirectionally (target patches pull from their nearest reference
// patch; reference patches push onto their nearest target location). The
// forward pass runs it coarse-to-fine under a stroke-end mask so that stroke
// trunks are kept bit-exact; the backward pass runs it plain.
//
// Levels are geometrically spaced between the input resolution (level 0) and
// a fixed coarse top resolution, so the level count alone controls how much
// deformation accumulates. Between levels only the *change* with respect to
// the fresh downsample is upsampled; an unchanged level therefore hands the
// exact downsample to the next one.
#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "glyphforge/core.hpp"
#include "glyphforge/raster_ops.hpp"

namespace glyphforge {

struct StructureConfig {
  int L = 7;                // number of coarse levels above full resolution
  int top_resolution = 64;  // long side at level L
  int boundary_patch = 9;   // odd patch side for contour matching
  int lss_iterations = 5;   // synthesis iterations per level

  void validate() const {
    if (L < 0) throw InvalidInput("structure L must be >= 0");
    if (top_resolution < 32) throw InvalidInput("top_resolution must be >= 32");
    if (boundary_patch < 3 || boundary_patch % 2 == 0)
      throw InvalidInput("boundary_patch must be odd and >= 3");
    if (lss_iterations < 1) throw InvalidInput("lss_iterations must be >= 1");
  }
};

struct SkeletonEndpoint {
  int x = 0;
  int y = 0;
  int component = 0;
  double cover_radius = 0.0;  // reaches every pixel of the endpoint's component
};

struct Skeleton {
  int width = 0;
  int height = 0;
  std::vector<std::pair<int, int>> pixels;
  std::vector<SkeletonEndpoint> endpoints;
  double mean_stroke_radius = 0.0;
};

// ---------------------------------------------------------------------------
// Zhang-Suen thinning. Endpoints are skeletal pixels with exactly one
// skeletal 8-neighbor; the stroke radius is the mean distance-transform value
// over skeleton pixels.
// ---------------------------------------------------------------------------
inline Skeleton skeletonize(const BinaryMask& mask) {
  if (mask.count_ones() == 0) throw EmptyForegroundError();
  const int w = mask.width(), h = mask.height();
  BinaryMask img = mask;

  auto neighbors = [&](const BinaryMask& m, int x, int y, int p[8]) {
    // P2..P9 clockwise from north
    p[0] = m.sample_or_zero(x, y - 1);
    p[1] = m.sample_or_zero(x + 1, y - 1);
    p[2] = m.sample_or_zero(x + 1, y);
    p[3] = m.sample_or_zero(x + 1, y + 1);
    p[4] = m.sample_or_zero(x, y + 1);
    p[5] = m.sample_or_zero(x - 1, y + 1);
    p[6] = m.sample_or_zero(x - 1, y);
    p[7] = m.sample_or_zero(x - 1, y - 1);
  };

  bool changed = true;
  std::vector<std::pair<int, int>> to_clear;
  while (changed) {
    changed = false;
    for (int phase = 0; phase < 2; ++phase) {
      to_clear.clear();
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          if (!img(x, y)) continue;
          int p[8];
          neighbors(img, x, y, p);
          int b = p[0] + p[1] + p[2] + p[3] + p[4] + p[5] + p[6] + p[7];
          if (b < 2 || b > 6) continue;
          int a = 0;
          for (int k = 0; k < 8; ++k)
            if (p[k] == 0 && p[(k + 1) % 8] == 1) ++a;
          if (a != 1) continue;
          if (phase == 0) {
            if (p[0] * p[2] * p[4] != 0) continue;
            if (p[2] * p[4] * p[6] != 0) continue;
          } else {
            if (p[0] * p[2] * p[6] != 0) continue;
            if (p[0] * p[4] * p[6] != 0) continue;
          }
          to_clear.emplace_back(x, y);
        }
      for (auto [x, y] : to_clear) img(x, y) = 0;
      if (!to_clear.empty()) changed = true;
    }
  }

  Skeleton skel;
  skel.width = w;
  skel.height = h;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (img(x, y)) skel.pixels.emplace_back(x, y);

  // component labels of the original mask (8-connectivity)
  std::vector<int> comp(static_cast<size_t>(w) * h, -1);
  int ncomp = 0;
  {
    std::vector<int> stack;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        size_t idx = static_cast<size_t>(y) * w + x;
        if (!mask(x, y) || comp[idx] >= 0) continue;
        comp[idx] = ncomp;
        stack.assign(1, static_cast<int>(idx));
        while (!stack.empty()) {
          int p = stack.back();
          stack.pop_back();
          int px = p % w, py = p / w;
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              int nx = px + dx, ny = py + dy;
              if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
              size_t nidx = static_cast<size_t>(ny) * w + nx;
              if (mask(nx, ny) && comp[nidx] < 0) {
                comp[nidx] = ncomp;
                stack.push_back(static_cast<int>(nidx));
              }
            }
        }
        ++ncomp;
      }
  }

  for (auto [x, y] : skel.pixels) {
    int p[8];
    neighbors(img, x, y, p);
    int b = p[0] + p[1] + p[2] + p[3] + p[4] + p[5] + p[6] + p[7];
    if (b == 1)
      skel.endpoints.push_back({x, y, comp[static_cast<size_t>(y) * w + x], 0.0});
  }
  for (auto& e : skel.endpoints) {
    double far2 = 0.0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (mask(x, y) && comp[static_cast<size_t>(y) * w + x] == e.component) {
          double dx = x - e.x, dy = y - e.y;
          far2 = std::max(far2, dx * dx + dy * dy);
        }
    e.cover_radius = std::sqrt(far2) + 2.0;
  }

  if (!skel.pixels.empty()) {
    ScalarField dist = distance_transform(mask);
    double acc = 0.0;
    for (auto [x, y] : skel.pixels) acc += dist(x, y);
    skel.mean_stroke_radius = acc / skel.pixels.size();
  }
  return skel;
}

namespace detail {

struct LevelPlan {
  // scale[l] maps level-0 coordinates to level-l coordinates
  std::vector<double> scale;
  int dims_w(int base_w, int l) const { return std::max(1, (int)std::lround(base_w * scale[l])); }
  int dims_h(int base_h, int l) const { return std::max(1, (int)std::lround(base_h * scale[l])); }
};

// Geometric scales from full resolution down to the configured top long side.
// Inputs already at or below the top resolution stay unscaled.
inline LevelPlan make_level_plan(int base_w, int base_h, const StructureConfig& cfg) {
  LevelPlan plan;
  plan.scale.resize(cfg.L + 1, 1.0);
  int long_side = std::max(base_w, base_h);
  if (cfg.L == 0 || long_side <= cfg.top_resolution) return plan;
  double top_scale = static_cast<double>(cfg.top_resolution) / long_side;
  // keep every level at 8 px or more on the short side
  int short_side = std::min(base_w, base_h);
  top_scale = std::max(top_scale, 8.0 / short_side);
  top_scale = std::min(top_scale, 1.0);
  for (int l = 1; l <= cfg.L; ++l)
    plan.scale[l] = std::pow(top_scale, static_cast<double>(l) / cfg.L);
  return plan;
}

}  // namespace detail

namespace detail {

// Feathered union of stroke-end disks rendered on a w x h grid at the given
// coordinate scale. frac = l/L: 1 at the top level (radius = mean stroke
// radius), 0 at full resolution (radius covers the endpoint's component).
inline ScalarField stroke_end_field(const Skeleton& skel, double frac, double coord_scale, int w,
                                    int h) {
  const double s = coord_scale;
  ScalarField field(w, h, 0.0);
  for (const auto& e : skel.endpoints) {
    double radius = e.cover_radius * (1.0 - frac) + skel.mean_stroke_radius * frac;
    double cx = e.x * s, cy = e.y * s;
    int x0 = std::max(0, static_cast<int>(std::floor(cx - radius - 3)));
    int x1 = std::min(w - 1, static_cast<int>(std::ceil(cx + radius + 3)));
    int y0 = std::max(0, static_cast<int>(std::floor(cy - radius - 3)));
    int y1 = std::min(h - 1, static_cast<int>(std::ceil(cy + radius + 3)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        double d = std::hypot(x - cx, y - cy);
        double v;
        if (d <= radius)
          v = 1.0;
        else if (d < radius + 2.0)
          v = 0.5 * (1.0 + std::cos(M_PI * (d - radius) / 2.0));
        else
          continue;
        field(x, y) = std::max(field(x, y), v);
      }
  }
  return field;
}

}  // namespace detail

// Feathered union of stroke-end disks for resolution level l. The disk radius
// interpolates linearly in l between the mean stroke radius at the top level
// and a per-endpoint radius covering the endpoint's whole component at level
// 0. Values are 1 inside the disk and fall to 0 over a 2 px cosine ramp.
inline ScalarField stroke_end_mask(const Skeleton& skel, int level, const StructureConfig& cfg) {
  cfg.validate();
  if (level < 0 || level > cfg.L) throw InvalidInput("stroke_end_mask: level out of range");
  detail::LevelPlan plan = detail::make_level_plan(skel.width, skel.height, cfg);
  double frac = cfg.L == 0 ? 0.0 : static_cast<double>(level) / cfg.L;
  return detail::stroke_end_field(skel, frac, plan.scale[level],
                                  plan.dims_w(skel.width, level), plan.dims_h(skel.height, level));
}

namespace detail {

struct ContourPatches {
  std::vector<int> xs, ys;           // contour pixel positions
  std::vector<double> nx, ny;        // positions normalized by the mask dims
  std::vector<uint8_t> canon;        // canonicalized patch values, n * patch^2
  std::vector<int> bin;              // quantized normal direction per pixel
};

// Weight of the normalized-position term in patch matching. Kept below the
// smallest nonzero Hamming distance so it only orders otherwise-equal
// matches, spreading votes to corresponding boundary positions.
constexpr double kPositionTieWeight = 0.45;

// Rotated integer sampling offsets for the 16 quantized normal directions,
// plus a center-emphasizing Gaussian weight per canonical offset.
struct RotationTables {
  int patch = 0;
  std::vector<int> dx, dy;       // 16 * patch^2
  std::vector<double> weight;    // patch^2, rotation-invariant
  explicit RotationTables(int patch_side) : patch(patch_side) {
    const int half = patch / 2;
    dx.resize(16 * patch * patch);
    dy.resize(16 * patch * patch);
    weight.resize(patch * patch);
    const double sigma2 = (patch / 3.0) * (patch / 3.0);
    for (int b = 0; b < 16; ++b) {
      double ang = 2.0 * M_PI * b / 16.0;
      double c = std::cos(ang), s = std::sin(ang);
      int i = 0;
      for (int v = -half; v <= half; ++v)
        for (int u = -half; u <= half; ++u, ++i) {
          dx[b * patch * patch + i] = static_cast<int>(std::lround(c * u - s * v));
          dy[b * patch * patch + i] = static_cast<int>(std::lround(s * u + c * v));
          if (b == 0) weight[i] = std::exp(-0.5 * (u * u + v * v) / sigma2);
        }
    }
  }
  const int* offx(int b) const { return dx.data() + b * patch * patch; }
  const int* offy(int b) const { return dy.data() + b * patch * patch; }
};

inline ContourPatches extract_contour_patches(const BinaryMask& m, const RotationTables& rot) {
  const int w = m.width(), h = m.height();
  const int pp = rot.patch * rot.patch;
  ContourPatches out;

  // smoothed mask gradient gives a stable contour normal
  ScalarField soft(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) soft(x, y) = m(x, y);
  soft = gaussian_blur(soft, 1.5);

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!m(x, y)) continue;
      // in-image background neighbors only; a shape clipped by the canvas
      // border is not a contour there
      bool contour = (x > 0 && m(x - 1, y) == 0) || (x + 1 < w && m(x + 1, y) == 0) ||
                     (y > 0 && m(x, y - 1) == 0) || (y + 1 < h && m(x, y + 1) == 0);
      if (!contour) continue;
      double gx = soft(std::min(w - 1, x + 1), y) - soft(std::max(0, x - 1), y);
      double gy = soft(x, std::min(h - 1, y + 1)) - soft(x, std::max(0, y - 1));
      double ang = std::atan2(gy, gx);
      int b = static_cast<int>(std::lround(ang / (2.0 * M_PI / 16.0)));
      b = ((b % 16) + 16) % 16;
      out.xs.push_back(x);
      out.ys.push_back(y);
      out.nx.push_back(static_cast<double>(x) / w);
      out.ny.push_back(static_cast<double>(y) / h);
      out.bin.push_back(b);
      size_t base = out.canon.size();
      out.canon.resize(base + pp);
      const int* ox = rot.offx(b);
      const int* oy = rot.offy(b);
      for (int i = 0; i < pp; ++i)
        out.canon[base + i] = m.sample_or_zero(x + ox[i], y + oy[i]);
    }
  return out;
}

// Hamming distance between canonicalized binary patches with early exit.
inline int patch_distance(const uint8_t* a, const uint8_t* b, int n, int cutoff) {
  int d = 0;
  for (int i = 0; i < n; ++i) {
    d += a[i] != b[i];
    if (d >= cutoff) return cutoff;
  }
  return d;
}

// One synthesis pass: bidirectional nearest-neighbor voting between the
// contour patch sets of `current` and `reference`. Returns the continuous
// vote field (pixels without votes keep their current value).
inline ScalarField lss_vote_pass(const BinaryMask& current, const ContourPatches& ref,
                                 const RotationTables& rot) {
  const int w = current.width(), h = current.height();
  const int pp = rot.patch * rot.patch;
  ContourPatches tgt = extract_contour_patches(current, rot);

  ScalarField sum(w, h, 0.0);
  ScalarField cnt(w, h, 0.0);
  // votes emphasize patch centers and good matches; exact matches keep full
  // weight so self-reference stays an exact fixed point
  auto vote_patch = [&](int cx, int cy, int bin, const uint8_t* values, double stream_scale,
                        double match_dist) {
    const int* ox = rot.offx(bin);
    const int* oy = rot.offy(bin);
    double quality = stream_scale / (1.0 + match_dist);
    for (int i = 0; i < pp; ++i) {
      int x = cx + ox[i], y = cy + oy[i];
      if (x < 0 || x >= w || y < 0 || y >= h) continue;
      double wv = quality * rot.weight[i];
      sum(x, y) += wv * values[i];
      cnt(x, y) += wv;
    }
  };

  const size_t nt = tgt.xs.size(), nr = ref.xs.size();
  if (nt == 0 || nr == 0) {
    ScalarField field(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) field(x, y) = current(x, y);
    return field;
  }

  // coherence: each target contour patch pulls its best reference patch
  for (size_t t = 0; t < nt; ++t) {
    const uint8_t* tp = tgt.canon.data() + t * pp;
    double best = pp + 1.0;
    size_t arg = 0;
    for (size_t r = 0; r < nr; ++r) {
      double dpx = tgt.nx[t] - ref.nx[r], dpy = tgt.ny[t] - ref.ny[r];
      double pos = kPositionTieWeight * 0.5 * (dpx * dpx + dpy * dpy);
      if (pos >= best) continue;
      int cutoff = static_cast<int>(std::ceil(best - pos));
      double d = pos + patch_distance(tp, ref.canon.data() + r * pp, pp, cutoff);
      if (d < best) {
        best = d;
        arg = r;
      }
    }
    vote_patch(tgt.xs[t], tgt.ys[t], tgt.bin[t], ref.canon.data() + arg * pp, 1.0, best);
  }

  // completeness: each reference contour patch pushes onto its best target.
  // Scaled so both streams carry the same total mass regardless of how the
  // two contour lengths compare.
  const double completeness_scale = static_cast<double>(nt) / nr;
  for (size_t r = 0; r < nr; ++r) {
    const uint8_t* rp = ref.canon.data() + r * pp;
    double best = pp + 1.0;
    size_t arg = 0;
    for (size_t t = 0; t < nt; ++t) {
      double dpx = tgt.nx[t] - ref.nx[r], dpy = tgt.ny[t] - ref.ny[r];
      double pos = kPositionTieWeight * 0.5 * (dpx * dpx + dpy * dpy);
      if (pos >= best) continue;
      int cutoff = static_cast<int>(std::ceil(best - pos));
      double d = pos + patch_distance(rp, tgt.canon.data() + t * pp, pp, cutoff);
      if (d < best) {
        best = d;
        arg = t;
      }
    }
    vote_patch(tgt.xs[arg], tgt.ys[arg], tgt.bin[arg], rp, completeness_scale, best);
  }

  ScalarField field(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      field(x, y) = cnt(x, y) > 0.0 ? sum(x, y) / cnt(x, y) : current(x, y);
  return field;
}

// Full multi-iteration synthesis at one level; returns the final continuous
// vote field.
inline ScalarField lss_vote(const BinaryMask& target, const BinaryMask& reference,
                            const StructureConfig& cfg) {
  RotationTables rot(cfg.boundary_patch);
  ContourPatches ref = extract_contour_patches(reference, rot);
  BinaryMask current = target;
  ScalarField field;
  for (int it = 0; it < cfg.lss_iterations; ++it) {
    field = lss_vote_pass(current, ref, rot);
    current = binarize(field, 0.5);
  }
  return field;
}

// ---------------------------------------------------------------------------
// Boundary-displacement synthesis used by the multi-level transfers. Patch
// matching is identical to lss_vote_pass, but instead of averaging pixel
// values the matched pair contributes a signed boundary offset along the
// contour normal (the difference of the two canonical boundary profiles).
// The offsets, clamped per step, are applied through the signed distance
// field of the current mask. A zero displacement reproduces the mask
// bit-exactly, so self-reference is an exact fixed point and there is no
// erosion or resampling drift between levels.
// ---------------------------------------------------------------------------

// One displacement step: accumulates boundary offsets into the running
// per-pixel displacement field D and reports whether anything moved.
// strength_mask scales the displacement per pixel (null = full strength);
// max_step bounds the per-pass movement.
//
// A matched pair contributes one boundary-offset vote per patch row: in the
// canonical frame the foreground sits on the +u side, so the row foreground
// count locates each boundary profile, and the difference of the two
// profiles at lateral position v is voted onto the target contour point
// sitting v steps along the tangent. The profiles agree at the center by
// construction; the lateral rows carry the style.
inline bool displace_increment(const BinaryMask& current, const ContourPatches& ref,
                               const RotationTables& rot, const ScalarField* strength_mask,
                               double max_step, ScalarField& D) {
  const int w = current.width(), h = current.height();
  const int pp = rot.patch * rot.patch;
  const int patch = rot.patch;
  const int half = patch / 2;
  ContourPatches tgt = extract_contour_patches(current, rot);
  const size_t nt = tgt.xs.size(), nr = ref.xs.size();
  if (nt == 0 || nr == 0) return false;

  std::vector<int> point_at(static_cast<size_t>(w) * h, -1);
  for (size_t t = 0; t < nt; ++t)
    point_at[static_cast<size_t>(tgt.ys[t]) * w + tgt.xs[t]] = static_cast<int>(t);
  // nearest contour point to a pixel, or -1
  auto contour_point_near = [&](int x, int y) -> int {
    if (x < 0 || x >= w || y < 0 || y >= h) return -1;
    int p = point_at[static_cast<size_t>(y) * w + x];
    if (p >= 0) return p;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        int xx = x + dx, yy = y + dy;
        if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
        p = point_at[static_cast<size_t>(yy) * w + xx];
        if (p >= 0) return p;
      }
    return -1;
  };

  std::vector<double> delta_sum(nt, 0.0), delta_w(nt, 0.0);
  auto add_vote = [&](size_t t, size_t r, double dist, double scale) {
    const uint8_t* tp = tgt.canon.data() + t * pp;
    const uint8_t* rp = ref.canon.data() + r * pp;
    double q = scale / (1.0 + dist);
    double ang = 2.0 * M_PI * tgt.bin[t] / 16.0;
    double tan_x = -std::sin(ang), tan_y = std::cos(ang);  // canonical +v axis
    for (int v = 0; v < patch; ++v) {
      int kt = 0, kr = 0;
      for (int u = 0; u < patch; ++u) {
        kt += tp[v * patch + u];
        kr += rp[v * patch + u];
      }
      // rows fully inside or outside either shape carry no boundary
      if (kt == 0 || kt == patch || kr == 0 || kr == patch) continue;
      int lateral = v - half;
      int px = tgt.xs[t] + static_cast<int>(std::lround(tan_x * lateral));
      int py = tgt.ys[t] + static_cast<int>(std::lround(tan_y * lateral));
      int o = contour_point_near(px, py);
      if (o < 0) continue;
      double wv = q * rot.weight[v * patch + half];  // trust the center rows more
      delta_sum[o] += wv * (kr - kt);                // positive: shape grows here
      delta_w[o] += wv;
    }
  };

  for (size_t t = 0; t < nt; ++t) {
    const uint8_t* tp = tgt.canon.data() + t * pp;
    double best = pp + 1.0;
    size_t arg = 0;
    for (size_t r = 0; r < nr; ++r) {
      double dpx = tgt.nx[t] - ref.nx[r], dpy = tgt.ny[t] - ref.ny[r];
      double pos = kPositionTieWeight * 0.5 * (dpx * dpx + dpy * dpy);
      if (pos >= best) continue;
      int cutoff = static_cast<int>(std::ceil(best - pos));
      double d = pos + patch_distance(tp, ref.canon.data() + r * pp, pp, cutoff);
      if (d < best) {
        best = d;
        arg = r;
      }
    }
    add_vote(t, arg, best, 1.0);
  }
  const double completeness_scale = static_cast<double>(nt) / nr;
  for (size_t r = 0; r < nr; ++r) {
    const uint8_t* rp = ref.canon.data() + r * pp;
    double best = pp + 1.0;
    size_t arg = 0;
    for (size_t t = 0; t < nt; ++t) {
      double dpx = tgt.nx[t] - ref.nx[r], dpy = tgt.ny[t] - ref.ny[r];
      double pos = kPositionTieWeight * 0.5 * (dpx * dpx + dpy * dpy);
      if (pos >= best) continue;
      int cutoff = static_cast<int>(std::ceil(best - pos));
      double d = pos + patch_distance(rp, tgt.canon.data() + t * pp, pp, cutoff);
      if (d < best) {
        best = d;
        arg = t;
      }
    }
    add_vote(arg, r, best, completeness_scale);
  }

  // Smooth the raw offsets along the contour so adjacent boundary pixels move
  // coherently; otherwise per-point match jitter compounds into raggedness.
  std::vector<double> delta(nt, 0.0);
  {
    std::vector<double> cur_sum = delta_sum, cur_w = delta_w, nxt_sum(nt), nxt_w(nt);
    for (int round = 0; round < 2; ++round) {
      for (size_t t = 0; t < nt; ++t) {
        double s = 0.0, ww = 0.0;
        for (int dy = -2; dy <= 2; ++dy)
          for (int dx = -2; dx <= 2; ++dx) {
            int x = tgt.xs[t] + dx, y = tgt.ys[t] + dy;
            if (x < 0 || x >= w || y < 0 || y >= h) continue;
            int o = point_at[static_cast<size_t>(y) * w + x];
            if (o < 0) continue;
            s += cur_sum[o];
            ww += cur_w[o];
          }
        nxt_sum[t] = s;
        nxt_w[t] = ww;
      }
      cur_sum.swap(nxt_sum);
      cur_w.swap(nxt_w);
    }
    for (size_t t = 0; t < nt; ++t)
      if (cur_w[t] > 0.0) delta[t] = clamp(cur_sum[t] / cur_w[t], -max_step, max_step);
  }
  bool any = false;
  for (size_t t = 0; t < nt; ++t) {
    if (strength_mask) delta[t] *= (*strength_mask)(tgt.xs[t], tgt.ys[t]);
    any = any || delta[t] != 0.0;
  }
  if (!any) return false;

  // extend contour displacements to nearby pixels (nearest contour point by
  // BFS, deterministic order) and add them into the running field
  std::vector<int> owner(static_cast<size_t>(w) * h, -1);
  std::vector<int> queue;
  queue.reserve(nt * 8);
  for (size_t t = 0; t < nt; ++t) {
    size_t idx = static_cast<size_t>(tgt.ys[t]) * w + tgt.xs[t];
    owner[idx] = static_cast<int>(t);
    queue.push_back(static_cast<int>(idx));
  }
  const int reach = static_cast<int>(std::ceil(max_step)) + 3;
  size_t head = 0;
  for (int ring = 0; ring < reach; ++ring) {
    size_t tail = queue.size();
    for (; head < tail; ++head) {
      int p = queue[head];
      int px = p % w, py = p / w;
      const int nx4[4] = {px - 1, px + 1, px, px};
      const int ny4[4] = {py, py, py - 1, py + 1};
      for (int n = 0; n < 4; ++n) {
        if (nx4[n] < 0 || nx4[n] >= w || ny4[n] < 0 || ny4[n] >= h) continue;
        size_t nidx = static_cast<size_t>(ny4[n]) * w + nx4[n];
        if (owner[nidx] < 0) {
          owner[nidx] = owner[p];
          queue.push_back(static_cast<int>(nidx));
        }
      }
    }
  }
  for (int p : queue) D.data()[p] += delta[owner[p]];
  return true;
}

// Multi-iteration displacement synthesis at one level. The displacement field
// accumulates across iterations and is always applied to the signed distance
// field of the original target, so sub-pixel style offsets build up instead
// of being lost to binarization.
inline BinaryMask style_displace(const BinaryMask& target, const BinaryMask& reference,
                                 const ScalarField* strength_mask, const StructureConfig& cfg) {
  if (target.uniform() || reference.uniform()) return target;
  const int w = target.width(), h = target.height();
  RotationTables rot(cfg.boundary_patch);
  ContourPatches ref = extract_contour_patches(reference, rot);

  ScalarField dist = distance_transform(target);
  ScalarField signed0(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      signed0(x, y) = target(x, y) ? dist(x, y) - 0.5 : -(dist(x, y) - 0.5);

  ScalarField D(w, h, 0.0);
  BinaryMask current = target;
  for (int it = 0; it < cfg.lss_iterations; ++it) {
    if (!displace_increment(current, ref, rot, strength_mask, 1.5, D)) break;
    BinaryMask next(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) next(x, y) = signed0(x, y) + D(x, y) >= 0.0 ? 1 : 0;
    if (next.uniform()) break;  // collapsed; keep the last good shape
    current = std::move(next);
  }
  return current;
}

}  // namespace detail

// One resolution level of boundary-patch shape synthesis.
inline BinaryMask lss_step(const BinaryMask& target, const BinaryMask& reference,
                           const StructureConfig& cfg) {
  cfg.validate();
  if (target.width() < cfg.boundary_patch || target.height() < cfg.boundary_patch)
    return target;  // degenerate: nothing sensible to match
  if (target.uniform() || reference.uniform()) throw UniformMaskError();
  return binarize(detail::lss_vote(target, reference, cfg), 0.5);
}

struct StructureResult {
  BinaryMask shape;                      // deformed mask at full resolution
  std::vector<ScalarField> level_masks;  // M^(l), index l in 0..L (forward only)
};

namespace detail {

struct ComponentCrop {
  int x0, y0, w, h;
  BinaryMask mask;
  bool has_endpoints;
  Skeleton skel;  // coordinates local to the crop
};

inline BinaryMask delta_upsample(const BinaryMask& fresh, const BinaryMask& coarse_result,
                                 const BinaryMask& coarse_fresh) {
  // fresh + up(result - fresh at the coarse level), then re-binarized; a
  // no-change level therefore passes `fresh` through exactly
  ScalarField diff(coarse_result.width(), coarse_result.height());
  bool any = false;
  for (int y = 0; y < diff.height(); ++y)
    for (int x = 0; x < diff.width(); ++x) {
      diff(x, y) = static_cast<double>(coarse_result(x, y)) - coarse_fresh(x, y);
      any = any || diff(x, y) != 0.0;
    }
  if (!any) return fresh;
  ScalarField up = resample_to(diff, fresh.width(), fresh.height(), Resample::Bicubic);
  ScalarField blend(fresh.width(), fresh.height());
  for (int y = 0; y < blend.height(); ++y)
    for (int x = 0; x < blend.width(); ++x) blend(x, y) = fresh(x, y) + up(x, y);
  return binarize(blend, 0.5);
}

}  // namespace detail

// Forward transfer: deform T's stroke ends toward S's contour style while
// keeping stroke trunks bit-exact. Connected components are processed
// independently; components without stroke ends pass through the coarser
// half of the levels untouched and are then adjusted plainly.
inline StructureResult forward_transfer(const BinaryMask& T, const BinaryMask& S,
                                        const StructureConfig& cfg) {
  cfg.validate();
  if (T.uniform() || S.uniform()) throw UniformMaskError();

  Skeleton skel = skeletonize(T);
  detail::LevelPlan plan = detail::make_level_plan(T.width(), T.height(), cfg);

  StructureResult result;
  result.level_masks.resize(cfg.L + 1);
  for (int l = 0; l <= cfg.L; ++l) result.level_masks[l] = stroke_end_mask(skel, l, cfg);

  // reference pyramid
  std::vector<BinaryMask> S_levels(cfg.L + 1);
  for (int l = 0; l <= cfg.L; ++l)
    S_levels[l] = resample_to(S, std::max(1, (int)std::lround(S.width() * plan.scale[l])),
                              std::max(1, (int)std::lround(S.height() * plan.scale[l])),
                              Resample::Bicubic);

  // component crops; endpoint limbs may grow, so pad generously
  std::vector<detail::ComponentCrop> comps;
  {
    std::vector<int> labels(T.size(), -1);
    std::vector<int> stack;
    int ncomp = 0;
    const int w = T.width(), h = T.height();
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        size_t idx = static_cast<size_t>(y) * w + x;
        if (!T.data()[idx] || labels[idx] >= 0) continue;
        int minx = x, maxx = x, miny = y, maxy = y;
        labels[idx] = ncomp;
        stack.assign(1, static_cast<int>(idx));
        std::vector<int> pixels;
        while (!stack.empty()) {
          int p = stack.back();
          stack.pop_back();
          pixels.push_back(p);
          int px = p % w, py = p / w;
          minx = std::min(minx, px);
          maxx = std::max(maxx, px);
          miny = std::min(miny, py);
          maxy = std::max(maxy, py);
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              int nx = px + dx, ny = py + dy;
              if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
              size_t nidx = static_cast<size_t>(ny) * w + nx;
              if (T.data()[nidx] && labels[nidx] < 0) {
                labels[nidx] = ncomp;
                stack.push_back(static_cast<int>(nidx));
              }
            }
        }
        double max_cover = 0.0;
        for (const auto& e : skel.endpoints)
          if (e.component == ncomp) max_cover = std::max(max_cover, e.cover_radius);
        int margin = static_cast<int>(std::ceil(std::max(max_cover * 0.35 + 4, 16.0))) +
                     cfg.boundary_patch;
        detail::ComponentCrop crop;
        crop.x0 = std::max(0, minx - margin);
        crop.y0 = std::max(0, miny - margin);
        crop.w = std::min(w - 1, maxx + margin) - crop.x0 + 1;
        crop.h = std::min(h - 1, maxy + margin) - crop.y0 + 1;
        crop.mask = BinaryMask(crop.w, crop.h);
        for (int p : pixels) crop.mask(p % w - crop.x0, p / w - crop.y0) = 1;
        crop.has_endpoints = false;
        for (const auto& e : skel.endpoints)
          if (e.component == ncomp) crop.has_endpoints = true;
        crop.skel.width = crop.w;
        crop.skel.height = crop.h;
        crop.skel.mean_stroke_radius = skel.mean_stroke_radius;
        for (const auto& e : skel.endpoints)
          if (e.component == ncomp)
            crop.skel.endpoints.push_back({e.x - crop.x0, e.y - crop.y0, 0, e.cover_radius});
        comps.push_back(std::move(crop));
        ++ncomp;
      }
  }

  BinaryMask out(T.width(), T.height(), 0);
  for (auto& comp : comps) {
    // fresh downsamples of this component at every level
    std::vector<BinaryMask> T_levels(cfg.L + 1);
    for (int l = 0; l <= cfg.L; ++l)
      T_levels[l] =
          resample_to(comp.mask, std::max(1, (int)std::lround(comp.w * plan.scale[l])),
                      std::max(1, (int)std::lround(comp.h * plan.scale[l])), Resample::Bicubic);

    BinaryMask current = T_levels[cfg.L];
    for (int l = cfg.L; l >= 0; --l) {
      if (l < cfg.L) current = detail::delta_upsample(T_levels[l], current, T_levels[l + 1]);
      const BinaryMask& fresh = T_levels[l];
      if (comp.has_endpoints) {
        if (current.uniform() || S_levels[l].uniform()) {
          current = fresh;
          continue;
        }
        double frac = cfg.L == 0 ? 0.0 : static_cast<double>(l) / cfg.L;
        ScalarField M = detail::stroke_end_field(comp.skel, frac, plan.scale[l], fresh.width(),
                                                 fresh.height());
        current = detail::style_displace(current, S_levels[l], &M, cfg);
        // the stroke-end mask hard-gates the blend: outside it the fresh
        // downsample wins bit-for-bit
        for (int y = 0; y < current.height(); ++y)
          for (int x = 0; x < current.width(); ++x)
            if (M(x, y) == 0.0) current(x, y) = fresh(x, y);
      } else {
        // no stroke ends: untouched for the coarser half, plain synthesis after
        if (2 * l > cfg.L) {
          current = fresh;
        } else if (!current.uniform() && !S_levels[l].uniform()) {
          current = detail::style_displace(current, S_levels[l], nullptr, cfg);
        }
      }
    }
    for (int y = 0; y < comp.h; ++y)
      for (int x = 0; x < comp.w; ++x)
        if (current(x, y)) out(comp.x0 + x, comp.y0 + y) = 1;
  }

  result.shape = std::move(out);
  return result;
}

// Backward transfer: migrate the structural style of T_hat onto S with the
// plain (unmasked) multi-level synthesis.
inline BinaryMask backward_transfer(const BinaryMask& S, const BinaryMask& T_hat,
                                    const StructureConfig& cfg) {
  cfg.validate();
  if (S.uniform() || T_hat.uniform()) throw UniformMaskError();
  detail::LevelPlan plan = detail::make_level_plan(S.width(), S.height(), cfg);

  std::vector<BinaryMask> S_levels(cfg.L + 1), ref_levels(cfg.L + 1);
  for (int l = 0; l <= cfg.L; ++l) {
    S_levels[l] = resample_to(S, std::max(1, (int)std::lround(S.width() * plan.scale[l])),
                              std::max(1, (int)std::lround(S.height() * plan.scale[l])),
                              Resample::Bicubic);
    ref_levels[l] =
        resample_to(T_hat, std::max(1, (int)std::lround(T_hat.width() * plan.scale[l])),
                    std::max(1, (int)std::lround(T_hat.height() * plan.scale[l])),
                    Resample::Bicubic);
  }

  BinaryMask current = S_levels[cfg.L];
  for (int l = cfg.L; l >= 0; --l) {
    if (l < cfg.L) current = detail::delta_upsample(S_levels[l], current, S_levels[l + 1]);
    if (current.uniform() || ref_levels[l].uniform()) continue;
    current = detail::style_displace(current, ref_levels[l], nullptr, cfg);
  }
  return current;
}

}  // namespace glyphforge
