// sRGB <-> CIELab conversion (D65 white point). Lab images are stored with
// every channel affinely rescaled into [0,1]:
//   stored L = L* / 100,   stored a = (a* + 128) / 256,   stored b likewise.
// lab_native()/lab_stored() convert a single triple between the two scales.
#pragma once

#include <cmath>

#include "glyphforge/core.hpp"

namespace glyphforge {

namespace detail {

inline double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

inline double linear_to_srgb(double c) {
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

inline double lab_f(double t) {
  constexpr double kEps = 216.0 / 24389.0;   // (6/29)^3
  constexpr double kKappa = 24389.0 / 27.0;  // (29/3)^3
  return t > kEps ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0;
}

inline double lab_f_inv(double t) {
  constexpr double kDelta = 6.0 / 29.0;
  return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

// D65 reference white in XYZ.
constexpr double kXn = 0.95047;
constexpr double kYn = 1.00000;
constexpr double kZn = 1.08883;

}  // namespace detail

// r,g,b in [0,1] -> native L* in [0,100], a*/b* roughly [-128,128).
inline void srgb_to_lab_native(double r, double g, double b, double& L, double& a, double& bb) {
  double rl = detail::srgb_to_linear(r);
  double gl = detail::srgb_to_linear(g);
  double bl = detail::srgb_to_linear(b);
  double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
  double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
  double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;
  double fx = detail::lab_f(x / detail::kXn);
  double fy = detail::lab_f(y / detail::kYn);
  double fz = detail::lab_f(z / detail::kZn);
  L = 116.0 * fy - 16.0;
  a = 500.0 * (fx - fy);
  bb = 200.0 * (fy - fz);
}

inline void lab_native_to_srgb(double L, double a, double bb, double& r, double& g, double& b) {
  double fy = (L + 16.0) / 116.0;
  double fx = fy + a / 500.0;
  double fz = fy - bb / 200.0;
  double x = detail::kXn * detail::lab_f_inv(fx);
  double y = detail::kYn * detail::lab_f_inv(fy);
  double z = detail::kZn * detail::lab_f_inv(fz);
  double rl = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
  double gl = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
  double bl = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;
  r = clamp(detail::linear_to_srgb(rl), 0.0, 1.0);
  g = clamp(detail::linear_to_srgb(gl), 0.0, 1.0);
  b = clamp(detail::linear_to_srgb(bl), 0.0, 1.0);
}

inline void lab_stored_from_native(double L, double a, double b, double& sl, double& sa, double& sb) {
  sl = L / 100.0;
  sa = (a + 128.0) / 256.0;
  sb = (b + 128.0) / 256.0;
}

inline void lab_native_from_stored(double sl, double sa, double sb, double& L, double& a, double& b) {
  L = sl * 100.0;
  a = sa * 256.0 - 128.0;
  b = sb * 256.0 - 128.0;
}

inline RasterImage to_lab(const RasterImage& img) {
  if (img.space() == ColorSpace::Lab) return img;
  RasterImage out(img.width(), img.height(), ColorSpace::Lab);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double* p = img.pixel(x, y);
      double L, a, b;
      srgb_to_lab_native(p[0], p[1], p[2], L, a, b);
      double* q = out.pixel(x, y);
      lab_stored_from_native(L, a, b, q[0], q[1], q[2]);
      q[0] = clamp(q[0], 0.0, 1.0);
      q[1] = clamp(q[1], 0.0, 1.0);
      q[2] = clamp(q[2], 0.0, 1.0);
    }
  }
  return out;
}

inline RasterImage to_srgb(const RasterImage& img) {
  if (img.space() == ColorSpace::SRGB) return img;
  RasterImage out(img.width(), img.height(), ColorSpace::SRGB);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double* p = img.pixel(x, y);
      double L, a, b;
      lab_native_from_stored(p[0], p[1], p[2], L, a, b);
      double* q = out.pixel(x, y);
      lab_native_to_srgb(L, a, b, q[0], q[1], q[2]);
    }
  }
  return out;
}

// Rec.709 luma of an sRGB image, or the L channel of a Lab image. In [0,1].
inline ScalarField luminance(const RasterImage& img) {
  ScalarField out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double* p = img.pixel(x, y);
      out(x, y) = img.space() == ColorSpace::Lab ? p[0]
                                                 : 0.2126 * p[0] + 0.7152 * p[1] + 0.0722 * p[2];
    }
  }
  return out;
}

}  // namespace glyphforge
