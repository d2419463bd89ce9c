// Core raster value types shared by every module: 3-channel images in [0,1],
// strictly two-valued masks, real-valued scalar fields and resolution pyramids.
// All types are plain value types; operations elsewhere treat them as immutable
// inputs and are safe to call concurrently.
#pragma once

#include <cassert>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace glyphforge {

// ---------------------------------------------------------------------------
// Errors. Derived from std::runtime_error so callers can catch broadly; the
// CLI maps InvalidInput to exit code 2 and everything else to 3.
// ---------------------------------------------------------------------------

struct InvalidInput : std::runtime_error {
  explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

struct UniformMaskError : std::runtime_error {
  explicit UniformMaskError(const std::string& msg = "mask is uniform; no boundary exists")
      : std::runtime_error(msg) {}
};

struct TooManyLevelsError : InvalidInput {
  explicit TooManyLevelsError(const std::string& msg) : InvalidInput(msg) {}
};

struct DegenerateOutputError : InvalidInput {
  explicit DegenerateOutputError(const std::string& msg) : InvalidInput(msg) {}
};

struct DegenerateFeaturesError : std::runtime_error {
  explicit DegenerateFeaturesError(const std::string& msg = "all feature vectors are identical")
      : std::runtime_error(msg) {}
};

struct RectTooLargeError : InvalidInput {
  explicit RectTooLargeError(const std::string& msg) : InvalidInput(msg) {}
};

struct OutOfBoundsError : std::runtime_error {
  explicit OutOfBoundsError(const std::string& msg) : std::runtime_error(msg) {}
};

struct EmptyForegroundError : std::runtime_error {
  explicit EmptyForegroundError(const std::string& msg = "mask has no foreground pixels")
      : std::runtime_error(msg) {}
};

struct NoValidPlacementError : std::runtime_error {
  explicit NoValidPlacementError(const std::string& msg = "no placement fits inside the background")
      : std::runtime_error(msg) {}
};

struct RegionTooLargeError : InvalidInput {
  explicit RegionTooLargeError(const std::string& msg) : InvalidInput(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Value types
// ---------------------------------------------------------------------------

enum class ColorSpace { SRGB, Lab };

// H x W real-valued map. Row-major, (x, y) with x the column.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(int width, int height, double fill = 0.0)
      : width_(width), height_(height), data_(static_cast<size_t>(width) * height, fill) {
    assert(width >= 1 && height >= 1);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  size_t size() const { return data_.size(); }

  double& at(int x, int y) { return data_[static_cast<size_t>(y) * width_ + x]; }
  double at(int x, int y) const { return data_[static_cast<size_t>(y) * width_ + x]; }
  double& operator()(int x, int y) { return at(x, y); }
  double operator()(int x, int y) const { return at(x, y); }

  bool contains(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const double* row(int y) const { return data_.data() + static_cast<size_t>(y) * width_; }
  double* row(int y) { return data_.data() + static_cast<size_t>(y) * width_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// H x W mask with values in {0,1}.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, uint8_t fill = 0)
      : width_(width), height_(height), data_(static_cast<size_t>(width) * height, fill) {
    assert(width >= 1 && height >= 1);
    assert(fill == 0 || fill == 1);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  size_t size() const { return data_.size(); }

  uint8_t& at(int x, int y) { return data_[static_cast<size_t>(y) * width_ + x]; }
  uint8_t at(int x, int y) const { return data_[static_cast<size_t>(y) * width_ + x]; }
  uint8_t& operator()(int x, int y) { return at(x, y); }
  uint8_t operator()(int x, int y) const { return at(x, y); }

  bool contains(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }
  // Out-of-image samples read as background.
  uint8_t sample_or_zero(int x, int y) const { return contains(x, y) ? at(x, y) : uint8_t{0}; }

  uint8_t* data() { return data_.data(); }
  const uint8_t* data() const { return data_.data(); }

  size_t count_ones() const {
    size_t n = 0;
    for (uint8_t v : data_) n += v;
    return n;
  }
  bool uniform() const {
    size_t ones = count_ones();
    return ones == 0 || ones == size();
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> data_;
};

// H x W x 3 raster with components in [0,1]. Lab images are stored affinely
// rescaled into [0,1] (see color_space.hpp for the exact mapping).
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, ColorSpace space = ColorSpace::SRGB, double fill = 0.0)
      : width_(width),
        height_(height),
        space_(space),
        data_(static_cast<size_t>(width) * height * 3, fill) {
    assert(width >= 1 && height >= 1);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  ColorSpace space() const { return space_; }
  void set_space(ColorSpace s) { space_ = s; }
  bool empty() const { return data_.empty(); }

  double& at(int x, int y, int c) { return data_[(static_cast<size_t>(y) * width_ + x) * 3 + c]; }
  double at(int x, int y, int c) const {
    return data_[(static_cast<size_t>(y) * width_ + x) * 3 + c];
  }
  double& operator()(int x, int y, int c) { return at(x, y, c); }
  double operator()(int x, int y, int c) const { return at(x, y, c); }

  bool contains(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }

  double* pixel(int x, int y) { return data_.data() + (static_cast<size_t>(y) * width_ + x) * 3; }
  const double* pixel(int x, int y) const {
    return data_.data() + (static_cast<size_t>(y) * width_ + x) * 3;
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  size_t component_count() const { return data_.size(); }

 private:
  int width_ = 0;
  int height_ = 0;
  ColorSpace space_ = ColorSpace::SRGB;
  std::vector<double> data_;
};

// Resolution pyramid. levels[0] is full resolution; level l+1 has dimensions
// ceil(dims(l)/2).
template <typename T>
struct Pyramid {
  std::vector<T> levels;

  int level_count() const { return static_cast<int>(levels.size()); }
  // L as used throughout: level count minus one.
  int top_level() const { return level_count() - 1; }
  T& operator[](int l) { return levels[l]; }
  const T& operator[](int l) const { return levels[l]; }
};

// ---------------------------------------------------------------------------
// Small helpers
// ---------------------------------------------------------------------------

inline int ceil_div2(int v) { return (v + 1) / 2; }

template <typename T>
T clamp(T v, T lo, T hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

// Deterministic fork-join loop over [0, n). Work is split into fixed chunks so
// results never depend on the worker count; reductions must be done by the
// caller in index order.
inline void parallel_for(int n, int threads, const std::function<void(int, int)>& body) {
  if (n <= 0) return;
  threads = std::max(1, threads);
  if (threads == 1 || n < 64) {
    body(0, n);
    return;
  }
  int chunks = std::min(threads, n);
  int per = (n + chunks - 1) / chunks;
  std::vector<std::thread> pool;
  pool.reserve(chunks);
  for (int c = 0; c < chunks; ++c) {
    int b = c * per;
    int e = std::min(n, b + per);
    if (b >= e) break;
    pool.emplace_back(body, b, e);
  }
  for (auto& t : pool) t.join();
}

}  // namespace glyphforge
