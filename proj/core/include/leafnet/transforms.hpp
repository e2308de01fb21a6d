#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "leafnet/tensor.hpp"

namespace leafnet {

namespace detail {

template <typename T>
void require_hwc(const TensorT<T>& img, const char* who) {
  if (img.rank() != 3) {
    throw ShapeError(std::string(who) + ": expected [h,w,channels], got " +
                     shape_to_string(img.shape()));
  }
}

// Bilinear fetch with edge clamping, (x, y) in pixel-center coordinates.
template <typename T>
T sample_bilinear(const TensorT<T>& img, double y, double x, std::size_t channel) {
  const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(img.extent(0));
  const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(img.extent(1));
  const std::size_t c = img.extent(2);
  const double yc = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const double xc = std::clamp(x, 0.0, static_cast<double>(w - 1));
  const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(std::floor(yc));
  const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(std::floor(xc));
  const std::ptrdiff_t y1 = std::min(y0 + 1, h - 1);
  const std::ptrdiff_t x1 = std::min(x0 + 1, w - 1);
  const double fy = yc - static_cast<double>(y0);
  const double fx = xc - static_cast<double>(x0);
  const T* d = img.data();
  const double top = (1.0 - fx) * d[(y0 * w + x0) * c + channel] + fx * d[(y0 * w + x1) * c + channel];
  const double bot = (1.0 - fx) * d[(y1 * w + x0) * c + channel] + fx * d[(y1 * w + x1) * c + channel];
  return static_cast<T>((1.0 - fy) * top + fy * bot);
}

}  // namespace detail

// Bilinear resize with half-pixel-center alignment:
//   src = (dst + 0.5) * (in/out) - 0.5
// Interpolation never produces values outside the input range.
template <typename T>
TensorT<T> resize_bilinear(const TensorT<T>& img, std::size_t out_h, std::size_t out_w) {
  detail::require_hwc(img, "resize_bilinear");
  const std::size_t in_h = img.extent(0), in_w = img.extent(1), c = img.extent(2);
  if (out_h == 0 || out_w == 0) throw ShapeError("resize_bilinear: target extents must be >= 1");
  if (in_h == out_h && in_w == out_w) return img;
  TensorT<T> out({out_h, out_w, c});
  const double sy = static_cast<double>(in_h) / static_cast<double>(out_h);
  const double sx = static_cast<double>(in_w) / static_cast<double>(out_w);
  T* dst = out.data();
  for (std::size_t y = 0; y < out_h; ++y) {
    const double src_y = (static_cast<double>(y) + 0.5) * sy - 0.5;
    for (std::size_t x = 0; x < out_w; ++x) {
      const double src_x = (static_cast<double>(x) + 0.5) * sx - 0.5;
      for (std::size_t ch = 0; ch < c; ++ch)
        dst[(y * out_w + x) * c + ch] = detail::sample_bilinear(img, src_y, src_x, ch);
    }
  }
  return out;
}

// Pixel range [0,255] -> [0,1].
template <typename T>
TensorT<T> rescale_to_unit(const TensorT<T>& img) {
  return scale(img, static_cast<T>(1.0 / 255.0));
}

template <typename T>
TensorT<T> flip_horizontal(const TensorT<T>& img) {
  detail::require_hwc(img, "flip_horizontal");
  const std::size_t h = img.extent(0), w = img.extent(1), c = img.extent(2);
  TensorT<T> out(img.shape());
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t ch = 0; ch < c; ++ch)
        out[(y * w + x) * c + ch] = img[(y * w + (w - 1 - x)) * c + ch];
  return out;
}

template <typename T>
TensorT<T> flip_vertical(const TensorT<T>& img) {
  detail::require_hwc(img, "flip_vertical");
  const std::size_t h = img.extent(0), w = img.extent(1), c = img.extent(2);
  TensorT<T> out(img.shape());
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t ch = 0; ch < c; ++ch)
        out[(y * w + x) * c + ch] = img[((h - 1 - y) * w + x) * c + ch];
  return out;
}

// Center crop to `fraction` of each side, resampled back to the input size.
template <typename T>
TensorT<T> center_zoom(const TensorT<T>& img, double fraction) {
  detail::require_hwc(img, "center_zoom");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("center_zoom: crop fraction must lie in (0,1]");
  }
  const std::size_t h = img.extent(0), w = img.extent(1), c = img.extent(2);
  const std::size_t crop_h = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(h * fraction)));
  const std::size_t crop_w = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(w * fraction)));
  const std::size_t y0 = (h - crop_h) / 2;
  const std::size_t x0 = (w - crop_w) / 2;
  TensorT<T> crop({crop_h, crop_w, c});
  for (std::size_t y = 0; y < crop_h; ++y)
    for (std::size_t x = 0; x < crop_w; ++x)
      for (std::size_t ch = 0; ch < c; ++ch)
        crop[(y * crop_w + x) * c + ch] = img[((y0 + y) * w + (x0 + x)) * c + ch];
  return resize_bilinear(crop, h, w);
}

// Rotation about the image center by `degrees`, counter-clockwise as seen on
// screen (y axis points down, so the forward map of a source point p is
// d = c + M (p - c) with M = [[cos, sin], [-sin, cos]]). Implemented by
// inverse mapping with bilinear sampling; out-of-frame samples replicate the
// nearest edge pixel.
template <typename T>
TensorT<T> rotate_ccw(const TensorT<T>& img, double degrees) {
  detail::require_hwc(img, "rotate_ccw");
  const std::size_t h = img.extent(0), w = img.extent(1), c = img.extent(2);
  const double theta = degrees * 3.14159265358979323846 / 180.0;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double cy = (static_cast<double>(h) - 1.0) / 2.0;
  const double cx = (static_cast<double>(w) - 1.0) / 2.0;
  TensorT<T> out(img.shape());
  T* dst = out.data();
  for (std::size_t y = 0; y < h; ++y) {
    const double ry = static_cast<double>(y) - cy;
    for (std::size_t x = 0; x < w; ++x) {
      const double rx = static_cast<double>(x) - cx;
      // inverse of M is its transpose
      const double src_x = cx + cos_t * rx - sin_t * ry;
      const double src_y = cy + sin_t * rx + cos_t * ry;
      for (std::size_t ch = 0; ch < c; ++ch)
        dst[(y * w + x) * c + ch] = detail::sample_bilinear(img, src_y, src_x, ch);
    }
  }
  return out;
}

// The four derived images stored for every training original, in provenance
// order: horizontal mirror, vertical mirror, center zoom, 10-degree
// counter-clockwise rotation.
struct AugmentOptions {
  double zoom_fraction = 0.8;
  double rotate_degrees = 10.0;
};

template <typename T>
std::array<TensorT<T>, 4> augment_record(const TensorT<T>& img, const AugmentOptions& opt = {}) {
  return {flip_horizontal(img), flip_vertical(img), center_zoom(img, opt.zoom_fraction),
          rotate_ccw(img, opt.rotate_degrees)};
}

}  // namespace leafnet
