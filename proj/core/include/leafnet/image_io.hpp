#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "leafnet/tensor.hpp"

namespace leafnet {

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File does not exist or cannot be opened.
class ImageFileMissing final : public ImageError {
 public:
  using ImageError::ImageError;
};

// Magic bytes match neither PNG nor JPEG.
class ImageFormatUnsupported final : public ImageError {
 public:
  using ImageError::ImageError;
};

// Recognized format, undecodable content (truncation, bad structure).
class ImageCorrupt final : public ImageError {
 public:
  using ImageError::ImageError;
};

// Decodes a PNG or JPEG file into [h, w, 3] with values in [0, 255].
// Grayscale is promoted by channel replication; an alpha channel is dropped.
Tensor decode_image(const std::string& path);

// 8-bit RGB (3 channels) or RGBA (4) writers; tensors carry [h,w,c] in [0,255].
void encode_png(const std::string& path, const Tensor& img);
void encode_jpeg(const std::string& path, const Tensor& img, int quality = 90);

}  // namespace leafnet
