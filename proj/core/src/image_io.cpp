#include "leafnet/image_io.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>

#include <jpeglib.h>
#include <png.h>

namespace leafnet {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw ImageFileMissing("cannot open image file: " + path);
  }
  return f;
}

Tensor interleaved_to_rgb_tensor(const std::vector<unsigned char>& pixels, std::size_t h,
                                 std::size_t w, std::size_t channels) {
  Tensor out({h, w, 3});
  float* dst = out.data();
  for (std::size_t i = 0; i < h * w; ++i) {
    const unsigned char* px = pixels.data() + i * channels;
    if (channels == 1) {
      dst[i * 3 + 0] = dst[i * 3 + 1] = dst[i * 3 + 2] = static_cast<float>(px[0]);
    } else {
      dst[i * 3 + 0] = static_cast<float>(px[0]);
      dst[i * 3 + 1] = static_cast<float>(px[1]);
      dst[i * 3 + 2] = static_cast<float>(px[2]);  // alpha, if any, is dropped
    }
  }
  return out;
}

// ---- PNG ----

struct PngReadGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadGuard() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

Tensor decode_png_file(std::FILE* f, const std::string& path) {
  PngReadGuard g;
  // Buffers live outside the setjmp scope so the longjmp error path never
  // skips a destructor.
  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  std::size_t w = 0, h = 0, channels = 0;

  g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw ImageCorrupt("png: allocation failure for " + path);
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw ImageCorrupt("png: allocation failure for " + path);

  if (setjmp(png_jmpbuf(g.png))) {
    throw ImageCorrupt("corrupt PNG file: " + path);
  }
  png_init_io(g.png, f);
  png_read_info(g.png, g.info);

  w = png_get_image_width(g.png, g.info);
  h = png_get_image_height(g.png, g.info);
  const png_byte color = png_get_color_type(g.png, g.info);
  const png_byte depth = png_get_bit_depth(g.png, g.info);

  if (depth == 16) png_set_strip_16(g.png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(g.png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(g.png);
  if (png_get_valid(g.png, g.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(g.png);
  png_read_update_info(g.png, g.info);

  channels = png_get_channels(g.png, g.info);
  pixels.resize(w * h * channels);
  rows.resize(h);
  for (std::size_t y = 0; y < h; ++y) rows[y] = pixels.data() + y * w * channels;
  png_read_image(g.png, rows.data());
  png_read_end(g.png, nullptr);

  return interleaved_to_rgb_tensor(pixels, h, w, channels);
}

struct PngWriteGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteGuard() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
  }
};

// ---- JPEG ----

struct JpegErrorTrap {
  jpeg_error_mgr mgr;
  std::jmp_buf env;
};

void jpeg_error_throw(j_common_ptr cinfo) {
  auto* trap = reinterpret_cast<JpegErrorTrap*>(cinfo->err);
  std::longjmp(trap->env, 1);
}

Tensor decode_jpeg_file(std::FILE* f, const std::string& path) {
  jpeg_decompress_struct cinfo;
  JpegErrorTrap trap;
  cinfo.err = jpeg_std_error(&trap.mgr);
  trap.mgr.error_exit = jpeg_error_throw;

  std::vector<unsigned char> pixels;
  if (setjmp(trap.env)) {
    jpeg_destroy_decompress(&cinfo);
    throw ImageCorrupt("corrupt JPEG file: " + path);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, f);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);

  const std::size_t w = cinfo.output_width;
  const std::size_t h = cinfo.output_height;
  const std::size_t channels = static_cast<std::size_t>(cinfo.output_components);
  pixels.resize(w * h * channels);
  while (cinfo.output_scanline < cinfo.output_height) {
    unsigned char* row = pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * channels;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);

  return interleaved_to_rgb_tensor(pixels, h, w, channels);
}

std::vector<unsigned char> quantize_pixels(const Tensor& img, const char* who) {
  if (img.rank() != 3 || (img.extent(2) != 3 && img.extent(2) != 4)) {
    throw ShapeError(std::string(who) + ": expected [h,w,3] or [h,w,4], got " +
                     shape_to_string(img.shape()));
  }
  std::vector<unsigned char> out(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const float v = std::min(255.0f, std::max(0.0f, img[i]));
    out[i] = static_cast<unsigned char>(v + 0.5f);
  }
  return out;
}

}  // namespace

Tensor decode_image(const std::string& path) {
  FilePtr f = open_file(path, "rb");

  unsigned char magic[8] = {0};
  const std::size_t got = std::fread(magic, 1, sizeof magic, f.get());
  std::rewind(f.get());

  static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  if (got >= 8 && std::memcmp(magic, png_sig, 8) == 0) {
    return decode_png_file(f.get(), path);
  }
  if (got >= 2 && magic[0] == 0xff && magic[1] == 0xd8) {
    return decode_jpeg_file(f.get(), path);
  }
  throw ImageFormatUnsupported("unsupported image format (expected PNG or JPEG): " + path);
}

void encode_png(const std::string& path, const Tensor& img) {
  std::vector<unsigned char> pixels = quantize_pixels(img, "encode_png");
  const std::size_t h = img.extent(0), w = img.extent(1), channels = img.extent(2);
  std::vector<png_bytep> rows(h);
  for (std::size_t y = 0; y < h; ++y) rows[y] = pixels.data() + y * w * channels;

  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw ImageError("cannot write PNG file: " + path);

  PngWriteGuard g;
  g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw ImageError("png: allocation failure for " + path);
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw ImageError("png: allocation failure for " + path);
  if (setjmp(png_jmpbuf(g.png))) {
    throw ImageError("png: write failure for " + path);
  }
  png_init_io(g.png, f.get());
  png_set_IHDR(g.png, g.info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               channels == 4 ? PNG_COLOR_TYPE_RGBA : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(g.png, g.info);
  png_write_image(g.png, rows.data());
  png_write_end(g.png, nullptr);
}

void encode_jpeg(const std::string& path, const Tensor& img, int quality) {
  if (img.extent(2) != 3) {
    throw ShapeError("encode_jpeg: expected [h,w,3], got " + shape_to_string(img.shape()));
  }
  std::vector<unsigned char> pixels = quantize_pixels(img, "encode_jpeg");
  const std::size_t h = img.extent(0), w = img.extent(1);

  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw ImageError("cannot write JPEG file: " + path);

  jpeg_compress_struct cinfo;
  JpegErrorTrap trap;
  cinfo.err = jpeg_std_error(&trap.mgr);
  trap.mgr.error_exit = jpeg_error_throw;
  if (setjmp(trap.env)) {
    jpeg_destroy_compress(&cinfo);
    throw ImageError("jpeg: write failure for " + path);
  }
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, f.get());
  cinfo.image_width = static_cast<JDIMENSION>(w);
  cinfo.image_height = static_cast<JDIMENSION>(h);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    unsigned char* row = pixels.data() + static_cast<std::size_t>(cinfo.next_scanline) * w * 3;
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
}

}  // namespace leafnet
