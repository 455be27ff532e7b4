#include <png.h>

#include <cstdio>
#include <csetjmp>
#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <memory>

// jpeglib.h needs FILE and size_t declared first.
#include <jpeglib.h>

#include "stancebench/error.hpp"
#include "stancebench/vision.hpp"

namespace stancebench {

namespace {

Image decode_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&img, path.c_str()) == 0) {
    throw Error(ErrorKind::ImageDecodeError, path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(img));
  if (png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr) == 0) {
    std::string msg = img.message;
    png_image_free(&img);
    throw Error(ErrorKind::ImageDecodeError, path.string() + ": " + msg);
  }
  Image out(static_cast<int>(img.height), static_cast<int>(img.width));
  for (std::size_t i = 0; i < buf.size(); ++i) out.pixels[i] = buf[i] / 255.0;
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

Image decode_jpeg(const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!file) throw Error(ErrorKind::ImageMissing, "cannot open " + path.string());

  jpeg_decompress_struct cinfo{};
  JpegErrorManager jerr{};
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  // Everything that must survive the longjmp lives outside this frame's locals.
  std::vector<unsigned char> pixels;
  int height = 0, width = 0;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorKind::ImageDecodeError, path.string() + ": " + jerr.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  height = static_cast<int>(cinfo.output_height);
  width = static_cast<int>(cinfo.output_width);
  pixels.resize(static_cast<std::size_t>(height) * width * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);

  Image out(height, width);
  for (std::size_t i = 0; i < pixels.size(); ++i) out.pixels[i] = pixels[i] / 255.0;
  return out;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ImageMissing, "cannot open " + path.string());
  std::array<unsigned char, 8> magic{};
  in.read(reinterpret_cast<char*>(magic.data()), magic.size());
  in.close();
  static constexpr std::array<unsigned char, 8> kPng = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (magic == kPng) return decode_png(path);
  if (magic[0] == 0xFF && magic[1] == 0xD8) return decode_jpeg(path);
  throw Error(ErrorKind::ImageDecodeError, path.string() + ": neither PNG nor JPEG");
}

Image resize_bilinear(const Image& image, int height, int width) {
  if (image.height == height && image.width == width) return image;
  if (image.height <= 0 || image.width <= 0 || height <= 0 || width <= 0) {
    throw Error(ErrorKind::DimensionError, "resize: empty image or target");
  }
  Image out(height, width);
  const double sy = static_cast<double>(image.height) / height;
  const double sx = static_cast<double>(image.width) / width;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height - 1.0);
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width - 1.0);
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < Image::kChannels; ++c) {
        const double top = image.at(y0, x0, c) * (1 - wx) + image.at(y0, x1, c) * wx;
        const double bottom = image.at(y1, x0, c) * (1 - wx) + image.at(y1, x1, c) * wx;
        out.at(y, x, c) = top * (1 - wy) + bottom * wy;
      }
    }
  }
  return out;
}

void save_png(const std::filesystem::path& path, const Image& image) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buf(image.pixels.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    buf[i] = static_cast<unsigned char>(std::lround(std::clamp(image.pixels[i], 0.0, 1.0) * 255.0));
  }
  if (png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr) == 0) {
    throw Error(ErrorKind::IoError, "cannot write " + path.string() + ": " + img.message);
  }
}

}  // namespace stancebench
