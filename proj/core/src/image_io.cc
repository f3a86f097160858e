#include "sta/image_io.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include <png.h>

namespace sta {
namespace {

unsigned char ToByte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

ImageBuffer ReadPng(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw std::runtime_error("cannot read PNG " + path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> data(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, data.data(), 0, nullptr)) {
    std::string message = png.message;
    png_image_free(&png);
    throw std::runtime_error("cannot decode PNG " + path.string() + ": " + message);
  }
  ImageBuffer image(static_cast<int>(png.height), static_cast<int>(png.width), 3);
  for (std::size_t i = 0; i < image.size(); ++i) image[i] = data[i] / 255.0;
  return image;
}

void WritePng(const std::filesystem::path& path, const ImageBuffer& image) {
  std::vector<unsigned char> data(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) data[i] = ToByte(image[i]);
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = image.width();
  png.height = image.height();
  png.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.c_str(), 0, data.data(), 0, nullptr)) {
    throw std::runtime_error("cannot write PNG " + path.string() + ": " + png.message);
  }
}

ImageBuffer Quantize8(const ImageBuffer& image) {
  ImageBuffer out = image;
  for (double& v : out.pixels()) v = ToByte(v) / 255.0;
  return out;
}

}  // namespace sta
