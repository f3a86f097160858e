#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include <jpeglib.h>

#include "sta/attacks.h"

namespace sta {
namespace {

struct ErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void OnError(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<ErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

std::vector<unsigned char> Encode(const std::vector<unsigned char>& samples,
                                  int h, int w, int c, int quality) {
  jpeg_compress_struct cinfo;
  ErrorManager err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = OnError;
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(buffer);
    throw std::runtime_error(std::string("jpeg encode: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &size);
  cinfo.image_width = w;
  cinfo.image_height = h;
  cinfo.input_components = c;
  cinfo.in_color_space = c == 3 ? JCS_RGB : JCS_GRAYSCALE;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<unsigned char*>(
        samples.data() + static_cast<std::size_t>(cinfo.next_scanline) * w * c);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::vector<unsigned char> out(buffer, buffer + size);
  std::free(buffer);
  return out;
}

std::vector<unsigned char> Decode(const std::vector<unsigned char>& data, int h,
                                  int w, int c) {
  jpeg_decompress_struct cinfo;
  ErrorManager err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = OnError;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw std::runtime_error(std::string("jpeg decode: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data.data(), data.size());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = c == 3 ? JCS_RGB : JCS_GRAYSCALE;
  jpeg_start_decompress(&cinfo);
  if (static_cast<int>(cinfo.output_width) != w ||
      static_cast<int>(cinfo.output_height) != h ||
      cinfo.output_components != c) {
    jpeg_destroy_decompress(&cinfo);
    throw std::runtime_error("jpeg decode: unexpected output geometry");
  }
  std::vector<unsigned char> out(static_cast<std::size_t>(h) * w * c);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * c;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return out;
}

}  // namespace

ImageBuffer JpegRoundTrip(const ImageBuffer& image, int quality) {
  if (quality < 1 || quality > 100) {
    throw std::invalid_argument("jpeg quality must be in [1,100]");
  }
  const int h = image.height();
  const int w = image.width();
  const int c = image.channels();
  std::vector<unsigned char> samples(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) {
    samples[i] = static_cast<unsigned char>(
        std::lround(std::clamp(image[i], 0.0, 1.0) * 255.0));
  }
  const auto decoded = Decode(Encode(samples, h, w, c, quality), h, w, c);
  ImageBuffer out(h, w, c);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = decoded[i] / 255.0;
  return out;
}

}  // namespace sta
