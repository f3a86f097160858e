#ifndef STA_IMAGE_IO_H_
#define STA_IMAGE_IO_H_

#include <filesystem>

#include "sta/core_model.h"

namespace sta {

// Reads any PNG as 8-bit RGB scaled to [0,1]. Throws std::runtime_error on
// I/O or decode failure.
ImageBuffer ReadPng(const std::filesystem::path& path);

// Writes an 8-bit PNG (RGB, or grayscale for single-channel images). Pixels
// are clamped to [0,1] and rounded to the nearest 1/255.
void WritePng(const std::filesystem::path& path, const ImageBuffer& image);

// The image as it would be read back after WritePng.
ImageBuffer Quantize8(const ImageBuffer& image);

}  // namespace sta

#endif  // STA_IMAGE_IO_H_
