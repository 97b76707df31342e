#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "absim/image.hpp"

namespace absim {

// Raw float-grid container ("ABSIMF32" format): magic, two little-endian
// uint32 dims (width, height), then row-major float32 data.
struct F32Grid {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<float> data;
};

void write_f32_grid(const std::filesystem::path& path, const F32Grid& grid);
F32Grid read_f32_grid(const std::filesystem::path& path);

// Grayscale PNG, 8 or 16 bit. Color or palette files are rejected.
GrayImage load_png(const std::filesystem::path& path);
void save_png(const GrayImage& image, const std::filesystem::path& path);

// Dispatch on extension: .png or .f32. Round trips reproduce intensities
// within one quantization step of the bit depth (exactly, for .f32).
GrayImage load_image(const std::filesystem::path& path);
void save_image(const GrayImage& image, const std::filesystem::path& path);

// 16-bit grayscale preview of a PSF, scaled so the peak maps to 65535.
void save_psf_preview_png(const PsfImage& psf, const std::filesystem::path& path);

// PSF export: <prefix>.f32 raw grid plus <prefix>.json sidecar carrying the
// optical config, coefficients and the undersampled flag.
void save_psf(const PsfImage& psf, const std::filesystem::path& prefix, bool png_preview = false);

}  // namespace absim
