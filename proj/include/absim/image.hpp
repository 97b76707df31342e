#pragma once

#include <vector>

#include "absim/optics.hpp"

namespace absim {

// Grayscale image with intensities in [0, 1]. `bit_depth` records the
// quantization of the source file (8 or 16); in-memory math is double.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;  // row-major
    int bit_depth = 8;

    double at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }

    static GrayImage constant(int width, int height, double value, int bit_depth = 8);
};

// FFT 'same' convolution with symmetric (edge-repeating) reflective
// padding. Returns unclamped values; callers that need the [0,1] contract
// use convolve(). Kernel is row-major k x k with center at (k/2, k/2).
// Throws ConfigError when k/2 exceeds an image dimension (reflection
// padding would run out of pixels).
std::vector<double> convolve_raw(const GrayImage& image, const std::vector<double>& kernel, int k);

// convolve_raw + contract check: pre-clamp values must lie within
// [-1e-6, 1+1e-6] (guaranteed for unit-sum nonnegative kernels), then the
// result is clamped to [0, 1]. Throws NumericError when the check fails.
GrayImage convolve(const GrayImage& image, const std::vector<double>& kernel, int k);
GrayImage convolve(const GrayImage& image, const PsfImage& kernel);

}  // namespace absim
