#include "absim/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "absim/errors.hpp"
#include "absim/fft.hpp"

namespace absim {

namespace {

int next_pow2(int n) {
    int p = 1;
    while (p < n) p *= 2;
    return p;
}

// Symmetric (edge-repeating) reflection of an out-of-range coordinate.
int reflect_index(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

}  // namespace

GrayImage GrayImage::constant(int width, int height, double value, int bit_depth) {
    GrayImage img;
    img.width = width;
    img.height = height;
    img.bit_depth = bit_depth;
    img.pixels.assign(static_cast<std::size_t>(width) * height, value);
    return img;
}

std::vector<double> convolve_raw(const GrayImage& image, const std::vector<double>& kernel,
                                 int k) {
    const int h = image.height;
    const int w = image.width;
    if (h < 1 || w < 1) throw ConfigError("empty image");
    if (k < 1 || static_cast<std::size_t>(k) * k != kernel.size()) {
        throw ConfigError("kernel size mismatch");
    }
    const int margin = k / 2;
    if (margin > h || margin > w) {
        throw ConfigError("kernel side " + std::to_string(k) +
                          " too large for reflective padding of a " + std::to_string(w) + "x" +
                          std::to_string(h) + " image");
    }

    // Reflect-pad by the kernel half-width, then do a linear convolution in
    // the frequency domain and crop back to the original frame.
    const int ph = h + 2 * margin;
    const int pw = w + 2 * margin;
    const int fy = next_pow2(ph + k - 1);
    const int fx = next_pow2(pw + k - 1);

    std::vector<cplx> a(static_cast<std::size_t>(fy) * fx, cplx(0.0, 0.0));
    for (int y = 0; y < ph; ++y) {
        const int sy = reflect_index(y - margin, h);
        for (int x = 0; x < pw; ++x) {
            const int sx = reflect_index(x - margin, w);
            a[static_cast<std::size_t>(y) * fx + x] = cplx(image.at(sy, sx), 0.0);
        }
    }
    std::vector<cplx> b(static_cast<std::size_t>(fy) * fx, cplx(0.0, 0.0));
    for (int y = 0; y < k; ++y) {
        for (int x = 0; x < k; ++x) {
            b[static_cast<std::size_t>(y) * fx + x] = cplx(kernel[static_cast<std::size_t>(y) * k + x], 0.0);
        }
    }

    fft2(a, fy, fx, false);
    fft2(b, fy, fx, false);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
    fft2(a, fy, fx, true);
    const double scale = 1.0 / (static_cast<double>(fy) * fx);

    // Kernel center (k/2, k/2) over padded pixel (y+margin, x+margin).
    const int off = margin + k / 2;
    std::vector<double> out(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out[static_cast<std::size_t>(y) * w + x] =
                a[static_cast<std::size_t>(y + off) * fx + (x + off)].real() * scale;
        }
    }
    return out;
}

GrayImage convolve(const GrayImage& image, const std::vector<double>& kernel, int k) {
    std::vector<double> raw = convolve_raw(image, kernel, k);
    for (double v : raw) {
        if (!(v >= -1e-6 && v <= 1.0 + 1e-6)) {
            throw NumericError("convolution output " + std::to_string(v) +
                               " outside [-1e-6, 1+1e-6]; kernel is not a normalized PSF");
        }
    }
    GrayImage out;
    out.width = image.width;
    out.height = image.height;
    out.bit_depth = image.bit_depth;
    out.pixels.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out.pixels[i] = std::clamp(raw[i], 0.0, 1.0);
    return out;
}

GrayImage convolve(const GrayImage& image, const PsfImage& kernel) {
    return convolve(image, kernel.data, kernel.grid);
}

}  // namespace absim
