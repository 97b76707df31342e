#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "absim/image.hpp"
#include "absim/rng.hpp"

namespace absim::testutil {

// Fresh directory under the system temp root; callers may leave it behind.
inline std::filesystem::path make_temp_dir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path() / ("absim_" + tag);
    std::filesystem::create_directories(base);
    static std::atomic<int> counter{0};
    for (;;) {
        auto dir = base / ("run_" + std::to_string(counter.fetch_add(1)));
        if (std::filesystem::create_directory(dir)) return dir;
    }
}

// Deterministic cell-like test image: soft blobs on a dim background.
// Returns the image and (optionally, via out param) the blob pixel sets.
inline GrayImage synthetic_blob_image(int width, int height, int blob_count,
                                      std::uint64_t seed,
                                      std::vector<std::vector<std::uint32_t>>* blob_pixels = nullptr,
                                      double background = 0.08, double foreground = 0.85,
                                      double noise = 0.01) {
    GrayImage img = GrayImage::constant(width, height, background);
    SplitMix64 rng(seed);

    struct Blob {
        int x, y, r;
    };
    std::vector<Blob> blobs;
    int attempts = 0;
    while (static_cast<int>(blobs.size()) < blob_count && attempts < 100000) {
        ++attempts;
        const int r = 6 + static_cast<int>(rng.below(5));
        const int x = r + 14 + static_cast<int>(rng.below(width - 2 * (r + 14)));
        const int y = r + 14 + static_cast<int>(rng.below(height - 2 * (r + 14)));
        bool ok = true;
        for (const Blob& b : blobs) {
            const double d2 = double(x - b.x) * (x - b.x) + double(y - b.y) * (y - b.y);
            const double min_d = b.r + r + 8;
            if (d2 < min_d * min_d) {
                ok = false;
                break;
            }
        }
        if (ok) blobs.push_back({x, y, r});
    }

    for (const Blob& b : blobs) {
        std::vector<std::uint32_t> pixels;
        for (int y = b.y - b.r; y <= b.y + b.r; ++y) {
            for (int x = b.x - b.r; x <= b.x + b.r; ++x) {
                const double d2 = double(x - b.x) * (x - b.x) + double(y - b.y) * (y - b.y);
                if (d2 <= double(b.r) * b.r) {
                    img.at(y, x) = foreground;
                    pixels.push_back(static_cast<std::uint32_t>(y) * width + x);
                }
            }
        }
        if (blob_pixels) blob_pixels->push_back(std::move(pixels));
    }

    if (noise > 0.0) {
        for (double& v : img.pixels) {
            v = std::clamp(v + noise * rng.normal(), 0.0, 1.0);
        }
    }
    return img;
}

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

// 512-point product quadrature over the unit disk (16 radial Gauss-Legendre
// nodes x 32 azimuthal samples), weights including the radial Jacobian.
struct DiskQuadrature {
    std::vector<double> rho, theta, weight;  // 512 entries each

    DiskQuadrature() {
        std::vector<double> nodes, w;
        gauss_legendre(16, nodes, w);
        const int n_theta = 32;
        for (int i = 0; i < 16; ++i) {
            const double r = 0.5 * (nodes[i] + 1.0);  // map [-1,1] -> [0,1]
            const double wr = 0.5 * w[i] * r;         // include Jacobian rho
            for (int j = 0; j < n_theta; ++j) {
                rho.push_back(r);
                theta.push_back(2.0 * M_PI * j / n_theta);
                weight.push_back(wr * (2.0 * M_PI / n_theta));
            }
        }
    }
};

}  // namespace absim::testutil
