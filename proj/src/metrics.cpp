#include "absim/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "absim/errors.hpp"

namespace absim {

namespace {

void require_same_dims(const GrayImage& a, const GrayImage& b) {
    if (a.width != b.width || a.height != b.height) {
        throw ConfigError("image dimensions differ: " + std::to_string(a.width) + "x" +
                          std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                          std::to_string(b.height));
    }
}

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;
constexpr double kSsimRange = 1.0;

std::vector<double> ssim_window_weights() {
    std::vector<double> w(kSsimWindow);
    const double c = (kSsimWindow - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - c;
        w[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += w[i];
    }
    for (double& v : w) v /= sum;
    return w;
}

// Separable weighted filter, valid region only: output is
// (h - win + 1) x (w - win + 1).
std::vector<double> filter_valid(const std::vector<double>& img, int h, int w,
                                 const std::vector<double>& taps) {
    const int win = static_cast<int>(taps.size());
    const int oh = h - win + 1;
    const int ow = w - win + 1;
    std::vector<double> rows(static_cast<std::size_t>(h) * ow);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int t = 0; t < win; ++t) acc += taps[t] * img[static_cast<std::size_t>(y) * w + x + t];
            rows[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(oh) * ow);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int t = 0; t < win; ++t) acc += taps[t] * rows[static_cast<std::size_t>(y + t) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    return out;
}

}  // namespace

double psnr(const GrayImage& a, const GrayImage& b, double peak) {
    require_same_dims(a, b);
    if (!(peak > 0.0)) throw ConfigError("peak must be > 0");

    // MSE over intensities scaled to [0, peak]; the peak cancels against
    // the numerator, so co-scaled data yields the same value for any peak.
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = (a.pixels[i] - b.pixels[i]) * peak;
        sum_sq += d * d;
    }
    const double mse = sum_sq / static_cast<double>(a.pixels.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const GrayImage& a, const GrayImage& b) {
    require_same_dims(a, b);
    if (a.width < kSsimWindow || a.height < kSsimWindow) {
        throw ConfigError("image smaller than the 11x11 SSIM window");
    }

    const std::vector<double> taps = ssim_window_weights();
    const int h = a.height;
    const int w = a.width;

    std::vector<double> aa(a.pixels.size()), bb(a.pixels.size()), ab(a.pixels.size());
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        aa[i] = a.pixels[i] * a.pixels[i];
        bb[i] = b.pixels[i] * b.pixels[i];
        ab[i] = a.pixels[i] * b.pixels[i];
    }

    const std::vector<double> mu_a = filter_valid(a.pixels, h, w, taps);
    const std::vector<double> mu_b = filter_valid(b.pixels, h, w, taps);
    const std::vector<double> m_aa = filter_valid(aa, h, w, taps);
    const std::vector<double> m_bb = filter_valid(bb, h, w, taps);
    const std::vector<double> m_ab = filter_valid(ab, h, w, taps);

    const double c1 = (kSsimK1 * kSsimRange) * (kSsimK1 * kSsimRange);
    const double c2 = (kSsimK2 * kSsimRange) * (kSsimK2 * kSsimRange);

    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double va = m_aa[i] - mu_a[i] * mu_a[i];
        const double vb = m_bb[i] - mu_b[i] * mu_b[i];
        const double cov = m_ab[i] - mu_a[i] * mu_b[i];
        const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
        const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2);
        total += num / den;
    }
    return total / static_cast<double>(mu_a.size());
}

double pearson(const GrayImage& a, const GrayImage& b) {
    require_same_dims(a, b);
    const std::size_t n = a.pixels.size();

    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += a.pixels[i];
        mean_b += b.pixels[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);

    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a.pixels[i] - mean_a;
        const double db = b.pixels[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) {
        throw NumericError("correlation undefined: " +
                           std::string(var_a == 0.0 && var_b == 0.0 ? "both images are"
                                       : var_a == 0.0              ? "first image is"
                                                                   : "second image is") +
                           " constant");
    }
    return cov / std::sqrt(var_a * var_b);
}

SimilarityReport similarity(const GrayImage& a, const GrayImage& b, double peak) {
    SimilarityReport report;
    report.psnr_db = psnr(a, b, peak);
    report.ssim = ssim(a, b);
    report.pearson = pearson(a, b);
    return report;
}

}  // namespace absim
