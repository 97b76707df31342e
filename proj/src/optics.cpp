#include "absim/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "absim/errors.hpp"
#include "absim/zernike.hpp"

namespace absim {

void OpticalConfig::validate() const {
    if (!(na > 0.0)) throw ConfigError("numerical aperture must be > 0");
    if (!(lambda_um > 0.0)) throw ConfigError("wavelength must be > 0");
    if (!(pixel_um > 0.0)) throw ConfigError("pixel pitch must be > 0");
    if (grid < 32 || grid % 2 != 0) {
        throw ConfigError("grid must be even and >= 32, got " + std::to_string(grid));
    }
    if (n_immersion < 1.0 || n_med < 1.0) {
        throw ConfigError("refractive indices must be >= 1");
    }
    if (!std::isfinite(immersion_phase)) throw ConfigError("immersion phase must be finite");
}

OpticalConfig dnn_config(int grid) {
    OpticalConfig c;
    c.na = 0.75;
    c.lambda_um = 0.35;
    c.n_immersion = 1.0;
    c.n_med = 1.0;
    c.pixel_um = 0.25;
    c.grid = grid;
    return c;
}

OpticalConfig livecell_config(int grid) {
    OpticalConfig c;
    c.na = 1.35;
    c.lambda_um = 0.55;
    c.n_immersion = 1.0;
    c.n_med = 1.0;
    c.pixel_um = 1.24;
    c.grid = grid;
    return c;
}

void ZernikeCoefficients::validate() const {
    for (const auto& [index, amplitude] : entries) {
        if (index < 4 || index > kZernikeMaxIndex) {
            throw ConfigError("coefficient index " + std::to_string(index) +
                              " outside [4, " + std::to_string(kZernikeMaxIndex) + "]");
        }
        if (!std::isfinite(amplitude)) {
            throw ConfigError("coefficient " + std::to_string(index) + " is not finite");
        }
    }
}

double ZernikeCoefficients::amplitude(int index) const {
    const auto it = entries.find(index);
    return it == entries.end() ? 0.0 : it->second;
}

void ZernikeCoefficients::set(int index, double amplitude) {
    if (index < 4 || index > kZernikeMaxIndex) {
        throw ConfigError("coefficient index " + std::to_string(index) + " outside [4, " +
                          std::to_string(kZernikeMaxIndex) + "]");
    }
    entries[index] = amplitude;
}

double MtfCurve::interpolate(double f) const {
    if (freq.empty()) return 0.0;
    if (f <= freq.front()) return value.front();
    if (f >= freq.back()) return value.back();
    const auto it = std::upper_bound(freq.begin(), freq.end(), f);
    const std::size_t hi = static_cast<std::size_t>(it - freq.begin());
    const std::size_t lo = hi - 1;
    const double t = (f - freq[lo]) / (freq[hi] - freq[lo]);
    return value[lo] + t * (value[hi] - value[lo]);
}

WavefrontMap wavefront(const ZernikeCoefficients& coeffs, int grid) {
    if (grid < 32) throw ConfigError("wavefront grid must be >= 32");
    coeffs.validate();

    WavefrontMap map;
    map.grid = grid;
    map.values.assign(static_cast<std::size_t>(grid) * grid, 0.0);

    const double center = 0.5 * (grid - 1);
    const double radius = 0.5 * (grid - 1);
    for (int y = 0; y < grid; ++y) {
        for (int x = 0; x < grid; ++x) {
            const double dx = (x - center) / radius;
            const double dy = (y - center) / radius;
            const double rho = std::hypot(dx, dy);
            if (rho > 1.0) continue;
            const double theta = std::atan2(dy, dx);
            double sum = 0.0;
            for (const auto& [index, amplitude] : coeffs.entries) {
                sum += amplitude * zernike_eval(index, rho, theta);
            }
            map.values[static_cast<std::size_t>(y) * grid + x] = sum;
        }
    }
    return map;
}

PupilGrid generalized_pupil(const OpticalConfig& config, const ZernikeCoefficients& coeffs) {
    config.validate();
    coeffs.validate();

    const int n = config.grid;
    const double df = config.freq_step();
    const double pupil_radius = config.pupil_cutoff();
    const double nyquist = config.nyquist();

    PupilGrid pupil;
    pupil.grid = n;
    pupil.freq_step = df;
    pupil.undersampled = pupil_radius > nyquist * (1.0 + 1e-12);
    pupil.data.assign(static_cast<std::size_t>(n) * n, cplx(0.0, 0.0));

    const double cutoff = std::min(pupil_radius, nyquist);
    const double cutoff_sq = cutoff * cutoff;
    const double phase_scale = 2.0 * std::numbers::pi / config.lambda_um;

    for (int y = 0; y < n; ++y) {
        const double fy = (y - n / 2) * df;
        for (int x = 0; x < n; ++x) {
            const double fx = (x - n / 2) * df;
            const double r_sq = fx * fx + fy * fy;
            if (r_sq > cutoff_sq) continue;

            double phase = -config.immersion_phase;
            if (!coeffs.empty()) {
                const double rho = std::min(std::sqrt(r_sq) / pupil_radius, 1.0);
                const double theta = std::atan2(fy, fx);
                double phi = 0.0;  // phase length in um
                for (const auto& [index, amplitude] : coeffs.entries) {
                    phi += amplitude * zernike_eval(index, rho, theta);
                }
                phase += phase_scale * phi;
            }
            pupil.data[static_cast<std::size_t>(y) * n + x] =
                cplx(std::cos(phase), std::sin(phase));
        }
    }
    return pupil;
}

PsfImage psf(const OpticalConfig& config, const ZernikeCoefficients& coeffs) {
    PupilGrid pupil = generalized_pupil(config, coeffs);
    const int n = pupil.grid;

    std::vector<cplx> field = ifftshift2(pupil.data, n, n);
    fft2(field, n, n, /*inverse=*/true);

    std::vector<double> intensity(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) intensity[i] = std::norm(field[i]);
    intensity = fftshift2(intensity, n, n);

    double sum = 0.0;
    for (double v : intensity) sum += v;
    if (!(sum > 0.0)) throw NumericError("pupil produced an all-zero PSF");
    for (double& v : intensity) v /= sum;

    PsfImage out;
    out.config = config;
    out.coeffs = coeffs;
    out.grid = n;
    out.data = std::move(intensity);
    out.undersampled = pupil.undersampled;
    return out;
}

OtfGrid otf(const PsfImage& psf) {
    const int n = psf.grid;
    std::vector<cplx> spectrum(psf.data.size());
    const std::vector<double> unshifted = ifftshift2(psf.data, n, n);
    for (std::size_t i = 0; i < unshifted.size(); ++i) spectrum[i] = cplx(unshifted[i], 0.0);
    fft2(spectrum, n, n, /*inverse=*/false);

    const double dc = spectrum[0].real();  // = pixel sum, positive
    if (!(dc > 0.0)) throw NumericError("PSF has zero total intensity");
    for (cplx& v : spectrum) v /= dc;

    OtfGrid out;
    out.grid = n;
    out.freq_step = 1.0 / (n * psf.config.pixel_um);
    out.data = fftshift2(spectrum, n, n);
    return out;
}

MtfCurve mtf_profile(const OtfGrid& otf) {
    const int n = otf.grid;
    const double df = otf.freq_step;

    // Ring-average |OTF| into bins one frequency step wide.
    const int max_bin = static_cast<int>(std::ceil(std::numbers::sqrt2 * n / 2.0)) + 1;
    std::vector<double> sums(max_bin + 1, 0.0);
    std::vector<int> counts(max_bin + 1, 0);
    for (int y = 0; y < n; ++y) {
        const double fy = (y - n / 2) * df;
        for (int x = 0; x < n; ++x) {
            const double fx = (x - n / 2) * df;
            const int bin = static_cast<int>(std::lround(std::hypot(fx, fy) / df));
            sums[bin] += std::abs(otf.at(y, x));
            counts[bin] += 1;
        }
    }

    MtfCurve curve;
    for (int b = 0; b <= max_bin; ++b) {
        if (counts[b] == 0) continue;
        curve.freq.push_back(b * df);
        curve.value.push_back(sums[b] / counts[b]);
    }
    return curve;
}

}  // namespace absim
