#pragma once

#include <map>
#include <string>
#include <vector>

#include "absim/fft.hpp"

namespace absim {

// Microscope parameters governing the pupil. Lengths are in micrometers,
// spatial frequencies in cycles/um.
struct OpticalConfig {
    double na = 0.75;          // numerical aperture
    double lambda_um = 0.35;   // wavelength
    double n_immersion = 1.0;  // immersion medium refractive index
    double n_med = 1.0;        // sample medium refractive index
    double pixel_um = 0.25;    // detector pixel pitch
    int grid = 64;             // PSF grid side (even, >= 32)

    // Constant immersion phase at the focal plane. A constant leaves the
    // intensity PSF unchanged; kept as an explicit knob rather than a model.
    double immersion_phase = 0.0;

    void validate() const;  // throws ConfigError

    double freq_step() const { return 1.0 / (grid * pixel_um); }
    double nyquist() const { return 1.0 / (2.0 * pixel_um); }
    double pupil_cutoff() const { return na / lambda_um; }
    double incoherent_cutoff() const { return 2.0 * na / lambda_um; }
};

// Table presets for the two datasets used throughout the pipeline.
OpticalConfig dnn_config(int grid = 64);
OpticalConfig livecell_config(int grid = 64);

// Sparse Wyant-index -> amplitude map, amplitudes in micrometers.
// Valid indices are 4..18; an absent index means amplitude zero.
struct ZernikeCoefficients {
    std::map<int, double> entries;

    void validate() const;  // throws ConfigError
    double amplitude(int index) const;
    void set(int index, double amplitude);
    bool empty() const { return entries.empty(); }
};

// Phase-length map (micrometers) over normalized pupil coordinates; zero
// outside the unit disk. The disk is inscribed in the grid with center
// (grid-1)/2 and radius (grid-1)/2.
struct WavefrontMap {
    int grid = 0;
    std::vector<double> values;  // row-major grid*grid

    double at(int y, int x) const { return values[static_cast<std::size_t>(y) * grid + x]; }
};

// Complex pupil grid in centered frequency layout (DC at grid/2, grid/2).
struct PupilGrid {
    int grid = 0;
    double freq_step = 0.0;
    std::vector<cplx> data;
    bool undersampled = false;  // diffraction cutoff exceeded Nyquist; disk clipped

    const cplx& at(int y, int x) const { return data[static_cast<std::size_t>(y) * grid + x]; }
};

// Normalized intensity PSF, centered so the unaberrated peak is at
// (grid/2, grid/2). Entries are nonnegative and sum to 1.
struct PsfImage {
    OpticalConfig config;
    ZernikeCoefficients coeffs;
    int grid = 0;
    std::vector<double> data;
    bool undersampled = false;

    double at(int y, int x) const { return data[static_cast<std::size_t>(y) * grid + x]; }
};

// Complex OTF in centered frequency layout; unit magnitude at DC.
struct OtfGrid {
    int grid = 0;
    double freq_step = 0.0;
    std::vector<cplx> data;

    const cplx& at(int y, int x) const { return data[static_cast<std::size_t>(y) * grid + x]; }
};

// Azimuthally averaged |OTF| against radial frequency. First point is
// (0, 1); bins are one frequency step wide and empty bins are dropped.
struct MtfCurve {
    std::vector<double> freq;   // cycles/um, ascending
    std::vector<double> value;  // in [0, 1]

    // Linear interpolation, clamped at the ends.
    double interpolate(double f) const;
};

// Pointwise sum of amplitude-weighted Zernike polynomials over the unit disk.
WavefrontMap wavefront(const ZernikeCoefficients& coeffs, int grid);

// Binary aperture of radius min(NA/lambda, Nyquist) carrying the phase
// factor exp(i(2*pi*phi/lambda - f_m)). Sets `undersampled` when the
// diffraction cutoff had to be clipped at Nyquist.
PupilGrid generalized_pupil(const OpticalConfig& config, const ZernikeCoefficients& coeffs);

// Intensity PSF: squared magnitude of the inverse DFT of the pupil,
// quadrant-swapped to the grid center and normalized to unit sum.
PsfImage psf(const OpticalConfig& config, const ZernikeCoefficients& coeffs);

// Fourier transform of the intensity PSF, normalized to 1 at DC.
OtfGrid otf(const PsfImage& psf);

// Radial profile of |OTF|.
MtfCurve mtf_profile(const OtfGrid& otf);

}  // namespace absim
