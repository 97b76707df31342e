#pragma once

namespace absim {

// Highest Wyant index the toolkit evaluates.
inline constexpr int kZernikeMaxIndex = 18;

// Radial degree n, azimuthal frequency m and sin/cos selector of a
// Wyant-ordered Zernike index. Grouping rule: for index j let
// g = floor(sqrt(j)), p = j - g*g, k = p/2; then n = g + k, m = g - k,
// and odd p selects the sine term.
struct WyantTerm {
    int n;
    int m;
    bool sine;
};

// Throws ConfigError for index outside [0, kZernikeMaxIndex].
WyantTerm wyant_term(int index);

// Zernike radial polynomial R_n^m(rho).
double zernike_radial(int n, int m, double rho);

// Wyant-ordered Zernike polynomial Z_index(rho, theta). The polynomials are
// unit-normalized at the pupil edge (value 1 at rho = 1 on the azimuthal
// crest). Requires 0 <= rho <= 1.
double zernike_eval(int index, double rho, double theta);

}  // namespace absim
