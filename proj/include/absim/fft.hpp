#pragma once

#include <complex>
#include <vector>

namespace absim {

using cplx = std::complex<double>;

// In-place 2D DFT of a row-major ny x nx grid (FFTW backend, unnormalized;
// the inverse carries no 1/N factor). Planning is serialized internally so
// callers may run transforms from multiple threads.
void fft2(std::vector<cplx>& data, int ny, int nx, bool inverse);

// Circular shift by (sy, sx); used to move DC between corner and center.
template <typename T>
std::vector<T> circshift2(const std::vector<T>& in, int ny, int nx, int sy, int sx) {
    std::vector<T> out(in.size());
    sy = ((sy % ny) + ny) % ny;
    sx = ((sx % nx) + nx) % nx;
    for (int y = 0; y < ny; ++y) {
        const int ty = (y + sy) % ny;
        for (int x = 0; x < nx; ++x) {
            out[static_cast<std::size_t>(ty) * nx + (x + sx) % nx] =
                in[static_cast<std::size_t>(y) * nx + x];
        }
    }
    return out;
}

// DC at index 0  ->  DC at (ny/2, nx/2).
template <typename T>
std::vector<T> fftshift2(const std::vector<T>& in, int ny, int nx) {
    return circshift2(in, ny, nx, ny / 2, nx / 2);
}

// DC at (ny/2, nx/2)  ->  DC at index 0. Equal to fftshift2 for even dims.
template <typename T>
std::vector<T> ifftshift2(const std::vector<T>& in, int ny, int nx) {
    return circshift2(in, ny, nx, ny - ny / 2, nx - nx / 2);
}

}  // namespace absim
