#include "absim/zernike.hpp"

#include <cmath>
#include <string>

#include "absim/errors.hpp"

namespace absim {

namespace {

// n <= 8 for index 18, so plain doubles hold these factorials exactly.
double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

WyantTerm wyant_term(int index) {
    if (index < 0 || index > kZernikeMaxIndex) {
        throw ConfigError("Zernike index " + std::to_string(index) + " outside [0, " +
                          std::to_string(kZernikeMaxIndex) + "]");
    }
    const int group = static_cast<int>(std::sqrt(static_cast<double>(index)));
    const int pos = index - group * group;
    const int k = pos / 2;
    return WyantTerm{group + k, group - k, pos % 2 == 1};
}

double zernike_radial(int n, int m, double rho) {
    // R_n^m(rho) = sum_s (-1)^s (n-s)! / (s! ((n+m)/2-s)! ((n-m)/2-s)!) rho^(n-2s)
    //            = rho^m * P(rho^2), evaluated as a Horner scheme in rho^2.
    const double rho2 = rho * rho;
    double acc = 0.0;
    for (int s = 0; s <= (n - m) / 2; ++s) {
        const double c = factorial(n - s) /
                         (factorial(s) * factorial((n + m) / 2 - s) * factorial((n - m) / 2 - s));
        acc = acc * rho2 + (s % 2 == 0 ? c : -c);
    }
    return acc * std::pow(rho, m);
}

double zernike_eval(int index, double rho, double theta) {
    if (rho < 0.0 || rho > 1.0 + 1e-12) {
        throw ConfigError("Zernike radial coordinate " + std::to_string(rho) + " outside [0, 1]");
    }
    rho = std::min(rho, 1.0);
    const WyantTerm t = wyant_term(index);
    const double radial = zernike_radial(t.n, t.m, rho);
    if (t.m == 0) return radial;
    return radial * (t.sine ? std::sin(t.m * theta) : std::cos(t.m * theta));
}

}  // namespace absim
