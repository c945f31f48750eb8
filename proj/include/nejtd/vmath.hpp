#pragma once

// Elementary functions built only from IEEE add/mul/div/sqrt and bit
// manipulation, so that loops over trial lanes auto-vectorize and every lane
// produces bit-identical results whether it runs in a SIMD register or in
// scalar code. Coefficients are the fdlibm minimax sets.
//
// Accuracy is within a couple of ulp of the correctly rounded result on the
// ranges the integrator uses (|x| < 2^20 for the trig functions).

#include <bit>
#include <cstdint>

namespace nejtd::vmath {

namespace detail {

inline constexpr double kRoundMagic = 6755399441055744.0;  // 1.5 * 2^52

// Round-to-nearest-even for |x| < 2^51 without calling into libm.
inline double round_nearest(double x) {
    return (x + kRoundMagic) - kRoundMagic;
}

inline constexpr double kInvPio2 = 6.36619772367581382433e-01;
inline constexpr double kPio2_1 = 1.57079632673412561417e+00;
inline constexpr double kPio2_2 = 6.07710050630396597660e-11;
inline constexpr double kPio2_3 = 2.02226624871116645580e-21;

inline double sin_kernel(double r) {
    constexpr double S1 = -1.66666666666666324348e-01;
    constexpr double S2 = 8.33333333332248946124e-03;
    constexpr double S3 = -1.98412698298579493134e-04;
    constexpr double S4 = 2.75573137070700676789e-06;
    constexpr double S5 = -2.50507602534068634195e-08;
    constexpr double S6 = 1.58969099521155010221e-10;
    const double z = r * r;
    const double p = S2 + z * (S3 + z * (S4 + z * (S5 + z * S6)));
    return r + r * z * (S1 + z * p);
}

inline double cos_kernel(double r) {
    constexpr double C1 = 4.16666666666666019037e-02;
    constexpr double C2 = -1.38888888888741095749e-03;
    constexpr double C3 = 2.48015872894767294178e-05;
    constexpr double C4 = -2.75573143513906633035e-07;
    constexpr double C5 = 2.08757232129817482790e-09;
    constexpr double C6 = -1.13596475577881948265e-11;
    const double z = r * r;
    const double p = z * (C1 + z * (C2 + z * (C3 + z * (C4 + z * (C5 + z * C6)))));
    const double hz = 0.5 * z;
    const double w = 1.0 - hz;
    return w + (((1.0 - w) - hz) + z * p);
}

// Cody-Waite reduction by pi/2. Returns the remainder in [-pi/4, pi/4] and
// the quadrant index modulo 4.
inline double reduce_pio2(double x, std::int64_t& quadrant) {
    const double k = round_nearest(x * kInvPio2);
    quadrant = static_cast<std::int64_t>(k) & 3;
    return ((x - k * kPio2_1) - k * kPio2_2) - k * kPio2_3;
}

}  // namespace detail

inline double sin(double x) {
    std::int64_t q;
    const double r = detail::reduce_pio2(x, q);
    const double s = detail::sin_kernel(r);
    const double c = detail::cos_kernel(r);
    const double v = (q & 1) ? c : s;
    return (q & 2) ? -v : v;
}

inline double cos(double x) {
    std::int64_t q;
    const double r = detail::reduce_pio2(x, q);
    const double s = detail::sin_kernel(r);
    const double c = detail::cos_kernel(r);
    const double v = (q & 1) ? s : c;
    return ((q + 1) & 2) ? -v : v;
}

inline void sincos(double x, double& s_out, double& c_out) {
    std::int64_t q;
    const double r = detail::reduce_pio2(x, q);
    const double s = detail::sin_kernel(r);
    const double c = detail::cos_kernel(r);
    const double sv = (q & 1) ? c : s;
    const double cv = (q & 1) ? s : c;
    s_out = (q & 2) ? -sv : sv;
    c_out = ((q + 1) & 2) ? -cv : cv;
}

// Natural log for positive normal finite x.
inline double log(double x) {
    constexpr double ln2_hi = 6.93147180369123816490e-01;
    constexpr double ln2_lo = 1.90821492927058770002e-10;
    constexpr double Lg1 = 6.666666666666735130e-01;
    constexpr double Lg2 = 3.999999999940941908e-01;
    constexpr double Lg3 = 2.857142874366239149e-01;
    constexpr double Lg4 = 2.222219843214978396e-01;
    constexpr double Lg5 = 1.818357216161805012e-01;
    constexpr double Lg6 = 1.531383769920937332e-01;
    constexpr double Lg7 = 1.479819860511658591e-01;
    constexpr double sqrt2 = 1.41421356237309504880;

    const auto bits = std::bit_cast<std::uint64_t>(x);
    std::int64_t e = static_cast<std::int64_t>(bits >> 52) - 1023;
    double m = std::bit_cast<double>((bits & 0x000FFFFFFFFFFFFFULL) | 0x3FF0000000000000ULL);
    const bool big = m > sqrt2;
    m = big ? 0.5 * m : m;
    e = big ? e + 1 : e;
    const double k = static_cast<double>(e);

    const double f = m - 1.0;
    const double s = f / (2.0 + f);
    const double z = s * s;
    const double w = z * z;
    const double t1 = w * (Lg2 + w * (Lg4 + w * Lg6));
    const double t2 = z * (Lg1 + w * (Lg3 + w * (Lg5 + w * Lg7)));
    const double R = t2 + t1;
    const double hfsq = 0.5 * f * f;
    return k * ln2_hi - ((hfsq - (s * (hfsq + R) + k * ln2_lo)) - f);
}

// exp for x in [-700, 700]; values below are flushed to 0.
inline double exp(double x) {
    constexpr double ln2_hi = 6.93147180369123816490e-01;
    constexpr double ln2_lo = 1.90821492927058770002e-10;
    constexpr double inv_ln2 = 1.44269504088896338700e+00;
    constexpr double P1 = 1.66666666666666019037e-01;
    constexpr double P2 = -2.77777777770155933842e-03;
    constexpr double P3 = 6.61375632143793436117e-05;
    constexpr double P4 = -1.65339022054652515390e-06;
    constexpr double P5 = 4.13813679705723846039e-08;

    const bool underflow = x < -700.0;
    const double xc = underflow ? 0.0 : x;
    const double k = detail::round_nearest(xc * inv_ln2);
    const double hi = xc - k * ln2_hi;
    const double lo = k * ln2_lo;
    const double r = hi - lo;
    const double t = r * r;
    const double c = r - t * (P1 + t * (P2 + t * (P3 + t * (P4 + t * P5))));
    const double y = 1.0 - ((lo - (r * c) / (2.0 - c)) - hi);
    const auto ki = static_cast<std::int64_t>(k);
    const double scale = std::bit_cast<double>(static_cast<std::uint64_t>(ki + 1023) << 52);
    return underflow ? 0.0 : y * scale;
}

}  // namespace nejtd::vmath
