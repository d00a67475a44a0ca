#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace mfld {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(sum exp(a_i)); -inf entries allowed, all -inf gives -inf.
inline double log_sum_exp(std::span<const double> a) {
    double m = kNegInf;
    for (double v : a) m = std::max(m, v);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double v : a) s += std::exp(v - m);
    return m + std::log(s);
}

inline double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

// x log x with the 0 log 0 = 0 convention
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// x log(x/y), 0 when x == 0, +inf when y == 0 < x
inline double xlogxy(double x, double y) {
    if (x <= 0.0) return 0.0;
    if (y <= 0.0) return kInf;
    return x * std::log(x / y);
}

}  // namespace mfld
