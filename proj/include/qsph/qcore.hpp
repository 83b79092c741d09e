/**
 * @file qcore.hpp
 * @brief q-numbers, q-factorials, half-integers and a Riemann zeta helper.
 */
#pragma once

#include <cmath>
#include <compare>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qsph {

/// Validated deformation parameter, 0 < q < 1.
struct Deformation {
    double q;
    explicit Deformation(double value) : q(value) {
        if (!(value > 0.0 && value < 1.0))
            throw std::invalid_argument("q must lie strictly inside (0,1)");
    }
};

inline double check_q(double q) { return Deformation(q).q; }

/// [x] = (q^x - q^-x) / (q - q^-1)
inline double qnum(double x, double q) {
    return (std::pow(q, x) - std::pow(q, -x)) / (q - 1.0 / q);
}

inline double qfact(int n, double q) {
    if (n < 0) throw std::invalid_argument("q_factorial: negative argument");
    double r = 1.0;
    for (int k = 2; k <= n; ++k) r *= qnum(k, q);
    return r;
}

/// [n]!! with [0]!! = [-1]!! = 1.
inline double qdfact(int n, double q) {
    if (n < -1) throw std::invalid_argument("q_double_factorial: argument below -1");
    double r = 1.0;
    for (int k = n; k >= 2; k -= 2) r *= qnum(k, q);
    return r;
}

inline double qbinom(int n, int m, double q) {
    if (n < 0 || m < 0) throw std::invalid_argument("q_binomial: negative argument");
    if (m > n) throw std::invalid_argument("q_binomial: m > n");
    return qfact(n, q) / (qfact(m, q) * qfact(n - m, q));
}

/// Riemann zeta for real s > 1 by Euler-Maclaurin summation.
inline double zeta(double s) {
    if (!(s > 1.0)) throw std::invalid_argument("zeta: requires s > 1");
    constexpr int n_direct = 32;
    // B_{2k} / (2k)!
    static constexpr double b2k[] = {1.0 / 12.0,         -1.0 / 720.0,
                                     1.0 / 30240.0,      -1.0 / 1209600.0,
                                     1.0 / 47900160.0,   -691.0 / 1307674368000.0,
                                     1.0 / 74724249600.0};
    double sum = 0.0;
    for (int n = n_direct - 1; n >= 1; --n) sum += std::pow(n, -s);
    const double N = n_direct;
    sum += std::pow(N, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(N, -s);
    // rising factorial s(s+1)...(s+2k-2) times N^{-s-2k+1}
    double rising = s;
    double npow = std::pow(N, -s - 1.0);
    for (int k = 0; k < 7; ++k) {
        sum += b2k[k] * rising * npow;
        rising *= (s + 2 * k + 1) * (s + 2 * k + 2);
        npow /= N * N;
    }
    return sum;
}

/// Half-integer stored as twice its value.
struct HalfInt {
    int twice = 0;

    static constexpr HalfInt from_twice(int t) { return HalfInt{t}; }
    static constexpr HalfInt from_int(int n) { return HalfInt{2 * n}; }
    constexpr double value() const { return 0.5 * twice; }
    constexpr bool is_integer() const { return twice % 2 == 0; }
    constexpr HalfInt abs() const { return HalfInt{twice < 0 ? -twice : twice}; }
    constexpr int sign() const { return twice < 0 ? -1 : 1; }

    friend constexpr HalfInt operator+(HalfInt a, HalfInt b) { return {a.twice + b.twice}; }
    friend constexpr HalfInt operator-(HalfInt a, HalfInt b) { return {a.twice - b.twice}; }
    friend constexpr HalfInt operator-(HalfInt a) { return {-a.twice}; }
    friend constexpr auto operator<=>(HalfInt, HalfInt) = default;

    /// Parses "3", "-1/2", "1.5".
    static HalfInt parse(const std::string& text) {
        auto slash = text.find('/');
        if (slash != std::string::npos) {
            int num = std::stoi(text.substr(0, slash));
            int den = std::stoi(text.substr(slash + 1));
            if (den == 1) return from_int(num);
            if (den != 2) throw std::invalid_argument("half-integer denominator must be 1 or 2");
            return from_twice(num);
        }
        double v = std::stod(text);
        double t = 2.0 * v;
        if (std::abs(t - std::round(t)) > 1e-12)
            throw std::invalid_argument("not a half-integer: " + text);
        return from_twice(static_cast<int>(std::lround(t)));
    }

    std::string str() const {
        if (is_integer()) return std::to_string(twice / 2);
        return std::to_string(twice) + "/2";
    }
};

/// (-1)^k for an integer k given as a doubled value; throws on odd doubles.
inline int parity_sign(int twice_k) {
    if (twice_k % 2 != 0) throw std::logic_error("parity of a non-integer exponent");
    return ((twice_k / 2) % 2 == 0) ? 1 : -1;
}

}  // namespace qsph
