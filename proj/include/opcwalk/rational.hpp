#pragma once

// Minimal exact rational arithmetic for the brute-force walk oracle.
// Numerators and denominators stay within int64 after gcd reduction; the
// intermediate products use 128-bit arithmetic and overflow is checked, since
// oracle windows are supposed to be small by construction.

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace opcwalk {

class Rational {
public:
    Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1) : n_(num), d_(den) {
        if (den == 0) throw std::invalid_argument("Rational: zero denominator");
        normalize();
    }

    std::int64_t num() const { return n_; }
    std::int64_t den() const { return d_; }
    double value() const { return static_cast<double>(n_) / static_cast<double>(d_); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make(i128(a.n_) * b.d_ + i128(b.n_) * a.d_, i128(a.d_) * b.d_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return make(i128(a.n_) * b.d_ - i128(b.n_) * a.d_, i128(a.d_) * b.d_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make(i128(a.n_) * b.n_, i128(a.d_) * b.d_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.n_ == 0) throw std::invalid_argument("Rational: division by zero");
        return make(i128(a.n_) * b.d_, i128(a.d_) * b.n_);
    }
    friend bool operator==(const Rational&, const Rational&) = default;

    std::string str() const {
        return d_ == 1 ? std::to_string(n_) : std::to_string(n_) + "/" + std::to_string(d_);
    }

private:
    using i128 = __int128;

    static Rational make(i128 n, i128 d) {
        if (d < 0) { n = -n; d = -d; }
        i128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        const i128 lo = INT64_MIN, hi = INT64_MAX;
        if (n < lo || n > hi || d > hi)
            throw std::overflow_error("Rational: value outside 64-bit range after reduction");
        Rational r;
        r.n_ = static_cast<std::int64_t>(n);
        r.d_ = static_cast<std::int64_t>(d);
        return r;
    }

    static i128 gcd128(i128 a, i128 b) {
        while (b != 0) { i128 t = a % b; a = b; b = t; }
        return a == 0 ? 1 : a;
    }

    void normalize() {
        if (d_ < 0) { n_ = -n_; d_ = -d_; }
        std::int64_t g = std::gcd(n_ < 0 ? -n_ : n_, d_);
        if (g > 1) { n_ /= g; d_ /= g; }
    }

    std::int64_t n_ = 0;
    std::int64_t d_ = 1;
};

}  // namespace opcwalk
