#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

namespace ertbp {

// value = mantissa * exp(log_factor). The mantissa is kept in [0.5, 1) in
// absolute value (or exactly zero), so products of factors like exp(-q G^3/3)
// never underflow.
class ScaledReal {
public:
    constexpr ScaledReal() = default;
    ScaledReal(double mantissa, double log_factor = 0.0) : m_(mantissa), l_(log_factor) {
        normalize();
    }

    static ScaledReal exp(double log_factor) { return ScaledReal(1.0, log_factor); }

    double mantissa() const { return m_; }
    double log_factor() const { return l_; }

    bool is_zero() const { return m_ == 0.0; }
    int sign() const { return (m_ > 0) - (m_ < 0); }

    // log|value|; -inf for zero.
    double log_abs() const {
        return m_ == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(std::fabs(m_)) + l_;
    }

    // Plain double; underflows to 0 or overflows to inf outside double range.
    double to_double() const { return m_ == 0.0 ? 0.0 : m_ * std::exp(l_); }

    // value * exp(-shift), useful when a common scale is factored out by the caller.
    double to_double_scaled(double shift) const { return m_ == 0.0 ? 0.0 : m_ * std::exp(l_ - shift); }

    ScaledReal abs() const { return ScaledReal::raw(std::fabs(m_), l_); }
    ScaledReal operator-() const { return ScaledReal::raw(-m_, l_); }

    friend ScaledReal operator*(const ScaledReal& a, const ScaledReal& b) {
        return ScaledReal(a.m_ * b.m_, a.l_ + b.l_);
    }
    friend ScaledReal operator/(const ScaledReal& a, const ScaledReal& b) {
        return ScaledReal(a.m_ / b.m_, a.l_ - b.l_);
    }
    friend ScaledReal operator*(const ScaledReal& a, double b) { return ScaledReal(a.m_ * b, a.l_); }
    friend ScaledReal operator*(double b, const ScaledReal& a) { return ScaledReal(a.m_ * b, a.l_); }
    friend ScaledReal operator/(const ScaledReal& a, double b) { return ScaledReal(a.m_ / b, a.l_); }

    friend ScaledReal operator+(const ScaledReal& a, const ScaledReal& b) {
        if (a.m_ == 0.0) return b;
        if (b.m_ == 0.0) return a;
        if (a.l_ >= b.l_) return ScaledReal(a.m_ + b.m_ * std::exp(b.l_ - a.l_), a.l_);
        return ScaledReal(b.m_ + a.m_ * std::exp(a.l_ - b.l_), b.l_);
    }
    friend ScaledReal operator-(const ScaledReal& a, const ScaledReal& b) { return a + (-b); }

    ScaledReal& operator+=(const ScaledReal& o) { return *this = *this + o; }
    ScaledReal& operator-=(const ScaledReal& o) { return *this = *this - o; }
    ScaledReal& operator*=(const ScaledReal& o) { return *this = *this * o; }
    ScaledReal& operator*=(double o) { return *this = *this * o; }

    friend bool operator<(const ScaledReal& a, const ScaledReal& b) { return (a - b).m_ < 0.0; }
    friend bool operator>(const ScaledReal& a, const ScaledReal& b) { return b < a; }
    friend bool operator<=(const ScaledReal& a, const ScaledReal& b) { return !(b < a); }
    friend bool operator>=(const ScaledReal& a, const ScaledReal& b) { return !(a < b); }
    friend bool operator==(const ScaledReal& a, const ScaledReal& b) {
        return a.m_ == b.m_ && (a.m_ == 0.0 || a.l_ == b.l_);
    }

    // |a-b| / max(|a|,|b|), computed without leaving scaled arithmetic.
    friend double relative_difference(const ScaledReal& a, const ScaledReal& b) {
        if (a.is_zero() && b.is_zero()) return 0.0;
        const ScaledReal big = a.abs() > b.abs() ? a.abs() : b.abs();
        return ((a - b).abs() / big).to_double();
    }

    friend std::ostream& operator<<(std::ostream& os, const ScaledReal& v) {
        return os << v.m_ << "*exp(" << v.l_ << ")";
    }

private:
    static ScaledReal raw(double m, double l) {
        ScaledReal r;
        r.m_ = m;
        r.l_ = l;
        return r;
    }

    void normalize() {
        if (m_ == 0.0 || !std::isfinite(m_)) {
            if (m_ == 0.0) l_ = 0.0;
            return;
        }
        int e2 = 0;
        m_ = std::frexp(m_, &e2);
        if (e2 != 0) l_ += e2 * std::numbers::ln2;
    }

    double m_ = 0.0;
    double l_ = 0.0;
};

}  // namespace ertbp
