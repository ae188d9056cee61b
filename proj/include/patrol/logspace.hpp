#pragma once

// Log-domain nonnegative reals forming a (+,*) semiring, plus a compensated
// log-sum-exp. Used to keep the counting recurrences overflow-free: raw
// counts reach ~N^(kT) while their logs stay small.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace patrol {

class LogReal {
  public:
    LogReal() : lg_(-std::numeric_limits<double>::infinity()) {}
    explicit LogReal(double value) {
        lg_ = value > 0 ? std::log(value) : -std::numeric_limits<double>::infinity();
    }

    static LogReal from_log(double lg) {
        LogReal r;
        r.lg_ = lg;
        return r;
    }
    static LogReal zero() { return LogReal(); }
    static LogReal one() { return from_log(0.0); }

    double log() const { return lg_; }
    double value() const { return std::exp(lg_); }
    bool is_zero() const { return lg_ == -std::numeric_limits<double>::infinity(); }

    LogReal& operator*=(const LogReal& o) {
        if (is_zero() || o.is_zero())
            lg_ = -std::numeric_limits<double>::infinity();
        else
            lg_ += o.lg_;
        return *this;
    }
    LogReal& operator+=(const LogReal& o) {
        if (o.is_zero()) return *this;
        if (is_zero()) {
            lg_ = o.lg_;
            return *this;
        }
        double a = lg_, b = o.lg_;
        if (a < b) std::swap(a, b);
        lg_ = a + std::log1p(std::exp(b - a));
        return *this;
    }
    friend LogReal operator*(LogReal a, const LogReal& b) { return a *= b; }
    friend LogReal operator+(LogReal a, const LogReal& b) { return a += b; }

  private:
    double lg_;
};

// (max, +) scalar: drops into the same DPs to turn weighted counting into
// best-response maximization
struct MaxPlus {
    double v;
    MaxPlus() : v(-std::numeric_limits<double>::infinity()) {}
    explicit MaxPlus(double x) : v(x) {}
    static MaxPlus zero() { return MaxPlus(); }
    static MaxPlus one() { return MaxPlus(0.0); }
    bool is_zero() const { return v == -std::numeric_limits<double>::infinity(); }
    MaxPlus& operator*=(const MaxPlus& o) {
        v = (is_zero() || o.is_zero()) ? -std::numeric_limits<double>::infinity() : v + o.v;
        return *this;
    }
    MaxPlus& operator+=(const MaxPlus& o) {
        v = std::max(v, o.v);
        return *this;
    }
    friend MaxPlus operator*(MaxPlus a, const MaxPlus& b) { return a *= b; }
    friend MaxPlus operator+(MaxPlus a, const MaxPlus& b) { return a += b; }
};

// semiring trait shared by the templated dynamic programs
template <class V>
struct ring {
    static V zero() { return V(0); }
    static V one() { return V(1); }
    static bool is_zero(const V& v) { return v == V(0); }
};

template <>
struct ring<LogReal> {
    static LogReal zero() { return LogReal::zero(); }
    static LogReal one() { return LogReal::one(); }
    static bool is_zero(const LogReal& v) { return v.is_zero(); }
};

template <>
struct ring<MaxPlus> {
    static MaxPlus zero() { return MaxPlus::zero(); }
    static MaxPlus one() { return MaxPlus::one(); }
    static bool is_zero(const MaxPlus& v) { return v.is_zero(); }
};

// log(sum exp(v)) with Kahan compensation on the shifted sum
inline double log_sum_exp(const std::vector<double>& lgs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : lgs) m = std::max(m, v);
    if (m == -std::numeric_limits<double>::infinity()) return m;
    double s = 0.0, comp = 0.0;
    for (double v : lgs) {
        double term = std::exp(v - m) - comp;
        double t = s + term;
        comp = (t - s) - term;
        s = t;
    }
    return m + std::log(s);
}

}  // namespace patrol
