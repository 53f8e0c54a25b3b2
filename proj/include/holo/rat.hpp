#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <iosfwd>
#include <string>

namespace holo {

/// Arbitrary-precision rational scalar.
///
/// Thin wrapper over GMP's mpq_class that guarantees canonical form
/// (fully reduced, positive denominator) on every construction path and
/// adds the textual round-trip and integer powers the rest of the
/// library relies on.
class Rat {
public:
    Rat() : q_(0) {}
    Rat(int n) : q_(n) {}
    Rat(long n) : q_(n) {}
    Rat(long long n) : q_(static_cast<long>(n)) {}

    /// n/d, reduced.  Throws DomainError if d == 0.
    Rat(long n, long d);

    explicit Rat(const mpq_class& q);

    /// Accepts "n", "-n", "n/d" with optional surrounding spaces.
    static Rat parse(const std::string& text);

    bool is_zero() const { return sgn(q_) == 0; }
    bool is_one() const { return q_ == 1; }
    int sign() const { return sgn(q_); }

    bool is_integer() const { return q_.get_den() == 1; }

    /// Numerator/denominator as decimal strings (always exact).
    std::string num_str() const { return q_.get_num().get_str(); }
    std::string den_str() const { return q_.get_den().get_str(); }

    /// "n" for integers, "n/d" otherwise.
    std::string str() const;

    double to_double() const { return q_.get_d(); }

    /// Truncating conversion; throws DomainError unless the value is an
    /// integer that fits in long.
    long to_long() const;

    /// this^e.  e may be negative for nonzero values; 0^0 == 1.
    Rat pow(long e) const;

    Rat operator-() const { return Rat(mpq_class(-q_)); }
    Rat& operator+=(const Rat& o) { q_ += o.q_; return *this; }
    Rat& operator-=(const Rat& o) { q_ -= o.q_; return *this; }
    Rat& operator*=(const Rat& o) { q_ *= o.q_; return *this; }
    Rat& operator/=(const Rat& o);

    friend Rat operator+(Rat l, const Rat& r) { l += r; return l; }
    friend Rat operator-(Rat l, const Rat& r) { l -= r; return l; }
    friend Rat operator*(Rat l, const Rat& r) { l *= r; return l; }
    friend Rat operator/(Rat l, const Rat& r) { l /= r; return l; }

    friend bool operator==(const Rat& l, const Rat& r) { return l.q_ == r.q_; }
    friend bool operator!=(const Rat& l, const Rat& r) { return l.q_ != r.q_; }
    friend bool operator<(const Rat& l, const Rat& r) { return l.q_ < r.q_; }
    friend bool operator<=(const Rat& l, const Rat& r) { return l.q_ <= r.q_; }
    friend bool operator>(const Rat& l, const Rat& r) { return l.q_ > r.q_; }
    friend bool operator>=(const Rat& l, const Rat& r) { return l.q_ >= r.q_; }

    friend Rat abs(const Rat& r) { return Rat(mpq_class(::abs(r.q_))); }

    const mpq_class& raw() const { return q_; }

private:
    mpq_class q_;
};

std::ostream& operator<<(std::ostream& os, const Rat& r);

/// n!, exact.
Rat factorial(long n);

/// Binomial coefficient C(n, m) for integer n (may be negative), m >= 0.
Rat binomial(long n, long m);

/// Generalised binomial coefficient C(r, m) for rational r, m >= 0.
Rat binomial(const Rat& r, long m);

} // namespace holo
