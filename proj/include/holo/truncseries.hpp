#pragma once

#include <algorithm>
#include <limits>
#include <map>

#include "holo/parampoly.hpp"

namespace holo {

/// Exponents of the truncated expansion parameters of one series term.
struct SeriesKey {
    int g = 0;  // coupling strength
    int al = 0; // perturbation strength
    int a = 0;  // microscale amplitude
    auto operator<=>(const SeriesKey&) const = default;
};

inline SeriesKey operator+(const SeriesKey& l, const SeriesKey& r) {
    return {l.g + r.g, l.al + r.al, l.a + r.a};
}

/// Truncation orders: a term with any exponent at or above the matching
/// order is identically dropped (errors O(gamma^g, alpha^al, a^a)).
struct Orders {
    static constexpr int unbounded = std::numeric_limits<int>::max() / 4;
    int g = unbounded;
    int al = 1;
    int a = 1;
    bool keeps(const SeriesKey& k) const {
        return k.g < g && k.al < al && k.a < a;
    }
    auto operator<=>(const Orders&) const = default;
};

/// Orders combine under ring operations as the elementwise minimum.
inline Orders min_orders(const Orders& x, const Orders& y) {
    return {std::min(x.g, y.g), std::min(x.al, y.al), std::min(x.a, y.a)};
}

/// Truncated multivariate power series with payload coefficients.
///
/// The payload type T must provide: default construction (zero),
/// is_zero(), +=, unary -, *=(const ParamPoly&), scale(const Rat&), ==.
/// Payload coefficients never themselves depend on the expansion
/// parameters; those exponents live in the keys.
template <class T>
class TruncSeries {
public:
    TruncSeries() = default;
    explicit TruncSeries(const Orders& ord) : ord_(ord) {}

    const Orders& orders() const { return ord_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }

    const std::map<SeriesKey, T>& terms() const { return terms_; }

    /// Coefficient at key (zero payload if absent).
    T at(const SeriesKey& k) const {
        auto it = terms_.find(k);
        return it == terms_.end() ? T{} : it->second;
    }

    void add(const SeriesKey& k, const T& v) {
        if (v.is_zero() || !ord_.keeps(k)) return;
        auto [it, fresh] = terms_.emplace(k, v);
        if (!fresh) {
            it->second += v;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    TruncSeries& operator+=(const TruncSeries& o) {
        ord_ = min_orders(ord_, o.ord_);
        clip();
        for (const auto& [k, v] : o.terms_) add(k, v);
        return *this;
    }

    TruncSeries operator-() const {
        TruncSeries out(ord_);
        for (const auto& [k, v] : terms_) out.terms_.emplace(k, -v);
        return out;
    }

    TruncSeries& operator-=(const TruncSeries& o) { return *this += -o; }

    friend TruncSeries operator+(TruncSeries l, const TruncSeries& r) {
        l += r;
        return l;
    }
    friend TruncSeries operator-(TruncSeries l, const TruncSeries& r) {
        l -= r;
        return l;
    }

    /// Scale every payload by a parameter polynomial (or rational).
    TruncSeries& operator*=(const ParamPoly& p) {
        if (p.is_zero()) {
            terms_.clear();
            return *this;
        }
        for (auto it = terms_.begin(); it != terms_.end();) {
            it->second *= p;
            it = it->second.is_zero() ? terms_.erase(it) : std::next(it);
        }
        return *this;
    }
    TruncSeries& scale(const Rat& f) {
        if (f.is_zero()) {
            terms_.clear();
            return *this;
        }
        for (auto& [k, v] : terms_) v.scale(f);
        return *this;
    }
    friend TruncSeries operator*(TruncSeries s, const ParamPoly& p) {
        s *= p;
        return s;
    }
    friend TruncSeries operator*(const ParamPoly& p, TruncSeries s) {
        s *= p;
        return s;
    }

    /// Multiply by gamma^k.g * alpha^k.al * a^k.a: shift all keys, drop
    /// what crosses the truncation orders.
    TruncSeries shifted(const SeriesKey& by) const {
        TruncSeries out(ord_);
        for (const auto& [k, v] : terms_) {
            const SeriesKey nk = k + by;
            if (ord_.keeps(nk)) out.terms_.emplace(nk, v);
        }
        return out;
    }

    /// Intersect with tighter truncation orders.
    TruncSeries& truncate(const Orders& ord) {
        ord_ = min_orders(ord_, ord);
        clip();
        return *this;
    }

    /// Apply fn to every payload in place (zero results are erased).
    template <class F>
    TruncSeries& map_payloads(F&& fn) {
        for (auto it = terms_.begin(); it != terms_.end();) {
            fn(it->second);
            it = it->second.is_zero() ? terms_.erase(it) : std::next(it);
        }
        return *this;
    }

    /// Terms are compared exactly; truncation orders are not part of the
    /// value.
    bool operator==(const TruncSeries& o) const { return terms_ == o.terms_; }
    bool operator!=(const TruncSeries& o) const { return !(*this == o); }

private:
    void clip() {
        for (auto it = terms_.begin(); it != terms_.end();) {
            it = ord_.keeps(it->first) ? std::next(it) : terms_.erase(it);
        }
    }

    Orders ord_;
    std::map<SeriesKey, T> terms_;
};

/// Ring product of two series under combined (elementwise minimum)
/// truncation orders.  combine(a, b) multiplies two payloads.
template <class TA, class TB, class TC, class F>
TruncSeries<TC> series_mul_into(const TruncSeries<TA>& l,
                                const TruncSeries<TB>& r, F&& combine) {
    TruncSeries<TC> out(min_orders(l.orders(), r.orders()));
    for (const auto& [lk, lv] : l.terms()) {
        for (const auto& [rk, rv] : r.terms()) {
            const SeriesKey k = lk + rk;
            if (!out.orders().keeps(k)) continue;
            out.add(k, combine(lv, rv));
        }
    }
    return out;
}

/// Rebuild a series with transformed payloads (possibly of a new type).
/// fn maps an old payload to a new one; zero results are dropped.
template <class TB, class TA, class F>
TruncSeries<TB> series_transform(const TruncSeries<TA>& s, F&& fn) {
    TruncSeries<TB> out(s.orders());
    for (const auto& [k, v] : s.terms()) out.add(k, fn(v));
    return out;
}

/// Payload-ring product for series over the same payload type.
template <class T, class F>
TruncSeries<T> series_mul(const TruncSeries<T>& l, const TruncSeries<T>& r,
                          F&& combine) {
    return series_mul_into<T, T, T>(l, r, std::forward<F>(combine));
}

/// Series over plain parameter polynomials multiply with the polynomial
/// product.
inline TruncSeries<ParamPoly> series_mul(const TruncSeries<ParamPoly>& l,
                                         const TruncSeries<ParamPoly>& r) {
    return series_mul_into<ParamPoly, ParamPoly, ParamPoly>(
        l, r, [](const ParamPoly& a, const ParamPoly& b) { return a * b; });
}

} // namespace holo
