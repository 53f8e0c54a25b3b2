#pragma once

#include <map>
#include <string>

#include "holo/parampoly.hpp"

namespace holo {

/// Linear combination of macro-grid shift operators with polynomial
/// coefficients: sum of coef(s) * E^{s/2} over stored keys s.
///
/// Keys count shifts in *half* steps so that the averaging and centred
/// difference operators (which move by half an element) compose exactly;
/// a key s means "evaluate at element j + s/2".
class Stencil {
public:
    Stencil() = default;

    static Stencil identity() { return shift_op(0); }
    /// E^{halfshift/2}.
    static Stencil shift_op(int halfshift);
    static Stencil tap(int halfshift, const ParamPoly& coef);

    bool is_zero() const { return taps_.empty(); }
    std::size_t tap_count() const { return taps_.size(); }
    const std::map<int, ParamPoly>& taps() const { return taps_; }
    ParamPoly at(int halfshift) const;

    /// True when every tap sits on a whole element shift.
    bool integer_shifts() const;
    int min_halfshift() const; // 0 when empty
    int max_halfshift() const;

    void add_tap(int halfshift, const ParamPoly& coef);

    Stencil operator-() const;
    Stencil& operator+=(const Stencil& o);
    Stencil& operator-=(const Stencil& o);
    friend Stencil operator+(Stencil l, const Stencil& r) { l += r; return l; }
    friend Stencil operator-(Stencil l, const Stencil& r) { l -= r; return l; }

    Stencil& operator*=(const ParamPoly& p);
    Stencil& scale(const Rat& f);
    friend Stencil operator*(Stencil s, const ParamPoly& p) { s *= p; return s; }
    friend Stencil operator*(const ParamPoly& p, Stencil s) { s *= p; return s; }

    /// Operator composition (convolution of taps).  Commutative.
    friend Stencil compose(const Stencil& l, const Stencil& r);

    Stencil shifted(int halfshift) const;

    bool operator==(const Stencil& o) const { return taps_ == o.taps_; }
    bool operator!=(const Stencil& o) const { return !(*this == o); }

    std::string str() const;

private:
    std::map<int, ParamPoly> taps_;
};

std::ostream& operator<<(std::ostream& os, const Stencil& s);

/// Exact expansion of mu^mu_pow * delta^delta_pow into shift taps, where
/// delta = E^{1/2} - E^{-1/2} and mu = (E^{1/2} + E^{-1/2}) / 2.
Stencil expand_mu_delta(int mu_pow, int delta_pow);

/// Decomposition of an integer-shift stencil in the basis
/// { delta^{2b} } u { mu delta^{2b+1} }: entry at even key 2b is the
/// coefficient of delta^{2b}, at odd key 2b+1 of mu delta^{2b+1}.
/// Exact; throws DomainError on half-integer taps.
std::map<int, ParamPoly> mu_delta_decompose(const Stencil& s);

/// Smallest key with nonzero coefficient in the decomposition above
/// (-1 for the zero stencil).
int min_delta_order(const Stencil& s);

} // namespace holo
