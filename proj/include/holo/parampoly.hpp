#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "holo/rat.hpp"

namespace holo {

/// Model parameters a polynomial coefficient may depend on.
enum class Sym : int {
    gamma = 0, // inter-element coupling strength
    theta,     // coupling asymmetry
    c,         // advection / wave speed
    alpha,     // perturbation strength
    a,         // microscale diffusivity modulation amplitude
    H,         // element width
    k,         // microscale wavenumber
    d,         // lattice / microscale spacing
    c0,        // perturbation operator coefficients ...
    c2,
    c3,
    c4,
};

inline constexpr int kNumSyms = 12;
extern const char* const kSymNames[kNumSyms];

/// Exponent vector of one monomial.  H, c, k, d may carry negative
/// exponents (the constructions divide by them); every other symbol is
/// restricted to nonnegative powers.
using ExpVec = std::array<int16_t, kNumSyms>;

bool laurent_allowed(Sym s);

/// Sparse exact polynomial in the model parameters, Laurent in H, c, k, d.
///
/// Invariants: no explicit zero coefficients; exponent vectors are valid
/// per laurent_allowed.  Terms are kept in lexicographic ExpVec order,
/// which fixes the textual form.
class ParamPoly {
public:
    ParamPoly() = default;
    ParamPoly(const Rat& constant);
    ParamPoly(int constant) : ParamPoly(Rat(constant)) {}

    /// Single monomial coef * prod sym^exp.
    static ParamPoly monomial(const Rat& coef, const ExpVec& exps);
    /// Single symbol to a power.
    static ParamPoly sym(Sym s, int exp = 1);

    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }

    /// The constant term's coefficient (zero if absent).
    Rat constant_term() const;
    /// True when the polynomial is a bare constant (or zero).
    bool is_constant() const;

    ParamPoly operator-() const;
    ParamPoly& operator+=(const ParamPoly& o);
    ParamPoly& operator-=(const ParamPoly& o);
    friend ParamPoly operator+(ParamPoly l, const ParamPoly& r) { l += r; return l; }
    friend ParamPoly operator-(ParamPoly l, const ParamPoly& r) { l -= r; return l; }
    friend ParamPoly operator*(const ParamPoly& l, const ParamPoly& r);
    ParamPoly& operator*=(const ParamPoly& o) { *this = *this * o; return *this; }

    ParamPoly& scale(const Rat& f);
    friend ParamPoly operator*(ParamPoly p, const Rat& f) { p.scale(f); return p; }
    friend ParamPoly operator*(const Rat& f, ParamPoly p) { p.scale(f); return p; }

    /// Multiply by the monomial sym^exp; exp may be negative only for
    /// Laurent symbols (checked).
    ParamPoly& mul_sym(Sym s, int exp);

    /// Exact division by a rational (nonzero).
    ParamPoly& div(const Rat& f);

    ParamPoly pow(int e) const; // e >= 0

    /// Replace one symbol by a rational value.
    ParamPoly substitute(Sym s, const Rat& value) const;

    /// Drop every term whose exponent of s is >= order (the truncation
    /// rule sym^order -> 0).
    ParamPoly& kill_at_or_above(Sym s, int order);

    /// Largest exponent of s over all terms; `none` (default 0) when zero.
    int max_exp(Sym s) const;
    int min_exp(Sym s) const;
    /// True when every term's exponent of s is exactly `e` or the
    /// polynomial does not involve s at all with e == 0.
    bool uniform_exp(Sym s, int e) const;

    /// Numeric evaluation with one value per symbol.
    double eval(const std::array<double, kNumSyms>& values) const;

    bool operator==(const ParamPoly& o) const { return terms_ == o.terms_; }
    bool operator!=(const ParamPoly& o) const { return !(*this == o); }

    /// Canonical text: terms in exponent order, "coef*sym^e*..." joined
    /// by " + ", empty sum printed as "0".
    std::string str() const;
    /// Inverse of str(); also accepts arbitrary term order and "-" joins.
    static ParamPoly parse(const std::string& text);

    using Terms = std::map<ExpVec, Rat>;
    const Terms& terms() const { return terms_; }

    /// Add coef * prod sym^exp to the polynomial (fuses equal monomials,
    /// erases cancellations).
    void add_term(const ExpVec& exps, const Rat& coef);

private:
    Terms terms_;
};

std::ostream& operator<<(std::ostream& os, const ParamPoly& p);

} // namespace holo
