#pragma once

#include <compare>
#include <map>
#include <string>

#include "holo/stencil.hpp"

namespace holo {

/// One basis function on an element: xi^xi_pow times a microscale
/// harmonic.  harm encodes the harmonic: 0 is the constant, +n is
/// cos(n k z), -n is sin(n k z).
struct SgKey {
    int xi = 0;
    int harm = 0;
    auto operator<=>(const SgKey&) const = default;
};

/// Field on one element: polynomial in the subgrid coordinate xi (and
/// optionally microscale harmonics in z) whose coefficients are shift
/// stencils over the macro grid values.
///
/// xi powers are nonnegative.  The zero polynomial stores no terms.
class SubgridPoly {
public:
    SubgridPoly() = default;

    static SubgridPoly term(const SgKey& key, const Stencil& s);
    /// xi^pow with unit coefficient.
    static SubgridPoly xi_power(int pow);
    /// The macro value itself (xi^0, constant harmonic, identity stencil).
    static SubgridPoly macro_value() { return xi_power(0); }

    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }
    const std::map<SgKey, Stencil>& terms() const { return terms_; }
    Stencil at(const SgKey& key) const;

    void add_term(const SgKey& key, const Stencil& s);

    SubgridPoly operator-() const;
    SubgridPoly& operator+=(const SubgridPoly& o);
    SubgridPoly& operator-=(const SubgridPoly& o);
    friend SubgridPoly operator+(SubgridPoly l, const SubgridPoly& r) {
        l += r;
        return l;
    }
    friend SubgridPoly operator-(SubgridPoly l, const SubgridPoly& r) {
        l -= r;
        return l;
    }

    SubgridPoly& operator*=(const ParamPoly& p);
    SubgridPoly& scale(const Rat& f);
    friend SubgridPoly operator*(SubgridPoly s, const ParamPoly& p) {
        s *= p;
        return s;
    }
    friend SubgridPoly operator*(const ParamPoly& p, SubgridPoly s) {
        s *= p;
        return s;
    }

    /// Pointwise product.  Harmonics combine by the product-to-sum rules;
    /// at least one factor must be local (all stencils central), since a
    /// product of two shifted macro values has no meaning here.
    friend SubgridPoly operator*(const SubgridPoly& l, const SubgridPoly& r);

    /// d/dxi.
    SubgridPoly dxi() const;
    /// d/dz; turns cos into sin and back, scaling by (n k).
    SubgridPoly dz() const;

    /// Substitute xi -> xi + sign*d (the lattice step), expanding the
    /// binomials exactly; d enters the coefficients symbolically.
    SubgridPoly shifted_xi_by_d(int sign) const;

    /// Evaluate the xi polynomial at a rational point (harmonics stay).
    SubgridPoly eval_xi(const Rat& x) const;

    /// Shift every stencil by whole elements (the j+-1 edge values).
    SubgridPoly element_shift(int by) const;

    /// Mean over the element: xi^p -> 1/(p+1) and every harmonic
    /// averages to zero.  Collapses to a bare stencil.
    Stencil element_mean() const;

    /// True when the field is xi-independent and harmonic-free.
    bool is_macro_only() const;
    /// Collapse a macro-only field to its stencil; throws otherwise.
    Stencil as_stencil() const;

    bool has_harmonics() const;
    int max_xi_power() const; // 0 when zero

    bool operator==(const SubgridPoly& o) const { return terms_ == o.terms_; }
    bool operator!=(const SubgridPoly& o) const { return !(*this == o); }

    std::string str() const;

private:
    std::map<SgKey, Stencil> terms_;
};

std::ostream& operator<<(std::ostream& os, const SubgridPoly& s);

} // namespace holo
