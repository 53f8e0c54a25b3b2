#include "holo/subgrid.hpp"

#include <cstdlib>
#include <ostream>
#include <sstream>

#include "holo/errors.hpp"

namespace holo {

SubgridPoly SubgridPoly::term(const SgKey& key, const Stencil& s) {
    SubgridPoly p;
    p.add_term(key, s);
    return p;
}

SubgridPoly SubgridPoly::xi_power(int pow) {
    return term({pow, 0}, Stencil::identity());
}

Stencil SubgridPoly::at(const SgKey& key) const {
    auto it = terms_.find(key);
    return it == terms_.end() ? Stencil() : it->second;
}

void SubgridPoly::add_term(const SgKey& key, const Stencil& s) {
    if (s.is_zero()) return;
    if (key.xi < 0) throw DomainError("negative subgrid power");
    auto [it, fresh] = terms_.emplace(key, s);
    if (!fresh) {
        it->second += s;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

SubgridPoly SubgridPoly::operator-() const {
    SubgridPoly out;
    for (const auto& [k, s] : terms_) out.terms_.emplace(k, -s);
    return out;
}

SubgridPoly& SubgridPoly::operator+=(const SubgridPoly& o) {
    for (const auto& [k, s] : o.terms_) add_term(k, s);
    return *this;
}

SubgridPoly& SubgridPoly::operator-=(const SubgridPoly& o) {
    for (const auto& [k, s] : o.terms_) add_term(k, -s);
    return *this;
}

SubgridPoly& SubgridPoly::operator*=(const ParamPoly& p) {
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

SubgridPoly& SubgridPoly::scale(const Rat& f) {
    if (f.is_zero()) {
        terms_.clear();
        return *this;
    }
    for (auto& [k, s] : terms_) s.scale(f);
    return *this;
}

namespace {

bool all_central(const SubgridPoly& p) {
    for (const auto& [k, s] : p.terms())
        if (s.tap_count() != 1 || s.taps().begin()->first != 0) return false;
    return true;
}

// cos for harm >= 0, sin for harm < 0, with sin(0) = 0 dropped and the
// parity rules cos(-q) = cos(q), sin(-q) = -sin(q) folded in.
void add_harmonic(SubgridPoly& out, int xi, int harm_kind_cos, int n,
                  const Stencil& s) {
    if (harm_kind_cos) {
        out.add_term({xi, std::abs(n)}, s);
    } else {
        if (n == 0) return;
        Stencil t = s;
        if (n < 0) t = -t;
        out.add_term({xi, -std::abs(n)}, t);
    }
}

} // namespace

SubgridPoly operator*(const SubgridPoly& l, const SubgridPoly& r) {
    const bool lc = all_central(l), rc = all_central(r);
    if (!lc && !rc)
        throw DomainError("product of two nonlocal subgrid fields");
    SubgridPoly out;
    for (const auto& [lk, ls] : l.terms()) {
        for (const auto& [rk, rs] : r.terms()) {
            const Stencil prod = compose(ls, rs);
            const int xi = lk.xi + rk.xi;
            const int A = lk.harm, B = rk.harm;
            if (A == 0 && B == 0) {
                out.add_term({xi, 0}, prod);
                continue;
            }
            if (A == 0 || B == 0) {
                out.add_term({xi, A + B}, prod);
                continue;
            }
            Stencil half = prod;
            half.scale(Rat(1, 2));
            const int na = std::abs(A), nb = std::abs(B);
            if (A > 0 && B > 0) {
                // cos cos = (cos(a-b) + cos(a+b)) / 2
                add_harmonic(out, xi, 1, na - nb, half);
                add_harmonic(out, xi, 1, na + nb, half);
            } else if (A < 0 && B < 0) {
                // sin sin = (cos(a-b) - cos(a+b)) / 2
                add_harmonic(out, xi, 1, na - nb, half);
                add_harmonic(out, xi, 1, na + nb, -half);
            } else {
                // sin cos = (sin(a+b) + sin(a-b)) / 2, with a the sin index
                const int ns = A < 0 ? na : nb;
                const int nc = A < 0 ? nb : na;
                add_harmonic(out, xi, 0, ns + nc, half);
                add_harmonic(out, xi, 0, ns - nc, half);
            }
        }
    }
    return out;
}

SubgridPoly SubgridPoly::dxi() const {
    SubgridPoly out;
    for (const auto& [k, s] : terms_) {
        if (k.xi == 0) continue;
        Stencil t = s;
        t.scale(Rat(k.xi));
        out.add_term({k.xi - 1, k.harm}, t);
    }
    return out;
}

SubgridPoly SubgridPoly::dz() const {
    SubgridPoly out;
    for (const auto& [k, s] : terms_) {
        if (k.harm == 0) continue;
        const int n = std::abs(k.harm);
        Stencil t = s * (ParamPoly::sym(Sym::k) * Rat(n));
        if (k.harm > 0)
            out.add_term({k.xi, -n}, -t); // d cos = -nk sin
        else
            out.add_term({k.xi, n}, t); // d sin = nk cos
    }
    return out;
}

SubgridPoly SubgridPoly::shifted_xi_by_d(int sign) const {
    const ParamPoly step = ParamPoly::sym(Sym::d) * Rat(sign);
    SubgridPoly out;
    for (const auto& [k, s] : terms_) {
        // (xi + step)^p expanded exactly
        ParamPoly stepPow(1);
        for (int i = k.xi; i >= 0; --i) {
            Stencil t = s * (stepPow * binomial(static_cast<long>(k.xi),
                                                static_cast<long>(k.xi - i)));
            out.add_term({i, k.harm}, t);
            stepPow *= step;
        }
    }
    return out;
}

SubgridPoly SubgridPoly::eval_xi(const Rat& x) const {
    SubgridPoly out;
    for (const auto& [k, s] : terms_) {
        Stencil t = s;
        t.scale(x.pow(k.xi));
        out.add_term({0, k.harm}, t);
    }
    return out;
}

SubgridPoly SubgridPoly::element_shift(int by) const {
    SubgridPoly out;
    for (const auto& [k, s] : terms_) out.terms_.emplace(k, s.shifted(2 * by));
    return out;
}

Stencil SubgridPoly::element_mean() const {
    Stencil out;
    for (const auto& [k, s] : terms_) {
        if (k.harm != 0) continue; // harmonics average out over the element
        Stencil t = s;
        t.scale(Rat(1, k.xi + 1));
        out += t;
    }
    return out;
}

bool SubgridPoly::is_macro_only() const {
    return terms_.empty() ||
           (terms_.size() == 1 && terms_.begin()->first == SgKey{0, 0});
}

Stencil SubgridPoly::as_stencil() const {
    if (terms_.empty()) return Stencil();
    if (!is_macro_only())
        throw DomainError("field varies across the element");
    return terms_.begin()->second;
}

bool SubgridPoly::has_harmonics() const {
    for (const auto& [k, s] : terms_)
        if (k.harm != 0) return true;
    return false;
}

int SubgridPoly::max_xi_power() const {
    int m = 0;
    for (const auto& [k, s] : terms_)
        if (k.xi > m) m = k.xi;
    return m;
}

std::string SubgridPoly::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, s] : terms_) {
        if (!first) os << "  +  ";
        first = false;
        os << "xi^" << k.xi;
        if (k.harm > 0)
            os << "*cos(" << k.harm << "kz)";
        else if (k.harm < 0)
            os << "*sin(" << -k.harm << "kz)";
        os << " [" << s.str() << "]";
    }
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const SubgridPoly& s) {
    return os << s.str();
}

} // namespace holo
