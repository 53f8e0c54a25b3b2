#include "holo/stencil.hpp"

#include <ostream>
#include <sstream>

#include "holo/errors.hpp"

namespace holo {

Stencil Stencil::shift_op(int halfshift) {
    return tap(halfshift, ParamPoly(1));
}

Stencil Stencil::tap(int halfshift, const ParamPoly& coef) {
    Stencil s;
    s.add_tap(halfshift, coef);
    return s;
}

ParamPoly Stencil::at(int halfshift) const {
    auto it = taps_.find(halfshift);
    return it == taps_.end() ? ParamPoly() : it->second;
}

bool Stencil::integer_shifts() const {
    for (const auto& [s, c] : taps_)
        if (s % 2 != 0) return false;
    return true;
}

int Stencil::min_halfshift() const {
    return taps_.empty() ? 0 : taps_.begin()->first;
}

int Stencil::max_halfshift() const {
    return taps_.empty() ? 0 : taps_.rbegin()->first;
}

void Stencil::add_tap(int halfshift, const ParamPoly& coef) {
    if (coef.is_zero()) return;
    auto [it, fresh] = taps_.emplace(halfshift, coef);
    if (!fresh) {
        it->second += coef;
        if (it->second.is_zero()) taps_.erase(it);
    }
}

Stencil Stencil::operator-() const {
    Stencil out;
    for (const auto& [s, c] : taps_) out.taps_.emplace(s, -c);
    return out;
}

Stencil& Stencil::operator+=(const Stencil& o) {
    for (const auto& [s, c] : o.taps_) add_tap(s, c);
    return *this;
}

Stencil& Stencil::operator-=(const Stencil& o) {
    for (const auto& [s, c] : o.taps_) add_tap(s, -c);
    return *this;
}

Stencil& Stencil::operator*=(const ParamPoly& p) {
    if (p.is_zero()) {
        taps_.clear();
        return *this;
    }
    for (auto it = taps_.begin(); it != taps_.end();) {
        it->second *= p;
        it = it->second.is_zero() ? taps_.erase(it) : std::next(it);
    }
    return *this;
}

Stencil& Stencil::scale(const Rat& f) {
    if (f.is_zero()) {
        taps_.clear();
        return *this;
    }
    for (auto& [s, c] : taps_) c.scale(f);
    return *this;
}

Stencil compose(const Stencil& l, const Stencil& r) {
    Stencil out;
    for (const auto& [ls, lc] : l.taps_)
        for (const auto& [rs, rc] : r.taps_)
            out.add_tap(ls + rs, lc * rc);
    return out;
}

Stencil Stencil::shifted(int halfshift) const {
    Stencil out;
    for (const auto& [s, c] : taps_) out.taps_.emplace(s + halfshift, c);
    return out;
}

std::string Stencil::str() const {
    if (taps_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [s, c] : taps_) {
        if (!first) os << "; ";
        first = false;
        if (s % 2 == 0)
            os << s / 2;
        else
            os << s << "/2";
        os << ": " << c.str();
    }
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const Stencil& s) {
    return os << s.str();
}

Stencil expand_mu_delta(int mu_pow, int delta_pow) {
    if (mu_pow < 0 || delta_pow < 0)
        throw DomainError("negative operator power");
    Stencil mu;
    mu.add_tap(1, ParamPoly(Rat(1, 2)));
    mu.add_tap(-1, ParamPoly(Rat(1, 2)));
    Stencil delta;
    delta.add_tap(1, ParamPoly(1));
    delta.add_tap(-1, ParamPoly(Rat(-1)));

    Stencil out = Stencil::identity();
    for (int i = 0; i < mu_pow; ++i) out = compose(out, mu);
    for (int i = 0; i < delta_pow; ++i) out = compose(out, delta);
    return out;
}

std::map<int, ParamPoly> mu_delta_decompose(const Stencil& s) {
    if (!s.integer_shifts())
        throw DomainError("decomposition needs whole-element taps");

    // Split under s -> -s; each part has a triangular expansion in the
    // basis, peeled from the widest tap inward.
    Stencil even, odd;
    for (const auto& [sh, c] : s.taps()) {
        const ParamPoly half = c * Rat(1, 2);
        even.add_tap(sh, half);
        even.add_tap(-sh, half);
        odd.add_tap(sh, half);
        odd.add_tap(-sh, -half);
    }

    std::map<int, ParamPoly> out;
    // delta^{2b} has leading coefficient 1 at halfshift 2b.
    while (!even.is_zero()) {
        const int top = even.max_halfshift(); // top >= 0 by symmetry
        const int b = top / 2;
        const ParamPoly coef = even.at(top);
        even -= expand_mu_delta(0, 2 * b) * coef;
        if (!coef.is_zero()) out[2 * b] = coef;
    }
    // mu delta^{2b+1} has leading coefficient 1/2 at halfshift 2b+2.
    while (!odd.is_zero()) {
        const int top = odd.max_halfshift();
        const int b = top / 2 - 1;
        if (b < 0)
            throw DomainError("odd part with no interior tap");
        const ParamPoly coef = odd.at(top) * Rat(2);
        odd -= expand_mu_delta(1, 2 * b + 1) * coef;
        if (!coef.is_zero()) out[2 * b + 1] = coef;
    }
    return out;
}

int min_delta_order(const Stencil& s) {
    if (s.is_zero()) return -1;
    const auto dec = mu_delta_decompose(s);
    return dec.begin()->first;
}

} // namespace holo
