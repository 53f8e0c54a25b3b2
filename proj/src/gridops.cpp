#include "holo/gridops.hpp"

#include <cstdlib>

#include "holo/errors.hpp"

namespace holo {

FieldSeries dxi(const FieldSeries& u) {
    return series_transform<SubgridPoly>(
        u, [](const SubgridPoly& p) { return p.dxi(); });
}

FieldSeries dz(const FieldSeries& u) {
    return series_transform<SubgridPoly>(
        u, [](const SubgridPoly& p) { return p.dz(); });
}

FieldSeries eval_xi(const FieldSeries& u, const Rat& x) {
    return series_transform<SubgridPoly>(
        u, [&](const SubgridPoly& p) { return p.eval_xi(x); });
}

FieldSeries element_shift(const FieldSeries& u, int by) {
    return series_transform<SubgridPoly>(
        u, [&](const SubgridPoly& p) { return p.element_shift(by); });
}

StencilSeries element_mean(const FieldSeries& u) {
    return series_transform<Stencil>(
        u, [](const SubgridPoly& p) { return p.element_mean(); });
}

namespace {

ParamPoly order_monomial(const SeriesKey& k) {
    ExpVec e{};
    e[static_cast<int>(Sym::gamma)] = static_cast<int16_t>(k.g);
    e[static_cast<int>(Sym::alpha)] = static_cast<int16_t>(k.al);
    e[static_cast<int>(Sym::a)] = static_cast<int16_t>(k.a);
    return ParamPoly::monomial(Rat(1), e);
}

}  // namespace

Stencil flatten(const StencilSeries& s) {
    Stencil out;
    for (const auto& [key, payload] : s.terms()) {
        Stencil t = payload;
        t *= order_monomial(key);
        out = out + t;
    }
    return out;
}

SubgridPoly flatten(const FieldSeries& s) {
    SubgridPoly out;
    for (const auto& [key, payload] : s.terms()) {
        SubgridPoly t = payload;
        t *= order_monomial(key);
        out = out + t;
    }
    return out;
}

FieldSeries apply_macro(const FieldSeries& u, const Stencil& op) {
    return series_transform<SubgridPoly>(u, [&](const SubgridPoly& p) {
        SubgridPoly out;
        for (const auto& [key, inner] : p.terms()) {
            Stencil composed = compose(inner, op);
            if (!composed.is_zero()) out.add_term(key, composed);
        }
        return out;
    });
}

SubgridPoly linv_diffusion(const SubgridPoly& f) {
    SubgridPoly out;
    for (const auto& [k, s] : f.terms()) {
        if (k.harm != 0)
            throw DomainError("harmonic field outside the microscale family");
        const int p = k.xi;
        const Rat scale = Rat(1, (p + 1)) * Rat(1, p + 2);
        Stencil t = s;
        t.scale(scale);
        out.add_term({p + 2, 0}, t);
        Stencil lin = s;
        lin.scale(-scale);
        out.add_term({1, 0}, lin);
        Stencil cst = s;
        cst.scale(scale * (Rat(1, 2) - Rat(1, p + 3)));
        out.add_term({0, 0}, cst);
    }
    return out;
}

SubgridPoly linv_wave(const SubgridPoly& f) {
    SubgridPoly out;
    for (const auto& [k, s] : f.terms()) {
        if (k.harm != 0)
            throw DomainError("harmonic field outside the microscale family");
        const int p = k.xi;
        Stencil t = s;
        t.scale(Rat(1, p + 1));
        out.add_term({p + 1, 0}, t);
        Stencil cst = s;
        cst.scale(Rat(-1, (p + 1) * (p + 2)));
        out.add_term({0, 0}, cst);
    }
    return out;
}

SubgridPoly linv_het(const SubgridPoly& f) {
    const ParamPoly H2 = ParamPoly::sym(Sym::H, 2);
    SubgridPoly out;
    for (const auto& [k, s] : f.terms()) {
        const int p = k.xi;
        if (k.harm == 0) {
            const Rat scale = Rat(1, p + 1) * Rat(1, p + 2);
            Stencil t = s * H2;
            t.scale(scale);
            out.add_term({p + 2, 0}, t);
            Stencil lin = s * H2;
            lin.scale(-scale);
            out.add_term({1, 0}, lin);
            Stencil cst = s * H2;
            cst.scale(scale * (Rat(1, 2) - Rat(1, p + 3)));
            out.add_term({0, 0}, cst);
            continue;
        }
        const long n = std::abs(k.harm);
        // divide by -(n k)^2
        Stencil t = s * ParamPoly::sym(Sym::k, -2);
        t.scale(Rat(-1, n * n));
        if (p == 0) {
            out.add_term({0, k.harm}, t);
        } else {
            out.add_term({p, k.harm}, t);
            out.add_term({1, k.harm}, -t);
        }
    }
    return out;
}

FieldSeries linv_diffusion(const FieldSeries& f) {
    return series_transform<SubgridPoly>(
        f, [](const SubgridPoly& p) { return linv_diffusion(p); });
}

FieldSeries linv_wave(const FieldSeries& f) {
    return series_transform<SubgridPoly>(
        f, [](const SubgridPoly& p) { return linv_wave(p); });
}

FieldSeries linv_het(const FieldSeries& f) {
    return series_transform<SubgridPoly>(
        f, [](const SubgridPoly& p) { return linv_het(p); });
}

bool SubgridField::amplitude_invariant() const {
    const StencilSeries mean = element_mean(u);
    StencilSeries macro(u.orders());
    macro.add({0, 0, 0}, Stencil::identity());
    return mean == macro;
}

bool MacroEvolution::width_invariant() const {
    for (const auto& [key, s] : g.terms()) {
        if (!s.integer_shifts()) return false;
        const int span = (s.max_halfshift() - s.min_halfshift()) / 2;
        if (span > 2 * key.g) return false;
    }
    return true;
}

FieldSeries edge_condition(const FieldSeries& v, const ParamPoly& theta) {
    const FieldSeries R = eval_xi(v, Rat(1));
    const FieldSeries L = eval_xi(v, Rat(0));
    const FieldSeries Lp = element_shift(L, +1);
    const FieldSeries Rm = element_shift(R, -1);

    const ParamPoly half(Rat(1, 2));
    const ParamPoly halfTheta = theta * Rat(1, 2);

    FieldSeries bracket = (R - L + Lp - Rm) * half;
    bracket += (R + L - Lp - Rm) * halfTheta;
    FieldSeries out = -(R - L);
    out += gamma_mul(bracket);
    return out;
}

FieldSeries flux_edge_condition(const FieldSeries& f, const ParamPoly& theta) {
    const FieldSeries R = eval_xi(f, Rat(1));
    const FieldSeries L = eval_xi(f, Rat(0));
    const FieldSeries Lp = element_shift(L, +1);
    const FieldSeries Rm = element_shift(R, -1);

    const ParamPoly plus = (ParamPoly(1) + theta) * Rat(1, 2);
    const ParamPoly minus = (ParamPoly(1) - theta) * Rat(1, 2);

    FieldSeries left = R - L;
    left += gamma_mul(Rm - R);
    FieldSeries right = L - R;
    right += gamma_mul(Lp - L);
    return left * plus - right * minus;
}

} // namespace holo
