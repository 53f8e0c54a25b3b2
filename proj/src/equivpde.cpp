#include "holo/equivpde.hpp"

#include <sstream>

#include "holo/errors.hpp"

namespace holo {

namespace {

ParamPoly mono(const Rat& coef, std::initializer_list<std::pair<Sym, int>> sv) {
    ExpVec e{};
    for (const auto& [s, n] : sv)
        e[static_cast<int>(s)] = static_cast<int16_t>(n);
    return ParamPoly::monomial(coef, e);
}

Stencil scaled(Stencil s, const Rat& r) {
    s.scale(r);
    return s;
}

Stencil times(Stencil s, const ParamPoly& p) {
    s *= p;
    return s;
}

StencilSeries smul(const StencilSeries& a, const StencilSeries& b) {
    return series_mul(a, b, [](const Stencil& x, const Stencil& y) {
        return compose(x, y);
    });
}

StencilSeries spow(const StencilSeries& base, int n) {
    StencilSeries out(base.orders());
    out.add({0, 0, 0}, Stencil::identity());
    for (int i = 0; i < n; ++i) out = smul(out, base);
    return out;
}

std::string rows_str(const std::map<int, ParamPoly>& rows) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [n, coef] : rows) {
        if (!first) os << "\n";
        first = false;
        os << "d^" << n << ": " << coef.str();
    }
    if (first) os << "(none)";
    return os.str();
}

// Exact equivalent rows of the family's macroscale target.  The second
// member is the highest derivative order the target is known through;
// the heterogeneous homogenised series is only pinned down to d^6 here.
std::pair<std::map<int, ParamPoly>, int> family_target(const PdeFamily& fam,
                                                       int depth) {
    std::map<int, ParamPoly> t;
    int known = depth;
    switch (fam.kind) {
    case FamilyKind::Diffusion:
        t[2] = ParamPoly(1);
        break;
    case FamilyKind::LatticeDiffusion:
        // physical lattice spacing is dH, so the microscale equivalent
        // (4/(dH)^2) sinh^2(dH dx/2) has row 2m = 2 (dH)^{2m-2}/(2m)!
        for (int m = 1; 2 * m <= depth; ++m)
            t[2 * m] = mono(Rat(2) / factorial(2 * m),
                            {{Sym::d, 2 * m - 2}, {Sym::H, 2 * m - 2}});
        break;
    case FamilyKind::Wave1:
        if (fam.lattice) {
            // -(c/(dH)) sinh(dH dx): row 2m+1 = -c (dH)^{2m}/(2m+1)!
            for (int m = 0; 2 * m + 1 <= depth; ++m)
                t[2 * m + 1] = mono(Rat(-1) / factorial(2 * m + 1),
                                    {{Sym::c, 1}, {Sym::d, 2 * m},
                                     {Sym::H, 2 * m}});
        } else {
            t[1] = mono(Rat(-1), {{Sym::c, 1}});
        }
        break;
    case FamilyKind::AdvectionDiffusion:
        t[1] = mono(Rat(-1), {{Sym::c, 1}});
        t[2] = ParamPoly(1);
        break;
    case FamilyKind::HeterogeneousDiffusion:
        t[2] = ParamPoly(1);
        t[4] = mono(Rat(1, 2), {{Sym::a, 2}, {Sym::k, -2}});
        t[6] = mono(Rat(-2), {{Sym::a, 2}, {Sym::k, -4}});
        known = std::min(depth, 6);
        break;
    }
    if (fam.perturbed) {
        const std::pair<Sym, int> rows[] = {
            {Sym::c0, 0}, {Sym::c2, 2}, {Sym::c3, 3}, {Sym::c4, 4}};
        for (const auto& [sym, n] : rows) {
            if (n > depth) continue;
            ParamPoly add = mono(Rat(1), {{Sym::alpha, 1}, {sym, 1}});
            auto it = t.find(n);
            if (it == t.end())
                t[n] = add;
            else
                it->second = it->second + add;
        }
    }
    return {t, known};
}

} // namespace

std::string EquivalentPde::str() const { return rows_str(rows); }

EquivalentPde to_equivalent_pde(const MacroEvolution& g, int taylor_depth) {
    if (taylor_depth < 2)
        throw DomainError("equivalent-PDE depth must be at least 2");
    EquivalentPde out;
    out.taylor_depth = taylor_depth;
    const Stencil flat = flatten(g.g);
    for (const auto& [h, coef] : flat.taps()) {
        const Rat shift(h, 2);
        for (int m = 0; m <= taylor_depth; ++m) {
            const Rat weight = shift.pow(m) / factorial(m);
            if (weight.is_zero()) break;
            ParamPoly row = coef * ParamPoly(weight);
            row.mul_sym(Sym::H, m);
            auto it = out.rows.find(m);
            if (it == out.rows.end())
                out.rows[m] = row;
            else
                it->second = it->second + row;
        }
    }
    for (auto it = out.rows.begin(); it != out.rows.end();) {
        if (it->second.is_zero())
            it = out.rows.erase(it);
        else
            ++it;
    }
    return out;
}

std::string ConsistencyReport::str() const {
    std::ostringstream os;
    os << "target:\n" << rows_str(target) << "\n";
    if (defect_order < 0) {
        os << "defects: none through d^" << checked_through;
    } else {
        os << "defects (lowest at d^" << defect_order << "):\n"
           << rows_str(defects);
    }
    return os.str();
}

ConsistencyReport consistency_report(const EquivalentPde& e,
                                     const PdeFamily& family) {
    ConsistencyReport rep;
    auto [target, known] = family_target(family, e.taylor_depth);
    rep.target = target;
    rep.checked_through = known;
    for (int n = 0; n <= known; ++n) {
        ParamPoly got;
        auto it = e.rows.find(n);
        if (it != e.rows.end()) got = it->second.substitute(Sym::gamma, Rat(1));
        ParamPoly want;
        auto jt = target.find(n);
        if (jt != target.end()) want = jt->second;
        const ParamPoly defect = got - want;
        if (defect.is_zero()) continue;
        rep.defects[n] = defect;
        if (rep.defect_order < 0) rep.defect_order = n;
    }
    return rep;
}

MacroEvolution closed_form_gamma_series(ClosedFormKind kind,
                                        const Orders& orders) {
    if (orders.g < 1)
        throw DomainError("closed-form expansion needs a positive order");
    const Orders ord{orders.g, 1, 1};
    const ParamPoly th = ParamPoly::sym(Sym::theta);
    const ParamPoly th2 = ParamPoly::sym(Sym::theta, 2);
    StencilSeries g(ord);

    if (kind == ClosedFormKind::WaveAsinh) {
        // X = gamma (delta^2/2 - theta mu delta)
        //   + gamma^2 (theta^2 - 1) delta^2 / 4
        StencilSeries x(ord);
        x.add({1, 0, 0}, scaled(expand_mu_delta(0, 2), Rat(1, 2)) -
                             times(expand_mu_delta(1, 1), th));
        x.add({2, 0, 0},
              times(scaled(expand_mu_delta(0, 2), Rat(1, 4)),
                    th2 - ParamPoly(1)));
        StencilSeries invsqrt(ord);
        for (int n = 0; n < ord.g; ++n) {
            StencilSeries xn = spow(x, n);
            xn.scale(binomial(Rat(-1, 2), n));
            invsqrt += xn;
        }
        // A = (gamma/2)(mu - theta delta/2) delta (1+X)^{-1/2}
        StencilSeries base(ord);
        base.add({1, 0, 0},
                 scaled(expand_mu_delta(1, 1), Rat(1, 2)) -
                     times(scaled(expand_mu_delta(0, 2), Rat(1, 4)), th));
        const StencilSeries arg = smul(base, invsqrt);
        for (int m = 0; 2 * m + 1 <= ord.g; ++m) {
            const Rat coef = Rat((m % 2 == 0) ? 1 : -1) * factorial(2 * m) /
                             (Rat(4).pow(m) * factorial(m) * factorial(m) *
                              Rat(2 * m + 1));
            StencilSeries term = spow(arg, 2 * m + 1);
            term.scale(coef * Rat(-2));
            g += term;
        }
        g *= mono(Rat(1), {{Sym::c, 1}, {Sym::H, -1}});
    } else {
        // X' = gamma delta^2/2 - gamma^2 (theta^2 + 1) delta^2 / 4
        StencilSeries x(ord);
        x.add({1, 0, 0}, scaled(expand_mu_delta(0, 2), Rat(1, 2)));
        x.add({2, 0, 0},
              times(scaled(expand_mu_delta(0, 2), Rat(-1, 4)),
                    th2 + ParamPoly(1)));
        StencilSeries inv(ord);
        for (int n = 0; n < ord.g; ++n) {
            StencilSeries xn = spow(x, n);
            if (n % 2 == 1) xn.scale(Rat(-1));
            inv += xn;
        }
        // w = (gamma^2 delta^2/4)(mu^2 - theta^2 delta^2/4)(1+X')^{-1}
        StencilSeries wbase(ord);
        wbase.add({2, 0, 0},
                  scaled(expand_mu_delta(2, 2), Rat(1, 4)) -
                      times(scaled(expand_mu_delta(0, 4), Rat(1, 16)), th2));
        const StencilSeries w = smul(wbase, inv);
        // asinh^2(sqrt w) = sum_n (-1)^{n+1} 4^n / (2 n^2 C(2n,n)) w^n
        for (int n = 1; 2 * n <= ord.g; ++n) {
            const Rat coef = Rat((n % 2 == 1) ? 1 : -1) * Rat(4).pow(n) /
                             (Rat(2 * n * n) * binomial(2 * n, n));
            StencilSeries term = spow(w, n);
            term.scale(coef * Rat(4));
            g += term;
        }
        g *= mono(Rat(1), {{Sym::H, -2}});
    }
    return MacroEvolution{g};
}

MidElementReport verify_midelement_identity(const ConstructionResult& res) {
    const FieldSeries& u = res.field.u;
    const ParamPoly th = res.family.theta;
    MidElementReport rep;

    if (res.family.kind == FamilyKind::Wave1 && !res.family.lattice &&
        !res.family.perturbed) {
        const FieldSeries u1 = eval_xi(u, Rat(1));
        const FieldSeries u0 = eval_xi(u, Rat(0));
        FieldSeries diff = u1 - u0;
        FieldSeries mean = u1 + u0;
        mean.scale(Rat(1, 2));
        // (1 + gamma delta^2/4 - gamma theta mu delta / 2) delta_xi u
        //   = gamma (mu - theta delta/2) delta mu_xi u at xi = 1/2
        FieldSeries lhs = diff;
        lhs += gamma_mul(
            apply_macro(diff, scaled(expand_mu_delta(0, 2), Rat(1, 4)) -
                                  times(scaled(expand_mu_delta(1, 1),
                                               Rat(1, 2)),
                                        th)));
        const FieldSeries rhs = gamma_mul(apply_macro(
            mean, expand_mu_delta(1, 1) -
                      times(scaled(expand_mu_delta(0, 2), Rat(1, 2)), th)));
        rep.defect = lhs - rhs;
    } else if (res.family.kind == FamilyKind::Diffusion) {
        const FieldSeries u32 = eval_xi(u, Rat(3, 2));
        const FieldSeries u12 = eval_xi(u, Rat(1, 2));
        const FieldSeries um12 = eval_xi(u, Rat(-1, 2));
        FieldSeries twice = u12;
        twice.scale(Rat(2));
        const FieldSeries diff2 = u32 - twice + um12;
        // (1 + gamma delta^2/2 - gamma^2 (theta^2+1) delta^2/4) delta_xi^2 u
        //   = gamma^2 (mu^2 - theta^2 delta^2/4) delta^2 u at xi = 1/2
        FieldSeries lhs = diff2;
        lhs += gamma_mul(
            apply_macro(diff2, scaled(expand_mu_delta(0, 2), Rat(1, 2))));
        lhs -= gamma_mul(
            apply_macro(diff2,
                        times(scaled(expand_mu_delta(0, 2), Rat(1, 4)),
                              th * th + ParamPoly(1))),
            2);
        const FieldSeries rhs = gamma_mul(
            apply_macro(u12,
                        expand_mu_delta(2, 2) -
                            times(scaled(expand_mu_delta(0, 4), Rat(1, 4)),
                                  th * th)),
            2);
        rep.defect = lhs - rhs;
    } else {
        throw DomainError(
            "mid-element identity applies to plain diffusion or wave fields");
    }
    rep.holds = rep.defect.terms().empty();
    return rep;
}

} // namespace holo
