#include "holo/constructor.hpp"

#include <algorithm>

#include "holo/errors.hpp"

namespace holo {

PdeFamily PdeFamily::diffusion() { return PdeFamily{}; }

PdeFamily PdeFamily::lattice_diffusion() {
    PdeFamily f;
    f.kind = FamilyKind::LatticeDiffusion;
    return f;
}

PdeFamily PdeFamily::advection_diffusion(bool perturbed, int c_order) {
    PdeFamily f;
    f.kind = FamilyKind::AdvectionDiffusion;
    f.perturbed = perturbed;
    f.c_order = c_order;
    return f;
}

PdeFamily PdeFamily::wave1(bool perturbed, bool lattice) {
    PdeFamily f;
    f.kind = FamilyKind::Wave1;
    f.perturbed = perturbed;
    f.lattice = lattice;
    return f;
}

PdeFamily PdeFamily::heterogeneous_diffusion() {
    PdeFamily f;
    f.kind = FamilyKind::HeterogeneousDiffusion;
    f.theta = ParamPoly();
    return f;
}

PdeFamily PdeFamily::with_theta(const ParamPoly& th) const {
    PdeFamily f = *this;
    f.theta = th;
    return f;
}

const char* PdeFamily::name() const {
    switch (kind) {
    case FamilyKind::Diffusion:
        return "diffusion";
    case FamilyKind::LatticeDiffusion:
        return "lattice-diffusion";
    case FamilyKind::AdvectionDiffusion:
        return "advection-diffusion";
    case FamilyKind::Wave1:
        return "wave";
    case FamilyKind::HeterogeneousDiffusion:
        return "heterogeneous-diffusion";
    }
    return "?";
}

FieldSeries time_derivative(const FieldSeries& u, const StencilSeries& g) {
    return series_mul_into<SubgridPoly, Stencil, SubgridPoly>(
        u, g, [](const SubgridPoly& p, const Stencil& gs) {
            SubgridPoly out;
            for (const auto& [key, s] : p.terms())
                out.add_term(key, compose(s, gs));
            return out;
        });
}

namespace {

const ParamPoly kInvH = ParamPoly::sym(Sym::H, -1);
const ParamPoly kInvH2 = ParamPoly::sym(Sym::H, -2);

FieldSeries embed(const StencilSeries& g) {
    return series_transform<SubgridPoly>(g, [](const Stencil& s) {
        return SubgridPoly::term({0, 0}, s);
    });
}

/// xi - 1/2 as a local field, for the edge-driven update term.
SubgridPoly xi_minus_half() {
    SubgridPoly p = SubgridPoly::xi_power(1);
    p -= SubgridPoly::macro_value() * Rat(1, 2);
    return p;
}

FieldSeries mul_local(const FieldSeries& s, const SubgridPoly& local) {
    return series_transform<SubgridPoly>(
        s, [&](const SubgridPoly& p) { return local * p; });
}

/// Truncation of the advection speed: applied wherever the appendix
/// loop's global kill rule would act.
Stencil kill_c(const Stencil& st, int c_order) {
    Stencil killed;
    for (const auto& [sh, coef] : st.taps()) {
        ParamPoly p = coef;
        p.kill_at_or_above(Sym::c, c_order);
        killed.add_tap(sh, p);
    }
    return killed;
}

void kill_c(FieldSeries& s, int c_order) {
    s.map_payloads([&](SubgridPoly& p) {
        SubgridPoly out;
        for (const auto& [key, st] : p.terms())
            out.add_term(key, kill_c(st, c_order));
        p = out;
    });
}

void kill_c(StencilSeries& s, int c_order) {
    s.map_payloads([&](Stencil& st) { st = kill_c(st, c_order); });
}

struct Residuals {
    FieldSeries pde;
    FieldSeries value_edge;
    FieldSeries deriv_edge; // empty series for the first-order family
    StencilSeries amplitude;

    bool all_zero() const {
        return pde.is_zero() && value_edge.is_zero() &&
               deriv_edge.is_zero() && amplitude.is_zero();
    }
};

class Loop {
public:
    Loop(const PdeFamily& family, const Orders& orders)
        : fam_(family), ord_(orders), u_(orders), g_(orders) {
        u_.add({0, 0, 0}, SubgridPoly::macro_value());
        if (fam_.microscale()) build_kappa();
    }

    FieldSeries rhs() const {
        switch (fam_.kind) {
        case FamilyKind::Diffusion:
            return dxi(dxi(u_)) * kInvH2;
        case FamilyKind::LatticeDiffusion: {
            FieldSeries s = shift_xi(u_, +1);
            s -= u_ + u_;
            s += shift_xi(u_, -1);
            return s * (kInvH2 * ParamPoly::sym(Sym::d, -2));
        }
        case FamilyKind::AdvectionDiffusion: {
            FieldSeries s = dxi(dxi(u_)) * kInvH2;
            s -= dxi(u_) * (ParamPoly::sym(Sym::c) * kInvH);
            if (fam_.perturbed) s += perturbation();
            return s;
        }
        case FamilyKind::Wave1: {
            FieldSeries s(ord_);
            if (fam_.lattice) {
                s = shift_xi(u_, +1);
                s -= shift_xi(u_, -1);
                s *= ParamPoly::sym(Sym::c) * ParamPoly::sym(Sym::d, -1) *
                     kInvH * Rat(-1, 2);
            } else {
                s = dxi(u_) * (ParamPoly::sym(Sym::c) * kInvH * Rat(-1));
                if (fam_.perturbed) s += perturbation();
            }
            return s;
        }
        case FamilyKind::HeterogeneousDiffusion: {
            FieldSeries grad = dxi(u_) * kInvH;
            grad += dz(u_);
            FieldSeries flux = series_mul_into<SubgridPoly, SubgridPoly,
                                               SubgridPoly>(
                kappa_, grad,
                [](const SubgridPoly& a, const SubgridPoly& b) {
                    return a * b;
                });
            FieldSeries out = dxi(flux) * kInvH;
            out += dz(flux);
            return out;
        }
        }
        return FieldSeries(ord_);
    }

    Residuals residuals() const {
        Residuals r;
        r.pde = -time_derivative(u_, g_);
        r.pde += rhs();
        if (fam_.first_order()) {
            // the coupled quantity is the flux c u, even when the pde
            // carries the operator perturbation
            const FieldSeries fx = u_ * ParamPoly::sym(Sym::c);
            r.value_edge = flux_edge_condition(fx, fam_.theta);
            r.deriv_edge = FieldSeries(ord_);
        } else {
            r.value_edge = edge_condition(u_, fam_.theta);
            r.deriv_edge = edge_condition(dxi(u_) * kInvH, -fam_.theta);
        }
        StencilSeries macro(ord_);
        macro.add({0, 0, 0}, Stencil::identity());
        r.amplitude = element_mean(u_) - macro;
        if (fam_.has_advection()) {
            kill_c(r.pde, fam_.c_order);
            kill_c(r.value_edge, fam_.c_order);
            kill_c(r.deriv_edge, fam_.c_order);
            kill_c(r.amplitude, fam_.c_order);
        }
        return r;
    }

    void update(const Residuals& r) {
        StencilSeries gd(ord_);
        FieldSeries du(ord_);
        switch (fam_.kind) {
        case FamilyKind::Diffusion:
        case FamilyKind::LatticeDiffusion:
        case FamilyKind::AdvectionDiffusion: {
            gd = element_mean(r.deriv_edge) * kInvH;
            gd -= element_mean(r.pde);
            FieldSeries corr = r.pde - embed(gd);
            du = -(linv_diffusion(corr) * ParamPoly::sym(Sym::H, 2));
            du += mul_local(r.value_edge, xi_minus_half());
            break;
        }
        case FamilyKind::Wave1: {
            gd = element_mean(r.value_edge) * kInvH;
            FieldSeries corr = r.pde - embed(gd);
            du = linv_wave(corr) *
                 (ParamPoly::sym(Sym::H) * ParamPoly::sym(Sym::c, -1));
            break;
        }
        case FamilyKind::HeterogeneousDiffusion: {
            gd = element_mean(r.deriv_edge) * kInvH;
            gd += element_mean(r.pde);
            FieldSeries corr = r.pde - embed(gd);
            du = -linv_het(corr);
            du += mul_local(r.value_edge, xi_minus_half());
            break;
        }
        }
        if (fam_.has_advection()) {
            kill_c(gd, fam_.c_order);
            kill_c(du, fam_.c_order);
        }
        g_ += gd;
        u_ += du;
    }

    const FieldSeries& field() const { return u_; }
    const StencilSeries& evolution() const { return g_; }

    void seed(const FieldSeries& u, const StencilSeries& g) {
        u_ = u;
        g_ = g;
    }

private:
    FieldSeries perturbation() const {
        FieldSeries s = u_ * ParamPoly::sym(Sym::c0);
        s += dxi(dxi(u_)) * (ParamPoly::sym(Sym::c2) * kInvH2);
        s += dxi(dxi(dxi(u_))) *
             (ParamPoly::sym(Sym::c3) * ParamPoly::sym(Sym::H, -3));
        s += dxi(dxi(dxi(dxi(u_)))) *
             (ParamPoly::sym(Sym::c4) * ParamPoly::sym(Sym::H, -4));
        return s.shifted({0, 1, 0}); // the whole block is alpha-scaled
    }

    FieldSeries shift_xi(const FieldSeries& s, int sign) const {
        return series_transform<SubgridPoly>(s, [&](const SubgridPoly& p) {
            return p.shifted_xi_by_d(sign);
        });
    }

    void build_kappa() {
        // kappa = 1 / (1 + a cos kz) expanded geometrically; the
        // truncation order in a bounds the expansion.
        kappa_ = FieldSeries(ord_);
        SubgridPoly mc;
        mc.add_term({0, 1}, Stencil::identity() * Rat(-1));
        SubgridPoly power = SubgridPoly::macro_value();
        const int top = std::min(ord_.a, 10);
        for (int n = 0; n < top; ++n) {
            kappa_.add({0, 0, n}, power);
            power = power * mc;
        }
    }

    PdeFamily fam_;
    Orders ord_;
    FieldSeries u_;
    StencilSeries g_;
    FieldSeries kappa_;
};

} // namespace

ResidualReport evaluate_residuals(const PdeFamily& family,
                                  const Orders& orders, const FieldSeries& u,
                                  const StencilSeries& g) {
    Loop loop(family, orders);
    // Rebuild the loop state from the given pair, then re-evaluate.
    // (Loop construction seeds u = U_j, g = 0; overwrite.)
    loop.seed(u, g);
    const auto r = loop.residuals();
    ResidualReport rep;
    rep.pde_zero = r.pde.is_zero();
    rep.value_edge_zero = r.value_edge.is_zero();
    rep.deriv_edge_zero = r.deriv_edge.is_zero();
    rep.amplitude_zero = r.amplitude.is_zero();
    return rep;
}

ConstructionResult construct(const PdeFamily& family, const Orders& orders,
                             int max_iters) {
    if (orders.g < 1) throw DomainError("coupling order must be at least 1");
    if (family.has_advection() && family.c_order <= 0)
        throw DomainError("advection requires a positive speed truncation");

    Loop loop(family, orders);
    for (int it = 0; it <= max_iters; ++it) {
        const Residuals r = loop.residuals();
        if (r.all_zero()) {
            ConstructionResult out;
            out.family = family;
            out.orders = orders;
            out.field = SubgridField{loop.field()};
            out.evolution = MacroEvolution{loop.evolution()};
            out.iterations = it;
            out.residuals.pde_zero = true;
            out.residuals.value_edge_zero = true;
            out.residuals.deriv_edge_zero = true;
            out.residuals.amplitude_zero = true;
            return out;
        }
        if (it == max_iters) break;
        loop.update(r);
    }
    throw NonConvergence(std::string("no convergence for ") + family.name(),
                         max_iters);
}

} // namespace holo
