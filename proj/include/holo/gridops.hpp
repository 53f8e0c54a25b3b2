#pragma once

#include "holo/subgrid.hpp"
#include "holo/truncseries.hpp"

namespace holo {

/// Element field expanded in the coupling (and perturbation) parameters.
using FieldSeries = TruncSeries<SubgridPoly>;
/// Macro-grid operator expanded the same way.
using StencilSeries = TruncSeries<Stencil>;

/// Constructed in-element field u_j(xi, ...; U).  The leading expansion
/// term is the macro value itself and every correction has zero element
/// mean, so the macro value always parametrises the element amplitude.
struct SubgridField {
    FieldSeries u;

    /// element_mean(u) equals the bare macro value at expansion order 0.
    bool amplitude_invariant() const;
};

/// Constructed macroscale evolution dU_j/dt = g(U).  Interaction with
/// q-th nearest neighbours requires at least q rounds of coupling, so
/// the coefficient of coupling^q spans at most 2q whole shifts.
struct MacroEvolution {
    StencilSeries g;

    bool width_invariant() const;
};

// -- subgrid calculus lifted to series ------------------------------------

FieldSeries dxi(const FieldSeries& u);
FieldSeries dz(const FieldSeries& u);
FieldSeries eval_xi(const FieldSeries& u, const Rat& x);
FieldSeries element_shift(const FieldSeries& u, int by);
StencilSeries element_mean(const FieldSeries& u);

/// Multiply by the coupling parameter (shifts the expansion keys).
template <class T>
TruncSeries<T> gamma_mul(const TruncSeries<T>& s, int power = 1) {
    return s.shifted({power, 0, 0});
}

/// Reattach the expansion exponents to the coefficients as explicit
/// symbols, collapsing a series to a single operator (or field).
Stencil flatten(const StencilSeries& s);
SubgridPoly flatten(const FieldSeries& s);

/// Applies a macroscale operator to every element value the field reads.
FieldSeries apply_macro(const FieldSeries& u, const Stencil& op);

// -- right inverses used by the refinement updates ------------------------

/// Particular solution of d^2 v / dxi^2 = f with zero element mean and
/// equal end values.  Defined on harmonic-free fields only.
SubgridPoly linv_diffusion(const SubgridPoly& f);
/// Particular solution of d v / dxi = f with zero element mean.
SubgridPoly linv_wave(const SubgridPoly& f);
/// Microscale variant: polynomial parts as linv_diffusion scaled by H^2,
/// harmonic parts divided by -(n k)^2, mixed parts with the edge-anchored
/// correction -(xi^p - xi).
SubgridPoly linv_het(const SubgridPoly& f);

FieldSeries linv_diffusion(const FieldSeries& f);
FieldSeries linv_wave(const FieldSeries& f);
FieldSeries linv_het(const FieldSeries& f);

// -- inter-element edge condition residuals -------------------------------

/// Residual of the two-sided coupling condition applied to a field v:
///   -(1 - gamma/2)(v_j^R - v_j^L) + gamma/2 (v_{j+1}^L - v_{j-1}^R)
///   + gamma theta/2 (v_j^R + v_j^L) - gamma theta/2 (v_{j+1}^L + v_{j-1}^R).
/// The value condition uses v = u with +theta; the derivative condition
/// uses v = du/dx with -theta.
FieldSeries edge_condition(const FieldSeries& v, const ParamPoly& theta);

/// Residual of the one-sided flux coupling condition used by the
/// first-order family, applied to the flux f:
///   (1+theta)/2 [ -f_j^L + (1-gamma) f_j^R + gamma f_{j-1}^R ]
/// - (1-theta)/2 [ -f_j^R + (1-gamma) f_j^L + gamma f_{j+1}^L ].
FieldSeries flux_edge_condition(const FieldSeries& f, const ParamPoly& theta);

} // namespace holo
