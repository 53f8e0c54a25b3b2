#pragma once

#include "holo/family.hpp"
#include "holo/gridops.hpp"

namespace holo {

/// Zero/nonzero status of the four residuals, re-evaluated on the final
/// field and evolution (the certificate the construction rests on).
struct ResidualReport {
    bool pde_zero = false;
    bool value_edge_zero = false;
    bool deriv_edge_zero = false; // trivially true for the first-order family
    bool amplitude_zero = false;

    bool all_zero() const {
        return pde_zero && value_edge_zero && deriv_edge_zero &&
               amplitude_zero;
    }
};

struct ConstructionResult {
    PdeFamily family;
    Orders orders;
    SubgridField field;
    MacroEvolution evolution;
    int iterations = 0;
    ResidualReport residuals;
};

/// Replace the time derivative of every macro value: each stencil tap's
/// U_{j+s} evolves by the shift-s translate of g, exactly through the
/// chain rule.
FieldSeries time_derivative(const FieldSeries& u, const StencilSeries& g);

/// Iteratively refine u_j = U_j, g_j = 0 with the family's update rule
/// until the PDE, both edge-condition, and amplitude residuals vanish
/// identically at the truncation orders.  Throws NonConvergence after
/// max_iters refinement passes.
ConstructionResult construct(const PdeFamily& family, const Orders& orders,
                             int max_iters = 99);

/// Re-evaluate the four residuals of a (field, evolution) pair.
ResidualReport evaluate_residuals(const PdeFamily& family,
                                  const Orders& orders, const FieldSeries& u,
                                  const StencilSeries& g);

} // namespace holo
