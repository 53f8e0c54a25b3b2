#pragma once

#include "holo/parampoly.hpp"

namespace holo {

/// The 1D PDE families the construction supports.
enum class FamilyKind {
    Diffusion,
    LatticeDiffusion,
    AdvectionDiffusion,
    Wave1,
    HeterogeneousDiffusion,
};

/// One member of the PDE family: the microscale dynamics to be closed,
/// with its inter-element coupling asymmetry theta.
///
/// theta is carried symbolically by default (the generic construction);
/// substitute a rational to specialise, e.g. the upwind limit.  The
/// microscale-diffusivity family fixes theta = 0.
struct PdeFamily {
    FamilyKind kind = FamilyKind::Diffusion;
    ParamPoly theta = ParamPoly::sym(Sym::theta);

    /// Include the alpha-scaled operator perturbation
    /// alpha (c0 u + c2 u_xx + c3 u_xxx + c4 u_xxxx); it only survives
    /// when the alpha truncation order keeps alpha^1.
    bool perturbed = false;

    /// Second-order families: truncation order of the advection speed c
    /// (the iteration does not terminate without one).  Ignored unless
    /// advection is present.
    int c_order = 3;

    /// First-order family: discretise the advection on a microscale
    /// lattice of spacing d instead of the continuum derivative.
    bool lattice = false;

    static PdeFamily diffusion();
    static PdeFamily lattice_diffusion();
    static PdeFamily advection_diffusion(bool perturbed = false,
                                         int c_order = 3);
    static PdeFamily wave1(bool perturbed = false, bool lattice = false);
    static PdeFamily heterogeneous_diffusion();

    PdeFamily with_theta(const ParamPoly& th) const;

    bool has_advection() const {
        return kind == FamilyKind::AdvectionDiffusion;
    }
    bool first_order() const { return kind == FamilyKind::Wave1; }
    bool microscale() const {
        return kind == FamilyKind::HeterogeneousDiffusion;
    }

    const char* name() const;
};

} // namespace holo
