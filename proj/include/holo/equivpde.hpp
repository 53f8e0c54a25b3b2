#pragma once

#include <map>
#include <string>

#include "holo/constructor.hpp"
#include "holo/family.hpp"
#include "holo/gridops.hpp"

namespace holo {

/// Modified-equation form of a macroscale evolution: the coefficient of
/// each d^n/dx^n U as an exact parameter polynomial (H powers included).
struct EquivalentPde {
    std::map<int, ParamPoly> rows;
    int taylor_depth = 0;

    std::string str() const;
};

/// Expands every tap U_{j+s} as sum_m (sH)^m/m! d^m/dx^m U, exactly,
/// keeping the coupling symbolic.  Truncation error O(H^M d^{M+1}).
EquivalentPde to_equivalent_pde(const MacroEvolution& g, int taylor_depth);

/// Full-coupling defect of an equivalent PDE against the family's exact
/// macroscale target rows.
struct ConsistencyReport {
    std::map<int, ParamPoly> target;
    std::map<int, ParamPoly> defects; // nonzero rows of (got - target)
    int defect_order = -1;            // lowest defective row, -1 when clean
    int checked_through = 0;          // highest row compared

    bool consistent_to(int order) const {
        return defect_order < 0 || defect_order >= order;
    }
    std::string str() const;
};

ConsistencyReport consistency_report(const EquivalentPde& e,
                                     const PdeFamily& family);

enum class ClosedFormKind { WaveAsinh, DiffusionAsinh2 };

/// Expands the closed-form closure operator as an exact coupling series:
/// wave: -(2c/H) asinh[(gamma/2)(mu - theta delta/2) delta (1+X)^{-1/2}],
/// diffusion: (4/H^2) asinh^2[sqrt(w)] with
/// w = (gamma^2 delta^2/4)(mu^2 - theta^2 delta^2/4)(1+X')^{-1}.
MacroEvolution closed_form_gamma_series(ClosedFormKind kind,
                                        const Orders& orders);

/// Mid-element form of the coupling conditions on a converged field: the
/// subgrid difference of u at xi = 1/2 (first difference for Wave1,
/// second for Diffusion, via the smooth polynomial extension) must equal
/// a macroscale operator series applied to the field there.
struct MidElementReport {
    bool holds = false;
    FieldSeries defect;
};

MidElementReport verify_midelement_identity(const ConstructionResult& res);

} // namespace holo
