#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "holo/constructor.hpp"

namespace holo {

using Cx = std::complex<double>;
using CxField = std::vector<Cx>;

/// Uniform periodic grid with node values; real-valued problems keep the
/// imaginary parts at zero.
struct SimGrid {
    double x_lo = 0, x_hi = 1;
    CxField values;

    int n() const { return int(values.size()); }
    double length() const { return x_hi - x_lo; }
    double h() const { return length() / n(); }
    double x(int i) const { return x_lo + i * h(); }
    int wrap(int i) const {
        const int m = i % n();
        return m < 0 ? m + n() : m;
    }
};

/// Periodic grid sampled from a pointwise function.
SimGrid sample_grid(double x_lo, double x_hi, int n,
                    const std::function<Cx(double)>& f);

/// Breather initial state 1 - i sech x on [-pi, pi]: a localised
/// oscillating peak on a nonzero background.
SimGrid breather_state(int n);

struct RunConfig {
    std::string solver; // nls_fine | nls_holistic | het_fine | het_holistic
    double dt = 0;
    double T = 0;
    int cadence = 1; // snapshot stride in steps
    double alpha = 0;
    // Diffusivity 1 / (1 + a cos(k (x + phi))).
    double a = 0, k = 0, phi = 0;
};

/// Enforces the declared step bound of the configured solver:
/// Schrodinger RK4 keeps the stiffest mode inside the imaginary-axis
/// stability interval (fine dt <= sqrt(2) h^2, coarse dt <= 4 H^2) and
/// diffusion uses dt <= h^2 / (2 max kappa).
void check_stability(const RunConfig& cfg, const SimGrid& grid);

/// d/dt of the fine Schrodinger field i u_t = -u_xx/2 + alpha |u|^2 u with
/// second-order central differences.
CxField nls_fine_rhs(const SimGrid& u, double alpha);

/// d/dt of the coarse midpoint amplitudes: the two-step Laplacian plus the
/// seven subgrid interaction groups at coupling^2.
CxField nls_holistic_rhs(const SimGrid& U, double alpha, double gamma = 1.0);

/// d/dt of heterogeneous diffusion in conservative flux form with the
/// diffusivity evaluated at half nodes.
CxField het_fine_rhs(const SimGrid& u, double a, double k, double phi = 0);

/// Evolution stencil bound to numbers at full coupling.
struct NumericStencil {
    std::map<int, double> taps; // whole-element shift -> weight
    int width() const;          // 2 max|shift| + 1, 0 when empty
};

/// Evaluates every tap coefficient at gamma = 1 and the given parameter
/// values, perturbation off.
NumericStencil bind_stencil(const MacroEvolution& ev, double theta, double a,
                            double k, double Hval);

/// Applies the bound taps to the periodic coarse field.
CxField het_holistic_rhs(const SimGrid& U, const NumericStencil& st);

struct Trajectory {
    std::vector<double> times;
    std::vector<CxField> snapshots;
};

using RhsFn = std::function<CxField(const SimGrid&)>;

/// Classical fourth-order Runge-Kutta.  Lands exactly on T by rounding
/// the step count up; snapshots every `cadence` steps plus the initial
/// and final states.  Throws NonFinite the moment a value leaves the
/// finite range.
Trajectory rk4_integrate(const SimGrid& initial, const RhsFn& rhs, double dt,
                         double T, int cadence = 1);

struct RunComparison {
    std::vector<double> times;
    std::vector<double> rel_l2;
    std::vector<double> max_abs;
    double worst_rel_l2 = 0;
    double worst_max_abs = 0;
};

/// Field-magnitude differences at the coarse points, which must be a
/// subset of the fine points, at matching snapshot times.
RunComparison compare_runs(const SimGrid& fine_grid, const Trajectory& fine,
                           const SimGrid& coarse_grid,
                           const Trajectory& coarse);

/// Decay rate of the on-grid mode e^{iKx} for the configured solver, by a
/// short run and log-amplitude fit; the heterogeneous fine case instead
/// takes the Bloch eigenvalue of one assembled microcell.
double dispersion_measure(const RunConfig& cfg, const SimGrid& grid, double K);

/// Eigenvalue of the flux-form microcell operator (m nodes, wrap phase
/// e^{+-iKd}) nearest -K^2.
double bloch_rate(double a, double k, double phi, double K, int m);

/// Real part of the stencil response sum_s w_s e^{i K H s}.
double stencil_symbol(const NumericStencil& st, double Hval, double K);

/// Header t,part,x_0..x_{n-1}; per snapshot one `re` row, plus an `im`
/// row for fields with nonzero imaginary part.
void write_trajectory_csv(std::ostream& os, const SimGrid& grid,
                          const Trajectory& traj);

} // namespace holo
