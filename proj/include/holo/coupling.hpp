#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "holo/rat.hpp"

namespace holo {

/// Dense matrix of exact rationals, row-major.
using RatMatrix = std::vector<std::vector<Rat>>;

/// The circulant pair that writes the inter-element edge conditions in
/// matrix form: C+ u^R = C-^T u^L on element values and C- f^R = C+^T f^L
/// on fluxes.  Diagonal entries 1 - (g/2)(1 +- th), wrapped subdiagonal
/// (g/2)(1 +- th).
struct CouplingMatrices {
    int N = 0;
    Rat gamma, theta;
    RatMatrix C_plus, C_minus;
    /// Closed forms [1 - (g/2)(1 +- th)]^N - (-1)^N [(g/2)(1 +- th)]^N.
    Rat det_plus, det_minus;
};

/// Requires N >= 2.
CouplingMatrices build_coupling(int N, const Rat& gamma, const Rat& theta);

/// Eigenvalues of the full-coupling interface matrix V,
/// lambda_k = (1-th)/2 + (1+th)/2 exp(-2 pi i k (N-1)/N), k = 0..N-1.
/// zero_index is the k of the exact zero eigenvalue (only N even, k = N/2,
/// th = 0: the discontinuous zigzag mode), or -1 when V is nonsingular.
struct CirculantEigs {
    std::vector<std::complex<double>> values;
    int zero_index = -1;
};

CirculantEigs circulant_eigs_V(int N, const Rat& theta);

/// A ring of N abutting elements of width H.  Each element carries a
/// strictly positive polynomial diffusivity and, optionally, a polynomial
/// trial field, both in the subgrid coordinate xi in [0,1] with
/// constant-term-first rational coefficients of degree `degree`.
struct ElementEnsemble {
    int N = 0;
    int degree = 0;
    Rat H = Rat(1);
    std::vector<std::vector<Rat>> kappa;
    std::vector<std::vector<Rat>> fields;
};

/// Deterministic ensemble with diffusivities 1 + r xi(1-xi) + s xi for
/// seeded draws of |r|, |s| <= 1/2, positive on [0,1] by construction.
/// Fields are left empty.
ElementEnsemble make_ensemble(int N, int degree, const Rat& H, unsigned seed);

/// Residuals of the 2N edge-condition rows for the ensemble's current
/// fields, element values first then fluxes -kappa u'/H; the fields are
/// admissible exactly when every entry is zero.
std::vector<Rat> edge_residuals(const ElementEnsemble& ens, const Rat& gamma,
                                const Rat& theta);

/// Basis of the exact null space of the 2N edge-condition constraints on
/// the N(degree+1) field coefficients, by fraction-free elimination.
/// Basis vectors are concatenated per-element coefficient blocks.
std::vector<std::vector<Rat>> edge_nullspace(const ElementEnsemble& ens,
                                             const Rat& gamma,
                                             const Rat& theta);

/// <ut, L u> - <L ut, u> with L = (kappa u_x)_x for one concrete pair of
/// field coefficient sets, by exact polynomial integration element by
/// element.
Rat bilinear_defect(const ElementEnsemble& ens,
                    const std::vector<std::vector<Rat>>& u,
                    const std::vector<std::vector<Rat>>& ut);

struct SelfAdjointReport {
    Rat max_defect;
    int nullspace_dim = 0;
    int trials = 0;
    /// N even with gamma = 1, theta = 0: the zigzag case excluded from the
    /// symmetry guarantee.
    bool exceptional = false;
    std::string str() const;
};

/// Draws seeded random admissible field pairs and measures the symmetry
/// defect of the diffusion operator exactly; zero for every tested pair
/// whenever (N, gamma, theta) is not the zigzag case.  Throws
/// DegenerateConstraints when the admissible space is too small to draw
/// two independent fields.
SelfAdjointReport self_adjointness_defect(const ElementEnsemble& ens,
                                          const Rat& gamma, const Rat& theta,
                                          int trials, unsigned seed = 20260821);

struct SpectralReport {
    std::vector<double> eigenvalues;
    int zero_count = 0;
    /// Continuum gap bound 4 pi^2 min(kappa) / H^2.
    double beta = 0;
    /// Second-order discretisation margin on the gap bound.
    double eps_disc = 0;
    /// Largest eigenvalue outside the near-zero cluster.
    double gap = 0;
    /// zero_count == N and every other eigenvalue <= -beta (1 - eps_disc).
    bool dichotomy = false;
    std::string str() const;
};

/// Spectrum of the uncoupled diffusion operator (kappa u_x)_x: N isolated
/// elements of width H, each discretised in flux form on M periodic nodes.
/// Eigenvalues are returned ascending over all elements; near-zero means
/// |lambda| < tol * max |lambda|.
SpectralReport spectral_dichotomy(int N, double H,
                                  const std::function<double(double)>& kappa,
                                  int M, double tol = 1e-8);

} // namespace holo
