#include "holo/simkit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "holo/errors.hpp"
#include "holo/gridops.hpp"

namespace holo {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_nodes(const SimGrid& g, int least, const char* who) {
    if (g.n() < least)
        throw DomainError(std::string(who) + " needs at least " +
                          std::to_string(least) + " nodes, got " +
                          std::to_string(g.n()));
    if (!(g.length() > 0))
        throw DomainError(std::string(who) + " needs x_hi > x_lo");
}

double kappa_at(double a, double k, double phi, double x) {
    return 1.0 / (1.0 + a * std::cos(k * (x + phi)));
}

/// Integer nearest to r, rejecting anything further than tol away.
long near_int(double r, double tol, const char* what) {
    const double rounded = std::nearbyint(r);
    if (std::abs(r - rounded) > tol)
        throw DomainError(std::string(what) + ": " + std::to_string(r) +
                          " is not close to an integer");
    return long(rounded);
}

} // namespace

SimGrid sample_grid(double x_lo, double x_hi, int n,
                    const std::function<Cx(double)>& f) {
    if (n < 1) throw DomainError("sample_grid needs n >= 1");
    if (!(x_hi > x_lo)) throw DomainError("sample_grid needs x_hi > x_lo");
    SimGrid g;
    g.x_lo = x_lo;
    g.x_hi = x_hi;
    g.values.resize(n);
    for (int i = 0; i < n; ++i) g.values[i] = f(g.x(i));
    return g;
}

SimGrid breather_state(int n) {
    return sample_grid(-kPi, kPi, n, [](double x) {
        return Cx(1.0, 0.0) - Cx(0.0, 1.0) / std::cosh(x);
    });
}

void check_stability(const RunConfig& cfg, const SimGrid& grid) {
    require_nodes(grid, 1, "check_stability");
    if (!(cfg.dt > 0)) throw DomainError("check_stability needs dt > 0");
    const double h = grid.h();
    double bound = 0;
    if (cfg.solver == "nls_fine") {
        // Stiffest mode -i 2/h^2; RK4 tolerates |lambda dt| <= 2 sqrt(2)
        // on the imaginary axis.
        bound = std::sqrt(2.0) * h * h;
    } else if (cfg.solver == "nls_holistic") {
        // Two-step Laplacian halves the top frequency: -i / (2 H^2).
        bound = 4.0 * h * h;
    } else if (cfg.solver == "het_fine") {
        if (!(std::abs(cfg.a) < 1))
            throw DomainError("diffusivity needs |a| < 1");
        const double kappa_max = 1.0 / (1.0 - std::abs(cfg.a));
        bound = 0.5 * h * h / kappa_max;
    } else if (cfg.solver == "het_holistic") {
        // Conservative cap for certified closures at |a| < 1.
        bound = 0.25 * h * h;
    } else {
        throw ConfigError("unknown solver '" + cfg.solver + "'");
    }
    if (cfg.dt > bound) {
        std::ostringstream os;
        os << "solver " << cfg.solver << " needs dt <= " << bound << ", got "
           << cfg.dt;
        throw DomainError(os.str());
    }
}

CxField nls_fine_rhs(const SimGrid& u, double alpha) {
    require_nodes(u, 3, "nls_fine_rhs");
    const int n = u.n();
    const double inv_h2 = 1.0 / (u.h() * u.h());
    CxField out(n);
    for (int i = 0; i < n; ++i) {
        const Cx ui = u.values[i];
        const Cx lap =
            u.values[u.wrap(i + 1)] - 2.0 * ui + u.values[u.wrap(i - 1)];
        // i u_t = -u_xx / 2 + alpha |u|^2 u.
        const Cx hamiltonian = -0.5 * lap * inv_h2 + alpha * std::norm(ui) * ui;
        out[i] = Cx(0, -1) * hamiltonian;
    }
    return out;
}

CxField nls_holistic_rhs(const SimGrid& U, double alpha, double gamma) {
    const int n = U.n();
    if (n < 5)
        throw StencilWiderThanGrid(
            "coarse Schrodinger closure reaches two elements out, needs >= 5, "
            "got " +
            std::to_string(n));
    require_nodes(U, 5, "nls_holistic_rhs");
    const double H = U.h();
    const double g2 = gamma * gamma;
    CxField out(n);
    for (int j = 0; j < n; ++j) {
        const Cx uj = U.values[j];
        const Cx up1 = U.values[U.wrap(j + 1)];
        const Cx um1 = U.values[U.wrap(j - 1)];
        const Cx up2 = U.values[U.wrap(j + 2)];
        const Cx um2 = U.values[U.wrap(j - 2)];

        Cx ham = alpha * std::norm(uj) * uj;
        ham -= g2 / (8.0 * H * H) * (up2 + um2 - 2.0 * uj);

        // Subgrid correction: seven interaction groups of the midpoint
        // amplitudes at coupling^2.
        Cx brack = 2.0 * std::norm(uj) * (up2 + um2 - 4.0 * uj);
        brack -= 4.0 * std::norm(up2) * (up2 - 2.0 * uj);
        brack -= 4.0 * std::norm(um2) * (um2 - 2.0 * uj);
        brack -= 4.0 * std::conj(uj) * (up1 * up1 + um1 * um1 - up1 * um1);
        brack -= 4.0 * uj * (std::conj(up1) * um1 + std::conj(um1) * up1);
        brack += std::conj(up2) * (uj * uj - 2.0 * up1 * up1);
        brack += std::conj(um2) * (uj * uj - 2.0 * um1 * um1);
        ham += alpha * g2 / 96.0 * brack;

        out[j] = Cx(0, -1) * ham;
    }
    return out;
}

CxField het_fine_rhs(const SimGrid& u, double a, double k, double phi) {
    require_nodes(u, 3, "het_fine_rhs");
    if (!(std::abs(a) < 1)) throw DomainError("diffusivity needs |a| < 1");
    const int n = u.n();
    const double h = u.h();
    const double inv_h2 = 1.0 / (h * h);
    std::vector<double> kap_half(n);
    for (int i = 0; i < n; ++i)
        kap_half[i] = kappa_at(a, k, phi, u.x(i) + 0.5 * h);
    CxField out(n);
    for (int i = 0; i < n; ++i) {
        const Cx flux_r = kap_half[i] * (u.values[u.wrap(i + 1)] - u.values[i]);
        const Cx flux_l =
            kap_half[u.wrap(i - 1)] * (u.values[i] - u.values[u.wrap(i - 1)]);
        out[i] = (flux_r - flux_l) * inv_h2;
    }
    return out;
}

int NumericStencil::width() const {
    int m = 0;
    for (const auto& [s, w] : taps) m = std::max(m, std::abs(s));
    return taps.empty() ? 0 : 2 * m + 1;
}

NumericStencil bind_stencil(const MacroEvolution& ev, double theta, double a,
                            double k, double Hval) {
    if (!(Hval > 0)) throw DomainError("bind_stencil needs H > 0");
    const Stencil flat = flatten(ev.g);
    std::array<double, kNumSyms> at{};
    at[size_t(Sym::gamma)] = 1.0;
    at[size_t(Sym::theta)] = theta;
    at[size_t(Sym::c)] = 1.0;
    at[size_t(Sym::alpha)] = 0.0;
    at[size_t(Sym::a)] = a;
    at[size_t(Sym::H)] = Hval;
    at[size_t(Sym::k)] = k;
    at[size_t(Sym::d)] = 1.0;
    NumericStencil out;
    for (const auto& [hs, coef] : flat.taps()) {
        if (hs % 2 != 0)
            throw DomainError("evolution stencil has a half-integer shift " +
                              std::to_string(hs));
        out.taps[hs / 2] += coef.eval(at);
    }
    return out;
}

CxField het_holistic_rhs(const SimGrid& U, const NumericStencil& st) {
    require_nodes(U, 1, "het_holistic_rhs");
    const int n = U.n();
    if (st.width() >= n)
        throw StencilWiderThanGrid("stencil width " +
                                   std::to_string(st.width()) +
                                   " does not fit on " + std::to_string(n) +
                                   " periodic elements");
    CxField out(n);
    for (int j = 0; j < n; ++j) {
        Cx acc = 0;
        for (const auto& [s, w] : st.taps) acc += w * U.values[U.wrap(j + s)];
        out[j] = acc;
    }
    return out;
}

Trajectory rk4_integrate(const SimGrid& initial, const RhsFn& rhs, double dt,
                         double T, int cadence) {
    require_nodes(initial, 1, "rk4_integrate");
    if (!(dt > 0)) throw DomainError("rk4_integrate needs dt > 0");
    if (!(T >= 0)) throw DomainError("rk4_integrate needs T >= 0");
    if (cadence < 1) throw DomainError("rk4_integrate needs cadence >= 1");

    const long steps = T == 0 ? 0 : std::max(1L, long(std::ceil(T / dt - 1e-12)));
    const double step = steps == 0 ? 0 : T / double(steps);
    const int n = initial.n();

    SimGrid state = initial;
    SimGrid scratch = initial;
    CxField k2(n), k3(n), k4(n);

    Trajectory traj;
    traj.times.push_back(0);
    traj.snapshots.push_back(state.values);

    for (long s = 1; s <= steps; ++s) {
        const CxField k1 = rhs(state);
        for (int i = 0; i < n; ++i)
            scratch.values[i] = state.values[i] + 0.5 * step * k1[i];
        k2 = rhs(scratch);
        for (int i = 0; i < n; ++i)
            scratch.values[i] = state.values[i] + 0.5 * step * k2[i];
        k3 = rhs(scratch);
        for (int i = 0; i < n; ++i)
            scratch.values[i] = state.values[i] + step * k3[i];
        k4 = rhs(scratch);
        for (int i = 0; i < n; ++i)
            state.values[i] += step / 6.0 *
                               (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

        const double t = double(s) * step;
        for (int i = 0; i < n; ++i) {
            const Cx v = state.values[i];
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw NonFinite("state left the finite range at node " +
                                    std::to_string(i),
                                t);
        }
        if (s % cadence == 0 || s == steps) {
            traj.times.push_back(t);
            traj.snapshots.push_back(state.values);
        }
    }
    return traj;
}

RunComparison compare_runs(const SimGrid& fine_grid, const Trajectory& fine,
                           const SimGrid& coarse_grid,
                           const Trajectory& coarse) {
    const int nf = fine_grid.n(), nc = coarse_grid.n();
    if (nf < 1 || nc < 1) throw GridMismatch("empty grid");
    if (std::abs(fine_grid.x_lo - coarse_grid.x_lo) > 1e-12 ||
        std::abs(fine_grid.x_hi - coarse_grid.x_hi) > 1e-12)
        throw GridMismatch("domains differ");
    if (nf % nc != 0)
        throw GridMismatch("fine node count " + std::to_string(nf) +
                           " is not a multiple of " + std::to_string(nc));
    if (fine.times.size() != coarse.times.size())
        throw GridMismatch("snapshot counts differ: " +
                           std::to_string(fine.times.size()) + " vs " +
                           std::to_string(coarse.times.size()));
    const int ratio = nf / nc;

    RunComparison out;
    for (size_t s = 0; s < fine.times.size(); ++s) {
        const double t = fine.times[s];
        if (std::abs(t - coarse.times[s]) > 1e-9 * std::max(1.0, std::abs(t)))
            throw GridMismatch("snapshot times differ at index " +
                               std::to_string(s));
        if (int(fine.snapshots[s].size()) != nf ||
            int(coarse.snapshots[s].size()) != nc)
            throw GridMismatch("snapshot size does not match its grid");
        double num = 0, den = 0, worst = 0;
        for (int j = 0; j < nc; ++j) {
            const double mf = std::abs(fine.snapshots[s][size_t(j) * ratio]);
            const double mc = std::abs(coarse.snapshots[s][j]);
            num += (mc - mf) * (mc - mf);
            den += mf * mf;
            worst = std::max(worst, std::abs(mc - mf));
        }
        const double rel = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
        out.times.push_back(t);
        out.rel_l2.push_back(rel);
        out.max_abs.push_back(worst);
        out.worst_rel_l2 = std::max(out.worst_rel_l2, rel);
        out.worst_max_abs = std::max(out.worst_max_abs, worst);
    }
    return out;
}

double bloch_rate(double a, double k, double phi, double K, int m) {
    if (m < 3) throw DomainError("bloch_rate needs at least 3 cell nodes");
    if (!(std::abs(a) < 1)) throw DomainError("diffusivity needs |a| < 1");
    if (!(k > 0)) throw DomainError("bloch_rate needs k > 0");
    const double d = 2.0 * kPi / k;
    const double h = d / m;
    const double inv_h2 = 1.0 / (h * h);
    std::vector<double> w(m);
    for (int i = 0; i < m; ++i)
        w[i] = kappa_at(a, k, phi, (i + 0.5) * h) * inv_h2;

    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(m, m);
    const Cx phase = std::polar(1.0, K * d);
    for (int i = 0; i < m; ++i) {
        const int ip = (i + 1) % m;
        A(i, i) -= w[i];
        A(ip, ip) -= w[i];
        const Cx hop = (ip == 0) ? w[i] * phase : Cx(w[i], 0);
        A(i, ip) += hop;
        A(ip, i) += std::conj(hop);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
        A, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw DomainError("cell eigenvalue computation failed");

    const double target = -K * K;
    double best = solver.eigenvalues()[0];
    for (int i = 1; i < m; ++i) {
        const double ev = solver.eigenvalues()[i];
        if (std::abs(ev - target) < std::abs(best - target)) best = ev;
    }
    return best;
}

double stencil_symbol(const NumericStencil& st, double Hval, double K) {
    double acc = 0;
    for (const auto& [s, w] : st.taps) acc += w * std::cos(K * Hval * s);
    return acc;
}

double dispersion_measure(const RunConfig& cfg, const SimGrid& grid,
                          double K) {
    require_nodes(grid, 3, "dispersion_measure");
    const double L = grid.length();
    near_int(K * L / (2.0 * kPi), 1e-9, "dispersion_measure mode count");

    if (cfg.solver == "het_fine" && cfg.a != 0) {
        // Microstructure resolved exactly by one assembled cell.
        const long cells = near_int(cfg.k * L / (2.0 * kPi), 1e-9,
                                    "diffusivity cycles on the domain");
        if (cells < 1) throw DomainError("diffusivity needs k > 0");
        if (grid.n() % cells != 0)
            throw GridMismatch("grid nodes not divisible into " +
                               std::to_string(cells) + " cells");
        return bloch_rate(cfg.a, cfg.k, cfg.phi, K, grid.n() / int(cells));
    }
    if (cfg.solver != "het_fine")
        throw ConfigError("dispersion fit supports the diffusive solvers, got '" +
                          cfg.solver + "'");

    SimGrid run = grid;
    for (int i = 0; i < run.n(); ++i)
        run.values[i] = std::polar(1.0, K * run.x(i));
    const double h = run.h();
    const double dt = 0.25 * h * h;
    const double T = 0.5 / std::max(1.0, K * K);
    const double a = cfg.a, k = cfg.k, phi = cfg.phi;
    const Trajectory traj = rk4_integrate(
        run,
        [a, k, phi](const SimGrid& g) { return het_fine_rhs(g, a, k, phi); },
        dt, T, 1 << 30);

    const int n = run.n();
    auto mode_amp = [&](const CxField& f) {
        Cx acc = 0;
        for (int i = 0; i < n; ++i)
            acc += f[i] * std::polar(1.0, -K * run.x(i));
        return std::abs(acc) / n;
    };
    const double a0 = mode_amp(traj.snapshots.front());
    const double a1 = mode_amp(traj.snapshots.back());
    if (!(a0 > 0) || !(a1 > 0))
        throw DomainError("mode amplitude vanished during the dispersion fit");
    return std::log(a1 / a0) / traj.times.back();
}

void write_trajectory_csv(std::ostream& os, const SimGrid& grid,
                          const Trajectory& traj) {
    const int n = grid.n();
    os.precision(17); // round-trips doubles exactly
    bool complex_field = false;
    for (const auto& snap : traj.snapshots)
        for (const Cx& v : snap)
            if (v.imag() != 0) complex_field = true;

    os << "t,part";
    for (int i = 0; i < n; ++i) os << ",x_" << grid.x(i);
    os << "\n";
    for (size_t s = 0; s < traj.snapshots.size(); ++s) {
        os << traj.times[s] << ",re";
        for (const Cx& v : traj.snapshots[s]) os << ',' << v.real();
        os << "\n";
        if (complex_field) {
            os << traj.times[s] << ",im";
            for (const Cx& v : traj.snapshots[s]) os << ',' << v.imag();
            os << "\n";
        }
    }
}

} // namespace holo
