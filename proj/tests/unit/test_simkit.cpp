#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "holo/constructor.hpp"
#include "holo/errors.hpp"
#include "holo/simkit.hpp"

using namespace holo;

namespace {

constexpr double kPi = 3.14159265358979323846;

double nls_mass(const CxField& f, double h) {
    double m = 0;
    for (const Cx& v : f) m += std::norm(v);
    return m * h;
}

double diffusion_mass(const CxField& f, double h) {
    double m = 0;
    for (const Cx& v : f) m += v.real();
    return m * h;
}

SimGrid mode_grid(double x_lo, double x_hi, int n, double q) {
    return sample_grid(x_lo, x_hi, n,
                       [q](double x) { return std::polar(1.0, q * x); });
}

} // namespace

TEST_SUITE_BEGIN("simkit");

TEST_CASE("grids sample, wrap, and build the breather state") {
    const SimGrid g = sample_grid(0, 1, 4, [](double x) { return Cx(x, 0); });
    CHECK(g.n() == 4);
    CHECK(g.h() == doctest::Approx(0.25));
    CHECK(g.x(3) == doctest::Approx(0.75));
    CHECK(g.wrap(-1) == 3);
    CHECK(g.wrap(7) == 3);

    const SimGrid b = breather_state(8);
    CHECK(b.x_lo == doctest::Approx(-kPi));
    CHECK(b.x_hi == doctest::Approx(kPi));
    CHECK(b.values[0].real() == doctest::Approx(1.0));
    CHECK(b.values[0].imag() == doctest::Approx(-1.0 / std::cosh(kPi)));
    CHECK(b.values[4].imag() == doctest::Approx(-1.0));

    CHECK_THROWS_AS(sample_grid(0, 1, 0, [](double) { return Cx(0); }),
                    DomainError);
    CHECK_THROWS_AS(sample_grid(1, 1, 4, [](double) { return Cx(0); }),
                    DomainError);
}

TEST_CASE("fine Schrodinger field rotates plane waves at the discrete rate") {
    const int n = 64;
    const double q = 3, alpha = 1.3;
    SimGrid g = mode_grid(-kPi, kPi, n, q);
    const double h = g.h();
    const double omega = (1.0 - std::cos(q * h)) / (h * h) + alpha;

    const CxField out = nls_fine_rhs(g, alpha);
    for (int i = 0; i < n; ++i) {
        const Cx want = Cx(0, -1) * omega * g.values[i];
        CHECK(std::abs(out[i] - want) <= 1e-12 * omega);
    }

    SimGrid flat = sample_grid(0, 1, 8, [](double) { return Cx(2, 1); });
    for (const Cx& v : nls_fine_rhs(flat, 0.0))
        CHECK(std::abs(v) <= 1e-13);
}

TEST_CASE("coarse Schrodinger closure matches its uniform and plane-wave rates") {
    const Cx A(0.7, -0.3);
    const double alpha = 1.3;
    SimGrid U = sample_grid(-kPi, kPi, 32, [A](double) { return A; });

    for (double gamma : {1.0, 0.6}) {
        const CxField out = nls_holistic_rhs(U, alpha, gamma);
        const Cx want = Cx(0, -1) * alpha * std::norm(A) * A *
                        (1.0 - 5.0 * gamma * gamma / 48.0);
        for (const Cx& v : out) CHECK(std::abs(v - want) <= 1e-14);
    }

    const double q = 2;
    SimGrid W = mode_grid(-kPi, kPi, 32, q);
    const double H = W.h();
    const double omega = (1.0 - std::cos(2 * q * H)) / (4 * H * H);
    const CxField lin = nls_holistic_rhs(W, 0.0);
    for (int j = 0; j < W.n(); ++j) {
        const Cx want = Cx(0, -1) * omega * W.values[j];
        CHECK(std::abs(lin[j] - want) <= 1e-13 * std::max(1.0, omega));
    }

    SimGrid tiny = sample_grid(0, 1, 4, [](double) { return Cx(1); });
    CHECK_THROWS_AS(nls_holistic_rhs(tiny, 1.0), StencilWiderThanGrid);
}

TEST_CASE("coarse Schrodinger closure is linear at zero nonlinearity") {
    const int n = 32;
    std::mt19937 gen(42);
    std::uniform_real_distribution<double> dist(-1, 1);
    SimGrid U = sample_grid(0, 1, n, [&](double) { return Cx(dist(gen), dist(gen)); });
    SimGrid V = sample_grid(0, 1, n, [&](double) { return Cx(dist(gen), dist(gen)); });
    const Cx ca(0.7, -0.2), cb(-0.4, 1.1);

    SimGrid W = U;
    for (int i = 0; i < n; ++i) W.values[i] = ca * U.values[i] + cb * V.values[i];

    const CxField ru = nls_holistic_rhs(U, 0.0);
    const CxField rv = nls_holistic_rhs(V, 0.0);
    const CxField rw = nls_holistic_rhs(W, 0.0);
    for (int i = 0; i < n; ++i)
        CHECK(std::abs(rw[i] - (ca * ru[i] + cb * rv[i])) <= 1e-11);
}

TEST_CASE("fine Schrodinger run conserves mass through a long integration") {
    const int n = 1024;
    const double alpha = -1.0, dt = 1e-5, T = 1.0;
    const SimGrid u0 = breather_state(n);

    RunConfig cfg;
    cfg.solver = "nls_fine";
    cfg.dt = dt;
    check_stability(cfg, u0);

    const Trajectory traj = rk4_integrate(
        u0, [alpha](const SimGrid& g) { return nls_fine_rhs(g, alpha); }, dt,
        T, 1 << 30);
    REQUIRE(traj.snapshots.size() == 2);
    const double m0 = nls_mass(traj.snapshots.front(), u0.h());
    const double m1 = nls_mass(traj.snapshots.back(), u0.h());
    CHECK(std::abs(m1 - m0) / m0 < 1e-8);
}

TEST_CASE("heterogeneous flux solver conserves mass to rounding") {
    const int n = 512;
    const double a = 0.5, k = 16 * kPi;
    const SimGrid u0 = sample_grid(0, 1, n, [](double x) {
        return Cx(1.0 + 0.3 * std::sin(2 * kPi * x) + 0.1 * std::cos(4 * kPi * x), 0);
    });
    const double h = u0.h();
    const double dt = 0.9 * h * h / 4.0; // max kappa = 2

    RunConfig cfg;
    cfg.solver = "het_fine";
    cfg.dt = dt;
    cfg.a = a;
    cfg.k = k;
    check_stability(cfg, u0);

    const Trajectory traj = rk4_integrate(
        u0, [a, k](const SimGrid& g) { return het_fine_rhs(g, a, k); }, dt,
        1e4 * dt, 1 << 30);
    const double m0 = diffusion_mass(traj.snapshots.front(), h);
    const double m1 = diffusion_mass(traj.snapshots.back(), h);
    CHECK(std::abs(m1 - m0) / std::abs(m0) < 1e-12);

    SimGrid bad = u0;
    CHECK_THROWS_AS(het_fine_rhs(bad, 1.0, k), DomainError);
}

TEST_CASE("phase-shifted diffusivity translates the discrete solution") {
    const int n = 256;
    const double a = 0.4, k = 16 * kPi;
    const double h = 1.0 / n, phi = 5 * h;
    auto ic = [](double x) {
        return Cx(std::exp(std::sin(2 * kPi * x)), 0.3 * std::cos(2 * kPi * x));
    };
    const SimGrid u0 = sample_grid(0, 1, n, ic);
    const SimGrid v0 =
        sample_grid(0, 1, n, [&](double x) { return ic(x + phi); });
    const double dt = 4e-6, T = 500 * dt;

    const Trajectory tu = rk4_integrate(
        u0, [&](const SimGrid& g) { return het_fine_rhs(g, a, k, 0); }, dt, T,
        1 << 30);
    const Trajectory tv = rk4_integrate(
        v0, [&](const SimGrid& g) { return het_fine_rhs(g, a, k, phi); }, dt,
        T, 1 << 30);

    for (int i = 0; i < n; ++i)
        CHECK(std::abs(tv.snapshots.back()[i] -
                       tu.snapshots.back()[(i + 5) % n]) <= 1e-13);
}

TEST_CASE("fourth-order integrator hits its classical oracles") {
    auto scalar_grid = [](Cx v) {
        SimGrid g;
        g.x_lo = 0;
        g.x_hi = 1;
        g.values = {v};
        return g;
    };

    SUBCASE("exponential decay") {
        auto rhs = [](const SimGrid& g) { return CxField{-g.values[0]}; };
        const Trajectory t = rk4_integrate(scalar_grid(Cx(1)), rhs, 0.1, 1.0);
        CHECK(std::abs(t.snapshots.back()[0] - std::exp(-1.0)) < 1e-6);
        CHECK(t.times.back() == doctest::Approx(1.0));
    }

    SUBCASE("unit rotation preserves modulus") {
        auto rhs = [](const SimGrid& g) {
            return CxField{Cx(0, 1) * g.values[0]};
        };
        const Trajectory t =
            rk4_integrate(scalar_grid(Cx(1)), rhs, 1e-3, 1.0);
        const Cx uT = t.snapshots.back()[0];
        CHECK(std::abs(std::abs(uT) - 1.0) < 1e-9);
        CHECK(std::abs(uT - std::exp(Cx(0, 1))) < 1e-11);
    }

    SUBCASE("snapshot cadence includes both endpoints") {
        auto rhs = [](const SimGrid&) { return CxField{Cx(0)}; };
        const Trajectory t = rk4_integrate(scalar_grid(Cx(2)), rhs, 0.1, 1.0, 3);
        REQUIRE(t.times.size() == 5);
        CHECK(t.times[0] == doctest::Approx(0.0));
        CHECK(t.times[1] == doctest::Approx(0.3));
        CHECK(t.times[2] == doctest::Approx(0.6));
        CHECK(t.times[3] == doctest::Approx(0.9));
        CHECK(t.times[4] == doctest::Approx(1.0));
    }

    SUBCASE("step count rounds up to land on T") {
        auto rhs = [](const SimGrid&) { return CxField{Cx(0)}; };
        const Trajectory t = rk4_integrate(scalar_grid(Cx(2)), rhs, 0.3, 1.0);
        CHECK(t.times.back() == doctest::Approx(1.0).epsilon(1e-15));
    }

    SUBCASE("finite-time blowup raises the faulting time") {
        auto rhs = [](const SimGrid& g) {
            return CxField{g.values[0] * g.values[0]};
        };
        try {
            rk4_integrate(scalar_grid(Cx(1)), rhs, 0.01, 2.0);
            FAIL("expected NonFinite");
        } catch (const NonFinite& e) {
            CHECK(e.time >= 0.9);
            CHECK(e.time <= 1.2);
        }
    }

    SUBCASE("bad arguments are rejected") {
        auto rhs = [](const SimGrid& g) { return CxField{g.values[0]}; };
        CHECK_THROWS_AS(rk4_integrate(scalar_grid(Cx(1)), rhs, 0.0, 1.0),
                        DomainError);
        CHECK_THROWS_AS(rk4_integrate(scalar_grid(Cx(1)), rhs, 0.1, -1.0),
                        DomainError);
        CHECK_THROWS_AS(rk4_integrate(scalar_grid(Cx(1)), rhs, 0.1, 1.0, 0),
                        DomainError);
    }
}

TEST_CASE("magnitude comparison flags mismatched grids") {
    const SimGrid f = sample_grid(0, 1, 8, [](double x) { return Cx(x, 0); });
    const SimGrid c = sample_grid(0, 1, 4, [](double x) { return Cx(x, 0); });
    auto zero_rhs = [](const SimGrid& g) {
        return CxField(g.values.size(), Cx(0));
    };
    const Trajectory tf = rk4_integrate(f, zero_rhs, 0.5, 1.0);
    const Trajectory tc = rk4_integrate(c, zero_rhs, 0.5, 1.0);

    const RunComparison same = compare_runs(f, tf, f, tf);
    CHECK(same.worst_rel_l2 == 0.0);
    CHECK(same.worst_max_abs == 0.0);

    const RunComparison down = compare_runs(f, tf, c, tc);
    CHECK(down.worst_rel_l2 == 0.0);
    CHECK(down.times.size() == tf.times.size());

    const SimGrid other = sample_grid(0, 2, 4, [](double x) { return Cx(x, 0); });
    const Trajectory to = rk4_integrate(other, zero_rhs, 0.5, 1.0);
    CHECK_THROWS_AS(compare_runs(f, tf, other, to), GridMismatch);

    const SimGrid c6 = sample_grid(0, 1, 6, [](double x) { return Cx(x, 0); });
    const Trajectory t6 = rk4_integrate(c6, zero_rhs, 0.5, 1.0);
    CHECK_THROWS_AS(compare_runs(f, tf, c6, t6), GridMismatch);

    const Trajectory shorter = rk4_integrate(c, zero_rhs, 1.0, 1.0);
    CHECK_THROWS_AS(compare_runs(f, tf, c, shorter), GridMismatch);

    Trajectory skewed = tc;
    skewed.times.back() += 0.1;
    CHECK_THROWS_AS(compare_runs(f, tf, c, skewed), GridMismatch);
}

TEST_CASE("coarsening a diffusion run converges at second order") {
    auto run = [](int n) {
        const SimGrid u0 = sample_grid(0, 2 * kPi, n, [](double x) {
            return Cx(std::sin(x), 0);
        });
        const Trajectory t = rk4_integrate(
            u0, [](const SimGrid& g) { return het_fine_rhs(g, 0.0, 1.0); },
            5e-5, 0.01, 1 << 30);
        return std::make_pair(u0, t);
    };
    const auto [g512, t512] = run(512);
    const auto [g64, t64] = run(64);
    const auto [g128, t128] = run(128);

    const double e64 = compare_runs(g512, t512, g64, t64).worst_rel_l2;
    const double e128 = compare_runs(g512, t512, g128, t128).worst_rel_l2;
    CHECK(e64 > 1e-7);
    const double ratio = e64 / e128;
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
}

TEST_CASE("stencil binding turns the certified closure into numbers") {
    const auto res = construct(PdeFamily::diffusion(), Orders{3, 1, 1});
    const NumericStencil st = bind_stencil(res.evolution, 0.5, 0.0, 1.0, 0.25);

    // gamma^2/H^2 [ (1-theta^2) mu^2 delta^2 + theta^2 delta^2 ] at
    // theta = 1/2, H = 1/4.
    REQUIRE(st.taps.size() == 5);
    CHECK(st.taps.at(2) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(st.taps.at(-2) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(st.taps.at(1) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(st.taps.at(-1) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(st.taps.at(0) == doctest::Approx(-14.0).epsilon(1e-14));
    CHECK(st.width() == 5);

    double tap_sum = 0;
    for (const auto& [s, w] : st.taps) tap_sum += w;
    CHECK(std::abs(tap_sum) <= 1e-12);

    CHECK(stencil_symbol(st, 0.25, 2.0) ==
          doctest::Approx(-14 + 8 * std::cos(0.5) + 6 * std::cos(1.0)));
    // Certified through the two-neighbour row: the response tracks -K^2.
    CHECK(std::abs(stencil_symbol(st, 0.25, 0.2) + 0.04) <= 2e-4);

    NumericStencil empty;
    CHECK(empty.width() == 0);
}

TEST_CASE("bound closures advance a coarse field") {
    const auto res = construct(PdeFamily::diffusion(), Orders{3, 1, 1});
    const NumericStencil st = bind_stencil(res.evolution, 0.0, 0.0, 1.0, 1.0);

    SimGrid tiny = sample_grid(0, 4, 4, [](double x) { return Cx(x, 0); });
    CHECK_THROWS_AS(het_holistic_rhs(tiny, st), StencilWiderThanGrid);

    const int n = 32;
    const double q = 2 * kPi / n; // one full wave across n unit elements
    SimGrid U = mode_grid(0, double(n), n, q);
    const CxField out = het_holistic_rhs(U, st);
    const double sym = stencil_symbol(st, 1.0, q);
    for (int j = 0; j < n; ++j)
        CHECK(std::abs(out[j] - sym * U.values[j]) <= 1e-12);
}

TEST_CASE("microcell eigenvalue reproduces the two-scale decay rates") {
    // kappa = 1/(1 + a cos(k x)) homogenises to harmonic mean 1.
    const double a = 0.5, k = 16;
    const double target1 = -1.0 + a * a / (2 * k * k) + 2 * a * a / std::pow(k, 4);
    CHECK(bloch_rate(a, k, 0.0, 1.0, 32) ==
          doctest::Approx(target1).epsilon(2e-4));

    // Rates are independent of the microstructure phase.
    CHECK(bloch_rate(a, k, 0.37, 1.0, 32) ==
          doctest::Approx(bloch_rate(a, k, 0.0, 1.0, 32)).epsilon(1e-10));

    // Uniform diffusivity recovers the exact cell symbol.
    const double d = 2 * kPi / k, h = d / 16;
    const double exact = -(2 - 2 * std::cos(h)) / (h * h);
    CHECK(bloch_rate(0.0, k, 0.0, 1.0, 16) ==
          doctest::Approx(exact).epsilon(1e-12));

    CHECK_THROWS_AS(bloch_rate(a, k, 0.0, 1.0, 2), DomainError);
    CHECK_THROWS_AS(bloch_rate(1.0, k, 0.0, 1.0, 16), DomainError);
}

TEST_CASE("dispersion measure dispatches between cell and fitted rates") {
    const double a = 0.5, k = 16;
    RunConfig cfg;
    cfg.solver = "het_fine";
    cfg.a = a;
    cfg.k = k;

    SimGrid grid = sample_grid(0, 2 * kPi, 512, [](double) { return Cx(1); });
    const double cell = dispersion_measure(cfg, grid, 1.0);
    CHECK(cell == doctest::Approx(bloch_rate(a, k, 0.0, 1.0, 32)).epsilon(1e-14));

    // Plain diffusion takes the run-and-fit path; the fitted rate is the
    // discrete symbol up to time-integration error.
    RunConfig plain = cfg;
    plain.a = 0;
    SimGrid small = sample_grid(0, 2 * kPi, 256, [](double) { return Cx(1); });
    const double fitted = dispersion_measure(plain, small, 2.0);
    const double h = small.h();
    const double sym = -(2 - 2 * std::cos(2 * h)) / (h * h);
    CHECK(fitted == doctest::Approx(sym).epsilon(1e-6));

    // The fitted microstructure rate agrees with the cell eigenvalue.
    const double fit_het = [&] {
        SimGrid run = mode_grid(0, 2 * kPi, 512, 1.0);
        const Trajectory t = rk4_integrate(
            run, [&](const SimGrid& g) { return het_fine_rhs(g, a, k); },
            0.25 * run.h() * run.h(), 0.5, 1 << 30);
        auto amp = [&](const CxField& f) {
            Cx acc = 0;
            for (int i = 0; i < run.n(); ++i)
                acc += f[i] * std::polar(1.0, -run.x(i));
            return std::abs(acc) / run.n();
        };
        return std::log(amp(t.snapshots.back()) / amp(t.snapshots.front())) /
               t.times.back();
    }();
    CHECK(fit_het == doctest::Approx(cell).epsilon(0.01));

    CHECK_THROWS_AS(dispersion_measure(cfg, grid, 1.5), DomainError);
    RunConfig odd = cfg;
    odd.solver = "nls_fine";
    CHECK_THROWS_AS(dispersion_measure(odd, grid, 1.0), ConfigError);
}

TEST_CASE("stability guard enforces the per-solver step bounds") {
    const SimGrid g = sample_grid(-kPi, kPi, 64, [](double) { return Cx(1); });
    const double h = g.h();

    RunConfig cfg;
    cfg.solver = "nls_fine";
    cfg.dt = std::sqrt(2.0) * h * h * 0.99;
    CHECK_NOTHROW(check_stability(cfg, g));
    cfg.dt = std::sqrt(2.0) * h * h * 1.01;
    CHECK_THROWS_AS(check_stability(cfg, g), DomainError);

    cfg.solver = "nls_holistic";
    cfg.dt = 4 * h * h * 0.99;
    CHECK_NOTHROW(check_stability(cfg, g));
    cfg.dt = 4 * h * h * 1.01;
    CHECK_THROWS_AS(check_stability(cfg, g), DomainError);

    cfg.solver = "het_fine";
    cfg.a = 0.5;
    cfg.dt = 0.25 * h * h * 0.99; // max kappa = 2
    CHECK_NOTHROW(check_stability(cfg, g));
    cfg.dt = 0.25 * h * h * 1.01;
    CHECK_THROWS_AS(check_stability(cfg, g), DomainError);
    cfg.a = 1.0;
    cfg.dt = 1e-9;
    CHECK_THROWS_AS(check_stability(cfg, g), DomainError);

    cfg.solver = "het_holistic";
    cfg.a = 0.5;
    cfg.dt = 0.25 * h * h * 0.99;
    CHECK_NOTHROW(check_stability(cfg, g));

    cfg.solver = "implicit_euler";
    CHECK_THROWS_AS(check_stability(cfg, g), ConfigError);
}

TEST_CASE("trajectory export writes one labelled row per component") {
    const SimGrid b = breather_state(4);
    auto zero_rhs = [](const SimGrid& g) {
        return CxField(g.values.size(), Cx(0));
    };
    const Trajectory t = rk4_integrate(b, zero_rhs, 0.5, 1.0);
    REQUIRE(t.times.size() == 3);

    std::ostringstream os;
    write_trajectory_csv(os, b, t);
    const std::string text = os.str();

    CHECK(text.rfind("t,part,x_", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 7);
    CHECK(text.find(",re,") != std::string::npos);
    CHECK(text.find(",im,") != std::string::npos);

    const SimGrid r = sample_grid(0, 1, 4, [](double x) { return Cx(x, 0); });
    const Trajectory tr = rk4_integrate(r, zero_rhs, 0.5, 1.0);
    std::ostringstream ros;
    write_trajectory_csv(ros, r, tr);
    const std::string rtext = ros.str();
    CHECK(std::count(rtext.begin(), rtext.end(), '\n') == 4);
    CHECK(rtext.find(",im,") == std::string::npos);
}

TEST_SUITE_END();
