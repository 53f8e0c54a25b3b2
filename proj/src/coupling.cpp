#include "holo/coupling.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "holo/errors.hpp"

namespace holo {

namespace {

// Dense polynomials in xi over [0,1], constant term first.
using Poly = std::vector<Rat>;

Rat eval(const Poly& p, const Rat& x) {
    Rat v;
    for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * x + *it;
    return v;
}

Rat eval0(const Poly& p) { return p.empty() ? Rat(0) : p.front(); }

Rat eval1(const Poly& p) {
    Rat v;
    for (const Rat& c : p) v += c;
    return v;
}

Poly deriv(const Poly& p) {
    Poly d;
    for (size_t m = 1; m < p.size(); ++m) d.push_back(Rat(long(m)) * p[m]);
    return d;
}

Poly mul(const Poly& p, const Poly& q) {
    if (p.empty() || q.empty()) return {};
    Poly r(p.size() + q.size() - 1);
    for (size_t i = 0; i < p.size(); ++i)
        for (size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
    return r;
}

Rat integrate01(const Poly& p) {
    Rat v;
    for (size_t m = 0; m < p.size(); ++m) v += p[m] / Rat(long(m + 1));
    return v;
}

// Derivative of u at the edges; zero for constant trial fields.
Rat dedge0(const Poly& u) { return u.size() > 1 ? u[1] : Rat(0); }

Rat dedge1(const Poly& u) {
    Rat v;
    for (size_t m = 1; m < u.size(); ++m) v += Rat(long(m)) * u[m];
    return v;
}

void require_fields(const ElementEnsemble& ens) {
    if (int(ens.fields.size()) != ens.N)
        throw DomainError("ensemble carries no trial fields");
}

void require_shape(const ElementEnsemble& ens) {
    if (ens.N < 2) throw DomainError("need at least two elements");
    if (ens.degree < 1) throw DomainError("trial degree must be at least 1");
    if (int(ens.kappa.size()) != ens.N)
        throw DomainError("one diffusivity per element required");
    if (ens.H.sign() <= 0) throw DomainError("element width must be positive");
}

// The four edge weights of the coupling rows.
struct Weights {
    Rat ap, bp, am, bm;
};

Weights weights(const Rat& gamma, const Rat& theta) {
    Rat half(1, 2);
    Rat bp = half * gamma * (Rat(1) + theta);
    Rat bm = half * gamma * (Rat(1) - theta);
    return {Rat(1) - bp, bp, Rat(1) - bm, bm};
}

// Fraction-free echelon reduction; rows are first scaled to integers so
// every interior division in the Bareiss update is exact.
struct Echelon {
    RatMatrix rows;
    std::vector<int> pivot_cols;
};

Echelon echelon(RatMatrix a) {
    for (auto& row : a) {
        mpz_class l(1);
        for (const Rat& r : row)
            mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), r.raw().get_den().get_mpz_t());
        if (l != 1) {
            Rat scale{mpq_class(l)};
            for (Rat& r : row) r *= scale;
        }
    }
    const int m = int(a.size());
    const int n = m ? int(a[0].size()) : 0;
    std::vector<int> pivots;
    Rat prev(1);
    int pr = 0;
    for (int pc = 0; pc < n && pr < m; ++pc) {
        int hit = -1;
        for (int i = pr; i < m; ++i)
            if (!a[i][pc].is_zero()) { hit = i; break; }
        if (hit < 0) continue;
        std::swap(a[pr], a[hit]);
        for (int i = pr + 1; i < m; ++i) {
            for (int c = pc + 1; c < n; ++c)
                a[i][c] = (a[pr][pc] * a[i][c] - a[i][pc] * a[pr][c]) / prev;
            a[i][pc] = Rat(0);
        }
        prev = a[pr][pc];
        pivots.push_back(pc);
        ++pr;
    }
    return {std::move(a), std::move(pivots)};
}

std::vector<std::vector<Rat>> nullspace(const RatMatrix& a, int n) {
    Echelon e = echelon(a);
    const int rank = int(e.pivot_cols.size());
    std::vector<bool> is_pivot(n, false);
    for (int c : e.pivot_cols) is_pivot[c] = true;
    std::vector<std::vector<Rat>> basis;
    for (int f = 0; f < n; ++f) {
        if (is_pivot[f]) continue;
        std::vector<Rat> v(n);
        v[f] = Rat(1);
        for (int k = rank - 1; k >= 0; --k) {
            const int pc = e.pivot_cols[k];
            Rat s;
            for (int c = pc + 1; c < n; ++c)
                if (!v[c].is_zero()) s += e.rows[k][c] * v[c];
            v[pc] = -s / e.rows[k][pc];
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

// Rows of the edge conditions as linear functionals on the concatenated
// field coefficients, element values first then fluxes.
RatMatrix constraint_matrix(const ElementEnsemble& ens, const Rat& gamma,
                            const Rat& theta) {
    const int N = ens.N, D = ens.degree;
    const int n = N * (D + 1);
    const Weights w = weights(gamma, theta);
    RatMatrix a(2 * N, std::vector<Rat>(n));
    auto col = [&](int j, int m) { return ((j % N + N) % N) * (D + 1) + m; };
    for (int j = 0; j < N; ++j) {
        for (int m = 0; m <= D; ++m) {
            a[j][col(j, m)] += w.ap;
            a[j][col(j - 1, m)] += w.bp;
        }
        a[j][col(j, 0)] -= w.am;
        a[j][col(j + 1, 0)] -= w.bm;
    }
    for (int j = 0; j < N; ++j) {
        const int row = N + j;
        const Rat kj1 = eval1(ens.kappa[j]) / ens.H;
        const Rat kjm1 = eval1(ens.kappa[(j + N - 1) % N]) / ens.H;
        for (int m = 1; m <= D; ++m) {
            a[row][col(j, m)] -= w.am * kj1 * Rat(m);
            a[row][col(j - 1, m)] -= w.bm * kjm1 * Rat(m);
        }
        a[row][col(j, 1)] += w.ap * eval0(ens.kappa[j]) / ens.H;
        a[row][col(j + 1, 1)] += w.bp * eval0(ens.kappa[(j + 1) % N]) / ens.H;
    }
    return a;
}

void check_positive(const ElementEnsemble& ens) {
    for (int j = 0; j < ens.N; ++j)
        for (int k = 0; k <= 32; ++k)
            if (eval(ens.kappa[j], Rat(k, 32)).sign() <= 0)
                throw DomainError("diffusivity must be positive on [0,1]");
}

} // namespace

CouplingMatrices build_coupling(int N, const Rat& gamma, const Rat& theta) {
    if (N < 2) throw DomainError("coupling needs at least two elements");
    CouplingMatrices cm;
    cm.N = N;
    cm.gamma = gamma;
    cm.theta = theta;
    const Weights w = weights(gamma, theta);
    auto circ = [N](const Rat& diag, const Rat& sub) {
        RatMatrix c(N, std::vector<Rat>(N));
        for (int i = 0; i < N; ++i) {
            c[i][i] = diag;
            c[i][(i + N - 1) % N] = sub;
        }
        return c;
    };
    cm.C_plus = circ(w.ap, w.bp);
    cm.C_minus = circ(w.am, w.bm);
    const Rat sgn = (N % 2 == 0) ? Rat(1) : Rat(-1);
    cm.det_plus = w.ap.pow(N) - sgn * w.bp.pow(N);
    cm.det_minus = w.am.pow(N) - sgn * w.bm.pow(N);
    return cm;
}

CirculantEigs circulant_eigs_V(int N, const Rat& theta) {
    if (N < 2) throw DomainError("coupling needs at least two elements");
    CirculantEigs out;
    const double td = theta.to_double();
    for (int k = 0; k < N; ++k) {
        const double ang = -2.0 * M_PI * double(k) * double(N - 1) / double(N);
        out.values.emplace_back(0.5 * (1.0 - td) + 0.5 * (1.0 + td) * std::cos(ang),
                                0.5 * (1.0 + td) * std::sin(ang));
    }
    out.zero_index = (N % 2 == 0 && theta.is_zero()) ? N / 2 : -1;
    return out;
}

ElementEnsemble make_ensemble(int N, int degree, const Rat& H, unsigned seed) {
    ElementEnsemble ens;
    ens.N = N;
    ens.degree = degree;
    ens.H = H;
    std::mt19937 gen(seed);
    auto half = [&gen] { return Rat(long(gen() % 11) - 5, 10); };
    for (int j = 0; j < N; ++j) {
        const Rat r = half(), s = half();
        ens.kappa.push_back({Rat(1), r + s, -r});
    }
    require_shape(ens);
    return ens;
}

std::vector<Rat> edge_residuals(const ElementEnsemble& ens, const Rat& gamma,
                                const Rat& theta) {
    require_shape(ens);
    require_fields(ens);
    const int N = ens.N;
    const Weights w = weights(gamma, theta);
    auto flux0 = [&](int j) {
        return -eval0(ens.kappa[j]) * dedge0(ens.fields[j]) / ens.H;
    };
    auto flux1 = [&](int j) {
        return -eval1(ens.kappa[j]) * dedge1(ens.fields[j]) / ens.H;
    };
    std::vector<Rat> res(2 * N);
    for (int j = 0; j < N; ++j) {
        const int jm = (j + N - 1) % N, jp = (j + 1) % N;
        res[j] = w.ap * eval1(ens.fields[j]) + w.bp * eval1(ens.fields[jm]) -
                 w.am * eval0(ens.fields[j]) - w.bm * eval0(ens.fields[jp]);
        res[N + j] = w.am * flux1(j) + w.bm * flux1(jm) - w.ap * flux0(j) -
                     w.bp * flux0(jp);
    }
    return res;
}

std::vector<std::vector<Rat>> edge_nullspace(const ElementEnsemble& ens,
                                             const Rat& gamma,
                                             const Rat& theta) {
    require_shape(ens);
    return nullspace(constraint_matrix(ens, gamma, theta),
                     ens.N * (ens.degree + 1));
}

Rat bilinear_defect(const ElementEnsemble& ens,
                    const std::vector<std::vector<Rat>>& u,
                    const std::vector<std::vector<Rat>>& ut) {
    require_shape(ens);
    if (int(u.size()) != ens.N || int(ut.size()) != ens.N)
        throw DomainError("one trial field per element required");
    Rat total;
    for (int j = 0; j < ens.N; ++j) {
        const Poly lu = deriv(mul(ens.kappa[j], deriv(u[j])));
        const Poly lut = deriv(mul(ens.kappa[j], deriv(ut[j])));
        total += integrate01(mul(ut[j], lu)) - integrate01(mul(u[j], lut));
    }
    return total / ens.H;
}

std::string SelfAdjointReport::str() const {
    std::ostringstream os;
    os << "max defect " << max_defect.str() << " over " << trials
       << " trials, admissible dim " << nullspace_dim;
    if (exceptional) os << ", zigzag case";
    return os.str();
}

SelfAdjointReport self_adjointness_defect(const ElementEnsemble& ens,
                                          const Rat& gamma, const Rat& theta,
                                          int trials, unsigned seed) {
    require_shape(ens);
    check_positive(ens);
    if (trials < 1) throw DomainError("need at least one trial");
    SelfAdjointReport rep;
    rep.exceptional =
        ens.N % 2 == 0 && gamma == Rat(1) && theta.is_zero();
    const auto basis = edge_nullspace(ens, gamma, theta);
    rep.nullspace_dim = int(basis.size());
    if (rep.nullspace_dim < 2)
        throw DegenerateConstraints("admissible space too small to draw pairs");
    rep.trials = trials;
    const int n = ens.N * (ens.degree + 1);
    std::mt19937 gen(seed);
    auto draw = [&] {
        std::vector<std::vector<Rat>> fields(ens.N,
                                             std::vector<Rat>(ens.degree + 1));
        for (;;) {
            bool live = false;
            std::vector<Rat> v(n);
            for (const auto& b : basis) {
                const long c = long(gen() % 19) - 9;
                if (c == 0) continue;
                live = true;
                for (int i = 0; i < n; ++i) v[i] += Rat(c) * b[i];
            }
            if (!live) continue;
            for (int j = 0; j < ens.N; ++j)
                for (int m = 0; m <= ens.degree; ++m)
                    fields[j][m] = v[j * (ens.degree + 1) + m];
            return fields;
        }
    };
    for (int t = 0; t < trials; ++t) {
        const auto u = draw();
        const auto ut = draw();
        const Rat d = abs(bilinear_defect(ens, u, ut));
        if (d > rep.max_defect) rep.max_defect = d;
    }
    return rep;
}

std::string SpectralReport::str() const {
    std::ostringstream os;
    os << zero_count << " near-zero modes, gap " << gap << " vs bound "
       << -beta * (1.0 - eps_disc) << (dichotomy ? ", dichotomy" : ", no dichotomy");
    return os.str();
}

SpectralReport spectral_dichotomy(int N, double H,
                                  const std::function<double(double)>& kappa,
                                  int M, double tol) {
    if (N < 1) throw DomainError("need at least one element");
    if (M < 4) throw DomainError("need at least four subgrid nodes");
    if (!(H > 0)) throw DomainError("element width must be positive");
    SpectralReport rep;
    rep.eps_disc = 10.0 / (double(M) * double(M));
    const double h = H / double(M);
    double kmin = kappa(0.0);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < 8 * M; ++i)
            kmin = std::min(kmin, kappa(j * H + i * H / (8.0 * M)));
    if (!(kmin > 0)) throw DomainError("diffusivity must stay positive");
    rep.beta = 4.0 * M_PI * M_PI * kmin / (H * H);
    for (int j = 0; j < N; ++j) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(M, M);
        for (int i = 0; i < M; ++i) {
            const int ip = (i + 1) % M;
            const double w = kappa(j * H + (i + 0.5) * h) / (h * h);
            A(i, i) -= w;
            A(ip, ip) -= w;
            A(i, ip) += w;
            A(ip, i) += w;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A,
                                                          Eigen::EigenvaluesOnly);
        for (int i = 0; i < M; ++i) rep.eigenvalues.push_back(es.eigenvalues()[i]);
    }
    std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end());
    double amax = 0;
    for (double ev : rep.eigenvalues) amax = std::max(amax, std::fabs(ev));
    const double cut = tol * amax;
    bool below = true;
    rep.gap = -amax;
    for (double ev : rep.eigenvalues) {
        if (std::fabs(ev) < cut) {
            ++rep.zero_count;
        } else {
            rep.gap = std::max(rep.gap, ev);
            if (!(ev <= -rep.beta * (1.0 - rep.eps_disc))) below = false;
        }
    }
    rep.dichotomy = rep.zero_count == N && below;
    return rep;
}

} // namespace holo
