#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "certilasso/linalg.hpp"
#include "certilasso/rational.hpp"

namespace certilasso {

// ---------------------------------------------------------------------------
// Counter-based RNG: value(i) depends only on (seed, i), so trials can run in
// any order and still reproduce byte-identical sweeps.
// ---------------------------------------------------------------------------

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t at(std::uint64_t counter) const { return mix64(seed_ ^ mix64(counter)); }

    double uniform01(std::uint64_t counter) const {
        return static_cast<double>(at(counter) >> 11) * 0x1.0p-53;
    }

    // derive an independent stream
    CounterRng fork(std::uint64_t stream) const { return CounterRng(mix64(seed_ ^ mix64(~stream))); }

  private:
    std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// FISTA with soft thresholding for min ||Ax-y||^2 + lambda ||x||_1.
// Scalar is double or mpf_class (escalated working precision).
// ---------------------------------------------------------------------------

struct FloatSolveConfig {
    int working_precision_bits = 53;
    long max_iters = 20000;
    double objective_tolerance = 1e-9;  // window stagnation cut-off
    double threshold = 1e-2;            // |x_i| below this is treated as zero
};

inline void validate(const FloatSolveConfig& cfg) {
    if (cfg.threshold <= 0) throw ContractError("threshold must be positive");
    if (cfg.max_iters < 1) throw ContractError("max_iters must be >= 1");
    if (cfg.working_precision_bits < 24) throw ContractError("working precision too small");
}

namespace detail {

template <class S>
S soft_threshold(const S& v, const S& t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return S(0);
}

template <class S>
bool finite_scalar(const S& v) {
    if constexpr (std::is_same_v<S, double>) {
        return std::isfinite(v);
    } else {
        (void)v;
        return true;  // mpf has no non-finite values
    }
}

// Largest eigenvalue of 2 A^T A by power iteration; deterministic start. The
// iterate is kept at unit 2-norm, so ||A^T A v|| is the eigenvalue estimate.
template <class S>
S lipschitz_estimate(const std::vector<std::vector<S>>& A, std::size_t m, std::size_t N) {
    std::vector<S> v(N, S(1));
    {
        using std::sqrt;
        S nv = sqrt(S(static_cast<double>(N)));
        for (std::size_t j = 0; j < N; ++j) v[j] = S(v[j] / nv);
    }
    S lam(0);
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<S> Av(m, S(0));
        for (std::size_t i = 0; i < m; ++i) {
            S acc(0);
            for (std::size_t j = 0; j < N; ++j) acc += A[i][j] * v[j];
            Av[i] = acc;
        }
        std::vector<S> w(N, S(0));
        for (std::size_t j = 0; j < N; ++j) {
            S acc(0);
            for (std::size_t i = 0; i < m; ++i) acc += A[i][j] * Av[i];
            w[j] = acc;
        }
        S nw(0);
        for (std::size_t j = 0; j < N; ++j) nw += w[j] * w[j];
        using std::sqrt;
        nw = S(sqrt(nw));
        if (nw == S(0)) return S(0);
        lam = nw;
        for (std::size_t j = 0; j < N; ++j) v[j] = S(w[j] / nw);
    }
    S two(2);
    return S(two * lam);
}

template <class S>
struct FistaOutcome {
    std::vector<S> x;
    S objective;
    long iterations = 0;
    bool finite = true;
};

template <class S>
S lasso_objective(const std::vector<std::vector<S>>& A, const std::vector<S>& y, const S& lambda,
                  const std::vector<S>& x) {
    const std::size_t m = y.size(), N = x.size();
    S obj(0);
    for (std::size_t i = 0; i < m; ++i) {
        S r(0);
        for (std::size_t j = 0; j < N; ++j) r += A[i][j] * x[j];
        r -= y[i];
        obj += r * r;
    }
    for (std::size_t j = 0; j < N; ++j) {
        S a = x[j];
        if (a < S(0)) a = S(-a);
        obj += lambda * a;
    }
    return obj;
}

template <class S>
FistaOutcome<S> fista(const std::vector<std::vector<S>>& A, const std::vector<S>& y,
                      const S& lambda, long max_iters, double tol) {
    const std::size_t m = y.size();
    const std::size_t N = m == 0 ? 0 : A[0].size();
    FistaOutcome<S> out;
    out.x.assign(N, S(0));
    S L = lipschitz_estimate(A, m, N);
    L = L + L / S(64) + S(1) / S(1000000000);  // headroom over the estimate
    if (L <= S(0)) {  // zero matrix: x = 0 is optimal
        out.objective = lasso_objective(A, y, lambda, out.x);
        return out;
    }
    std::vector<S> xk(N, S(0)), z(N, S(0));
    S t(1);
    std::vector<S> best = xk;
    S best_obj = lasso_objective(A, y, lambda, xk);
    S last_window_best = best_obj;
    const S prox_step = S(lambda / L);
    for (long k = 1; k <= max_iters; ++k) {
        // gradient of ||Az - y||^2 at z is 2 A^T (Az - y)
        std::vector<S> r(m, S(0));
        for (std::size_t i = 0; i < m; ++i) {
            S acc(0);
            for (std::size_t j = 0; j < N; ++j) acc += A[i][j] * z[j];
            r[i] = S(acc - y[i]);
        }
        std::vector<S> g(N, S(0));
        for (std::size_t j = 0; j < N; ++j) {
            S acc(0);
            for (std::size_t i = 0; i < m; ++i) acc += A[i][j] * r[i];
            g[j] = S(S(2) * acc);
        }
        std::vector<S> xnext(N);
        for (std::size_t j = 0; j < N; ++j) {
            S step = S(z[j] - g[j] / L);
            xnext[j] = soft_threshold(step, prox_step);
        }
        using std::sqrt;
        S inner = S(S(1) + S(4) * t * t);
        S tnext = S((S(1) + S(sqrt(inner))) / S(2));
        S momentum = S((t - S(1)) / tnext);
        for (std::size_t j = 0; j < N; ++j)
            z[j] = S(xnext[j] + momentum * (xnext[j] - xk[j]));
        xk = xnext;
        t = tnext;
        S obj = lasso_objective(A, y, lambda, xk);
        if (!finite_scalar(obj)) {
            out.finite = false;
            out.iterations = k;
            break;
        }
        if (obj < best_obj) {
            best_obj = obj;
            best = xk;
        }
        out.iterations = k;
        if (k % 50 == 0) {
            S gap = S(last_window_best - best_obj);
            S scale = best_obj;
            if (scale < S(0)) scale = S(-scale);
            if (scale < S(1)) scale = S(1);
            if (gap <= S(S(tol) * scale)) break;
            last_window_best = best_obj;
        }
    }
    out.x = best;
    out.objective = best_obj;
    return out;
}

}  // namespace detail

struct FloatLassoResult {
    DVector x;
    double objective = 0;
    long iterations = 0;
    bool finite = true;  // false signals precision escalation
};

inline FloatLassoResult float_lasso(const DVector& y, const DMatrix& A, double lambda,
                                    const FloatSolveConfig& cfg) {
    validate(cfg);
    const std::size_t m = y.size(), N = A.cols();
    if (A.rows() != m) throw ContractError("float_lasso dimension mismatch");
    std::vector<std::vector<double>> Ad(m, std::vector<double>(N));
    std::vector<double> yd(m);
    for (std::size_t i = 0; i < m; ++i) {
        yd[i] = y[i];
        for (std::size_t j = 0; j < N; ++j) Ad[i][j] = A(i, j);
    }
    auto out = detail::fista<double>(Ad, yd, lambda, cfg.max_iters, cfg.objective_tolerance);
    FloatLassoResult r;
    r.x = DVector(N);
    for (std::size_t j = 0; j < N; ++j) r.x[j] = out.x[j];
    r.objective = out.objective;
    r.iterations = out.iterations;
    r.finite = out.finite;
    return r;
}

// Escalated-precision path: same algorithm on GMP floats at
// cfg.working_precision_bits. Returns dyadic-exact rationals of the iterate.
inline RVector float_lasso_escalated(const RVector& y, const RMatrix& A, const Rational& lambda,
                                     const FloatSolveConfig& cfg) {
    validate(cfg);
    const std::size_t m = y.size(), N = A.cols();
    mpf_set_default_prec(static_cast<unsigned long>(cfg.working_precision_bits));
    std::vector<std::vector<mpf_class>> Af(m, std::vector<mpf_class>(N));
    std::vector<mpf_class> yf(m);
    for (std::size_t i = 0; i < m; ++i) {
        yf[i] = mpf_class(y[i]);
        for (std::size_t j = 0; j < N; ++j) Af[i][j] = mpf_class(A(i, j));
    }
    mpf_class lf(lambda);
    auto out = detail::fista<mpf_class>(Af, yf, lf, cfg.max_iters, cfg.objective_tolerance);
    RVector r(N);
    for (std::size_t j = 0; j < N; ++j) {
        Rational q;
        mpq_set_f(q.get_mpq_t(), out.x[j].get_mpf_t());
        r[j] = q;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Threshold-then-support: the float pipeline under test. Entries strictly
// smaller in magnitude than the threshold are zeroed.
// ---------------------------------------------------------------------------

inline std::vector<int> threshold_support(const DVector& x, double threshold) {
    std::vector<int> s;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (std::abs(x[i]) >= threshold) s.push_back(static_cast<int>(i));
    return s;
}

inline std::vector<int> threshold_support(const RVector& x, const Rational& threshold) {
    std::vector<int> s;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (abs_r(x[i]) >= threshold) s.push_back(static_cast<int>(i));
    return s;
}

// ---------------------------------------------------------------------------
// Failure sweeps. Single-measurement instances (m = 1, b = 1) where the exact
// answer is available in closed form: the optimal support is the argmax
// column by magnitude unless lambda kills it entirely.
// ---------------------------------------------------------------------------

enum class SweepFamily { deterministic_epsilon, uniform, exponential, normal };

inline const char* family_name(SweepFamily f) {
    switch (f) {
        case SweepFamily::deterministic_epsilon: return "deterministic-epsilon";
        case SweepFamily::uniform: return "uniform";
        case SweepFamily::exponential: return "exponential";
        case SweepFamily::normal: return "normal";
    }
    return "?";
}

inline SweepFamily family_from_name(const std::string& s) {
    if (s == "deterministic-epsilon") return SweepFamily::deterministic_epsilon;
    if (s == "uniform") return SweepFamily::uniform;
    if (s == "exponential") return SweepFamily::exponential;
    if (s == "normal") return SweepFamily::normal;
    throw ParseError("unknown sweep family: " + s);
}

struct SweepOptions {
    std::size_t n_min = 10;
    std::size_t n_max = 500;
    std::size_t n_step = 10;
    long solver_iters = 1200;
    double solver_tol = 1e-13;
    Rational lambda = make_rational(1, 100);  // random families
};

struct SweepRow {
    std::string param;  // epsilon or N
    double threshold;
    long trials;
    long successes;
    double success_rate;
};

// Exact optimal support for m = 1, b = 1: {argmax |u_j|} when lambda < 2*u_max,
// empty otherwise. Returns nullopt when the argmax ties (ill-posed instance).
inline std::optional<std::vector<int>> single_measurement_support(const RVector& u,
                                                                  const Rational& lambda) {
    std::size_t best = 0;
    Rational best_abs = abs_r(u[0]);
    bool tie = false;
    for (std::size_t j = 1; j < u.size(); ++j) {
        Rational a = abs_r(u[j]);
        if (a > best_abs) {
            best_abs = a;
            best = j;
            tie = false;
        } else if (a == best_abs) {
            tie = true;
        }
    }
    if (best_abs == 0) return std::vector<int>{};  // A = 0: unique solution 0
    if (lambda >= 2 * best_abs) return std::vector<int>{};
    if (tie) return std::nullopt;
    return std::vector<int>{static_cast<int>(best)};
}

namespace detail {

inline double sample_entry(SweepFamily fam, const CounterRng& rng, std::uint64_t base,
                           std::size_t j) {
    double u = rng.uniform01(base + 2 * j);
    double v = rng.uniform01(base + 2 * j + 1);
    switch (fam) {
        case SweepFamily::uniform:
            return u;
        case SweepFamily::exponential:
            return -std::log(1.0 - u);
        case SweepFamily::normal: {
            double r = std::sqrt(-2.0 * std::log(1.0 - u));
            return 1.0 + 0.01 * (r * std::cos(2.0 * 3.14159265358979323846 * v));
        }
        default:
            throw ContractError("deterministic family has no sampler");
    }
}

}  // namespace detail

inline std::vector<SweepRow> failure_sweep(SweepFamily fam, const std::vector<double>& thresholds,
                                           long trials, std::uint64_t seed,
                                           const SweepOptions& opts = {}) {
    std::vector<SweepRow> rows;
    if (trials <= 0) return rows;
    CounterRng rng(seed);
    if (fam == SweepFamily::deterministic_epsilon) {
        const Rational lambda = make_rational(1, 10);
        for (int k = 1; k <= 6; ++k) {
            Rational eps = make_rational(1, 1);
            for (int i = 0; i < k; ++i) eps /= 10;
            DVector y(1);
            y[0] = 1.0;
            DMatrix A(1, 2);
            A(0, 0) = 1.0 - mpq_get_d(eps.get_mpq_t());
            A(0, 1) = 1.0;
            FloatSolveConfig cfg;
            cfg.max_iters = 20000;
            auto sol = float_lasso(y, A, mpq_get_d(lambda.get_mpq_t()), cfg);
            for (double thr : thresholds) {
                auto supp = threshold_support(sol.x, thr);
                bool ok = (supp == std::vector<int>{1});  // exact support of this family
                SweepRow row;
                row.param = "1e-" + std::to_string(k);
                row.threshold = thr;
                row.trials = trials;
                row.successes = ok ? trials : 0;
                row.success_rate = ok ? 1.0 : 0.0;
                rows.push_back(row);
            }
        }
        return rows;
    }
    for (std::size_t N = opts.n_min; N <= opts.n_max; N += opts.n_step) {
        for (double thr : thresholds) {
            long successes = 0;
            for (long t = 0; t < trials; ++t) {
                CounterRng stream = rng.fork(mix64(static_cast<std::uint64_t>(fam) * 0x10001ULL +
                                                   N * 0x100000001ULL + static_cast<std::uint64_t>(t)));
                DMatrix A(1, N);
                RVector u(N);
                for (std::size_t j = 0; j < N; ++j) {
                    double e = detail::sample_entry(fam, stream, 0, j);
                    A(0, j) = e;
                    Rational q;
                    mpq_set_d(q.get_mpq_t(), e);
                    u[j] = q;
                }
                auto truth = single_measurement_support(u, opts.lambda);
                if (!truth.has_value()) continue;  // argmax tie: skip as unlabelable
                DVector y(1);
                y[0] = 1.0;
                FloatSolveConfig cfg;
                cfg.max_iters = opts.solver_iters;
                cfg.objective_tolerance = opts.solver_tol;
                auto sol = float_lasso(y, A, mpq_get_d(opts.lambda.get_mpq_t()), cfg);
                auto supp = threshold_support(sol.x, thr);
                if (supp == *truth) ++successes;
            }
            SweepRow row;
            row.param = std::to_string(N);
            row.threshold = thr;
            row.trials = trials;
            row.successes = successes;
            row.success_rate = static_cast<double>(successes) / static_cast<double>(trials);
            rows.push_back(row);
        }
    }
    return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "param,threshold,trials,successes,success_rate\n";
    for (const auto& r : rows) {
        std::ostringstream t;
        t << std::setprecision(17) << r.threshold;
        std::ostringstream s;
        s << std::setprecision(17) << r.success_rate;
        os << r.param << "," << t.str() << "," << r.trials << "," << r.successes << ","
           << s.str() << "\n";
    }
}

}  // namespace certilasso
