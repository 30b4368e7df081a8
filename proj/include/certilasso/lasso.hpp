#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <variant>
#include <vector>

#include "certilasso/baseline.hpp"
#include "certilasso/linalg.hpp"
#include "certilasso/rational.hpp"

namespace certilasso {

// ---------------------------------------------------------------------------
// KKT certificates. A vector x minimises ||Ax-y||^2 + lambda||x||_1 iff
//   2 A_S^T (Ax - y) = -lambda * sign(x_S)      (exactly), and
//   ||A_{S^c}^T (Ax - y)||_inf <= lambda / 2
// with S = supp(x). Both conditions are checked with exact arithmetic; a
// certificate is proof of optimality, not evidence.
// ---------------------------------------------------------------------------

struct LassoCertificate {
    RVector x;
    std::vector<int> support;          // ascending indices of nonzero entries
    std::vector<int> sign_on_support;  // +1 / -1, aligned with support
    RVector kkt_on_support_residual;   // 2 A_S^T(Ax-y) + lambda*s; all zero
    Rational kkt_off_support_margin;   // lambda/2 - ||A_{S^c}^T(Ax-y)||_inf >= 0
};

struct KktRejection {
    enum class Reason { on_support_residual_nonzero, off_support_margin_negative };
    Reason reason;
    int index;       // offending coordinate
    Rational value;  // residual entry or negative margin
};

using KktCheck = std::variant<LassoCertificate, KktRejection>;

inline std::vector<int> support_of(const RVector& x) {
    std::vector<int> s;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] != 0) s.push_back(static_cast<int>(i));
    return s;
}

inline KktCheck verify_kkt(const RVector& y, const RMatrix& A, const Rational& lambda,
                           const RVector& x) {
    if (A.rows() != y.size() || A.cols() != x.size())
        throw ContractError("verify_kkt dimension mismatch");
    if (lambda <= 0) throw ContractError("lambda must be positive");
    std::vector<int> S = support_of(x);
    RVector res = mat_vec(A, x);
    for (std::size_t i = 0; i < res.size(); ++i) res[i] -= y[i];
    RVector corr = transpose_vec(A, res);  // A^T (Ax - y)

    LassoCertificate cert;
    cert.x = x;
    cert.support = S;
    cert.sign_on_support.reserve(S.size());
    cert.kkt_on_support_residual = RVector(S.size(), Rational(0));
    for (std::size_t k = 0; k < S.size(); ++k) {
        int i = S[k];
        int s = sign_r(x[static_cast<std::size_t>(i)]);
        cert.sign_on_support.push_back(s);
        Rational r = 2 * corr[static_cast<std::size_t>(i)] + lambda * s;
        if (r != 0)
            return KktRejection{KktRejection::Reason::on_support_residual_nonzero, i, r};
        cert.kkt_on_support_residual[k] = r;
    }
    Rational off_max(0);
    std::size_t sk = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (sk < S.size() && static_cast<std::size_t>(S[sk]) == i) {
            ++sk;
            continue;
        }
        Rational a = abs_r(corr[i]);
        if (a > off_max) off_max = a;
    }
    Rational margin = lambda / 2 - off_max;
    if (margin < 0) {
        // report the coordinate achieving the violation
        sk = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (sk < S.size() && static_cast<std::size_t>(S[sk]) == i) {
                ++sk;
                continue;
            }
            if (abs_r(corr[i]) == off_max)
                return KktRejection{KktRejection::Reason::off_support_margin_negative,
                                    static_cast<int>(i), margin};
        }
    }
    cert.kkt_off_support_margin = margin;
    return cert;
}

inline Rational lasso_objective_exact(const RVector& y, const RMatrix& A, const Rational& lambda,
                                      const RVector& x) {
    RVector r = mat_vec(A, x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
    return two_norm_sq(r) + lambda * one_norm(x);
}

// ---------------------------------------------------------------------------
// Exhaustive certify-and-enumerate solver. Candidate = (support S, signs s);
// the restricted normal equations A_S^T A_S x_S = A_S^T y - (lambda/2) s are
// solved exactly, and a candidate is kept only when the solve reproduces the
// sign pattern and the full KKT check passes. Singular candidates are
// skipped: any minimiser with minimal support has an invertible support Gram
// matrix, so enumeration cannot lose all solutions.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDefaultEnumerationCap = 12;

namespace detail {

inline std::optional<LassoCertificate> try_candidate(const RVector& y, const RMatrix& A,
                                                     const Rational& lambda,
                                                     const std::vector<int>& S,
                                                     const std::vector<int>& signs) {
    const std::size_t N = A.cols();
    RVector x(N, Rational(0));
    if (!S.empty()) {
        RMatrix G = gram(A, S);
        RMatrix AS = columns(A, S);
        RVector rhs = transpose_vec(AS, y);
        for (std::size_t k = 0; k < S.size(); ++k)
            rhs[k] -= lambda / 2 * signs[k];
        RVector w;
        try {
            w = solve_linear(G, rhs);
        } catch (const SolveError&) {
            return std::nullopt;
        }
        for (std::size_t k = 0; k < S.size(); ++k) {
            if (w[k] == 0 || sign_r(w[k]) != signs[k]) return std::nullopt;
            x[static_cast<std::size_t>(S[k])] = w[k];
        }
    }
    KktCheck check = verify_kkt(y, A, lambda, x);
    if (auto* cert = std::get_if<LassoCertificate>(&check)) return *cert;
    return std::nullopt;
}

inline bool support_less(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Visit all (S, s) candidates; stop early when visit returns false.
template <class Visit>
void for_each_candidate(std::size_t N, Visit&& visit) {
    std::vector<int> S;
    std::vector<int> signs;
    // iterate subsets as bitmasks; sign patterns nested
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << N); ++mask) {
        S.clear();
        for (std::size_t j = 0; j < N; ++j)
            if (mask & (std::uint64_t(1) << j)) S.push_back(static_cast<int>(j));
        const std::size_t k = S.size();
        for (std::uint64_t smask = 0; smask < (std::uint64_t(1) << k); ++smask) {
            signs.assign(k, 1);
            for (std::size_t b = 0; b < k; ++b)
                if (smask & (std::uint64_t(1) << b)) signs[b] = -1;
            if (!visit(S, signs)) return;
        }
    }
}

}  // namespace detail

// All KKT-certified candidates, one per support (sign patterns cannot differ
// across minimisers sharing a support).
inline std::vector<LassoCertificate> enumerate_certificates(const RVector& y, const RMatrix& A,
                                                            const Rational& lambda,
                                                            std::size_t cap = kDefaultEnumerationCap) {
    const std::size_t N = A.cols();
    if (N > cap) throw InstanceTooLargeError("enumeration cap exceeded");
    std::vector<LassoCertificate> out;
    detail::for_each_candidate(N, [&](const std::vector<int>& S, const std::vector<int>& signs) {
        auto cert = detail::try_candidate(y, A, lambda, S, signs);
        if (cert) out.push_back(std::move(*cert));
        return true;
    });
    return out;
}

inline std::set<std::vector<int>> enumerate_supports(const RVector& y, const RMatrix& A,
                                                     const Rational& lambda,
                                                     std::size_t cap = kDefaultEnumerationCap) {
    std::set<std::vector<int>> s;
    for (const auto& c : enumerate_certificates(y, A, lambda, cap)) s.insert(c.support);
    return s;
}

// Early-exit variant: does the instance have exactly the expected set of
// certifiable supports?
inline bool supports_match(const RVector& y, const RMatrix& A, const Rational& lambda,
                           const std::set<std::vector<int>>& expected,
                           std::size_t cap = kDefaultEnumerationCap) {
    const std::size_t N = A.cols();
    if (N > cap) throw InstanceTooLargeError("enumeration cap exceeded");
    std::set<std::vector<int>> seen;
    bool ok = true;
    detail::for_each_candidate(N, [&](const std::vector<int>& S, const std::vector<int>& signs) {
        auto cert = detail::try_candidate(y, A, lambda, S, signs);
        if (cert) {
            if (!expected.count(cert->support)) {
                ok = false;
                return false;
            }
            seen.insert(cert->support);
        }
        return true;
    });
    return ok && seen == expected;
}

inline LassoCertificate ulasso_enumerate(const RVector& y, const RMatrix& A, const Rational& lambda,
                                         std::size_t cap = kDefaultEnumerationCap) {
    auto all = enumerate_certificates(y, A, lambda, cap);
    if (all.empty())
        throw DegenerateInstanceError(
            "no enumerable KKT certificate: every optimal support has a singular Gram matrix");
    std::size_t best = 0;
    for (std::size_t i = 1; i < all.size(); ++i)
        if (detail::support_less(all[i].support, all[best].support)) best = i;
    return all[best];
}

// Two certificates with distinct supports when the minimiser is not unique.
inline std::optional<std::pair<LassoCertificate, LassoCertificate>> minimal_support_pair(
    const RVector& y, const RMatrix& A, const Rational& lambda,
    std::size_t cap = kDefaultEnumerationCap) {
    auto all = enumerate_certificates(y, A, lambda, cap);
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j)
            if (all[i].support != all[j].support)
                return std::make_pair(all[i], all[j]);
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Purified fast path: threshold a float iterate into a (support, sign) guess,
// solve the restricted normal equations exactly, certify. On rejection the
// float precision doubles and the threshold halves; after the retry budget
// the exhaustive solver takes over.
// ---------------------------------------------------------------------------

struct UlassoOptions {
    FloatSolveConfig guess;
    int escalations = 2;  // extra float attempts after the first
    std::size_t enumeration_cap = kDefaultEnumerationCap;
};

inline std::optional<LassoCertificate> purify_guess(const RVector& y, const RMatrix& A,
                                                    const Rational& lambda, const RVector& guess,
                                                    const Rational& threshold) {
    std::vector<int> S;
    std::vector<int> signs;
    for (std::size_t i = 0; i < guess.size(); ++i) {
        if (abs_r(guess[i]) >= threshold) {
            S.push_back(static_cast<int>(i));
            signs.push_back(sign_r(guess[i]));
        }
    }
    return detail::try_candidate(y, A, lambda, S, signs);
}

inline LassoCertificate ulasso_purified(const RVector& y, const RMatrix& A, const Rational& lambda,
                                        const DVector& float_guess, const UlassoOptions& opts = {}) {
    RVector g(float_guess.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        Rational q;
        mpq_set_d(q.get_mpq_t(), float_guess[i]);
        g[i] = q;
    }
    Rational thr;
    mpq_set_d(thr.get_mpq_t(), opts.guess.threshold);
    if (auto cert = purify_guess(y, A, lambda, g, thr)) return *cert;

    FloatSolveConfig cfg = opts.guess;
    for (int attempt = 0; attempt < opts.escalations; ++attempt) {
        cfg.working_precision_bits *= 2;
        cfg.threshold /= 2;
        RVector refined = float_lasso_escalated(y, A, lambda, cfg);
        Rational t2;
        mpq_set_d(t2.get_mpq_t(), cfg.threshold);
        if (auto cert = purify_guess(y, A, lambda, refined, t2)) return *cert;
    }
    if (A.cols() > opts.enumeration_cap)
        throw InstanceTooLargeError("instance too large for certified path");
    return ulasso_enumerate(y, A, lambda, opts.enumeration_cap);
}

// Solve-and-certify entry point used by the main loop.
inline LassoCertificate ulasso_certified(const RVector& y, const RMatrix& A, const Rational& lambda,
                                         const UlassoOptions& opts = {}) {
    DVector yd(y.size());
    DMatrix Ad(A.rows(), A.cols());
    for (std::size_t i = 0; i < y.size(); ++i) yd[i] = mpq_get_d(y[i].get_mpq_t());
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) Ad(i, j) = mpq_get_d(A(i, j).get_mpq_t());
    auto guess = float_lasso(yd, Ad, mpq_get_d(lambda.get_mpq_t()), opts.guess);
    return ulasso_purified(y, A, lambda, guess.x, opts);
}

// ---------------------------------------------------------------------------
// Convex-QP reformulation (x = x+ - x-): objective
//   xt^T M xt + (lambda 1 - 2 B y)^T xt,  xt >= 0
// with M = [[A^T A, -A^T A], [-A^T A, A^T A]], B = [A^T; -A^T]. Built and
// property-tested so alternate solver backends can plug in.
// ---------------------------------------------------------------------------

struct QpReformulation {
    RMatrix M;        // 2N x 2N, symmetric positive semidefinite
    RVector linear;   // lambda * 1 - 2 B y
};

inline QpReformulation build_qp_reformulation(const RVector& y, const RMatrix& A,
                                              const Rational& lambda) {
    const std::size_t N = A.cols();
    std::vector<int> all(N);
    for (std::size_t j = 0; j < N; ++j) all[j] = static_cast<int>(j);
    RMatrix G = gram(A, all);
    QpReformulation qp;
    qp.M = RMatrix(2 * N, 2 * N, Rational(0));
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) {
            qp.M(i, j) = G(i, j);
            qp.M(i + N, j + N) = G(i, j);
            qp.M(i + N, j) = -G(i, j);
            qp.M(i, j + N) = -G(i, j);
        }
    RVector Aty = transpose_vec(A, y);
    qp.linear = RVector(2 * N, Rational(0));
    for (std::size_t j = 0; j < N; ++j) {
        qp.linear[j] = lambda - 2 * Aty[j];
        qp.linear[j + N] = lambda + 2 * Aty[j];
    }
    return qp;
}

}  // namespace certilasso
