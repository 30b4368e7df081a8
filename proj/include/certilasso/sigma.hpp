#pragma once

#include <tuple>
#include <vector>

#include "certilasso/lasso.hpp"
#include "certilasso/linalg.hpp"

namespace certilasso {

// A rational that may carry the +infinity convention (empty-support cases).
struct PosInfRational {
    bool infinite = false;
    Rational value;

    static PosInfRational inf() { return {true, Rational(0)}; }
    static PosInfRational of(const Rational& v) { return {false, v}; }

    bool leq(const Rational& bound) const { return !infinite && value <= bound; }
};

// Outcome of the sigma threshold routine at level C^2.
//   sigma1: lambda/2 minus the off-support KKT correlation (lambda/2 when S^c
//           is empty, since the empty max is 0)
//   sigma3: smallest nonzero coordinate magnitude (infinite when S is empty)
//   sigma2_exceeds_C: posdef(A_S^T A_S - C I); true means sigma2 > C
//   degenerate: margin not strict or support Gram singular, i.e. sigma = 0
struct SigmaReport {
    PosInfRational sigma1;
    PosInfRational sigma3;
    bool sigma2_exceeds_C = false;
    bool sigma_leq_C2 = true;
    bool degenerate = false;
    std::vector<int> support;
};

namespace detail {

inline Rational off_support_correlation(const RVector& y, const RMatrix& A,
                                        const std::vector<int>& S, const RVector& x) {
    RVector res = mat_vec(A, x);
    for (std::size_t i = 0; i < res.size(); ++i) res[i] -= y[i];
    RVector corr = transpose_vec(A, res);
    Rational mx(0);
    std::size_t sk = 0;
    for (std::size_t i = 0; i < corr.size(); ++i) {
        if (sk < S.size() && static_cast<std::size_t>(S[sk]) == i) {
            ++sk;
            continue;
        }
        Rational a = abs_r(corr[i]);
        if (a > mx) mx = a;
    }
    return mx;
}

}  // namespace detail

// sigma1 and sigma3 evaluated at a verified minimiser.
inline std::tuple<PosInfRational, PosInfRational, std::vector<int>> sigma_values(
    const LassoCertificate& cert, const RVector& y, const RMatrix& A, const Rational& lambda) {
    const std::vector<int>& S = cert.support;
    Rational off = detail::off_support_correlation(y, A, S, cert.x);
    PosInfRational s1 = PosInfRational::of(lambda / 2 - off);
    PosInfRational s3 = PosInfRational::inf();
    if (!S.empty()) {
        Rational m = abs_r(cert.x[static_cast<std::size_t>(S[0])]);
        for (int i : S) {
            Rational a = abs_r(cert.x[static_cast<std::size_t>(i)]);
            if (a < m) m = a;
        }
        s3 = PosInfRational::of(m);
    }
    return {s1, s3, S};
}

// Decides sigma(y, A) <= C^2 exactly, given a certified minimiser.
// sigma = min(sigma1, sigma2^2, sigma3); the sigma2 comparison is realised as
// a positive-definiteness test of A_S^T A_S - C I, and the non-strict branch
// (margin exactly lambda/2, or singular support Gram) forces sigma = 0.
inline SigmaReport sigma_test(const RVector& y, const RMatrix& A, const LassoCertificate& cert,
                              const Rational& lambda, const Rational& C) {
    if (C <= 0) throw ContractError("sigma_test needs C > 0");
    SigmaReport rep;
    rep.support = cert.support;
    const std::vector<int>& S = cert.support;
    Rational off = detail::off_support_correlation(y, A, S, cert.x);
    RMatrix G = gram(A, S);
    bool strict = off < lambda / 2;
    bool invertible = posdef(G);  // Gram is PSD, so invertible iff PD; true for S empty
    if (!(strict && invertible)) {
        rep.degenerate = true;
        rep.sigma_leq_C2 = true;
        return rep;
    }
    auto [s1, s3, _] = sigma_values(cert, y, A, lambda);
    rep.sigma1 = s1;
    rep.sigma3 = s3;
    RMatrix X = G;
    for (std::size_t i = 0; i < X.rows(); ++i) X(i, i) -= C;
    rep.sigma2_exceeds_C = posdef(X);  // vacuously true for S empty
    Rational C2 = C * C;
    rep.sigma_leq_C2 = s1.leq(C2) || s3.leq(C2) || !rep.sigma2_exceeds_C;
    return rep;
}

}  // namespace certilasso
