#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "certilasso/lasso.hpp"
#include "certilasso/oracle.hpp"
#include "certilasso/sigma.hpp"

namespace certilasso {

// ---------------------------------------------------------------------------
// q(nu, xi) = 96 nu^5 + 12 nu^3 (1 + lambda sqrt(N)) sqrt(xi)
//             + xi (2 nu^3 / lambda + 3 nu)
// Appears in the denominator of the stability lower bound, so roots are
// rounded UP: the returned value is an exact rational upper bound on q, and
// is exact whenever the square roots are rational.
// ---------------------------------------------------------------------------

inline Rational q_poly(const Rational& nu, const Rational& xi, const Rational& lambda,
                       std::size_t N, unsigned long root_bits = 32) {
    if (nu <= 0 || xi <= 0) throw ContractError("q_poly needs positive arguments");
    if (lambda <= 0) throw ContractError("q_poly needs positive lambda");
    Rational sqrtN_up = sqrt_enclosure(Rational(static_cast<long>(N)), root_bits).hi;
    Rational sqrtXi_up = sqrt_enclosure(xi, root_bits).hi;
    Rational nu3 = nu * nu * nu;
    Rational nu5 = nu3 * nu * nu;
    return 96 * nu5 + 12 * nu3 * (1 + lambda * sqrtN_up) * sqrtXi_up +
           xi * (2 * nu3 / lambda + 3 * nu);
}

// ---------------------------------------------------------------------------
// One-sided enclosures of alpha = max(||A||_2, ||y||_2, 1). The upper bound
// uses the Frobenius norm, the lower bound the best row/column 2-norm; both
// directions are certified through squared comparisons.
// ---------------------------------------------------------------------------

struct AlphaEnclosure {
    Rational lb;
    Rational ub;
};

inline AlphaEnclosure alpha_enclosure(const RVector& y, const RMatrix& A,
                                      unsigned long root_bits = 32) {
    Rational y_sq = two_norm_sq(y);
    Rational frob = frobenius_sq(A);
    Rational ub(1);
    ub = std::max(ub, sqrt_enclosure(frob, root_bits).hi);
    ub = std::max(ub, sqrt_enclosure(y_sq, root_bits).hi);
    Rational col_best(0);
    for (std::size_t j = 0; j < A.cols(); ++j) {
        Rational s(0);
        for (std::size_t i = 0; i < A.rows(); ++i) s += A(i, j) * A(i, j);
        if (s > col_best) col_best = s;
    }
    for (std::size_t i = 0; i < A.rows(); ++i) {
        Rational s(0);
        for (std::size_t j = 0; j < A.cols(); ++j) s += A(i, j) * A(i, j);
        if (s > col_best) col_best = s;
    }
    Rational lb(1);
    lb = std::max(lb, sqrt_enclosure(col_best, root_bits).lo);
    lb = std::max(lb, sqrt_enclosure(y_sq, root_bits).lo);
    return {lb, ub};
}

// ---------------------------------------------------------------------------
// Enclosure of sigma2 = smallest eigenvalue of the support Gram matrix, by
// bisection on t with the exact test posdef(G - t I):
//   posdef true  => sigma2 > t,   posdef false => sigma2 <= t.
// ---------------------------------------------------------------------------

struct Sigma2Enclosure {
    Rational lb;  // sigma2 > lb (or == 0 when lb == ub == 0)
    Rational ub;  // sigma2 <= ub
};

inline Sigma2Enclosure sigma2_enclosure(const RMatrix& G, int bisection_steps = 48) {
    if (!is_symmetric(G)) throw ContractError("sigma2_enclosure needs a symmetric matrix");
    const std::size_t r = G.rows();
    if (r == 0) throw ContractError("sigma2_enclosure of the empty Gram is infinite");
    if (!posdef(G)) return {Rational(0), Rational(0)};
    Rational tr(0);
    for (std::size_t i = 0; i < r; ++i) tr += G(i, i);
    Rational hi = tr / static_cast<long>(r);  // mean eigenvalue bounds the minimum
    Rational lo(0);
    for (int k = 0; k < bisection_steps; ++k) {
        Rational mid = (lo + hi) / 2;
        RMatrix X = G;
        for (std::size_t i = 0; i < r; ++i) X(i, i) -= mid;
        if (posdef(X))
            lo = mid;
        else
            hi = mid;
    }
    return {lo, hi};
}

// ---------------------------------------------------------------------------
// Upper bounds on the support-stability radius from a certified minimiser:
//   (1) sigma1 < lambda/4  =>  stsp <= 4 ||A||_max sigma1 / lambda
//   (2)                        stsp <= sqrt(sigma2)
//   (3) S nonempty          =>  stsp <= ||A||_max sigma3
// sigma2 is irrational in general, so bound (2) is carried as the rational
// sigma2 upper bound with comparisons done in squared form.
// ---------------------------------------------------------------------------

struct StabilityBounds {
    std::optional<Rational> ub_sigma1;
    std::optional<Rational> ub_sigma2_squared;  // stsp^2 <= this
    std::optional<Rational> ub_sigma3;
    Rational lb;  // certified lower bound on stsp

    // exact comparison: r <= every applicable upper bound (r >= 0)
    bool radius_within_ubs(const Rational& r) const {
        if (ub_sigma1 && r > *ub_sigma1) return false;
        if (ub_sigma2_squared && r * r > *ub_sigma2_squared) return false;
        if (ub_sigma3 && r > *ub_sigma3) return false;
        return true;
    }
    bool has_ub() const { return ub_sigma1 || ub_sigma2_squared || ub_sigma3; }
};

inline void stability_upper_bounds(StabilityBounds& out, const LassoCertificate& cert,
                                   const RVector& y, const RMatrix& A, const Rational& lambda) {
    auto [s1, s3, S] = sigma_values(cert, y, A, lambda);
    Rational amax = max_abs(A);
    out.ub_sigma1.reset();
    out.ub_sigma2_squared.reset();
    out.ub_sigma3.reset();
    if (!s1.infinite && s1.value < lambda / 4)
        out.ub_sigma1 = 4 * amax * s1.value / lambda;
    if (!S.empty()) {
        out.ub_sigma2_squared = sigma2_enclosure(gram(A, S)).ub;
        if (!s3.infinite) out.ub_sigma3 = amax * s3.value;
    }
}

// Certified lower bound:
//   stsp >= (mN)^{-1/2} min( sigma^2 / q(alpha, sigma),
//                            sqrt(sigma) / (6 alpha), alpha )
// evaluated with outward-rounded roots: sigma enters as a lower bound, alpha
// as an enclosure (upper bound where it weakens the estimate, lower bound in
// the bare min term).
inline Rational stability_lower_bound(const AlphaEnclosure& alpha, const Rational& sigma_lb,
                                      std::size_t m, std::size_t N, const Rational& lambda,
                                      unsigned long root_bits = 32) {
    if (sigma_lb <= 0) return Rational(0);
    Rational term1 = sigma_lb * sigma_lb / q_poly(alpha.ub, sigma_lb, lambda, N, root_bits);
    Rational term2 = sqrt_enclosure(sigma_lb, root_bits).lo / (6 * alpha.ub);
    Rational term3 = alpha.lb;
    Rational mn(static_cast<long>(m * N));
    Rational prefix = 1 / sqrt_enclosure(mn, root_bits).hi;
    Rational t = std::min(term1, std::min(term2, term3));
    return prefix * t;
}

// Lower bound on sigma = min(sigma1, sigma2^2, sigma3) at a certified
// minimiser; zero in the degenerate branch.
inline Rational sigma_lower_bound(const LassoCertificate& cert, const RVector& y, const RMatrix& A,
                                  const Rational& lambda) {
    auto [s1, s3, S] = sigma_values(cert, y, A, lambda);
    if (s1.value <= 0) return Rational(0);
    Rational out = s1.value;
    if (!S.empty()) {
        Sigma2Enclosure s2 = sigma2_enclosure(gram(A, S));
        if (s2.ub == 0) return Rational(0);
        out = std::min(out, s2.lb * s2.lb);
        out = std::min(out, s3.value);
    }
    return out;
}

inline StabilityBounds stability_bounds(const LassoCertificate& cert, const RVector& y,
                                        const RMatrix& A, const Rational& lambda,
                                        unsigned long root_bits = 32) {
    StabilityBounds b;
    stability_upper_bounds(b, cert, y, A, lambda);
    b.lb = stability_lower_bound(alpha_enclosure(y, A, root_bits),
                                 sigma_lower_bound(cert, y, A, lambda), y.size(), A.cols(), lambda,
                                 root_bits);
    return b;
}

// ---------------------------------------------------------------------------
// Targeted perturbation directions. Each one realises a support change at a
// known radius:
//   * column inflation A(I + delta P_i) on an off-support coordinate close to
//     the KKT boundary,
//   * the y-shift y - x_i A e_i that deletes coordinate i from the support,
//   * the rank-one column correction A - (Av)v^T/<v,v> that makes the support
//     Gram singular,
//   * shrinking all off-support columns A(I - delta E), which keeps the
//     support of a minimal-support minimiser and is used as a "stabilising"
//     control direction.
// ---------------------------------------------------------------------------

inline RMatrix scale_column(const RMatrix& A, int col, const Rational& factor) {
    RMatrix B = A;
    for (std::size_t i = 0; i < A.rows(); ++i)
        B(i, static_cast<std::size_t>(col)) = A(i, static_cast<std::size_t>(col)) * factor;
    return B;
}

inline RMatrix shrink_off_support_columns(const RMatrix& A, const std::vector<int>& support,
                                          const Rational& delta) {
    if (delta <= 0 || delta >= 1) throw ContractError("selector shrink needs delta in (0,1)");
    RMatrix B = A;
    std::size_t sk = 0;
    for (std::size_t j = 0; j < A.cols(); ++j) {
        if (sk < support.size() && static_cast<std::size_t>(support[sk]) == j) {
            ++sk;
            continue;
        }
        for (std::size_t i = 0; i < A.rows(); ++i) B(i, j) = A(i, j) * (1 - delta);
    }
    return B;
}

struct Perturbation {
    RVector y;
    RMatrix A;
    Rational radius;  // exact max-norm of the perturbation
    std::string kind;
};

namespace detail {

inline Rational column_inf_norm(const RMatrix& A, int j) {
    Rational m(0);
    for (std::size_t i = 0; i < A.rows(); ++i) {
        Rational a = abs_r(A(i, static_cast<std::size_t>(j)));
        if (a > m) m = a;
    }
    return m;
}

}  // namespace detail

// The exact attack perturbations for an instance with certificate cert.
inline std::vector<Perturbation> targeted_attacks(const RVector& y, const RMatrix& A,
                                                  const Rational& lambda,
                                                  const LassoCertificate& cert) {
    std::vector<Perturbation> out;
    const std::vector<int>& S = cert.support;
    auto [s1, s3, _] = sigma_values(cert, y, A, lambda);

    // off-support column inflation; valid construction needs sigma1 < lambda/4
    if (s1.value > 0 && s1.value < lambda / 4) {
        Rational t = s1.value + (lambda / 4 - s1.value) / 65536;
        Rational delta = 2 * t / (lambda - 2 * t);
        // find the coordinate attaining the off-support max
        RVector res = mat_vec(A, cert.x);
        for (std::size_t i = 0; i < res.size(); ++i) res[i] -= y[i];
        RVector corr = transpose_vec(A, res);
        std::size_t sk = 0;
        Rational target = lambda / 2 - s1.value;
        for (std::size_t j = 0; j < A.cols(); ++j) {
            if (sk < S.size() && static_cast<std::size_t>(S[sk]) == j) {
                ++sk;
                continue;
            }
            if (abs_r(corr[j]) == target) {
                Rational cn = detail::column_inf_norm(A, static_cast<int>(j));
                if (cn > 0) {
                    Perturbation p;
                    p.y = y;
                    p.A = scale_column(A, static_cast<int>(j), 1 + delta);
                    p.radius = delta * cn;
                    p.kind = "sigma1-column-inflation";
                    out.push_back(std::move(p));
                }
                break;
            }
        }
    }

    // support deletion via y-shift, one per support coordinate
    for (int i : S) {
        RVector col(A.rows());
        for (std::size_t r = 0; r < A.rows(); ++r)
            col[r] = A(r, static_cast<std::size_t>(i)) * cert.x[static_cast<std::size_t>(i)];
        Rational rad = linf_norm(col);
        if (rad == 0) continue;
        Perturbation p;
        p.y = y;
        for (std::size_t r = 0; r < A.rows(); ++r) p.y[r] = y[r] - col[r];
        p.A = A;
        p.radius = rad;
        p.kind = "sigma3-coordinate-deletion";
        out.push_back(std::move(p));
    }

    // rank-one correction toward a singular support Gram
    if (!S.empty()) {
        RMatrix G = gram(A, S);
        Sigma2Enclosure s2 = sigma2_enclosure(G);
        if (s2.ub > 0) {
            Rational shift = s2.ub * (1 + make_rational(1, 1024));
            RMatrix Gs = G;
            for (std::size_t i = 0; i < Gs.rows(); ++i) Gs(i, i) -= shift;
            RVector rhs(S.size(), Rational(1));
            RVector w;
            bool have = true;
            try {
                w = solve_linear(Gs, rhs);  // inverse iteration step
            } catch (const SolveError&) {
                have = false;
            }
            if (have) {
                // v supported on S; B = A - (Av) v^T / <v,v> kills Gram(B_S)
                RVector v(A.cols(), Rational(0));
                for (std::size_t k = 0; k < S.size(); ++k)
                    v[static_cast<std::size_t>(S[k])] = w[k];
                Rational vv = two_norm_sq(v);
                if (vv > 0) {
                    RVector Av = mat_vec(A, v);
                    RMatrix B = A;
                    Rational rad(0);
                    for (std::size_t r = 0; r < A.rows(); ++r)
                        for (std::size_t c = 0; c < A.cols(); ++c) {
                            Rational d = Av[r] * v[c] / vv;
                            B(r, c) -= d;
                            Rational ad = abs_r(d);
                            if (ad > rad) rad = ad;
                        }
                    if (rad > 0) {
                        Perturbation p;
                        p.y = y;
                        p.A = B;
                        p.radius = rad;
                        p.kind = "sigma2-rank-one";
                        out.push_back(std::move(p));
                    }
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Empirical stability search. Returns the largest prefix radius with no
// support change found and the smallest radius where one was found. This is
// a test oracle, not a certified quantity.
// ---------------------------------------------------------------------------

struct StabilitySearchResult {
    Rational no_change_radius;                 // 0 when a change appears at the first radius
    std::optional<Rational> change_radius;     // smallest radius with a change
    std::vector<Perturbation> change_witness;  // at most one, the first found
};

namespace detail {

inline RVector random_vec(const CounterRng& rng, std::uint64_t base, std::size_t n,
                          const Rational& scale) {
    RVector v(n);
    for (std::size_t i = 0; i < n; ++i) {
        long k = static_cast<long>(rng.at(base + i) % 2047) - 1023;  // [-1023, 1023]
        v[i] = scale * make_rational(k, 1024);
    }
    return v;
}

}  // namespace detail

inline StabilitySearchResult stability_search(const RVector& y, const RMatrix& A,
                                              const Rational& lambda,
                                              const std::vector<Rational>& radius_grid,
                                              int trials, std::uint64_t seed,
                                              std::size_t cap = kDefaultEnumerationCap) {
    std::set<std::vector<int>> base = enumerate_supports(y, A, lambda, cap);
    LassoCertificate cert = ulasso_enumerate(y, A, lambda, cap);
    std::vector<Perturbation> attacks = targeted_attacks(y, A, lambda, cert);
    CounterRng rng(seed);

    std::vector<Rational> grid = radius_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    StabilitySearchResult res;
    res.no_change_radius = Rational(0);
    bool change_found = false;
    std::uint64_t ctr = 0;
    for (const Rational& r : grid) {
        bool changed = false;
        Perturbation witness;
        if (r == 0) {
            res.no_change_radius = 0;  // same instance; never a change
            continue;
        }
        // targeted attacks, rescaled to this radius
        for (const auto& atk : attacks) {
            if (atk.radius == 0) continue;
            Rational f = r / atk.radius;
            RVector py(y.size());
            RMatrix pA(A.rows(), A.cols());
            for (std::size_t i = 0; i < y.size(); ++i) py[i] = y[i] + (atk.y[i] - y[i]) * f;
            for (std::size_t i = 0; i < A.rows(); ++i)
                for (std::size_t j = 0; j < A.cols(); ++j)
                    pA(i, j) = A(i, j) + (atk.A(i, j) - A(i, j)) * f;
            if (!supports_match(py, pA, lambda, base, cap)) {
                changed = true;
                witness = {py, pA, r, atk.kind + "@scaled"};
                break;
            }
        }
        // the selector shrink direction (support-preserving for minimal
        // supports; included as a control)
        if (!changed && !cert.support.empty() &&
            cert.support.size() < static_cast<std::size_t>(A.cols())) {
            Rational cmax(0);
            std::size_t sk = 0;
            for (std::size_t j = 0; j < A.cols(); ++j) {
                if (sk < cert.support.size() &&
                    static_cast<std::size_t>(cert.support[sk]) == j) {
                    ++sk;
                    continue;
                }
                Rational cn = detail::column_inf_norm(A, static_cast<int>(j));
                if (cn > cmax) cmax = cn;
            }
            if (cmax > 0) {
                Rational delta = r / cmax;
                if (delta < 1) {
                    RMatrix pA = shrink_off_support_columns(A, cert.support, delta);
                    if (!supports_match(y, pA, lambda, base, cap)) {
                        changed = true;
                        witness = {y, pA, r, "selector-shrink"};
                    }
                }
            }
        }
        // random perturbations
        for (int t = 0; !changed && t < trials; ++t) {
            RVector dy = detail::random_vec(rng, ctr, y.size(), r);
            ctr += y.size();
            RVector py = vec_add(y, dy);
            RMatrix pA = A;
            for (std::size_t i = 0; i < A.rows(); ++i) {
                RVector da = detail::random_vec(rng, ctr, A.cols(), r);
                ctr += A.cols();
                for (std::size_t j = 0; j < A.cols(); ++j) pA(i, j) += da[j];
            }
            if (!supports_match(py, pA, lambda, base, cap)) {
                changed = true;
                witness = {py, pA, r, "random"};
            }
        }
        if (changed) {
            res.change_radius = r;
            res.change_witness.push_back(witness);
            change_found = true;
            break;
        }
        res.no_change_radius = r;
    }
    (void)change_found;
    return res;
}

// ---------------------------------------------------------------------------
// Ill-posed and hard instance generators, each shipped with verification
// artifacts.
// ---------------------------------------------------------------------------

struct IllPosedWitness {
    std::string kind;
    GroundTruth instance;
    std::vector<LassoCertificate> certificates;  // on the primary instance
    struct FlipStep {
        Rational radius;
        GroundTruth perturbed;
        std::set<std::vector<int>> supports;
    };
    std::vector<FlipStep> flip_sequence;                     // boundary-kkt
    std::vector<std::pair<Rational, GroundTruth>> family;    // vanishing-coordinate: (t, instance)
};

inline IllPosedWitness make_ill_posed(const std::string& kind) {
    const Rational lambda = make_rational(1, 10);
    IllPosedWitness w;
    w.kind = kind;
    if (kind == "duplicate-columns") {
        RVector y{Rational(1)};
        RMatrix A{{Rational(1), Rational(1)}};
        w.instance = GroundTruth::from_exact(y, A, lambda);
        auto pair = minimal_support_pair(y, A, lambda);
        if (!pair) throw ContractError("duplicate-columns witness lost its two solutions");
        w.certificates = {pair->first, pair->second};
        return w;
    }
    if (kind == "boundary-kkt") {
        // unique solution with off-support margin exactly zero
        RVector y{Rational(1), Rational(0)};
        RMatrix A{{Rational(1), Rational(1)}, {Rational(0), Rational(1)}};
        w.instance = GroundTruth::from_exact(y, A, lambda);
        auto cert = ulasso_enumerate(y, A, lambda);
        w.certificates = {cert};
        for (int k = 3; k <= 8; ++k) {
            Rational h = pow2(-k);
            RMatrix Ak = A;
            Ak(0, 1) += h;
            IllPosedWitness::FlipStep step;
            step.radius = h;
            step.perturbed = GroundTruth::from_exact(y, Ak, lambda);
            step.supports = enumerate_supports(y, Ak, lambda);
            w.flip_sequence.push_back(std::move(step));
        }
        return w;
    }
    if (kind == "singular-gram") {
        // equal columns in two measurements; the interior minimiser has a
        // singular support Gram matrix
        RVector y{Rational(1), Rational(1)};
        RMatrix A{{Rational(1), Rational(1)}, {Rational(1), Rational(1)}};
        w.instance = GroundTruth::from_exact(y, A, lambda);
        Rational s = 1 - lambda / 4;  // optimal common value of x1 + x2
        RVector x{s / 2, s / 2};
        auto check = verify_kkt(y, A, lambda, x);
        auto* cert = std::get_if<LassoCertificate>(&check);
        if (!cert) throw ContractError("singular-gram witness failed its own KKT check");
        w.certificates = {*cert};
        return w;
    }
    if (kind == "vanishing-coordinate") {
        for (int k = 1; k <= 8; ++k) {
            Rational t = pow2(-k);
            RVector y{lambda / 2 + t};
            RMatrix A{{Rational(1)}};
            GroundTruth g = GroundTruth::from_exact(y, A, lambda);
            if (k == 1) {
                w.instance = g;
                w.certificates = {ulasso_enumerate(y, A, lambda)};
            }
            w.family.emplace_back(t, g);
        }
        // boundary member: coordinate exactly zero, support drops to empty
        RVector y0{lambda / 2};
        RMatrix A0{{Rational(1)}};
        w.family.emplace_back(Rational(0), GroundTruth::from_exact(y0, A0, lambda));
        return w;
    }
    throw ContractError("unknown ill-posed witness kind: " + kind);
}

}  // namespace certilasso
