#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "certilasso/lasso.hpp"
#include "certilasso/oracle.hpp"
#include "certilasso/sigma.hpp"

namespace certilasso {

// ---------------------------------------------------------------------------
// Main precision-escalation loop. Per round n:
//   delta := 16^-n, read (y, A) at 4n bits, solve exactly, and stop once
//   NOT sigma_test(y, A, x, lambda, C)  AND  G^2/(mN) >= 4 delta^2
// with G = |||y,A|||_max, H = |||y,A|||_1*, and the threshold
//   C = 6 delta^{1/4} N (lambda + lambda^{-1}) H^2.
// On termination the support of x is the support of every minimiser of the
// true input and eta = delta^{-1} bounds its condition number. Ill-posed
// inputs never terminate; the budget turns that into a typed non-answer.
// ---------------------------------------------------------------------------

struct SelectBudget {
    long max_iterations = 64;
    std::optional<std::chrono::milliseconds> wall_clock_limit;
    std::optional<unsigned long> max_bits;  // cap on oracle precision (CERTILASSO_MAX_BITS)
};

struct SelectProgress {
    long n = 0;
    Rational delta;
    Rational threshold_C;
    bool sigma_leq_C2 = true;
    bool degenerate = false;
    bool solver_failed = false;
    std::vector<int> support;
};

struct SelectResult {
    std::vector<int> support;
    Rational eta;  // = 16^iterations, upper bound on the condition number
    long iterations = 0;
    unsigned long max_precision_bits = 0;  // = 4 * iterations
    LassoCertificate certificate;          // certified against final_y / final_A
    RVector final_y;
    RMatrix final_A;
};

struct BudgetExhausted {
    long iterations = 0;
    std::optional<SigmaReport> last_sigma;
    std::string reason;
};

using SelectOutcome = std::variant<SelectResult, BudgetExhausted>;

struct SelectOptions {
    SelectBudget budget;
    UlassoOptions solver;
    std::function<void(const SelectProgress&)> on_iteration;

    SelectOptions() {
        solver.guess.max_iters = 4000;  // in-loop guesses stay cheap; enumeration certifies
        solver.escalations = 1;
    }
};

inline SelectOutcome certified_select(InexactInput& input, const SelectOptions& opts = {}) {
    const Rational lambda = input.lambda();
    if (lambda <= 0) throw ContractError("lambda must be positive");
    const std::size_t m = input.m();
    const std::size_t N = input.N();
    const Rational mn(static_cast<long>(m * N));
    const Rational lam_sum = lambda + 1 / lambda;

    Rational delta(1);
    Rational delta4(1);  // maintains delta4^4 == delta
    long n = 0;
    std::optional<SigmaReport> last_sigma;
    const auto start = std::chrono::steady_clock::now();

    while (true) {
        if (n >= opts.budget.max_iterations)
            return BudgetExhausted{n, last_sigma, "iteration budget exhausted"};
        if (opts.budget.wall_clock_limit &&
            std::chrono::steady_clock::now() - start > *opts.budget.wall_clock_limit)
            return BudgetExhausted{n, last_sigma, "wall clock limit exceeded"};
        n += 1;
        delta /= 16;
        const unsigned long bits = static_cast<unsigned long>(4 * n);
        if (opts.budget.max_bits && bits > *opts.budget.max_bits)
            return BudgetExhausted{n - 1, last_sigma, "oracle precision cap reached"};
        RMatrix A = input.get_matrix(bits);
        RVector y = input.get_vector(bits);
        delta4 /= 2;

        std::optional<LassoCertificate> cert;
        try {
            cert = ulasso_certified(y, A, lambda, opts.solver);
        } catch (const DegenerateInstanceError&) {
            // treated as "sigma possibly 0": escalate precision and move on
        }
        Rational G = truncated_max_norm(y, A);
        Rational H = truncated_one_norm(y, A);
        Rational C = 6 * delta4 * static_cast<long>(N) * lam_sum * H * H;

        SelectProgress prog;
        prog.n = n;
        prog.delta = delta;
        prog.threshold_C = C;
        if (!cert) {
            prog.solver_failed = true;
            if (opts.on_iteration) opts.on_iteration(prog);
            continue;
        }
        SigmaReport rep = sigma_test(y, A, *cert, lambda, C);
        last_sigma = rep;
        prog.sigma_leq_C2 = rep.sigma_leq_C2;
        prog.degenerate = rep.degenerate;
        prog.support = cert->support;
        if (opts.on_iteration) opts.on_iteration(prog);

        if (!rep.sigma_leq_C2 && G * G / mn >= 4 * delta * delta) {
            SelectResult res;
            res.support = cert->support;
            res.eta = 1 / delta;
            res.iterations = n;
            res.max_precision_bits = bits;
            res.certificate = *cert;
            res.final_y = y;
            res.final_A = A;
            return res;
        }
    }
}

// Thin wrapper: the certified condition-number upper bound.
inline std::variant<Rational, BudgetExhausted> condition_upper_bound(InexactInput& input,
                                                                     const SelectOptions& opts = {}) {
    SelectOutcome out = certified_select(input, opts);
    if (auto* r = std::get_if<SelectResult>(&out)) return r->eta;
    return std::get<BudgetExhausted>(out);
}

// Budget sizing from the iteration-count shape
//   O(ceil(log2(max{lambda + 1/lambda, N, |||b,U|||_1*, cond}))).
inline long iteration_budget_hint(const Rational& lambda, std::size_t N,
                                  const Rational& tone_estimate, const Rational& cond_guess,
                                  long multiplier = 8) {
    if (lambda <= 0 || tone_estimate <= 0 || cond_guess <= 0)
        throw ContractError("iteration_budget_hint needs positive arguments");
    Rational mx = lambda + 1 / lambda;
    mx = std::max(mx, Rational(static_cast<long>(N)));
    mx = std::max(mx, tone_estimate);
    mx = std::max(mx, cond_guess);
    long lg = ceil_log2(mx);
    if (lg < 1) lg = 1;
    return multiplier * lg;
}

}  // namespace certilasso
