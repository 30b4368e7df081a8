#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "certilasso/linalg.hpp"
#include "certilasso/rational.hpp"

namespace certilasso {

// ---------------------------------------------------------------------------
// Ground-truth entries. Either an exact rational or sqrt(k) for an integer k;
// every constant knows how to emit a dyadic approximation at any requested
// precision and how to compare itself exactly against rationals.
// ---------------------------------------------------------------------------

class SymbolicConstant {
  public:
    SymbolicConstant() : kind_(Kind::rational), value_(0), k_(0) {}
    SymbolicConstant(const Rational& v) : kind_(Kind::rational), value_(v), k_(0) {}
    SymbolicConstant(long v) : kind_(Kind::rational), value_(v), k_(0) {}

    static SymbolicConstant sqrt_of(unsigned long k) {
        Int z(static_cast<long>(k));
        Int s = isqrt_floor(z);
        if (s * s == z) return SymbolicConstant(Rational(s));  // perfect square: exact
        SymbolicConstant c;
        c.kind_ = Kind::sqrt;
        c.k_ = k;
        return c;
    }

    bool is_rational() const { return kind_ == Kind::rational; }
    const Rational& rational_value() const {
        if (!is_rational()) throw ContractError("constant is irrational");
        return value_;
    }
    unsigned long sqrt_arg() const { return k_; }

    // Dyadic approximation with denominator 2^n and |approx - value| <= 2^-n.
    Rational emit(unsigned long n, bool truncate = false) const {
        if (kind_ == Kind::rational)
            return truncate ? truncate_to_dyadic(value_, n) : round_to_dyadic(value_, n);
        // floor(sqrt(k) * 2^(n+1)) / 2^(n+1), then round to n bits: total
        // error <= 2^-(n+1) + 2^-(n+1) = 2^-n. Truncation: floor at n bits.
        if (truncate) {
            Int m(static_cast<long>(k_));
            mpz_mul_2exp(m.get_mpz_t(), m.get_mpz_t(), 2 * n);
            Int s = isqrt_floor(m);
            Int den;
            mpz_ui_pow_ui(den.get_mpz_t(), 2, n);
            return make_rational(s, den);
        }
        Int m(static_cast<long>(k_));
        mpz_mul_2exp(m.get_mpz_t(), m.get_mpz_t(), 2 * (n + 1));
        Int s = isqrt_floor(m);
        Int den;
        mpz_ui_pow_ui(den.get_mpz_t(), 2, n + 1);
        return round_to_dyadic(make_rational(s, den), n);
    }

    // |q - value| <= tol, decided exactly.
    bool within(const Rational& q, const Rational& tol) const {
        if (kind_ == Kind::rational) return abs_r(q - value_) <= tol;
        Rational lo = q - tol, hi = q + tol;  // need lo <= sqrt(k) <= hi
        Rational kk(static_cast<long>(k_));
        bool lower_ok = lo <= 0 || lo * lo <= kk;
        bool upper_ok = hi >= 0 && kk <= hi * hi;
        return lower_ok && upper_ok;
    }

    // ceil(log2(1 + |value|)), for the bit-size contract.
    long ceil_log2_one_plus_abs() const {
        if (kind_ == Kind::rational) {
            Rational v = 1 + abs_r(value_);
            return ceil_log2(v);
        }
        // smallest t with 1 + sqrt(k) <= 2^t, i.e. k <= (2^t - 1)^2
        Rational kk(static_cast<long>(k_));
        long t = 1;
        while (true) {
            Rational bound = pow2(t) - 1;
            if (bound > 0 && kk <= bound * bound) return t;
            ++t;
        }
    }

    std::string to_string() const {
        if (kind_ == Kind::rational) return rational_to_string(value_);
        return "sqrt:" + std::to_string(k_);
    }

    static SymbolicConstant from_string(const std::string& s) {
        if (s.rfind("sqrt:", 0) == 0) {
            std::string arg = s.substr(5);
            if (arg.empty()) throw ParseError("bad sqrt literal: " + s);
            unsigned long k = 0;
            for (char c : arg) {
                if (c < '0' || c > '9') throw ParseError("bad sqrt literal: " + s);
                k = k * 10 + static_cast<unsigned long>(c - '0');
                if (k > 1000000000UL) throw ParseError("sqrt argument out of range: " + s);
            }
            return sqrt_of(k);
        }
        return SymbolicConstant(rational_from_string(s));
    }

  private:
    enum class Kind { rational, sqrt };
    Kind kind_;
    Rational value_;
    unsigned long k_;
};

// ---------------------------------------------------------------------------
// Ground truth: the real (y, A, lambda) a run is about. lambda is always an
// exact rational; y and A entries may be symbolic.
// ---------------------------------------------------------------------------

struct GroundTruth {
    std::size_t m = 0;
    std::size_t N = 0;
    Rational lambda;
    Vector<SymbolicConstant> y;
    Matrix<SymbolicConstant> A;

    static GroundTruth from_exact(const RVector& y, const RMatrix& A, const Rational& lambda) {
        GroundTruth t;
        t.m = y.size();
        t.N = A.cols();
        if (A.rows() != t.m) throw ContractError("ground truth dimension mismatch");
        if (t.m > t.N) throw ContractError("ground truth needs m <= N");
        if (lambda <= 0) throw ContractError("lambda must be positive");
        t.lambda = lambda;
        t.y = Vector<SymbolicConstant>(t.m);
        t.A = Matrix<SymbolicConstant>(t.m, t.N);
        for (std::size_t i = 0; i < t.m; ++i) t.y[i] = SymbolicConstant(y[i]);
        for (std::size_t i = 0; i < t.m; ++i)
            for (std::size_t j = 0; j < t.N; ++j) t.A(i, j) = SymbolicConstant(A(i, j));
        return t;
    }

    bool all_rational() const {
        for (const auto& c : y)
            if (!c.is_rational()) return false;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < N; ++j)
                if (!A(i, j).is_rational()) return false;
        return true;
    }

    std::pair<RVector, RMatrix> exact_pair() const {
        if (!all_rational()) throw ContractError("ground truth has irrational entries");
        RVector yy(m);
        RMatrix AA(m, N);
        for (std::size_t i = 0; i < m; ++i) yy[i] = y[i].rational_value();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < N; ++j) AA(i, j) = A(i, j).rational_value();
        return {yy, AA};
    }
};

inline void validate_ground_truth(const GroundTruth& t) {
    if (t.m == 0 || t.N == 0) throw ContractError("empty ground truth");
    if (t.m > t.N) throw ContractError("ground truth needs m <= N");
    if (t.lambda <= 0) throw ContractError("lambda must be positive");
    if (t.y.size() != t.m || t.A.rows() != t.m || t.A.cols() != t.N)
        throw ContractError("ground truth dimension mismatch");
}

// ---------------------------------------------------------------------------
// JSON ground-truth format:
//   {"m": 1, "N": 2, "lambda": "1/10",
//    "y": ["1"], "A": [["0.999", "sqrt:2"]]}
// ---------------------------------------------------------------------------

inline GroundTruth ground_truth_from_json(const nlohmann::json& j) {
    try {
        GroundTruth t;
        t.m = j.at("m").get<std::size_t>();
        t.N = j.at("N").get<std::size_t>();
        t.lambda = rational_from_string(j.at("lambda").get<std::string>());
        const auto& jy = j.at("y");
        const auto& jA = j.at("A");
        if (jy.size() != t.m || jA.size() != t.m) throw ParseError("y/A size mismatch");
        t.y = Vector<SymbolicConstant>(t.m);
        t.A = Matrix<SymbolicConstant>(t.m, t.N);
        for (std::size_t i = 0; i < t.m; ++i)
            t.y[i] = SymbolicConstant::from_string(jy.at(i).get<std::string>());
        for (std::size_t i = 0; i < t.m; ++i) {
            if (jA.at(i).size() != t.N) throw ParseError("A row size mismatch");
            for (std::size_t jj = 0; jj < t.N; ++jj)
                t.A(i, jj) = SymbolicConstant::from_string(jA.at(i).at(jj).get<std::string>());
        }
        validate_ground_truth(t);
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad ground-truth JSON: ") + e.what());
    }
}

inline nlohmann::json ground_truth_to_json(const GroundTruth& t) {
    nlohmann::json j;
    j["m"] = t.m;
    j["N"] = t.N;
    j["lambda"] = rational_to_string(t.lambda);
    nlohmann::json jy = nlohmann::json::array();
    for (const auto& c : t.y) jy.push_back(c.to_string());
    j["y"] = jy;
    nlohmann::json jA = nlohmann::json::array();
    for (std::size_t i = 0; i < t.m; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t jj = 0; jj < t.N; ++jj) row.push_back(t.A(i, jj).to_string());
        jA.push_back(row);
    }
    j["A"] = jA;
    return j;
}

// ---------------------------------------------------------------------------
// Inexact input: two precision-indexed emitters plus call instrumentation.
// Emitters are deterministic; adversarial behaviour comes from constructing a
// different instance, never from nondeterminism inside one.
// ---------------------------------------------------------------------------

struct CallCount {
    unsigned long max_precision = 0;
    unsigned long total_calls = 0;
};

class InexactInput {
  public:
    using VecFn = std::function<RVector(unsigned long)>;
    using MatFn = std::function<RMatrix(unsigned long)>;

    InexactInput(std::size_t m, std::size_t N, Rational lambda, VecFn vec, MatFn mat)
        : m_(m), N_(N), lambda_(std::move(lambda)), vec_(std::move(vec)), mat_(std::move(mat)) {}

    std::size_t m() const { return m_; }
    std::size_t N() const { return N_; }
    const Rational& lambda() const { return lambda_; }

    RVector get_vector(unsigned long n) {
        if (n == 0) throw ContractError("oracle precision must be positive");
        record(n);
        return vec_(n);
    }
    RMatrix get_matrix(unsigned long n) {
        if (n == 0) throw ContractError("oracle precision must be positive");
        record(n);
        return mat_(n);
    }

    CallCount call_count() const { return count_; }

  private:
    void record(unsigned long n) {
        count_.total_calls += 1;
        if (n > count_.max_precision) count_.max_precision = n;
    }

    std::size_t m_, N_;
    Rational lambda_;
    VecFn vec_;
    MatFn mat_;
    CallCount count_;
};

enum class OracleRounding { nearest, truncate };

inline InexactInput dyadic_oracle(const GroundTruth& truth,
                                  OracleRounding mode = OracleRounding::nearest) {
    validate_ground_truth(truth);
    const bool trunc = (mode == OracleRounding::truncate);
    auto vec = [truth, trunc](unsigned long n) {
        RVector y(truth.m);
        for (std::size_t i = 0; i < truth.m; ++i) y[i] = truth.y[i].emit(n, trunc);
        return y;
    };
    auto mat = [truth, trunc](unsigned long n) {
        RMatrix A(truth.m, truth.N);
        for (std::size_t i = 0; i < truth.m; ++i)
            for (std::size_t j = 0; j < truth.N; ++j) A(i, j) = truth.A(i, j).emit(n, trunc);
        return A;
    };
    return InexactInput(truth.m, truth.N, truth.lambda, vec, mat);
}

// ---------------------------------------------------------------------------
// Adversarial oracle. The strategy names a nearby target instance; at each
// precision the oracle returns the valid approximation of the truth closest
// to the target, so low-precision calls look like the target and only high
// precision reveals the truth. The 2^-n guarantee always holds relative to
// the truth. Explicit per-precision overrides are validated at construction
// and rejected if any exceeds its tolerance.
// ---------------------------------------------------------------------------

struct AdversaryStrategy {
    GroundTruth target;  // dims must match the truth
    struct Override {
        unsigned long n;
        RVector y;
        RMatrix A;
    };
    std::vector<Override> overrides;
};

namespace detail {

inline Rational steer_entry(const SymbolicConstant& truth, const SymbolicConstant& target,
                            unsigned long n) {
    const Rational h = pow2(-static_cast<long>(n));
    if (target.is_rational()) {
        Rational t = round_to_dyadic(target.rational_value(), n);
        if (truth.within(t, h)) return t;
    }
    // fall back to the honest value, nudged one ulp toward the target when
    // the nudge stays inside the tolerance band
    Rational v = truth.emit(n, false);
    if (target.is_rational()) {
        Rational ulp = h;
        Rational up = v + ulp, down = v - ulp;
        bool go_up = target.rational_value() > v;
        Rational cand = go_up ? up : down;
        if (truth.within(cand, h)) return cand;
    }
    return v;
}

}  // namespace detail

inline InexactInput adversarial_oracle(const GroundTruth& truth, const AdversaryStrategy& strategy) {
    validate_ground_truth(truth);
    validate_ground_truth(strategy.target);
    if (strategy.target.m != truth.m || strategy.target.N != truth.N)
        throw ContractError("adversary target dimension mismatch");
    for (const auto& ov : strategy.overrides) {
        if (ov.n == 0) throw ContractError("override precision must be positive");
        Rational h = pow2(-static_cast<long>(ov.n));
        if (ov.y.size() != truth.m || ov.A.rows() != truth.m || ov.A.cols() != truth.N)
            throw ContractError("override dimension mismatch");
        for (std::size_t i = 0; i < truth.m; ++i)
            if (!truth.y[i].within(ov.y[i], h))
                throw ContractError("adversary override exceeds the 2^-n tolerance");
        for (std::size_t i = 0; i < truth.m; ++i)
            for (std::size_t j = 0; j < truth.N; ++j)
                if (!truth.A(i, j).within(ov.A(i, j), h))
                    throw ContractError("adversary override exceeds the 2^-n tolerance");
    }
    auto overrides = std::make_shared<std::vector<AdversaryStrategy::Override>>(strategy.overrides);
    GroundTruth target = strategy.target;
    auto vec = [truth, target, overrides](unsigned long n) {
        for (const auto& ov : *overrides)
            if (ov.n == n) return ov.y;
        RVector y(truth.m);
        for (std::size_t i = 0; i < truth.m; ++i)
            y[i] = detail::steer_entry(truth.y[i], target.y[i], n);
        return y;
    };
    auto mat = [truth, target, overrides](unsigned long n) {
        for (const auto& ov : *overrides)
            if (ov.n == n) return ov.A;
        RMatrix A(truth.m, truth.N);
        for (std::size_t i = 0; i < truth.m; ++i)
            for (std::size_t j = 0; j < truth.N; ++j)
                A(i, j) = detail::steer_entry(truth.A(i, j), target.A(i, j), n);
        return A;
    };
    return InexactInput(truth.m, truth.N, truth.lambda, vec, mat);
}

}  // namespace certilasso
