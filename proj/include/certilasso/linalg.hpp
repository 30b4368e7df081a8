#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "certilasso/errors.hpp"
#include "certilasso/rational.hpp"

namespace certilasso {

// Dense, bounds-checked containers with value semantics. Dimensions are fixed
// at construction.
template <class T>
class Vector {
  public:
    Vector() = default;
    explicit Vector(std::size_t n, const T& fill = T()) : d_(n, fill) {}
    Vector(std::initializer_list<T> init) : d_(init) {}

    std::size_t size() const { return d_.size(); }

    T& operator[](std::size_t i) { return at(i); }
    const T& operator[](std::size_t i) const { return at(i); }
    T& at(std::size_t i) {
        if (i >= d_.size()) throw ContractError("vector index out of range");
        return d_[i];
    }
    const T& at(std::size_t i) const {
        if (i >= d_.size()) throw ContractError("vector index out of range");
        return d_[i];
    }

    auto begin() { return d_.begin(); }
    auto end() { return d_.end(); }
    auto begin() const { return d_.begin(); }
    auto end() const { return d_.end(); }

    bool operator==(const Vector& o) const { return d_ == o.d_; }

  private:
    std::vector<T> d_;
};

template <class T>
class Matrix {
  public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols, const T& fill = T())
        : rows_(rows), cols_(cols), d_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<T>> init) {
        rows_ = init.size();
        cols_ = rows_ == 0 ? 0 : init.begin()->size();
        d_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_) throw ContractError("ragged matrix initialiser");
            for (const auto& v : row) d_.push_back(v);
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t i, std::size_t j) { return at(i, j); }
    const T& operator()(std::size_t i, std::size_t j) const { return at(i, j); }
    T& at(std::size_t i, std::size_t j) {
        if (i >= rows_ || j >= cols_) throw ContractError("matrix index out of range");
        return d_[i * cols_ + j];
    }
    const T& at(std::size_t i, std::size_t j) const {
        if (i >= rows_ || j >= cols_) throw ContractError("matrix index out of range");
        return d_[i * cols_ + j];
    }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && d_ == o.d_;
    }

  private:
    std::size_t rows_, cols_;
    std::vector<T> d_;
};

using RVector = Vector<Rational>;
using RMatrix = Matrix<Rational>;
using DVector = Vector<double>;
using DMatrix = Matrix<double>;

// ---------------------------------------------------------------------------
// Exact vector / matrix operations
// ---------------------------------------------------------------------------

template <class T>
Vector<T> mat_vec(const Matrix<T>& A, const Vector<T>& x) {
    if (A.cols() != x.size()) throw ContractError("mat_vec dimension mismatch");
    Vector<T> r(A.rows(), T(0));
    for (std::size_t i = 0; i < A.rows(); ++i) {
        T acc(0);
        for (std::size_t j = 0; j < A.cols(); ++j) acc += A(i, j) * x[j];
        r[i] = acc;
    }
    return r;
}

// A^T v
template <class T>
Vector<T> transpose_vec(const Matrix<T>& A, const Vector<T>& v) {
    if (A.rows() != v.size()) throw ContractError("transpose_vec dimension mismatch");
    Vector<T> r(A.cols(), T(0));
    for (std::size_t j = 0; j < A.cols(); ++j) {
        T acc(0);
        for (std::size_t i = 0; i < A.rows(); ++i) acc += A(i, j) * v[i];
        r[j] = acc;
    }
    return r;
}

template <class T>
T dot(const Vector<T>& a, const Vector<T>& b) {
    if (a.size() != b.size()) throw ContractError("dot dimension mismatch");
    T acc(0);
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

template <class T>
Vector<T> vec_sub(const Vector<T>& a, const Vector<T>& b) {
    if (a.size() != b.size()) throw ContractError("vec_sub dimension mismatch");
    Vector<T> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

template <class T>
Vector<T> vec_add(const Vector<T>& a, const Vector<T>& b) {
    if (a.size() != b.size()) throw ContractError("vec_add dimension mismatch");
    Vector<T> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline RMatrix columns(const RMatrix& A, const std::vector<int>& idx) {
    RMatrix S(A.rows(), idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
        std::size_t c = static_cast<std::size_t>(idx[j]);
        for (std::size_t i = 0; i < A.rows(); ++i) S(i, j) = A(i, c);
    }
    return S;
}

// A_S^T A_S for a column subset.
inline RMatrix gram(const RMatrix& A, const std::vector<int>& idx) {
    RMatrix G(idx.size(), idx.size(), Rational(0));
    for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = a; b < idx.size(); ++b) {
            Rational acc(0);
            for (std::size_t i = 0; i < A.rows(); ++i)
                acc += A(i, static_cast<std::size_t>(idx[a])) * A(i, static_cast<std::size_t>(idx[b]));
            G(a, b) = acc;
            G(b, a) = acc;
        }
    }
    return G;
}

inline RMatrix identity(std::size_t n) {
    RMatrix I(n, n, Rational(0));
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1;
    return I;
}

inline Rational linf_norm(const RVector& v) {
    Rational m(0);
    for (const auto& x : v) {
        Rational a = abs_r(x);
        if (a > m) m = a;
    }
    return m;
}

inline Rational one_norm(const RVector& v) {
    Rational s(0);
    for (const auto& x : v) s += abs_r(x);
    return s;
}

inline Rational two_norm_sq(const RVector& v) {
    Rational s(0);
    for (const auto& x : v) s += x * x;
    return s;
}

inline Rational max_abs(const RMatrix& A) {
    Rational m(0);
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) {
            Rational a = abs_r(A(i, j));
            if (a > m) m = a;
        }
    return m;
}

inline Rational entry_abs_sum(const RMatrix& A) {
    Rational s(0);
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) s += abs_r(A(i, j));
    return s;
}

inline Rational frobenius_sq(const RMatrix& A) {
    Rational s(0);
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) s += A(i, j) * A(i, j);
    return s;
}

// ---------------------------------------------------------------------------
// Truncated norms. Both are floored at 1 so that they can sit inside
// logarithms and denominators without case splits.
// ---------------------------------------------------------------------------

inline Rational truncated_max_norm(const RVector& y, const RMatrix& A) {
    Rational m(1);
    Rational a = max_abs(A);
    if (a > m) m = a;
    Rational b = linf_norm(y);
    if (b > m) m = b;
    return m;
}

inline Rational truncated_one_norm(const RVector& y, const RMatrix& A) {
    Rational m(1);
    Rational a = entry_abs_sum(A);
    if (a > m) m = a;
    Rational b = one_norm(y);
    if (b > m) m = b;
    return m;
}

struct NormReport {
    Rational tmax;
    Rational tone;
    unsigned long bit_size_max = 0;
};

inline NormReport make_norm_report(const RVector& y, const RMatrix& A) {
    NormReport r;
    r.tmax = truncated_max_norm(y, A);
    r.tone = truncated_one_norm(y, A);
    unsigned long b = 0;
    for (const auto& v : y) b = std::max(b, bit_size(v));
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) b = std::max(b, bit_size(A(i, j)));
    r.bit_size_max = b;
    return r;
}

// ---------------------------------------------------------------------------
// Positive definiteness via square-root-free LDL^T. Exact: stays inside the
// rationals, no pivoting (a PD matrix never needs it; a zero/negative pivot
// is the verdict).
// ---------------------------------------------------------------------------

inline bool is_symmetric(const RMatrix& X) {
    if (X.rows() != X.cols()) return false;
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t j = i + 1; j < X.cols(); ++j)
            if (X(i, j) != X(j, i)) return false;
    return true;
}

inline bool posdef(const RMatrix& X) {
    if (!is_symmetric(X)) throw ContractError("posdef needs a symmetric matrix");
    const std::size_t r = X.rows();
    if (r == 0) return true;
    Matrix<Rational> L(r, r, Rational(0));
    std::vector<Rational> d(r, Rational(0));
    for (std::size_t k = 0; k < r; ++k) {
        Rational dk = X(k, k);
        for (std::size_t j = 0; j < k; ++j) dk -= L(k, j) * L(k, j) * d[j];
        if (dk <= 0) return false;
        d[k] = dk;
        L(k, k) = 1;
        for (std::size_t i = k + 1; i < r; ++i) {
            Rational v = X(i, k);
            for (std::size_t j = 0; j < k; ++j) v -= L(i, j) * L(k, j) * d[j];
            L(i, k) = v / dk;
        }
    }
    return true;
}

// Exact Gaussian elimination with partial (first nonzero) pivoting.
inline RVector solve_linear(const RMatrix& X, const RVector& v) {
    if (X.rows() != X.cols()) throw ContractError("solve_linear needs a square matrix");
    if (X.rows() != v.size()) throw ContractError("solve_linear dimension mismatch");
    const std::size_t n = X.rows();
    RMatrix M = X;
    RVector b = v;
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t p = col;
        while (p < n && M(p, col) == 0) ++p;
        if (p == n) throw SolveError("singular system");
        if (p != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(M(p, j), M(col, j));
            std::swap(b[p], b[col]);
        }
        for (std::size_t i = col + 1; i < n; ++i) {
            if (M(i, col) == 0) continue;
            Rational f = M(i, col) / M(col, col);
            M(i, col) = 0;
            for (std::size_t j = col + 1; j < n; ++j) M(i, j) -= f * M(col, j);
            b[i] -= f * b[col];
        }
    }
    RVector x(n, Rational(0));
    for (std::size_t ii = n; ii-- > 0;) {
        Rational acc = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) acc -= M(ii, j) * x[j];
        x[ii] = acc / M(ii, ii);
    }
    return x;
}

// Solve Xw = v for symmetric positive definite X (caller checks via posdef).
inline RVector solve_spd(const RMatrix& X, const RVector& v) {
    if (!is_symmetric(X)) throw ContractError("solve_spd needs a symmetric matrix");
    return solve_linear(X, v);
}

}  // namespace certilasso
