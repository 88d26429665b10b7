#pragma once

#include "bpb/errors.hpp"
#include "bpb/norm.hpp"
#include "bpb/vector.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace bpb {

// Exact operator norms out of (R^n, sup) enumerate the 2^n sign vectors;
// above this cap the evaluation refuses instead of approximating.
inline constexpr std::size_t kMaxExactNormDim = 22;

template <class S>
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, std::vector<S> data)
        : m_(rows), n_(cols), a_(std::move(data)) {
        if (m_ == 0 || n_ == 0) throw std::invalid_argument("Matrix: dims must be >= 1");
        if (a_.size() != m_ * n_) throw std::invalid_argument("Matrix: data size mismatch");
        for (const S& x : a_) {
            if (!ScalarTraits<S>::finite(x)) {
                throw std::invalid_argument("Matrix: entries must be finite");
            }
        }
    }

    static Matrix zeros(std::size_t rows, std::size_t cols) {
        return Matrix(rows, cols, std::vector<S>(rows * cols, S(0)));
    }

    // Rows as nested lists, row-major.
    static Matrix from_rows(const std::vector<std::vector<S>>& rows) {
        if (rows.empty() || rows.front().empty()) {
            throw std::invalid_argument("Matrix::from_rows: empty");
        }
        const std::size_t n = rows.front().size();
        std::vector<S> data;
        data.reserve(rows.size() * n);
        for (const auto& r : rows) {
            if (r.size() != n) throw std::invalid_argument("Matrix::from_rows: ragged rows");
            data.insert(data.end(), r.begin(), r.end());
        }
        return Matrix(rows.size(), n, std::move(data));
    }

    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }

    S& at(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    const S& at(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    const std::vector<S>& data() const { return a_; }

    bool operator==(const Matrix& o) const {
        return m_ == o.m_ && n_ == o.n_ && a_ == o.a_;
    }

    Vec<S> apply(const Vec<S>& x) const {
        if (x.dim() != n_) {
            throw std::invalid_argument("Matrix::apply: vector dim mismatch");
        }
        Vec<S> y = Vec<S>::zeros(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            S acc(0);
            for (std::size_t j = 0; j < n_; ++j) acc += at(i, j) * x[j];
            y[i] = acc;
        }
        return y;
    }

    Vec<S> column(std::size_t j) const {
        Vec<S> c = Vec<S>::zeros(m_);
        for (std::size_t i = 0; i < m_; ++i) c[i] = at(i, j);
        return c;
    }

    // Image of the indicator of a column subset: sum of the selected columns.
    Vec<S> apply_indicator(const std::vector<bool>& cols) const {
        if (cols.size() != n_) {
            throw std::invalid_argument("Matrix::apply_indicator: mask size mismatch");
        }
        Vec<S> y = Vec<S>::zeros(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            S acc(0);
            for (std::size_t j = 0; j < n_; ++j) {
                if (cols[j]) acc += at(i, j);
            }
            y[i] = acc;
        }
        return y;
    }

    Vec<S> row_sums() const {
        return apply_indicator(std::vector<bool>(n_, true));
    }

    bool nonnegative() const {
        for (const S& x : a_) {
            if (x < S(0)) return false;
        }
        return true;
    }

    friend Matrix operator-(const Matrix& a, const Matrix& b) {
        if (a.m_ != b.m_ || a.n_ != b.n_) {
            throw std::invalid_argument("Matrix::operator-: shape mismatch");
        }
        Matrix r = a;
        for (std::size_t k = 0; k < r.a_.size(); ++k) r.a_[k] -= b.a_[k];
        return r;
    }

    Matrix scaled_by_inverse(const S& c) const {
        Matrix r = *this;
        for (S& x : r.a_) x = x / c;
        return r;
    }

private:
    std::size_t m_ = 0, n_ = 0;
    std::vector<S> a_; // row-major
};

// Entrywise-nonnegative matrix seen as a positive operator from (R^n, sup)
// into a normed lattice. For matrices, positivity (x >= 0 implies Tx >= 0)
// and entrywise nonnegativity coincide.
template <class S>
class PositiveOperator {
public:
    PositiveOperator(Matrix<S> mat, NormedLattice<S> codomain)
        : mat_(std::move(mat)), codomain_(std::move(codomain)) {
        if (mat_.rows() != codomain_.dim()) {
            throw std::invalid_argument("PositiveOperator: rows != codomain dim");
        }
        if (!mat_.nonnegative()) {
            throw PreconditionError("PositiveOperator: matrix has a negative entry");
        }
    }

    const Matrix<S>& matrix() const { return mat_; }
    const NormedLattice<S>& codomain() const { return codomain_; }
    std::size_t domain_dim() const { return mat_.cols(); }

    Vec<S> apply(const Vec<S>& x) const { return mat_.apply(x); }

    PositiveOperator scaled_by_inverse(const S& c) const {
        return PositiveOperator(mat_.scaled_by_inverse(c), codomain_);
    }

private:
    Matrix<S> mat_;
    NormedLattice<S> codomain_;
};

// ||T|| = ||T(1)|| for positive operators out of a sup-norm domain.
template <class S>
S operator_norm_positive(const PositiveOperator<S>& T) {
    return T.codomain().eval(T.matrix().row_sums());
}

// Exact operator norm of an arbitrary (possibly signed) matrix out of
// (R^n, sup): x -> ||Tx|| is convex, so the maximum over the unit ball is
// attained at a vertex sigma in {-1,+1}^n. Vertices are visited in Gray-code
// order with rank-one updates; the winner is re-evaluated from scratch so
// the returned value carries no accumulated drift.
template <class S>
S operator_norm_general(const Matrix<S>& T, const NormedLattice<S>& Y,
                        std::size_t n_max = kMaxExactNormDim) {
    if (T.rows() != Y.dim()) {
        throw std::invalid_argument("operator_norm_general: rows != codomain dim");
    }
    const std::size_t n = T.cols();
    if (n > n_max) {
        throw PreconditionError("operator_norm_general: dimension too large for exact norm (n = " +
                                std::to_string(n) + " > n_max = " + std::to_string(n_max) + ")");
    }

    std::vector<int> sigma(n, 1);
    Vec<S> w = T.row_sums();
    S best = Y.eval(w);
    std::vector<int> best_sigma = sigma;

    const std::uint64_t total = std::uint64_t(1) << n;
    for (std::uint64_t k = 1; k < total; ++k) {
        // Bit that flips between Gray codes of k-1 and k.
        std::size_t j = 0;
        while (((k >> j) & 1u) == 0u) ++j;
        sigma[j] = -sigma[j];
        const S step = S(2 * sigma[j]);
        for (std::size_t i = 0; i < T.rows(); ++i) {
            w[i] += step * T.at(i, j);
        }
        S val = Y.eval(w);
        if (best < val) {
            best = val;
            best_sigma = sigma;
        }
    }

    Vec<S> x = Vec<S>::zeros(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = S(best_sigma[j]);
    return Y.eval(T.apply(x));
}

template <class S>
S operator_distance(const PositiveOperator<S>& A, const PositiveOperator<S>& B,
                    std::size_t n_max = kMaxExactNormDim) {
    return operator_norm_general(A.matrix() - B.matrix(), A.codomain(), n_max);
}

} // namespace bpb
