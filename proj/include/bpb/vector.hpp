#pragma once

#include "bpb/errors.hpp"
#include "bpb/scalar.hpp"

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bpb {

// Element of R^n with the coordinatewise order. Entries are finite; the
// support is read off bit-level zeros, so constructions that are supposed
// to vanish on an index set must write exact zeros there.
template <class S>
class Vec {
public:
    Vec() = default;

    explicit Vec(std::vector<S> entries) : e_(std::move(entries)) { validate(); }

    Vec(std::initializer_list<S> entries) : e_(entries) { validate(); }

    static Vec zeros(std::size_t dim) {
        return Vec(std::vector<S>(checked_dim(dim), S(0)));
    }

    static Vec unit(std::size_t dim, std::size_t k) {
        Vec v = zeros(dim);
        v[k] = S(1);
        return v;
    }

    std::size_t dim() const { return e_.size(); }

    S& operator[](std::size_t i) { return e_[i]; }
    const S& operator[](std::size_t i) const { return e_[i]; }

    const std::vector<S>& entries() const { return e_; }

    auto begin() const { return e_.begin(); }
    auto end() const { return e_.end(); }

    bool operator==(const Vec& o) const { return e_ == o.e_; }

    friend Vec operator+(const Vec& a, const Vec& b) {
        require_same_dim(a, b, "operator+");
        Vec r = a;
        for (std::size_t i = 0; i < r.dim(); ++i) r[i] += b[i];
        return r;
    }

    friend Vec operator-(const Vec& a, const Vec& b) {
        require_same_dim(a, b, "operator-");
        Vec r = a;
        for (std::size_t i = 0; i < r.dim(); ++i) r[i] -= b[i];
        return r;
    }

    friend Vec operator*(const S& c, const Vec& a) {
        Vec r = a;
        for (std::size_t i = 0; i < r.dim(); ++i) r[i] = c * r[i];
        return r;
    }

    Vec scaled_by_inverse(const S& c) const {
        Vec r = *this;
        for (std::size_t i = 0; i < r.dim(); ++i) r[i] = r[i] / c;
        return r;
    }

    static void require_same_dim(const Vec& a, const Vec& b, const std::string& where) {
        if (a.dim() != b.dim()) {
            throw std::invalid_argument(where + ": dimension mismatch " +
                                        std::to_string(a.dim()) + " vs " +
                                        std::to_string(b.dim()));
        }
    }

private:
    static std::size_t checked_dim(std::size_t dim) {
        if (dim == 0) throw std::invalid_argument("Vec: dimension must be >= 1");
        return dim;
    }

    void validate() const {
        checked_dim(e_.size());
        for (const S& x : e_) {
            if (!ScalarTraits<S>::finite(x)) {
                throw std::invalid_argument("Vec: entries must be finite");
            }
        }
    }

    std::vector<S> e_;
};

// Coordinatewise Riesz operations.

template <class S>
Vec<S> meet(const Vec<S>& x, const Vec<S>& y) {
    Vec<S>::require_same_dim(x, y, "meet");
    Vec<S> r = x;
    for (std::size_t i = 0; i < r.dim(); ++i) r[i] = scalar_min(x[i], y[i]);
    return r;
}

template <class S>
Vec<S> join(const Vec<S>& x, const Vec<S>& y) {
    Vec<S>::require_same_dim(x, y, "join");
    Vec<S> r = x;
    for (std::size_t i = 0; i < r.dim(); ++i) r[i] = scalar_max(x[i], y[i]);
    return r;
}

template <class S>
Vec<S> abs(const Vec<S>& x) {
    Vec<S> r = x;
    for (std::size_t i = 0; i < r.dim(); ++i) r[i] = scalar_abs(x[i]);
    return r;
}

template <class S>
Vec<S> pos_part(const Vec<S>& x) {
    Vec<S> r = x;
    for (std::size_t i = 0; i < r.dim(); ++i) r[i] = scalar_max(x[i], S(0));
    return r;
}

template <class S>
Vec<S> neg_part(const Vec<S>& x) {
    Vec<S> r = x;
    for (std::size_t i = 0; i < r.dim(); ++i) r[i] = scalar_max(S(-1) * x[i], S(0));
    return r;
}

template <class S>
std::vector<std::size_t> support(const Vec<S>& x) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < x.dim(); ++i) {
        if (!(x[i] == S(0))) idx.push_back(i);
    }
    return idx;
}

template <class S>
bool nonnegative(const Vec<S>& x) {
    for (std::size_t i = 0; i < x.dim(); ++i) {
        if (x[i] < S(0)) return false;
    }
    return true;
}

// |x| <= |y| coordinatewise.
template <class S>
bool abs_dominated(const Vec<S>& x, const Vec<S>& y) {
    Vec<S>::require_same_dim(x, y, "abs_dominated");
    for (std::size_t i = 0; i < x.dim(); ++i) {
        if (scalar_abs(y[i]) < scalar_abs(x[i])) return false;
    }
    return true;
}

template <class S>
S sup_norm(const Vec<S>& x) {
    S best(0);
    for (std::size_t i = 0; i < x.dim(); ++i) best = scalar_max(best, scalar_abs(x[i]));
    return best;
}

// x restricted to an index mask; excluded coordinates become exact zeros.
template <class S>
Vec<S> restrict_to(const Vec<S>& x, const std::vector<bool>& mask) {
    if (mask.size() != x.dim()) {
        throw std::invalid_argument("restrict_to: mask dimension mismatch");
    }
    Vec<S> r = Vec<S>::zeros(x.dim());
    for (std::size_t i = 0; i < x.dim(); ++i) {
        if (mask[i]) r[i] = x[i];
    }
    return r;
}

template <class S>
Vec<S> indicator(std::size_t dim, const std::vector<std::size_t>& idx) {
    Vec<S> r = Vec<S>::zeros(dim);
    for (std::size_t i : idx) r[i] = S(1);
    return r;
}

inline std::vector<bool> mask_from_indices(std::size_t dim, const std::vector<std::size_t>& idx) {
    std::vector<bool> m(dim, false);
    for (std::size_t i : idx) m[i] = true;
    return m;
}

} // namespace bpb
