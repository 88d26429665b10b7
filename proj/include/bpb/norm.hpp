#pragma once

#include "bpb/errors.hpp"
#include "bpb/vector.hpp"

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace bpb {

enum class NormFamily { L1, Lp, WeightedL1, Sup };

inline const char* family_name(NormFamily f) {
    switch (f) {
        case NormFamily::L1: return "l1";
        case NormFamily::Lp: return "lp";
        case NormFamily::WeightedL1: return "weighted_l1";
        case NormFamily::Sup: return "sup";
    }
    return "?";
}

// Lattice norm on R^n: |x| <= |y| coordinatewise implies ||x|| <= ||y||.
// The p-norms are only available over doubles; the exact mode covers the
// families whose norms are rational functions of the entries.
template <class S>
class MonotoneNorm {
public:
    static MonotoneNorm l1() { return MonotoneNorm(NormFamily::L1, 1.0, {}); }

    static MonotoneNorm lp(double p) {
        if (!(p >= 1.0) || !std::isfinite(p)) {
            throw std::invalid_argument("MonotoneNorm::lp: p must be in [1, inf)");
        }
        if (p == 1.0) return l1();
        if constexpr (ScalarTraits<S>::exact) {
            throw std::invalid_argument(
                "MonotoneNorm::lp: p-norms with p > 1 are not available in rational mode");
        }
        return MonotoneNorm(NormFamily::Lp, p, {});
    }

    static MonotoneNorm weighted_l1(std::vector<S> weights) {
        for (const S& w : weights) {
            if (!(w > S(0))) {
                throw std::invalid_argument("MonotoneNorm::weighted_l1: weights must be > 0");
            }
        }
        if (weights.empty()) {
            throw std::invalid_argument("MonotoneNorm::weighted_l1: empty weight vector");
        }
        return MonotoneNorm(NormFamily::WeightedL1, 1.0, std::move(weights));
    }

    static MonotoneNorm sup() { return MonotoneNorm(NormFamily::Sup, 0.0, {}); }

    NormFamily family() const { return family_; }
    double p() const { return p_; }
    const std::vector<S>& weights() const { return weights_; }

    S operator()(const Vec<S>& x) const {
        switch (family_) {
            case NormFamily::L1: {
                S s(0);
                for (std::size_t i = 0; i < x.dim(); ++i) s += scalar_abs(x[i]);
                return s;
            }
            case NormFamily::Lp: {
                if constexpr (ScalarTraits<S>::exact) {
                    throw std::logic_error("p-norm evaluated in rational mode");
                } else {
                    double s = 0.0;
                    for (std::size_t i = 0; i < x.dim(); ++i) {
                        s += std::pow(std::fabs(static_cast<double>(x[i])), p_);
                    }
                    return std::pow(s, 1.0 / p_);
                }
            }
            case NormFamily::WeightedL1: {
                if (weights_.size() != x.dim()) {
                    throw std::invalid_argument("weighted_l1: weight/vector dimension mismatch");
                }
                S s(0);
                for (std::size_t i = 0; i < x.dim(); ++i) s += weights_[i] * scalar_abs(x[i]);
                return s;
            }
            case NormFamily::Sup:
                return sup_norm(x);
        }
        throw std::logic_error("unreachable norm family");
    }

    std::string name() const {
        switch (family_) {
            case NormFamily::L1: return "l1";
            case NormFamily::Lp: {
                std::ostringstream os;
                os << "lp(" << p_ << ")";
                return os.str();
            }
            case NormFamily::WeightedL1: return "weighted_l1";
            case NormFamily::Sup: return "sup";
        }
        return "?";
    }

    bool uniformly_monotone() const { return family_ != NormFamily::Sup; }
    bool strictly_monotone() const { return family_ != NormFamily::Sup; }

private:
    MonotoneNorm(NormFamily f, double p, std::vector<S> w)
        : family_(f), p_(p), weights_(std::move(w)) {}

    NormFamily family_;
    double p_;
    std::vector<S> weights_;
};

// Codomain: R^dim with a monotone norm.
template <class S>
class NormedLattice {
public:
    NormedLattice(std::size_t dim, MonotoneNorm<S> norm)
        : dim_(dim), norm_(std::move(norm)) {
        if (dim_ == 0) throw std::invalid_argument("NormedLattice: dim must be >= 1");
        if (norm_.family() == NormFamily::WeightedL1 && norm_.weights().size() != dim_) {
            throw std::invalid_argument("NormedLattice: weight count != dim");
        }
    }

    std::size_t dim() const { return dim_; }
    const MonotoneNorm<S>& norm() const { return norm_; }

    S eval(const Vec<S>& x) const {
        if (x.dim() != dim_) {
            throw std::invalid_argument("NormedLattice::eval: vector dim " +
                                        std::to_string(x.dim()) + " != lattice dim " +
                                        std::to_string(dim_));
        }
        return norm_(x);
    }

private:
    std::size_t dim_;
    MonotoneNorm<S> norm_;
};

} // namespace bpb
