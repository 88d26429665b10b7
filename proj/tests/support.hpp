#pragma once

#include "bpb/norm.hpp"
#include "bpb/operator.hpp"
#include "bpb/rng.hpp"

#include <vector>

namespace testsup {

template <class S>
bpb::NormedLattice<S> make_lattice(bpb::NormFamily family, std::size_t dim, double p = 2.0,
                                   bpb::Rng* weight_rng = nullptr) {
    switch (family) {
        case bpb::NormFamily::L1:
            return {dim, bpb::MonotoneNorm<S>::l1()};
        case bpb::NormFamily::Lp:
            return {dim, bpb::MonotoneNorm<S>::lp(p)};
        case bpb::NormFamily::WeightedL1: {
            std::vector<S> w(dim, S(1));
            if (weight_rng) {
                for (auto& wi : w) {
                    wi = bpb::ScalarTraits<S>::from_double(0.5 + 1.5 * weight_rng->dyadic16());
                }
            }
            return {dim, bpb::MonotoneNorm<S>::weighted_l1(std::move(w))};
        }
        case bpb::NormFamily::Sup:
            return {dim, bpb::MonotoneNorm<S>::sup()};
    }
    throw std::logic_error("make_lattice");
}

template <class S>
bpb::Vec<S> random_vec(bpb::Rng& rng, std::size_t dim, double lo = -1.0, double hi = 1.0) {
    bpb::Vec<S> v = bpb::Vec<S>::zeros(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        v[i] = bpb::ScalarTraits<S>::from_double(rng.uniform(lo, hi));
    }
    return v;
}

template <class S>
bpb::Matrix<S> random_nonneg_matrix(bpb::Rng& rng, std::size_t m, std::size_t n) {
    std::vector<S> data(m * n);
    for (auto& x : data) x = bpb::ScalarTraits<S>::from_double(rng.uniform01());
    return bpb::Matrix<S>(m, n, std::move(data));
}

} // namespace testsup
