#pragma once

// Shared helpers for the unit tests: seeded random matrices and states.

#include "qest/linalg.hpp"
#include "qest/rng.hpp"
#include "qest/state_model.hpp"

#include <cmath>

namespace qest::test {

inline CMatrix ginibre(int dim, SplitMix64& rng) {
    CMatrix a(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            a(i, j) = Complex(rng.next_normal(), rng.next_normal()) / std::sqrt(2.0);
        }
    }
    return a;
}

inline CMatrix random_hermitian(int dim, SplitMix64& rng) { return hermitize(ginibre(dim, rng)); }

// Full-rank state with spectrum bounded away from zero.
inline DensityMatrix random_state(int dim, SplitMix64& rng, double floor_weight = 0.05) {
    CMatrix b = ginibre(dim, rng);
    CMatrix a = b * b.adjoint() + floor_weight * CMatrix::Identity(dim, dim);
    a /= a.trace().real();
    return DensityMatrix(hermitize(a));
}

// Hermitian traceless perturbation, a valid tangent direction at any state.
inline CMatrix random_traceless(int dim, SplitMix64& rng) {
    CMatrix h = random_hermitian(dim, rng);
    h -= (h.trace() / static_cast<double>(dim)) * CMatrix::Identity(dim, dim);
    return h;
}

inline double max_abs(const CMatrix& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace qest::test
