#pragma once

// POVMs, Born-rule statistics, classical Fisher information, and the
// measurement that saturates the quantum bound.

#include "qest/rng.hpp"
#include "qest/sld.hpp"
#include "qest/state_model.hpp"

#include <string>
#include <vector>

namespace qest {

// Positive operator-valued measure. Construct through create() so the
// element invariants (PSD within 1e-10, completeness within 1e-8) hold.
struct POVM {
    std::vector<CMatrix> elements;
    std::vector<std::string> labels;

    static POVM create(std::vector<CMatrix> elements, std::vector<std::string> labels = {});

    int dim() const { return static_cast<int>(elements.front().rows()); }
    int size() const { return static_cast<int>(elements.size()); }
};

// p_x = Tr[Pi_x rho], clamped at round-off (entries in [-1e-12, 0) -> 0).
RVector born_probs(const DensityMatrix& rho, const POVM& povm);

struct FisherResult {
    double value = 0.0;
    int skipped = 0;  // outcomes with p_x <= 1e-12, excluded from the sum
};

// F = sum_x (d p_x)^2 / p_x with d p_x = Tr[drho Pi_x]. Outcomes with
// p_x <= 1e-12 are excluded and counted in `skipped` (they signal
// boundary-of-support pathologies the caller should surface).
FisherResult classical_fisher(const StateFamily& fam, const POVM& povm, const ParamPoint& p);
FisherResult classical_fisher(const DensityMatrix& rho, const CMatrix& drho, const POVM& povm);

// Projectors onto the eigenspaces of the SLD (eigenvalues within 1e-8 are
// merged into one projector). This measurement attains F = H. A zero SLD
// collapses to the single-element identity POVM.
POVM optimal_povm(const StateFamily& fam, const ParamPoint& p);

struct EstimatorOp {
    CMatrix op;  // Hermitian
    double at_lambda = 0.0;
};

// O = lambda I + L/H. Unbiased at the working point (Tr[rho O] = lambda)
// with variance Tr[rho O^2] - lambda^2 = 1/H.
EstimatorOp optimal_estimator(const StateFamily& fam, const ParamPoint& p);

// Haar-distributed unitary (Ginibre + QR with the phase convention fixed).
CMatrix haar_unitary(int dim, SplitMix64& rng);

// Rank-1 projective POVM from the columns of a unitary.
POVM projective_povm(const CMatrix& unitary);

// Coarse-grain a POVM by summing elements that share a bin. `assignment`
// maps element index -> bin index in [0, nbins).
POVM bin_povm(const POVM& povm, const std::vector<int>& assignment, int nbins);

}  // namespace qest
