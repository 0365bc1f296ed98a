#pragma once

// Fisher information matrix for vector parameters, the matrix Cramér-Rao
// bound, and congruence transforms between coordinate systems.

#include "qest/expr.hpp"
#include "qest/state_model.hpp"

#include <string>
#include <vector>

namespace qest {

struct QFIMatrix {
    int n = 0;
    RMatrix H;  // symmetric, PSD within a -1e-8 eigenvalue slack
};

// H_{uv} = Tr[rho (L_u L_v + L_v L_u)/2] with per-parameter SLDs.
QFIMatrix qfi_matrix(const StateFamily& fam, const ParamPoint& p);

struct CRBBounds {
    RVector per_parameter;  // (H^-1)_{uu} / M
    RMatrix covariance;     // H^-1 / M
    double condition = 0.0;
    // The scalar bounds are always meaningful; the full matrix bound need not
    // be attainable by any single measurement, so it ships with this caveat.
    std::string note;
};

CRBBounds crb_bounds(const QFIMatrix& info, long measurements);

// Coordinate change: H~ = B H B^T where B_{uv} = d lambda_v / d lambda~_u.
QFIMatrix reparametrize(const QFIMatrix& info, const RMatrix& b);

// Build B by central differences from an expression-defined coordinate map
// lambda_v = map_v(lambda~), evaluated at tilde_point.
RMatrix reparam_from_map(const std::vector<Expr>& coord_map,
                         const std::vector<double>& tilde_point, double step = 1e-5);

}  // namespace qest
