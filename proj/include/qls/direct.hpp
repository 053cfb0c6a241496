#ifndef QLS_DIRECT_HPP
#define QLS_DIRECT_HPP

#include "qls/problems.hpp"

#include <optional>

namespace qls {

/// Semi-normal equations RᵀR·x = Aᵀb + c with R from the QR factorization of A.
VectorXd solve_qr(const QlsProblem& p);

/// min‖A_eps·x − b_eps‖ through column-pivoted QR of A_eps.
VectorXd solve_qr_eps(const QlsProblem& p, double eps = 0x1p-47);

/// Sherman–Morrison closed form of (AᵀA + eps²ccᵀ)⁻¹(Aᵀb + c):
/// x = (I − α·w·cᵀ)(A†b + w), w = (AᵀA)⁻¹c, α = eps²/(1 + eps²·cᵀw).
/// eps = 0 gives the exact solution x† + w.
VectorXd solve_sm(const QlsProblem& p, double eps = 0x1p-47);

/// LDLᵀ (Bunch–Kaufman) solve of the scaled augmented system; the scale
/// defaults to σ_min(A)/√2.
VectorXd solve_aug(const QlsProblem& p, std::optional<double> scale = std::nullopt);

}  // namespace qls

#endif  // QLS_DIRECT_HPP
