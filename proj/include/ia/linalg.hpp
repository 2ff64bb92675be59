/**
 * @file linalg.hpp
 * @brief Small deterministic linear-algebra helpers shared across modules.
 */
#pragma once

#include <Eigen/Dense>

namespace ia::linalg {

/// Multiplies the vector by a unit phase so its first non-negligible entry is
/// real positive; removes the unit-phase ambiguity of eigen/singular vectors.
void canonicalize_phase(Eigen::Ref<Eigen::VectorXcd> v);

/// Unit eigenvector of the smallest eigenvalue of a Hermitian matrix, phase
/// canonicalized. For the zero matrix this returns the first coordinate axis
/// (the deterministic convention used throughout).
Eigen::VectorXcd eig_min(const Eigen::MatrixXcd& hermitian);

}  // namespace ia::linalg
