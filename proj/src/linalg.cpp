#include "ia/linalg.hpp"

namespace ia::linalg {

void canonicalize_phase(Eigen::Ref<Eigen::VectorXcd> v) {
    const double floor = 1e-12 * v.norm();
    for (Eigen::Index r = 0; r < v.size(); ++r) {
        const double mag = std::abs(v(r));
        if (mag > floor) {
            v *= std::conj(v(r)) / mag;
            return;
        }
    }
}

Eigen::VectorXcd eig_min(const Eigen::MatrixXcd& hermitian) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hermitian);
    Eigen::VectorXcd v = solver.eigenvectors().col(0);  // eigenvalues ascending
    v.normalize();
    canonicalize_phase(v);
    return v;
}

}  // namespace ia::linalg
