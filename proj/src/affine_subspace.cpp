#include "mfit/affine_subspace.hpp"

#include "mfit/error.hpp"

namespace mfit {

AffineSubspace::AffineSubspace(Eigen::VectorXd basepoint, Eigen::MatrixXd frame)
    : basepoint_(std::move(basepoint)), frame_(std::move(frame)) {
    if (frame_.rows() != basepoint_.size())
        throw Error("affine subspace: frame/basepoint dimension mismatch");
    // k = 0 is legal: the degenerate subspace is just the basepoint.
    if (frame_.cols() > frame_.rows())
        throw Error("affine subspace: frame dimension out of range");
    const Eigen::MatrixXd gram = frame_.transpose() * frame_;
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(frame_.cols(), frame_.cols());
    if ((gram - eye).norm() >= 1e-10)
        throw Error("affine subspace: frame not orthonormal");
}

}  // namespace mfit
