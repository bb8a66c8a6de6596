#pragma once

#include <Eigen/Dense>

namespace mfit {

// Affine subspace given by a basepoint and an orthonormal k-frame.
class AffineSubspace {
public:
    // Throws Error if frame^T frame deviates from I_k by more than 1e-10
    // in Frobenius norm.
    AffineSubspace(Eigen::VectorXd basepoint, Eigen::MatrixXd frame);

    int ambient_dim() const { return static_cast<int>(frame_.rows()); }
    int dim() const { return static_cast<int>(frame_.cols()); }

    const Eigen::VectorXd& basepoint() const { return basepoint_; }
    const Eigen::MatrixXd& frame() const { return frame_; }

    // Intrinsic coordinates of the orthogonal projection of x.
    Eigen::VectorXd coords(const Eigen::VectorXd& x) const {
        return frame_.transpose() * (x - basepoint_);
    }
    // Inverse embedding of intrinsic coordinates.
    Eigen::VectorXd lift(const Eigen::VectorXd& c) const {
        return basepoint_ + frame_ * c;
    }
    // Orthogonal projection of x onto the subspace, in ambient coordinates.
    Eigen::VectorXd project(const Eigen::VectorXd& x) const { return lift(coords(x)); }

    double distance(const Eigen::VectorXd& x) const { return (x - project(x)).norm(); }

    // The n x n projection matrix F F^T (onto the linear part).
    Eigen::MatrixXd projector() const { return frame_ * frame_.transpose(); }

private:
    Eigen::VectorXd basepoint_;
    Eigen::MatrixXd frame_;
};

}  // namespace mfit
