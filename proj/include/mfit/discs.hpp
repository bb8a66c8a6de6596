#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "mfit/point_cloud.hpp"

namespace mfit {

// d-dimensional disc: center plus an orthonormal d-frame and a radius.
class Disc {
public:
    Disc(Eigen::VectorXd center, Eigen::MatrixXd frame, double radius);

    int ambient_dim() const { return static_cast<int>(frame_.rows()); }
    int dim() const { return static_cast<int>(frame_.cols()); }
    double radius() const { return radius_; }
    const Eigen::VectorXd& center() const { return center_; }
    const Eigen::MatrixXd& frame() const { return frame_; }

    // Intrinsic coordinates of the projection of x onto the disc's plane.
    Eigen::VectorXd coords(const Eigen::VectorXd& x) const {
        return frame_.transpose() * (x - center_);
    }
    Eigen::VectorXd lift(const Eigen::VectorXd& c) const {
        return center_ + frame_ * c;
    }
    // Distance to the (bounded) disc: clamps the in-plane component to the
    // radius before measuring.
    double distance(const Eigen::VectorXd& x) const;

private:
    Eigen::VectorXd center_;
    Eigen::MatrixXd frame_;
    double radius_;
};

struct DiscFitReport {
    double hausdorff_to_points = 0.0;  // sup over local points of dist to disc
    std::vector<int> basis_points;     // indices of the d greedy picks
};

// Algorithm FindDisc: greedily picks a near orthonormal basis from the
// local points (after rescaling the ball to unit radius) and returns the
// disc spanned by it.
std::pair<Disc, DiscFitReport> find_disc(const PointCloud& local,
                                         const Eigen::VectorXd& center, double radius,
                                         int d);

struct FineTuneResult {
    Disc disc;
    bool feasible = false;
    int iterations = 0;
    double residual_sup = 0.0;  // sup over local points of dist to the output disc
};

// Convex feasibility pass: looks for a linear graph map A over the initial
// disc's span with ||A||_2 <= op_norm_budget and per-point residuals within
// 2 * delta2_budget, by alternating projections (cap 500, tolerance 1e-8).
// Infeasibility returns the initial disc with feasible = false.
FineTuneResult fine_tune_disc(const PointCloud& local, const Disc& initial,
                              double delta2_budget, double op_norm_budget);

}  // namespace mfit
