#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mfit/discs.hpp"
#include "mfit/point_cloud.hpp"

namespace mfit {

struct VoronoiCellAverage {
    Eigen::VectorXd lattice_point;  // disc-intrinsic coordinates
    int count = 0;
    Eigen::VectorXd average;        // ambient mean of the cell's samples
};

struct RefinedNet {
    PointCloud points;
    std::vector<int> per_point_counts;
};

// Lattice Y = B_d(0, r_c/2) intersected with 10 sigma Z^d, in the disc's
// intrinsic coordinates. Returns just the origin when r_c/2 < 10 sigma.
std::vector<Eigen::VectorXd> build_lattice(const Disc& disc, double sigma);

// Assigns each sample to the nearest lattice point in disc coordinates,
// after discarding samples outside the cylinder |z1| <= r_c/2, |z2| <= r_c/2
// around the disc. Cells below min_count samples are dropped.
std::vector<VoronoiCellAverage> average_cells(const Disc& disc,
                                              const std::vector<Eigen::VectorXd>& lattice,
                                              const PointCloud& samples,
                                              int min_count = 1);

// Returns the first candidate within Hausdorff distance 2*eps of at least
// 4/7 of all candidates. Throws "boosting failed" if none qualifies.
RefinedNet boost_net(const std::vector<RefinedNet>& candidates, double eps);

// Greedy pass in input order; a point is admitted iff it is at distance
// >= separation/2 from every point admitted so far.
PointCloud greedy_net(const RefinedNet& net, double separation);

struct AtlasBuild {
    std::vector<Disc> discs;
    std::vector<int> dropped_centers;
    double max_fit_residual = 0.0;
};

// Fits one disc of radius r per net point from the raw samples within r,
// with a fine-tuning pass. A dropped center is legal only when its ball is
// covered by surviving neighbors; otherwise "atlas coverage hole".
AtlasBuild build_atlas(const PointCloud& net, const PointCloud& raw_samples, double r,
                       int d, double tau_hat, double delta2_budget);

}  // namespace mfit
