#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mfit/point_cloud.hpp"
#include "mfit/synthetic.hpp"

namespace mfit {

// sup over columns of a of the distance to the nearest column of b.
// Tree accelerated but exact: equals the brute-force double loop.
double one_sided_dist(const PointCloud& a, const PointCloud& b);

// max(dist(a, b), dist(b, a)). Throws Error on an empty input.
double hausdorff(const PointCloud& a, const PointCloud& b);

// sup over points of the exact projection distance to the manifold.
double one_sided_dist(const PointCloud& from, const SyntheticManifold& to_manifold);

// Sampled Federer criterion: 1 / sup over ordered pairs (a, b) of
// 2 dist(b, Tan(a)) / |b - a|^2. An upper-bound estimator of reach.
struct ReachEstimate {
    double value = 0.0;     // meaningful only when !infinite
    bool infinite = false;  // every pair had dist(b, Tan(a)) = 0
};
ReachEstimate estimate_reach(const PointCloud& samples,
                             const std::vector<Eigen::MatrixXd>& tangents);

}  // namespace mfit
