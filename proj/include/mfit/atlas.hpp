#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mfit/discs.hpp"

namespace mfit {

// theta(v) = (1 - |v|^2)^(d+k) for |v| <= 1, else 0.
double bump(const Eigen::VectorXd& v, int k, int d);
double bump_of_norm(double norm, int k, int d);

struct WeightedAtlas {
    std::vector<Disc> discs;
    std::vector<double> weights;  // c_i > 0
    int bump_exponent = 3;        // k
    double radius = 0.0;          // common disc/ball radius
};

// Weights c_i proportional to c_theta times the grid-estimated volume of
// Vor_i intersected with D_i, normalized so the mean of alpha_tilde over
// the disc centers is 1.
WeightedAtlas compute_weights(const std::vector<Disc>& discs, int grid_per_dim, int k);

// alpha_tilde(x) and the per-disc normalized alpha_i(x) for the discs whose
// balls contain x. Empty list with alpha_tilde = 0 outside all balls.
struct PartitionValue {
    double alpha_tilde = 0.0;
    std::vector<std::pair<int, double>> alphas;
};
PartitionValue evaluate_partition(const WeightedAtlas& atlas, const Eigen::VectorXd& x);

// Text serialization; round-trips bit-exactly (17 significant digits).
void write_atlas(std::ostream& out, const WeightedAtlas& atlas);
WeightedAtlas read_atlas(std::istream& in);
void write_atlas_file(const std::string& path, const WeightedAtlas& atlas);
WeightedAtlas read_atlas_file(const std::string& path);

}  // namespace mfit
