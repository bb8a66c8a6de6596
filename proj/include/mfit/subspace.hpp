#pragma once

#include <Eigen/Dense>
#include <string>

#include "mfit/affine_subspace.hpp"
#include "mfit/point_cloud.hpp"

namespace mfit {

struct SubspaceFit {
    AffineSubspace subspace;
    double residual_mean_square = 0.0;
    Eigen::VectorXd eigenvalues;  // all n, descending
    bool tie_warning = false;     // D-th and D+1-st eigenvalue within 1e-12
};

// Affine PCA: subspace through the centroid spanned by the top-D
// eigenvectors of the centered covariance. Minimizes the sum of squared
// distances among all D-dimensional affine subspaces.
SubspaceFit fit_pca_subspace(const PointCloud& cloud, int D);

struct SigmaEstimate {
    double sigma_hat = 0.0;
    int D_used = 0;
};

// sigma_hat = sqrt(mean_i dist(y_i, S)^2 / (n - D)).
SigmaEstimate estimate_sigma(const PointCloud& cloud, const SubspaceFit& fit);

// A cloud expressed in subspace-intrinsic coordinates, keeping the
// embedding so later stages can lift back to R^n.
struct ProjectedCloud {
    PointCloud coords;          // D-dimensional intrinsic coordinates
    AffineSubspace subspace;

    Eigen::VectorXd lift(const Eigen::VectorXd& c) const { return subspace.lift(c); }
};

ProjectedCloud project_cloud(const PointCloud& cloud, const AffineSubspace& subspace);

// The dimension formula D = floor(V / (omega_d beta^d)) + 1 with
// beta = sqrt((1/10) (a^2 tau/2)^2 (a^2 tau/4)^d (omega_d rho_min / V)),
// capped at n. Constants are unquantified in theory, so this is only a
// suggestion; the pipeline takes D directly.
int suggest_subspace_dim(double volume, int d, double tau, double alpha, int n);

// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

}  // namespace mfit
