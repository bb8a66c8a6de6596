#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mfit/atlas.hpp"
#include "mfit/point_cloud.hpp"
#include "mfit/synthetic.hpp"

namespace mfit {

// The implicit output manifold: zero set of G(x) = Pi_x F(x) inside the
// tube of width domain_margin around the atlas discs.
class OutputManifold {
public:
    OutputManifold(WeightedAtlas atlas, double domain_margin);

    const WeightedAtlas& atlas() const { return atlas_; }
    int ambient_dim() const { return atlas_.discs[0].ambient_dim(); }
    int intrinsic_dim() const { return atlas_.discs[0].dim(); }
    double domain_margin() const { return margin_; }

    // Rank n-d projector onto the complement of disc i's span.
    const Eigen::MatrixXd& local_projector(int i) const { return projectors_[i]; }

    // Index of the disc with the nearest center, ties to lowest index.
    int nearest_disc(const Eigen::VectorXd& x) const;

    bool in_domain(const Eigen::VectorXd& x) const;

private:
    WeightedAtlas atlas_;
    double margin_;
    std::vector<Eigen::MatrixXd> projectors_;
};

// M(x) = sum_i alpha_i(x) Pi^i. Throws "outside atlas domain" when
// alpha_tilde(x) = 0.
Eigen::MatrixXd weighted_projector_field(const OutputManifold& om,
                                         const Eigen::VectorXd& x);

// Orthogonal projector onto the span of the top n-d eigenvectors of a
// symmetric A whose spectrum has a gap at 1/2. Throws "spectral gap
// violated" when an eigenvalue is within 1e-6 of 1/2.
Eigen::MatrixXd spectral_high_projection(const Eigen::MatrixXd& A, int split_rank);

// G(x) = Pi_x F(x) with F(x) = sum_i alpha_i(x) Pi^i (x - p_i).
Eigen::VectorXd residual(const OutputManifold& om, const Eigen::VectorXd& x);

struct ProjectionResult {
    Eigen::VectorXd point_on_manifold;
    int iterations = 0;
    double final_residual = 0.0;
    bool converged = false;
    std::vector<double> step_norms;  // per-iteration Newton step sizes
};

// Newton iteration on the fiber coordinates (complement of the nearest
// disc's span), holding the base coordinate fixed; Jacobian by forward
// differences with step 1e-6 * r.
ProjectionResult project_to_manifold(const OutputManifold& om, const Eigen::VectorXd& x,
                                     double tol, int max_iter);

struct DerivativeReport {
    double first_defect = 0.0;   // max ||d_v G - Pi_x v|| / delta
    double second_norm = 0.0;    // max ||d2_v G|| / delta
    double third_norm = 0.0;     // max ||d3_v G|| / delta
    double delta = 0.0;          // the normalizer r^2 / tau_hat
    int probes_used = 0;
};

// Central finite differences of G along random unit directions, normalized
// by delta = r^2 / tau_hat.
DerivativeReport derivative_diagnostics(const OutputManifold& om,
                                        const PointCloud& probes, double h,
                                        double tau_hat, std::uint64_t seed);

struct OutputGeometry {
    double hausdorff_to_truth = 0.0;
    double reach_lower = 0.0;
    bool reach_infinite = false;
    int failed_projections = 0;
};

// Projects a dense cover of true-manifold samples onto the output manifold,
// then measures two-sided Hausdorff and a sampled Federer reach with
// tangents from the Jacobian null space of G.
OutputGeometry estimate_output_geometry(const OutputManifold& om,
                                        const SyntheticManifold& truth,
                                        int probe_count, std::uint64_t seed);

}  // namespace mfit
