#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>

#include "mfit/point_cloud.hpp"
#include "mfit/rng.hpp"

namespace mfit {

// Analytic test manifold with closed-form sampling, nearest-point
// projection and tangent frames. Sampling is uniform with respect to the
// intrinsic volume (density bounds rho_min = rho_max = 1).
class SyntheticManifold {
public:
    virtual ~SyntheticManifold() = default;

    virtual int intrinsic_dim() const = 0;
    virtual int ambient_dim() const = 0;
    virtual double reach() const = 0;
    virtual double volume() const = 0;
    virtual std::string kind() const = 0;

    virtual Eigen::VectorXd exact_sample(Rng& rng) const = 0;
    virtual Eigen::VectorXd exact_project(const Eigen::VectorXd& p) const = 0;
    // Orthonormal d-frame spanning the tangent space at a manifold point.
    virtual Eigen::MatrixXd exact_tangent(const Eigen::VectorXd& p) const = 0;

    double distance(const Eigen::VectorXd& p) const {
        return (p - exact_project(p)).norm();
    }
};

// Circle of radius rho in the first two coordinates of R^n.
std::unique_ptr<SyntheticManifold> make_circle(double rho, int ambient_dim);

// Round 2-sphere of radius rho in the first three coordinates of R^n.
std::unique_ptr<SyntheticManifold> make_sphere(double rho, int ambient_dim);

// Product of d circles of radius rho (Clifford-style flat torus) in the
// first 2d coordinates of R^n; reach = rho.
std::unique_ptr<SyntheticManifold> make_flat_torus(double rho, int d, int ambient_dim);

// Sphere of radius rho with a radial graph perturbation of relative
// amplitude eps. Projection is by local Gauss-Newton (tolerance 1e-13);
// the reported reach is estimated numerically at construction.
std::unique_ptr<SyntheticManifold> make_perturbed_sphere(double rho, double eps,
                                                         int ambient_dim);

struct NoiseModel {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

// A noisy draw with its provenance kept for oracle-based tests.
struct NoisySample {
    PointCloud cloud;           // observed points y_i = x_i + xi_i
    PointCloud clean;           // the manifold points x_i
    Eigen::MatrixXd noise;      // the Gaussian offsets xi_i, one per column
};

// count i.i.d. samples from the manifold plus spherical Gaussian noise of
// per-coordinate deviation sigma. Deterministic given the model seed.
NoisySample sample_noisy(const SyntheticManifold& manifold, const NoiseModel& noise,
                         int count);

}  // namespace mfit
