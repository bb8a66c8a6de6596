#include "mfit/subspace.hpp"

#include <cmath>

#include "mfit/error.hpp"

namespace mfit {

double unit_ball_volume(int d) {
    return std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

SubspaceFit fit_pca_subspace(const PointCloud& cloud, int D) {
    const int n = cloud.ambient_dim();
    const int count = cloud.size();
    if (D < 0 || D > n) throw Error("fit_pca_subspace: D must be in [0, n]");
    if (count < D + 1) throw Error("fit_pca_subspace: need at least D+1 points");

    const Eigen::VectorXd centroid = cloud.matrix().rowwise().mean();
    const Eigen::MatrixXd centered = cloud.matrix().colwise() - centroid;
    const Eigen::MatrixXd cov = centered * centered.transpose() / double(count);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw Error("fit_pca_subspace: eigensolver failed");

    // Eigen returns ascending order; flip to descending.
    Eigen::VectorXd evals(n);
    Eigen::MatrixXd evecs(n, n);
    for (int j = 0; j < n; ++j) {
        evals[j] = es.eigenvalues()[n - 1 - j];
        evecs.col(j) = es.eigenvectors().col(n - 1 - j);
    }
    // Sign convention: largest-magnitude entry positive.
    for (int j = 0; j < n; ++j) {
        int k = 0;
        evecs.col(j).cwiseAbs().maxCoeff(&k);
        if (evecs(k, j) < 0.0) evecs.col(j) = -evecs.col(j);
    }

    AffineSubspace subspace(centroid, evecs.leftCols(D));
    double rms = 0.0;
    for (int i = 0; i < count; ++i) {
        const double dist = subspace.distance(cloud.point(i));
        rms += dist * dist;
    }
    rms /= double(count);

    SubspaceFit fit{std::move(subspace), rms, std::move(evals), false};
    if (D >= 1 && D < n && std::abs(fit.eigenvalues[D - 1] - fit.eigenvalues[D]) < 1e-12)
        fit.tie_warning = true;
    return fit;
}

SigmaEstimate estimate_sigma(const PointCloud& cloud, const SubspaceFit& fit) {
    const int n = cloud.ambient_dim();
    const int D = fit.subspace.dim();
    if (D >= n) throw Error("no residual directions");
    double mean_sq = 0.0;
    for (int i = 0; i < cloud.size(); ++i) {
        const double dist = fit.subspace.distance(cloud.point(i));
        mean_sq += dist * dist;
    }
    mean_sq /= double(cloud.size());
    return SigmaEstimate{std::sqrt(mean_sq / double(n - D)), D};
}

ProjectedCloud project_cloud(const PointCloud& cloud, const AffineSubspace& subspace) {
    if (cloud.ambient_dim() != subspace.ambient_dim())
        throw Error("project_cloud: ambient dimensions differ");
    Eigen::MatrixXd coords(subspace.dim(), cloud.size());
    for (int i = 0; i < cloud.size(); ++i)
        coords.col(i) = subspace.coords(cloud.point(i));
    return ProjectedCloud{PointCloud(std::move(coords)), subspace};
}

int suggest_subspace_dim(double volume, int d, double tau, double alpha, int n) {
    if (volume <= 0.0 || tau <= 0.0 || alpha <= 0.0 || d < 1)
        throw Error("suggest_subspace_dim: parameters must be positive");
    const double wd = unit_ball_volume(d);
    const double a2t = alpha * alpha * tau;
    const double beta =
        std::sqrt(0.1 * (a2t / 2.0) * (a2t / 2.0) * std::pow(a2t / 4.0, d) * wd / volume);
    const double D = std::floor(volume / (wd * std::pow(beta, d))) + 1.0;
    return static_cast<int>(std::min(double(n), D));
}

}  // namespace mfit
