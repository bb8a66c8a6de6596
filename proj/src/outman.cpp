#include "mfit/outman.hpp"

#include <algorithm>
#include <cmath>

#include "mfit/distances.hpp"
#include "mfit/error.hpp"
#include "mfit/rng.hpp"

namespace mfit {

OutputManifold::OutputManifold(WeightedAtlas atlas, double domain_margin)
    : atlas_(std::move(atlas)), margin_(domain_margin) {
    if (atlas_.discs.empty()) throw Error("output manifold: empty atlas");
    if (margin_ <= 0.0) throw Error("output manifold: domain margin must be positive");
    const int n = atlas_.discs[0].ambient_dim();
    projectors_.reserve(atlas_.discs.size());
    for (const Disc& disc : atlas_.discs)
        projectors_.push_back(Eigen::MatrixXd::Identity(n, n) -
                              disc.frame() * disc.frame().transpose());
}

int OutputManifold::nearest_disc(const Eigen::VectorXd& x) const {
    int best = 0;
    double best_d2 = (x - atlas_.discs[0].center()).squaredNorm();
    for (size_t i = 1; i < atlas_.discs.size(); ++i) {
        const double d2 = (x - atlas_.discs[i].center()).squaredNorm();
        if (d2 < best_d2) {
            best = static_cast<int>(i);
            best_d2 = d2;
        }
    }
    return best;
}

bool OutputManifold::in_domain(const Eigen::VectorXd& x) const {
    for (const Disc& disc : atlas_.discs) {
        if ((x - disc.center()).norm() >= disc.radius()) continue;
        if (disc.distance(x) < margin_) return true;
    }
    return false;
}

Eigen::MatrixXd weighted_projector_field(const OutputManifold& om,
                                         const Eigen::VectorXd& x) {
    const PartitionValue part = evaluate_partition(om.atlas(), x);
    if (part.alpha_tilde <= 0.0) throw Error("outside atlas domain");
    const int n = om.ambient_dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [i, a] : part.alphas) m += a * om.local_projector(i);
    return m;
}

Eigen::MatrixXd spectral_high_projection(const Eigen::MatrixXd& A, int split_rank) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n) throw Error("spectral_high_projection: matrix not square");
    if ((A - A.transpose()).norm() > 1e-8 * std::max(1.0, A.norm()))
        throw Error("spectral_high_projection: matrix not symmetric");
    if (split_rank < 0 || split_rank > n)
        throw Error("spectral_high_projection: bad split rank");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((A + A.transpose()) / 2.0);
    if (es.info() != Eigen::Success)
        throw Error("spectral_high_projection: eigensolver failed");
    const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
    int above = 0;
    for (int i = 0; i < n; ++i) {
        if (std::abs(ev[i] - 0.5) < 1e-6) throw Error("spectral gap violated");
        if (ev[i] > 0.5) ++above;
    }
    if (above != split_rank) throw Error("spectral gap violated");
    const Eigen::MatrixXd top = es.eigenvectors().rightCols(split_rank);
    return top * top.transpose();
}

Eigen::VectorXd residual(const OutputManifold& om, const Eigen::VectorXd& x) {
    const PartitionValue part = evaluate_partition(om.atlas(), x);
    if (part.alpha_tilde <= 0.0) throw Error("outside atlas domain");
    const int n = om.ambient_dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    for (const auto& [i, a] : part.alphas) {
        m += a * om.local_projector(i);
        f += a * (om.local_projector(i) * (x - om.atlas().discs[i].center()));
    }
    const Eigen::MatrixXd pi = spectral_high_projection(m, n - om.intrinsic_dim());
    return pi * f;
}

ProjectionResult project_to_manifold(const OutputManifold& om, const Eigen::VectorXd& x,
                                     double tol, int max_iter) {
    if (tol <= 0.0 || max_iter < 0) throw Error("project_to_manifold: bad parameters");
    const int n = om.ambient_dim();
    const int d = om.intrinsic_dim();
    const int codim = n - d;
    const double r = om.atlas().radius;

    ProjectionResult out;
    out.point_on_manifold = x;
    Eigen::VectorXd g = residual(om, x);
    out.final_residual = g.norm();
    if (out.final_residual < tol) {
        out.converged = true;
        return out;
    }

    // Fiber directions: orthonormal complement of the nearest disc's span.
    const Disc& disc = om.atlas().discs[om.nearest_disc(x)];
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(disc.frame());
    const Eigen::MatrixXd full = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd fiber = full.rightCols(codim);

    const double h = 1e-6 * r;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(codim);
    for (int iter = 0; iter < max_iter; ++iter) {
        const Eigen::VectorXd base = x + fiber * w;
        const Eigen::VectorXd psi = fiber.transpose() * residual(om, base);
        Eigen::MatrixXd jac(codim, codim);
        for (int j = 0; j < codim; ++j) {
            const Eigen::VectorXd shifted =
                fiber.transpose() * residual(om, base + h * fiber.col(j));
            jac.col(j) = (shifted - psi) / h;
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac,
                                              Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd& s = svd.singularValues();
        if (s[s.size() - 1] <= 0.0 || s[0] / s[s.size() - 1] > 1e8)
            throw Error("degenerate fiber Jacobian");
        const Eigen::VectorXd step = svd.solve(-psi);
        w += step;
        out.step_norms.push_back(step.norm());
        out.iterations = iter + 1;
        g = residual(om, x + fiber * w);
        out.final_residual = g.norm();
        if (out.final_residual < tol) {
            out.converged = true;
            break;
        }
    }
    out.point_on_manifold = x + fiber * w;
    return out;
}

DerivativeReport derivative_diagnostics(const OutputManifold& om,
                                        const PointCloud& probes, double h,
                                        double tau_hat, std::uint64_t seed) {
    if (h <= 0.0 || tau_hat <= 0.0)
        throw Error("derivative_diagnostics: bad parameters");
    const int n = om.ambient_dim();
    DerivativeReport rep;
    rep.delta = om.atlas().radius * om.atlas().radius / tau_hat;
    Rng rng(seed);
    for (int p = 0; p < probes.size(); ++p) {
        const Eigen::VectorXd x = probes.point(p);
        Eigen::VectorXd v(n);
        for (int j = 0; j < n; ++j) v[j] = rng.next_gaussian();
        v.normalize();
        try {
            const Eigen::VectorXd g0 = residual(om, x);
            const Eigen::VectorXd gp = residual(om, x + h * v);
            const Eigen::VectorXd gm = residual(om, x - h * v);
            const Eigen::VectorXd gpp = residual(om, x + 2.0 * h * v);
            const Eigen::VectorXd gmm = residual(om, x - 2.0 * h * v);
            const Eigen::MatrixXd m = weighted_projector_field(om, x);
            const Eigen::MatrixXd pi =
                spectral_high_projection(m, n - om.intrinsic_dim());
            const double d1 = ((gp - gm) / (2.0 * h) - pi * v).norm();
            const double d2 = ((gp - 2.0 * g0 + gm) / (h * h)).norm();
            const double d3 =
                ((gpp - 2.0 * gp + 2.0 * gm - gmm) / (2.0 * h * h * h)).norm();
            rep.first_defect = std::max(rep.first_defect, d1 / rep.delta);
            rep.second_norm = std::max(rep.second_norm, d2 / rep.delta);
            rep.third_norm = std::max(rep.third_norm, d3 / rep.delta);
            rep.probes_used += 1;
        } catch (const Error&) {
            // probe left the tube or hit a gap violation; skip it
        }
    }
    return rep;
}

OutputGeometry estimate_output_geometry(const OutputManifold& om,
                                        const SyntheticManifold& truth,
                                        int probe_count, std::uint64_t seed) {
    if (probe_count < 2) throw Error("estimate_output_geometry: need >= 2 probes");
    Rng rng(seed);
    const double r = om.atlas().radius;
    const double tol = 1e-9 * r;
    std::vector<Eigen::VectorXd> truth_pts, mo_pts;
    OutputGeometry out;
    for (int i = 0; i < probe_count; ++i) {
        const Eigen::VectorXd x = truth.exact_sample(rng);
        truth_pts.push_back(x);
        try {
            ProjectionResult pr = project_to_manifold(om, x, tol, 30);
            if (!pr.converged) throw Error("projection did not converge");
            mo_pts.push_back(pr.point_on_manifold);
        } catch (const Error&) {
            out.failed_projections += 1;
        }
    }
    if (out.failed_projections * 100 > probe_count)
        throw Error("manifold evaluation unstable");

    const PointCloud truth_cloud = PointCloud::from_points(truth_pts);
    const PointCloud mo_cloud = PointCloud::from_points(mo_pts);
    out.hausdorff_to_truth = std::max(one_sided_dist(mo_cloud, truth),
                                      one_sided_dist(truth_cloud, mo_cloud));

    // Tangents from the Jacobian null space of G, on a strided subset.
    const int n = om.ambient_dim();
    const int d = om.intrinsic_dim();
    const int cap = 400;
    const int stride = std::max(1, mo_cloud.size() / cap);
    const double h = 1e-6 * r;
    std::vector<Eigen::VectorXd> pts;
    std::vector<Eigen::MatrixXd> tangents;
    for (int i = 0; i < mo_cloud.size(); i += stride) {
        const Eigen::VectorXd x = mo_cloud.point(i);
        try {
            const Eigen::VectorXd g0 = residual(om, x);
            Eigen::MatrixXd jac(n, n);
            for (int j = 0; j < n; ++j) {
                Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
                e[j] = h;
                jac.col(j) = (residual(om, x + e) - g0) / h;
            }
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeFullV);
            pts.push_back(x);
            tangents.push_back(svd.matrixV().rightCols(d));
        } catch (const Error&) {
            // skip points where the Jacobian probe leaves the domain
        }
    }
    if (pts.size() < 2) throw Error("manifold evaluation unstable");
    const ReachEstimate reach = estimate_reach(PointCloud::from_points(pts), tangents);
    out.reach_infinite = reach.infinite;
    out.reach_lower = reach.infinite ? 0.0 : reach.value;
    return out;
}

}  // namespace mfit
