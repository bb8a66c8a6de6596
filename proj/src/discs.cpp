#include "mfit/discs.hpp"

#include <algorithm>
#include <cmath>

#include "mfit/error.hpp"

namespace mfit {

Disc::Disc(Eigen::VectorXd center, Eigen::MatrixXd frame, double radius)
    : center_(std::move(center)), frame_(std::move(frame)), radius_(radius) {
    if (radius_ <= 0.0) throw Error("disc: radius must be positive");
    if (frame_.rows() != center_.size() || frame_.cols() < 1 ||
        frame_.cols() > frame_.rows())
        throw Error("disc: frame shape invalid");
    const int d = static_cast<int>(frame_.cols());
    const Eigen::MatrixXd gram = frame_.transpose() * frame_;
    if ((gram - Eigen::MatrixXd::Identity(d, d)).norm() >= 1e-10)
        throw Error("disc: frame is not orthonormal");
}

double Disc::distance(const Eigen::VectorXd& x) const {
    Eigen::VectorXd c = coords(x);
    const double norm = c.norm();
    if (norm > radius_) c *= radius_ / norm;
    return (x - lift(c)).norm();
}

std::pair<Disc, DiscFitReport> find_disc(const PointCloud& local,
                                         const Eigen::VectorXd& center, double radius,
                                         int d) {
    const int amb = local.ambient_dim();
    if (center.size() != amb) throw Error("find_disc: center dimension mismatch");
    if (radius <= 0.0) throw Error("find_disc: radius must be positive");
    if (d < 1 || d > amb) throw Error("find_disc: d out of range");

    // Rescale the ball to unit radius; drop points coincident with the center.
    std::vector<int> usable;
    std::vector<Eigen::VectorXd> u;
    for (int i = 0; i < local.size(); ++i) {
        Eigen::VectorXd v = (local.point(i) - center) / radius;
        if (v.norm() < 1e-12) continue;
        usable.push_back(i);
        u.push_back(std::move(v));
    }
    if (static_cast<int>(usable.size()) < d) throw Error("insufficient local points");

    std::vector<int> picked;            // positions into u
    std::vector<Eigen::VectorXd> dirs;  // unit vectors x_j / |x_j|
    std::vector<char> taken(u.size(), 0);
    for (int m = 0; m < d; ++m) {
        int best = -1;
        double best_score = 0.0;
        for (int j = 0; j < static_cast<int>(u.size()); ++j) {
            if (taken[j]) continue;
            double score = std::abs(1.0 - u[j].norm());
            for (const Eigen::VectorXd& dir : dirs)
                score = std::max(score, std::abs(dir.dot(u[j])));
            if (best < 0 || score < best_score) {
                best = j;
                best_score = score;
            }
        }
        taken[best] = 1;
        picked.push_back(best);
        dirs.push_back(u[best].normalized());
    }

    Eigen::MatrixXd basis(amb, d);
    for (int m = 0; m < d; ++m) basis.col(m) = u[picked[m]];
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
    const Eigen::MatrixXd rmat =
        qr.matrixQR().topRows(d).template triangularView<Eigen::Upper>();
    for (int m = 0; m < d; ++m)
        if (std::abs(rmat(m, m)) < 1e-10) throw Error("degenerate basis");
    const Eigen::MatrixXd frame =
        qr.householderQ() * Eigen::MatrixXd::Identity(amb, d);

    Disc disc(center, frame, radius);
    DiscFitReport report;
    for (int m = 0; m < d; ++m) report.basis_points.push_back(usable[picked[m]]);
    for (int i = 0; i < local.size(); ++i)
        report.hausdorff_to_points =
            std::max(report.hausdorff_to_points, disc.distance(local.point(i)));
    return {std::move(disc), std::move(report)};
}

FineTuneResult fine_tune_disc(const PointCloud& local, const Disc& initial,
                              double delta2_budget, double op_norm_budget) {
    const int amb = initial.ambient_dim();
    const int d = initial.dim();
    if (local.ambient_dim() != amb) throw Error("fine_tune_disc: dimension mismatch");
    if (delta2_budget < 0.0 || op_norm_budget < 0.0)
        throw Error("fine_tune_disc: budgets must be nonnegative");
    const int codim = amb - d;
    if (codim == 0) {
        FineTuneResult out{initial, true, 0, 0.0};
        for (int i = 0; i < local.size(); ++i)
            out.residual_sup = std::max(out.residual_sup, initial.distance(local.point(i)));
        return out;
    }

    // Complete the disc frame to an orthonormal basis of R^amb.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(initial.frame());
    const Eigen::MatrixXd full =
        qr.householderQ() * Eigen::MatrixXd::Identity(amb, amb);
    const Eigen::MatrixXd W = initial.frame();
    const Eigen::MatrixXd N = full.rightCols(codim);

    const int count = local.size();
    Eigen::MatrixXd z1(d, count), z2(codim, count);
    for (int i = 0; i < count; ++i) {
        const Eigen::VectorXd rel = local.point(i) - initial.center();
        z1.col(i) = W.transpose() * rel;
        z2.col(i) = N.transpose() * rel;
    }

    const double slab = 2.0 * delta2_budget;
    const double tol = 1e-8;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(codim, d);

    auto max_violation = [&](const Eigen::MatrixXd& a) {
        double v = std::max(0.0, a.jacobiSvd().singularValues()[0] - op_norm_budget);
        for (int i = 0; i < count; ++i)
            v = std::max(v, (a * z1.col(i) - z2.col(i)).norm() - slab);
        return v;
    };

    int iter = 0;
    bool feasible = max_violation(A) <= tol;
    while (!feasible && iter < 500) {
        ++iter;
        // Sweep the per-point residual slabs.
        for (int i = 0; i < count; ++i) {
            const double n1 = z1.col(i).squaredNorm();
            if (n1 < 1e-24) continue;  // constraint does not depend on A
            const Eigen::VectorXd res = A * z1.col(i) - z2.col(i);
            const double rn = res.norm();
            if (rn > slab) A -= ((rn - slab) / rn / n1) * res * z1.col(i).transpose();
        }
        // Clip the operator norm.
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(
            A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        Eigen::VectorXd s = svd.singularValues();
        if (s.size() > 0 && s[0] > op_norm_budget) {
            for (int k = 0; k < s.size(); ++k) s[k] = std::min(s[k], op_norm_budget);
            A = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
        }
        feasible = max_violation(A) <= tol;
    }

    FineTuneResult out{initial, feasible, iter, 0.0};
    if (feasible) {
        // Plane of the graph z2 = A z1, orthonormalized.
        Eigen::MatrixXd cols = W + N * A;
        Eigen::HouseholderQR<Eigen::MatrixXd> pq(cols);
        const Eigen::MatrixXd frame =
            pq.householderQ() * Eigen::MatrixXd::Identity(amb, d);
        out.disc = Disc(initial.center(), frame, initial.radius());
    }
    for (int i = 0; i < count; ++i)
        out.residual_sup = std::max(out.residual_sup, out.disc.distance(local.point(i)));
    return out;
}

}  // namespace mfit
