#include "mfit/refine.hpp"

#include <algorithm>
#include <cmath>

#include "mfit/distances.hpp"
#include "mfit/error.hpp"
#include "mfit/kd_tree.hpp"

namespace mfit {
namespace {

void enumerate_lattice(int axis, double spacing, double radius, Eigen::VectorXd& cur,
                       std::vector<Eigen::VectorXd>& out) {
    const int d = static_cast<int>(cur.size());
    if (axis == d) {
        if (cur.norm() <= radius) out.push_back(cur);
        return;
    }
    const int kmax = static_cast<int>(std::floor(radius / spacing));
    for (int k = -kmax; k <= kmax; ++k) {
        cur[axis] = k * spacing;
        enumerate_lattice(axis + 1, spacing, radius, cur, out);
    }
    cur[axis] = 0.0;
}

}  // namespace

std::vector<Eigen::VectorXd> build_lattice(const Disc& disc, double sigma) {
    const int d = disc.dim();
    const double spacing = 10.0 * sigma;
    const double radius = disc.radius() / 2.0;
    std::vector<Eigen::VectorXd> out;
    if (spacing <= 0.0 || radius < spacing) {
        out.push_back(Eigen::VectorXd::Zero(d));
        return out;
    }
    Eigen::VectorXd cur = Eigen::VectorXd::Zero(d);
    enumerate_lattice(0, spacing, radius, cur, out);
    return out;
}

std::vector<VoronoiCellAverage> average_cells(const Disc& disc,
                                              const std::vector<Eigen::VectorXd>& lattice,
                                              const PointCloud& samples, int min_count) {
    if (lattice.empty()) throw Error("average_cells: empty lattice");
    if (samples.ambient_dim() != disc.ambient_dim())
        throw Error("average_cells: dimension mismatch");
    const double half = disc.radius() / 2.0;
    const int cells = static_cast<int>(lattice.size());
    std::vector<VoronoiCellAverage> acc(cells);
    for (int c = 0; c < cells; ++c) {
        acc[c].lattice_point = lattice[c];
        acc[c].average = Eigen::VectorXd::Zero(disc.ambient_dim());
    }
    for (int i = 0; i < samples.size(); ++i) {
        const Eigen::VectorXd x = samples.point(i);
        const Eigen::VectorXd z1 = disc.coords(x);
        if (z1.norm() > half) continue;
        if ((x - disc.lift(z1)).norm() > half) continue;  // cylinder truncation
        int best = 0;
        double best_d2 = (z1 - lattice[0]).squaredNorm();
        for (int c = 1; c < cells; ++c) {
            const double d2 = (z1 - lattice[c]).squaredNorm();
            if (d2 < best_d2) {
                best = c;
                best_d2 = d2;
            }
        }
        acc[best].count += 1;
        acc[best].average += x;
    }
    std::vector<VoronoiCellAverage> out;
    for (VoronoiCellAverage& cell : acc) {
        if (cell.count < std::max(1, min_count)) continue;
        cell.average /= double(cell.count);
        out.push_back(std::move(cell));
    }
    return out;
}

RefinedNet boost_net(const std::vector<RefinedNet>& candidates, double eps) {
    const int m = static_cast<int>(candidates.size());
    if (m < 3) throw Error("boost_net: need at least 3 candidates");
    for (int j = 0; j < m; ++j) {
        int close = 0;
        for (int i = 0; i < m; ++i)
            if (hausdorff(candidates[i].points, candidates[j].points) <= 2.0 * eps)
                ++close;
        if (7 * close >= 4 * m) return candidates[j];
    }
    throw Error("boosting failed");
}

PointCloud greedy_net(const RefinedNet& net, double separation) {
    if (separation <= 0.0) throw Error("greedy_net: separation must be positive");
    if (net.points.size() == 0) throw Error("greedy_net: empty net");
    std::vector<Eigen::VectorXd> admitted;
    for (int i = 0; i < net.points.size(); ++i) {
        const Eigen::VectorXd p = net.points.point(i);
        bool ok = true;
        for (const Eigen::VectorXd& q : admitted) {
            if ((p - q).norm() < separation / 2.0) {
                ok = false;
                break;
            }
        }
        if (ok) admitted.push_back(p);
    }
    return PointCloud::from_points(admitted);
}

AtlasBuild build_atlas(const PointCloud& net, const PointCloud& raw_samples, double r,
                       int d, double tau_hat, double delta2_budget) {
    if (r <= 0.0 || tau_hat <= 0.0) throw Error("build_atlas: r and tau_hat must be positive");
    AtlasBuild out;
    std::vector<Eigen::VectorXd> survivors;
    KdTree tree(raw_samples.matrix());
    for (int i = 0; i < net.size(); ++i) {
        const Eigen::VectorXd p = net.point(i);
        const std::vector<int> idx = tree.radius_search(p, r);
        Eigen::MatrixXd local(raw_samples.ambient_dim(), idx.size());
        for (size_t j = 0; j < idx.size(); ++j)
            local.col(static_cast<int>(j)) = raw_samples.point(idx[j]);
        try {
            PointCloud cloud(std::move(local));
            auto [disc, report] = find_disc(cloud, p, r, d);
            // Ask the feasibility pass to beat the greedy fit by 4x; an
            // infeasible budget just keeps the FindDisc output.
            const double delta2 =
                std::max(delta2_budget, report.hausdorff_to_points / 4.0);
            FineTuneResult ft = fine_tune_disc(cloud, disc, delta2, 1.0);
            out.max_fit_residual = std::max(out.max_fit_residual, ft.residual_sup);
            out.discs.push_back(std::move(ft.disc));
            survivors.push_back(p);
        } catch (const Error&) {
            out.dropped_centers.push_back(i);
        }
    }
    // A dropped ball counts as covered when its center is within r/2 of a
    // surviving center.
    for (int i : out.dropped_centers) {
        const Eigen::VectorXd p = net.point(i);
        bool covered = false;
        for (const Eigen::VectorXd& q : survivors)
            if ((p - q).norm() <= r / 2.0) {
                covered = true;
                break;
            }
        if (!covered) throw Error("atlas coverage hole");
    }
    if (out.discs.empty()) throw Error("atlas coverage hole");
    return out;
}

}  // namespace mfit
