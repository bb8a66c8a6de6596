#include "mfit/distances.hpp"

#include <algorithm>

#include "mfit/error.hpp"
#include "mfit/kd_tree.hpp"

namespace mfit {

double one_sided_dist(const PointCloud& a, const PointCloud& b) {
    if (a.size() == 0 || b.size() == 0)
        throw Error("empty set has no Hausdorff distance");
    if (a.ambient_dim() != b.ambient_dim())
        throw Error("one_sided_dist: ambient dimensions differ");
    KdTree tree(b.matrix());
    double sup2 = 0.0;
    for (int i = 0; i < a.size(); ++i)
        sup2 = std::max(sup2, tree.nearest(a.point(i)).squared_dist);
    return std::sqrt(sup2);
}

double hausdorff(const PointCloud& a, const PointCloud& b) {
    return std::max(one_sided_dist(a, b), one_sided_dist(b, a));
}

double one_sided_dist(const PointCloud& from, const SyntheticManifold& to_manifold) {
    if (from.size() == 0) throw Error("empty set has no Hausdorff distance");
    if (from.ambient_dim() != to_manifold.ambient_dim())
        throw Error("one_sided_dist: ambient dimensions differ");
    double sup = 0.0;
    for (int i = 0; i < from.size(); ++i)
        sup = std::max(sup, to_manifold.distance(from.point(i)));
    return sup;
}

ReachEstimate estimate_reach(const PointCloud& samples,
                             const std::vector<Eigen::MatrixXd>& tangents) {
    const int n = samples.size();
    if (n < 2) throw Error("estimate_reach: need at least 2 points");
    if (static_cast<int>(tangents.size()) != n)
        throw Error("estimate_reach: one tangent frame per point required");
    double sup = 0.0;
    bool any_pair = false;
    for (int a = 0; a < n; ++a) {
        const Eigen::MatrixXd& t = tangents[a];
        for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            const Eigen::VectorXd v = samples.point(b) - samples.point(a);
            const double dist = v.norm();
            if (dist < 1e-12) continue;  // Federer's sup excludes a = b
            any_pair = true;
            const double normal = (v - t * (t.transpose() * v)).norm();
            sup = std::max(sup, 2.0 * normal / (dist * dist));
        }
    }
    if (!any_pair) throw Error("estimate_reach: all point pairs are duplicates");
    ReachEstimate out;
    if (sup == 0.0) {
        out.infinite = true;
    } else {
        out.value = 1.0 / sup;
    }
    return out;
}

}  // namespace mfit
