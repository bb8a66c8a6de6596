#include "mfit/kd_tree.hpp"

#include <algorithm>
#include <numeric>

namespace mfit {

KdTree::KdTree(const Eigen::MatrixXd& points) : points_(points) {
    const int n = static_cast<int>(points_.cols());
    if (n == 0) return;
    nodes_.reserve(n);
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    root_ = build(idx, 0, n, 0);
}

int KdTree::build(std::vector<int>& idx, int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % static_cast<int>(points_.rows());
    const int mid = lo + (hi - lo) / 2;
    std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi,
                     [&](int a, int b) {
                         const double va = points_(axis, a), vb = points_(axis, b);
                         return va < vb || (va == vb && a < b);
                     });
    Node node;
    node.point = idx[mid];
    node.axis = axis;
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    const int left = build(idx, lo, mid, depth + 1);
    const int right = build(idx, mid + 1, hi, depth + 1);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
}

KdTree::Nearest KdTree::nearest(const Eigen::VectorXd& query) const {
    Nearest best;
    best.squared_dist = std::numeric_limits<double>::infinity();
    nearest_rec(root_, query, best);
    return best;
}

void KdTree::nearest_rec(int node, const Eigen::VectorXd& q, Nearest& best) const {
    if (node < 0) return;
    const Node& nd = nodes_[node];
    const double d2 = (points_.col(nd.point) - q).squaredNorm();
    if (d2 < best.squared_dist || (d2 == best.squared_dist && nd.point < best.index)) {
        best.squared_dist = d2;
        best.index = nd.point;
    }
    const double delta = q[nd.axis] - points_(nd.axis, nd.point);
    const int near = delta < 0.0 ? nd.left : nd.right;
    const int far = delta < 0.0 ? nd.right : nd.left;
    nearest_rec(near, q, best);
    if (delta * delta <= best.squared_dist) nearest_rec(far, q, best);
}

std::vector<int> KdTree::radius_search(const Eigen::VectorXd& query, double radius) const {
    std::vector<int> out;
    if (root_ >= 0) radius_rec(root_, query, radius * radius, out);
    std::sort(out.begin(), out.end());
    return out;
}

void KdTree::radius_rec(int node, const Eigen::VectorXd& q, double r2,
                        std::vector<int>& out) const {
    if (node < 0) return;
    const Node& nd = nodes_[node];
    if ((points_.col(nd.point) - q).squaredNorm() <= r2) out.push_back(nd.point);
    const double delta = q[nd.axis] - points_(nd.axis, nd.point);
    if (delta < 0.0) {
        radius_rec(nd.left, q, r2, out);
        if (delta * delta <= r2) radius_rec(nd.right, q, r2, out);
    } else {
        radius_rec(nd.right, q, r2, out);
        if (delta * delta <= r2) radius_rec(nd.left, q, r2, out);
    }
}

}  // namespace mfit
