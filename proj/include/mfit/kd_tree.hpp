#pragma once

#include <Eigen/Dense>
#include <vector>

namespace mfit {

// Median-split k-d tree over the columns of a matrix. Queries are exact:
// pruning only discards subtrees that provably cannot contain a closer
// point, so results coincide with the brute-force scan.
class KdTree {
public:
    KdTree() = default;
    explicit KdTree(const Eigen::MatrixXd& points);

    bool empty() const { return nodes_.empty(); }

    // Index of the nearest column and its squared distance.
    struct Nearest {
        int index = -1;
        double squared_dist = 0.0;
    };
    Nearest nearest(const Eigen::VectorXd& query) const;

    // Indices of all columns with |p - query| <= radius.
    std::vector<int> radius_search(const Eigen::VectorXd& query, double radius) const;

private:
    struct Node {
        int point = -1;   // column index
        int axis = 0;
        int left = -1;
        int right = -1;
    };

    int build(std::vector<int>& idx, int lo, int hi, int depth);
    void nearest_rec(int node, const Eigen::VectorXd& q, Nearest& best) const;
    void radius_rec(int node, const Eigen::VectorXd& q, double r2,
                    std::vector<int>& out) const;

    Eigen::MatrixXd points_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace mfit
