#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace mfit {

// Immutable set of N points in R^n, stored one point per column.
class PointCloud {
public:
    PointCloud() = default;

    // Throws Error if the matrix contains non-finite entries or has zero rows.
    explicit PointCloud(Eigen::MatrixXd points);

    static PointCloud from_points(const std::vector<Eigen::VectorXd>& pts);

    int ambient_dim() const { return static_cast<int>(points_.rows()); }
    int size() const { return static_cast<int>(points_.cols()); }
    bool empty() const { return points_.cols() == 0; }

    Eigen::VectorXd point(int i) const { return points_.col(i); }
    const Eigen::MatrixXd& matrix() const { return points_; }

private:
    Eigen::MatrixXd points_;
};

// Text format: first line "n=<dim> count=<N>", then one point per line with
// space-separated coordinates. Ragged rows are rejected.
PointCloud read_point_cloud(std::istream& in);
PointCloud read_point_cloud_file(const std::string& path);
void write_point_cloud(std::ostream& out, const PointCloud& cloud);
void write_point_cloud_file(const std::string& path, const PointCloud& cloud);

}  // namespace mfit
