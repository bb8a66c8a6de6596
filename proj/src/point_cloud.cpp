#include "mfit/point_cloud.hpp"

#include <fstream>
#include <sstream>

#include "mfit/error.hpp"

namespace mfit {

PointCloud::PointCloud(Eigen::MatrixXd points) : points_(std::move(points)) {
    if (points_.rows() < 1) throw Error("point cloud: ambient dimension must be >= 1");
    if (!points_.allFinite()) throw Error("point cloud: non-finite coordinate");
}

PointCloud PointCloud::from_points(const std::vector<Eigen::VectorXd>& pts) {
    if (pts.empty()) throw Error("point cloud: empty point list");
    const Eigen::Index n = pts.front().size();
    Eigen::MatrixXd m(n, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].size() != n) throw Error("point cloud: inconsistent point dimensions");
        m.col(static_cast<Eigen::Index>(i)) = pts[i];
    }
    return PointCloud(std::move(m));
}

PointCloud read_point_cloud(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw Error("point cloud file: missing header");
    int n = 0;
    long count = 0;
    if (std::sscanf(header.c_str(), "n=%d count=%ld", &n, &count) != 2)
        throw Error("point cloud file: bad header '" + header + "'");
    if (n < 1 || count < 1) throw Error("point cloud file: bad dimensions in header");

    Eigen::MatrixXd m(n, count);
    std::string line;
    for (long i = 0; i < count; ++i) {
        if (!std::getline(in, line))
            throw Error("point cloud file: expected " + std::to_string(count) + " rows");
        std::istringstream row(line);
        double v;
        int j = 0;
        while (row >> v) {
            if (j >= n) throw Error("point cloud file: ragged row " + std::to_string(i));
            m(j++, i) = v;
        }
        if (j != n) throw Error("point cloud file: ragged row " + std::to_string(i));
    }
    return PointCloud(std::move(m));
}

PointCloud read_point_cloud_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open point cloud file: " + path);
    return read_point_cloud(in);
}

void write_point_cloud(std::ostream& out, const PointCloud& cloud) {
    out << "n=" << cloud.ambient_dim() << " count=" << cloud.size() << "\n";
    char buf[32];
    for (int i = 0; i < cloud.size(); ++i) {
        for (int j = 0; j < cloud.ambient_dim(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", cloud.matrix()(j, i));
            out << (j ? " " : "") << buf;
        }
        out << "\n";
    }
}

void write_point_cloud_file(const std::string& path, const PointCloud& cloud) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write point cloud file: " + path);
    write_point_cloud(out, cloud);
}

}  // namespace mfit
