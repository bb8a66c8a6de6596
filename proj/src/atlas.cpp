#include "mfit/atlas.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mfit/error.hpp"
#include "mfit/kd_tree.hpp"

namespace mfit {

double bump_of_norm(double norm, int k, int d) {
    if (norm >= 1.0) return 0.0;
    return std::pow(1.0 - norm * norm, d + k);
}

double bump(const Eigen::VectorXd& v, int k, int d) {
    return bump_of_norm(v.norm(), k, d);
}

namespace {

// Centers of a grid_per_dim^d grid over [-1,1]^d, kept if inside the unit
// ball. Shared by the c_theta quadrature and the Voronoi counting.
std::vector<Eigen::VectorXd> unit_ball_grid(int d, int g) {
    std::vector<Eigen::VectorXd> pts;
    std::vector<int> idx(d, 0);
    const double h = 2.0 / g;
    while (true) {
        Eigen::VectorXd v(d);
        for (int a = 0; a < d; ++a) v[a] = -1.0 + (idx[a] + 0.5) * h;
        if (v.norm() <= 1.0) pts.push_back(std::move(v));
        int a = 0;
        while (a < d && ++idx[a] == g) idx[a++] = 0;
        if (a == d) break;
    }
    return pts;
}

}  // namespace

WeightedAtlas compute_weights(const std::vector<Disc>& discs, int grid_per_dim, int k) {
    if (discs.empty()) throw Error("compute_weights: no discs");
    if (grid_per_dim < 2) throw Error("compute_weights: grid too coarse");
    if (k < 3) throw Error("compute_weights: bump exponent must be >= 3");
    const int d = discs[0].dim();
    const int n = discs[0].ambient_dim();
    const double r = discs[0].radius();
    for (const Disc& disc : discs)
        if (disc.dim() != d || disc.ambient_dim() != n || disc.radius() != r)
            throw Error("compute_weights: discs must share d, n and radius");

    const std::vector<Eigen::VectorXd> grid = unit_ball_grid(d, grid_per_dim);
    const double cell = std::pow(2.0 / grid_per_dim, d);

    // c_theta = 1 / integral of theta over the unit ball, same quadrature.
    double theta_mass = 0.0;
    for (const Eigen::VectorXd& v : grid) theta_mass += bump(v, k, d) * cell;
    const double c_theta = 1.0 / theta_mass;

    Eigen::MatrixXd centers(n, discs.size());
    for (size_t i = 0; i < discs.size(); ++i)
        centers.col(static_cast<int>(i)) = discs[i].center();
    KdTree center_tree(centers);

    WeightedAtlas atlas;
    atlas.discs = discs;
    atlas.bump_exponent = k;
    atlas.radius = r;
    atlas.weights.resize(discs.size());
    const double cell_vol = cell * std::pow(r, d);
    for (size_t i = 0; i < discs.size(); ++i) {
        // Only centers within 2r can win the nearest-center comparison.
        const std::vector<int> near =
            center_tree.radius_search(discs[i].center(), 2.0 * r);
        int count = 0;
        for (const Eigen::VectorXd& v : grid) {
            const Eigen::VectorXd x = discs[i].lift(r * v);
            const double own = (x - discs[i].center()).squaredNorm();
            bool mine = true;
            for (int j : near) {
                if (j == static_cast<int>(i)) continue;
                const double d2 = (x - centers.col(j)).squaredNorm();
                if (d2 < own || (d2 == own && j < static_cast<int>(i))) {
                    mine = false;
                    break;
                }
            }
            if (mine) ++count;
        }
        if (count == 0) throw Error("empty Voronoi cell");
        atlas.weights[i] = c_theta * count * cell_vol;
    }

    // Normalize so the mean of alpha_tilde over the centers is 1.
    double mean = 0.0;
    for (const Disc& disc : discs)
        mean += evaluate_partition(atlas, disc.center()).alpha_tilde;
    mean /= double(discs.size());
    if (mean <= 0.0) throw Error("compute_weights: degenerate partition");
    for (double& w : atlas.weights) w /= mean;
    return atlas;
}

PartitionValue evaluate_partition(const WeightedAtlas& atlas, const Eigen::VectorXd& x) {
    PartitionValue out;
    for (size_t i = 0; i < atlas.discs.size(); ++i) {
        const double dist = (x - atlas.discs[i].center()).norm();
        if (dist >= atlas.radius) continue;
        const double a =
            atlas.weights[i] *
            bump_of_norm(dist / atlas.radius, atlas.bump_exponent, atlas.discs[i].dim());
        if (a > 0.0) {
            out.alpha_tilde += a;
            out.alphas.emplace_back(static_cast<int>(i), a);
        }
    }
    if (out.alpha_tilde > 0.0)
        for (auto& [idx, a] : out.alphas) a /= out.alpha_tilde;
    else
        out.alphas.clear();
    return out;
}

namespace {

void put(std::ostream& out, double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf;
}

void put_vector(std::ostream& out, const Eigen::VectorXd& v) {
    for (int i = 0; i < v.size(); ++i) {
        if (i) out << ' ';
        put(out, v[i]);
    }
    out << '\n';
}

Eigen::VectorXd get_vector(std::istream& in, int n, const char* what) {
    std::string line;
    if (!std::getline(in, line)) throw Error(std::string(what) + ": truncated atlas");
    std::istringstream ss(line);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i)
        if (!(ss >> v[i])) throw Error(std::string(what) + ": bad atlas row");
    double extra;
    if (ss >> extra) throw Error(std::string(what) + ": bad atlas row");
    return v;
}

}  // namespace

void write_atlas(std::ostream& out, const WeightedAtlas& atlas) {
    const int d = atlas.discs.empty() ? 0 : atlas.discs[0].dim();
    const int n = atlas.discs.empty() ? 0 : atlas.discs[0].ambient_dim();
    out << "atlas d=" << d << " n=" << n << " r=";
    put(out, atlas.radius);
    out << " k=" << atlas.bump_exponent << " count=" << atlas.discs.size() << '\n';
    for (size_t i = 0; i < atlas.discs.size(); ++i) {
        put_vector(out, atlas.discs[i].center());
        for (int j = 0; j < d; ++j)
            put_vector(out, atlas.discs[i].frame().col(j));
        put(out, atlas.weights[i]);
        out << '\n';
    }
}

WeightedAtlas read_atlas(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error("read_atlas: empty input");
    int d = 0, n = 0, k = 0;
    long count = 0;
    double r = 0.0;
    if (std::sscanf(line.c_str(), "atlas d=%d n=%d r=%lf k=%d count=%ld", &d, &n, &r,
                    &k, &count) != 5)
        throw Error("read_atlas: bad header");
    if (d < 1 || n < d || count < 1) throw Error("read_atlas: bad header");
    WeightedAtlas atlas;
    atlas.radius = r;
    atlas.bump_exponent = k;
    for (long i = 0; i < count; ++i) {
        const Eigen::VectorXd center = get_vector(in, n, "center");
        Eigen::MatrixXd frame(n, d);
        for (int j = 0; j < d; ++j) frame.col(j) = get_vector(in, n, "frame");
        const double w = get_vector(in, 1, "weight")[0];
        atlas.discs.emplace_back(center, frame, r);
        atlas.weights.push_back(w);
    }
    return atlas;
}

void write_atlas_file(const std::string& path, const WeightedAtlas& atlas) {
    std::ofstream out(path);
    if (!out) throw Error("write_atlas_file: cannot open " + path);
    write_atlas(out, atlas);
}

WeightedAtlas read_atlas_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("read_atlas_file: cannot open " + path);
    return read_atlas(in);
}

}  // namespace mfit
