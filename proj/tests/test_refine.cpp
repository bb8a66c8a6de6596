#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "mfit/distances.hpp"
#include "mfit/error.hpp"
#include "mfit/refine.hpp"
#include "mfit/rng.hpp"
#include "mfit/synthetic.hpp"

using namespace mfit;

namespace {

Disc axis_disc(int n, int d, double radius) {
    Eigen::MatrixXd frame = Eigen::MatrixXd::Zero(n, d);
    for (int j = 0; j < d; ++j) frame(j, j) = 1.0;
    return Disc(Eigen::VectorXd::Zero(n), frame, radius);
}

Eigen::MatrixXd random_rotation(Rng& rng, int n) {
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.next_gaussian();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    if (q.determinant() < 0.0) q.col(0) = -q.col(0);
    return q;
}

RefinedNet net_of(const Eigen::MatrixXd& pts) {
    return RefinedNet{PointCloud{pts}, std::vector<int>(pts.cols(), 1)};
}

}  // namespace

TEST_CASE("lattice for d=1 r_c=1 sigma=0.01") {
    const std::vector<Eigen::VectorXd> lat = build_lattice(axis_disc(3, 1, 1.0), 0.01);
    REQUIRE(lat.size() == 11);
    std::vector<double> xs;
    for (const auto& p : lat) xs.push_back(p[0]);
    std::sort(xs.begin(), xs.end());
    for (int i = 0; i < 11; ++i) CHECK(xs[i] == doctest::Approx(-0.5 + 0.1 * i));
}

TEST_CASE("lattice for d=2 r_c=0.2 sigma=0.01") {
    const std::vector<Eigen::VectorXd> lat = build_lattice(axis_disc(4, 2, 0.2), 0.01);
    CHECK(lat.size() == 5);  // origin plus the four axis neighbors at 0.1
    for (const auto& p : lat) CHECK(p.norm() <= 0.1 + 1e-15);
}

TEST_CASE("lattice collapses to the origin when too coarse") {
    const std::vector<Eigen::VectorXd> lat = build_lattice(axis_disc(3, 1, 0.1), 0.02);
    REQUIRE(lat.size() == 1);
    CHECK(lat[0].norm() == 0.0);
}

TEST_CASE("lattice size respects the paper bound") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 1 + static_cast<int>(rng.next_u64() % 3);
        const double rc = 0.2 + rng.next_double();
        const double sigma = 0.02 + 0.05 * rng.next_double();
        const auto lat = build_lattice(axis_disc(d + 2, d, rc), sigma);
        CHECK(double(lat.size()) <= std::pow(rc / sigma, d) + 1.0);
    }
}

TEST_CASE("a single sample averages to itself") {
    const Disc disc = axis_disc(3, 1, 1.0);
    const auto lat = build_lattice(disc, 0.01);
    Eigen::MatrixXd pts(3, 1);
    pts << 0.12, 0.03, -0.04;
    const auto cells = average_cells(disc, lat, PointCloud{pts}, 1);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].count == 1);
    CHECK((cells[0].average - pts.col(0)).norm() == 0.0);
    CHECK(cells[0].lattice_point[0] == doctest::Approx(0.1));
}

TEST_CASE("symmetric samples average to the lattice lift") {
    const Disc disc = axis_disc(4, 2, 1.0);
    const auto lat = build_lattice(disc, 0.02);
    // pick the innermost lattice point and place a +-w pair around its lift
    Eigen::VectorXd y = lat[0];
    for (const auto& p : lat)
        if (p.norm() < y.norm()) y = p;
    Eigen::VectorXd w(4);
    w << 0.01, -0.02, 0.03, 0.01;
    Eigen::MatrixXd pts(4, 2);
    pts.col(0) = disc.lift(y) + w;
    pts.col(1) = disc.lift(y) - w;
    const auto cells = average_cells(disc, lat, PointCloud{pts}, 1);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].count == 2);
    CHECK((cells[0].average - disc.lift(y)).norm() < 1e-15);
}

TEST_CASE("cell assignment partitions the kept samples") {
    Rng rng(5);
    const Disc disc = axis_disc(5, 2, 0.8);
    const auto lat = build_lattice(disc, 0.02);
    Eigen::MatrixXd pts(5, 400);
    for (int i = 0; i < 400; ++i)
        for (int j = 0; j < 5; ++j) pts(j, i) = 0.5 * rng.next_gaussian();
    const PointCloud cloud{pts};
    int kept = 0;
    for (int i = 0; i < cloud.size(); ++i) {
        const Eigen::VectorXd z1 = disc.coords(cloud.point(i));
        if (z1.norm() <= 0.4 && (cloud.point(i) - disc.lift(z1)).norm() <= 0.4) ++kept;
    }
    const auto cells = average_cells(disc, lat, cloud, 1);
    int total = 0;
    for (const auto& c : cells) total += c.count;
    CHECK(total == kept);
}

TEST_CASE("cell averaging is equivariant under rigid motions") {
    Rng rng(7);
    const int n = 4;
    const Disc disc = axis_disc(n, 2, 0.6);
    const auto lat = build_lattice(disc, 0.015);
    Eigen::MatrixXd pts(n, 300);
    for (int i = 0; i < 300; ++i)
        for (int j = 0; j < n; ++j) pts(j, i) = 0.3 * rng.next_gaussian();
    const auto base = average_cells(disc, lat, PointCloud{pts}, 1);

    const Eigen::MatrixXd q = random_rotation(rng, n);
    Eigen::VectorXd t(n);
    for (int j = 0; j < n; ++j) t[j] = rng.next_gaussian();
    const Disc moved(q * disc.center() + t, q * disc.frame(), disc.radius());
    Eigen::MatrixXd moved_pts = (q * pts).colwise() + t;
    const auto got = average_cells(moved, lat, PointCloud{moved_pts}, 1);

    REQUIRE(got.size() == base.size());
    for (size_t c = 0; c < base.size(); ++c) {
        CHECK(got[c].count == base[c].count);
        CHECK((got[c].average - (q * base[c].average + t)).norm() < 1e-9);
    }
}

TEST_CASE("refined net beats the raw noise on a circle") {
    const double sigma = 0.02;
    const auto circle = make_circle(1.0, 10);
    const NoisySample s = sample_noisy(*circle, NoiseModel{sigma, 11}, 150000);

    // disc tangent to the circle at (1, 0)
    Eigen::VectorXd center = Eigen::VectorXd::Zero(10);
    center[0] = 1.0;
    Eigen::MatrixXd frame = Eigen::MatrixXd::Zero(10, 1);
    frame(1, 0) = 1.0;
    const Disc disc(center, frame, 0.4);

    const auto lat = build_lattice(disc, sigma);
    REQUIRE(lat.size() >= 2);
    const auto cells = average_cells(disc, lat, s.cloud, 5);
    REQUIRE(!cells.empty());
    double worst = 0.0;
    for (const auto& c : cells) worst = std::max(worst, circle->distance(c.average));
    MESSAGE("max cell-average distance to the circle: ", worst);
    CHECK(worst <= 10.0 * sigma * sigma);  // d = 1, tau = 1
    CHECK(worst < sigma);  // strictly better than the raw noise scale
}

TEST_CASE("boosting returns the first candidate when all agree") {
    Rng rng(13);
    Eigen::MatrixXd pts(3, 20);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 3; ++j) pts(j, i) = rng.next_gaussian();
    const std::vector<RefinedNet> cands(5, net_of(pts));
    const RefinedNet got = boost_net(cands, 0.01);
    CHECK((got.points.matrix() - pts).norm() == 0.0);
}

TEST_CASE("boosting picks from the majority cluster") {
    Rng rng(17);
    Eigen::MatrixXd base(2, 30);
    for (int i = 0; i < 30; ++i)
        for (int j = 0; j < 2; ++j) base(j, i) = rng.next_gaussian();
    const double eps = 0.05;
    std::vector<RefinedNet> cands;
    for (int c = 0; c < 7; ++c) {
        Eigen::MatrixXd wobble = base;
        if (c == 2 || c == 5) {
            wobble.array() += 10.0;  // outliers
        } else {
            for (int i = 0; i < 30; ++i)
                for (int j = 0; j < 2; ++j)
                    wobble(j, i) += eps * (2.0 * rng.next_double() - 1.0) / 2.0;
        }
        cands.push_back(net_of(wobble));
    }
    const RefinedNet got = boost_net(cands, eps);
    int close = 0;
    for (int c = 0; c < 7; ++c)
        if (c != 2 && c != 5 &&
            hausdorff(got.points, cands[c].points) <= 2.0 * eps)
            ++close;
    CHECK(close >= 4);
    // planted-cluster property: the winner sits within 3 eps of the cluster
    CHECK(hausdorff(got.points, net_of(base).points) <= 3.0 * eps);
}

TEST_CASE("boosting fails when no candidate has a majority") {
    std::vector<RefinedNet> cands;
    for (int c = 0; c < 4; ++c) {
        Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(2, 3);
        pts.array() += 10.0 * c;
        cands.push_back(net_of(pts));
    }
    CHECK_THROWS_WITH_AS(boost_net(cands, 0.1), "boosting failed", Error);
    cands.resize(2);
    CHECK_THROWS_AS(boost_net(cands, 0.1), Error);
}

TEST_CASE("greedy net traces the documented example") {
    Eigen::MatrixXd pts(1, 11);
    for (int i = 0; i <= 10; ++i) pts(0, i) = 0.1 * i;
    const PointCloud got = greedy_net(net_of(pts), 0.35);
    REQUIRE(got.size() == 6);
    for (int i = 0; i < 6; ++i) CHECK(got.point(i)[0] == doctest::Approx(0.2 * i));
}

TEST_CASE("greedy net of identical points is a single point") {
    Eigen::MatrixXd pts = Eigen::MatrixXd::Ones(3, 7);
    CHECK(greedy_net(net_of(pts), 0.5).size() == 1);
}

TEST_CASE("greedy net has both net properties") {
    Rng rng(19);
    Eigen::MatrixXd pts(3, 200);
    for (int i = 0; i < 200; ++i)
        for (int j = 0; j < 3; ++j) pts(j, i) = rng.next_gaussian();
    const double sep = 0.6;
    const PointCloud net = greedy_net(net_of(pts), sep);
    for (int i = 0; i < net.size(); ++i)
        for (int j = i + 1; j < net.size(); ++j)
            CHECK((net.point(i) - net.point(j)).norm() >= sep / 2.0);
    for (int i = 0; i < 200; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < net.size(); ++j)
            best = std::min(best, (pts.col(i) - net.point(j)).norm());
        CHECK(best < sep / 2.0);
    }
}

TEST_CASE("atlas from a single flat patch is exact") {
    Rng rng(23);
    Eigen::MatrixXd pts(3, 40);
    for (int i = 0; i < 40; ++i) {
        pts.col(i).setZero();
        pts(0, i) = 0.3 * rng.next_gaussian();
        pts(1, i) = 0.3 * rng.next_gaussian();
    }
    Eigen::MatrixXd net(3, 1);
    net.setZero();
    const AtlasBuild built =
        build_atlas(PointCloud{net}, PointCloud{pts}, 0.5, 2, 1.0, 1e-6);
    REQUIRE(built.discs.size() == 1);
    CHECK(built.dropped_centers.empty());
    CHECK(built.max_fit_residual < 1e-9);
    // the fitted plane is the xy-plane: no e3 component in the frame
    CHECK(built.discs[0].frame().row(2).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("atlas discs hug the circle") {
    const auto circle = make_circle(1.0, 4);
    Rng rng(29);
    std::vector<Eigen::VectorXd> samples;
    for (int i = 0; i < 3000; ++i) samples.push_back(circle->exact_sample(rng));
    const PointCloud cloud = PointCloud::from_points(samples);
    const double r = 0.2;
    const PointCloud net = greedy_net(RefinedNet{cloud, {}}, 0.25 * r / 1);
    const AtlasBuild built = build_atlas(net, cloud, r, 1, 1.0, 2.0 * r * r);
    REQUIRE(!built.discs.empty());
    double worst = 0.0;
    for (const Disc& disc : built.discs) {
        for (int t = -50; t <= 50; ++t) {
            Eigen::VectorXd v(1);
            v << r * t / 50.0;
            worst = std::max(worst, circle->distance(disc.lift(v)));
        }
    }
    CHECK(worst <= 10.0 * r * r);
}

TEST_CASE("an uncovered failing center is a coverage hole") {
    Eigen::MatrixXd pts(3, 30);
    Rng rng(31);
    for (int i = 0; i < 30; ++i) {
        pts.col(i).setZero();
        pts(0, i) = rng.next_gaussian();
    }
    Eigen::MatrixXd net(3, 1);
    net.setZero();
    net(2, 0) = 50.0;  // no samples anywhere near this center
    CHECK_THROWS_WITH_AS(
        build_atlas(PointCloud{net}, PointCloud{pts}, 0.5, 1, 1.0, 0.01),
        "atlas coverage hole", Error);
}
