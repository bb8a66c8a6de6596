#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "mfit/discs.hpp"
#include "mfit/error.hpp"
#include "mfit/rng.hpp"

using namespace mfit;

namespace {

Eigen::MatrixXd random_frame(Rng& rng, int n, int k) {
    Eigen::MatrixXd g(n, k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) g(i, j) = rng.next_gaussian();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    return qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
}

// Hausdorff distance between two discs by dense sampling of each against
// the exact bounded-disc distance of the other.
double disc_hausdorff(const Disc& a, const Disc& b, Rng& rng, int samples = 4000) {
    double sup = 0.0;
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd va(a.dim()), vb(b.dim());
        // uniform in the unit ball by rejection
        do {
            for (int j = 0; j < a.dim(); ++j) va[j] = 2.0 * rng.next_double() - 1.0;
        } while (va.norm() > 1.0);
        do {
            for (int j = 0; j < b.dim(); ++j) vb[j] = 2.0 * rng.next_double() - 1.0;
        } while (vb.norm() > 1.0);
        sup = std::max(sup, b.distance(a.lift(a.radius() * va)));
        sup = std::max(sup, a.distance(b.lift(b.radius() * vb)));
    }
    return sup;
}

}  // namespace

TEST_CASE("disc distance has the expected closed form") {
    Eigen::MatrixXd frame(3, 2);
    frame << 1, 0, 0, 1, 0, 0;
    Disc disc(Eigen::Vector3d(0, 0, 0), frame, 1.0);
    CHECK(disc.distance(Eigen::Vector3d(0.3, 0.2, 0.5)) == doctest::Approx(0.5));
    // Beyond the rim: distance to the rim point.
    const double got = disc.distance(Eigen::Vector3d(2.0, 0.0, 1.0));
    CHECK(got == doctest::Approx(std::sqrt(1.0 + 1.0)));
}

TEST_CASE("disc rejects bad frames") {
    Eigen::MatrixXd f(3, 2);
    f << 1, 1, 0, 1, 0, 0;
    CHECK_THROWS_AS(Disc(Eigen::Vector3d::Zero(), f, 1.0), Error);
    Eigen::MatrixXd ok(3, 1);
    ok << 1, 0, 0;
    CHECK_THROWS_AS(Disc(Eigen::Vector3d::Zero(), ok, 0.0), Error);
}

TEST_CASE("find_disc recovers an exactly sampled disc") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 5;
        const int d = 1 + static_cast<int>(rng.next_u64() % 3);
        Eigen::VectorXd center(n);
        for (int j = 0; j < n; ++j) center[j] = rng.next_gaussian();
        const Eigen::MatrixXd frame = random_frame(rng, n, d);
        const double radius = 0.5 + rng.next_double();
        const Disc truth(center, frame, radius);

        Eigen::MatrixXd pts(n, 40);
        for (int i = 0; i < 40; ++i) {
            Eigen::VectorXd v(d);
            do {
                for (int j = 0; j < d; ++j) v[j] = 2.0 * rng.next_double() - 1.0;
            } while (v.norm() > 1.0);
            pts.col(i) = truth.lift(radius * v);
        }
        const auto [disc, report] = find_disc(PointCloud{pts}, center, radius, d);
        CHECK(report.hausdorff_to_points < 1e-10);
        CHECK(disc_hausdorff(disc, truth, rng, 2000) < 1e-9);
        CHECK((disc.frame().transpose() * disc.frame() -
               Eigen::MatrixXd::Identity(d, d))
                  .norm() < 1e-10);
    }
}

TEST_CASE("find_disc on a slightly tilted pair of points") {
    const double eps = 0.01;
    Eigen::MatrixXd pts(2, 2);
    pts << 1.0, -1.0, eps, -eps;
    const auto [disc, report] =
        find_disc(PointCloud{pts}, Eigen::Vector2d(0, 0), 1.0, 1);
    Eigen::MatrixXd axis(2, 1);
    axis << 1, 0;
    const Disc x_axis(Eigen::Vector2d(0, 0), axis, 1.0);
    // Closed form: co-centered unit segments at angle theta are at
    // Hausdorff distance 2 sin(theta/2), achieved at the endpoints.
    const double theta = std::atan(eps);
    const double expect = 2.0 * std::sin(theta / 2.0);
    Rng rng(5);
    const double got = disc_hausdorff(disc, x_axis, rng, 4000);
    CHECK(got <= 3.0 * eps);
    CHECK(got == doctest::Approx(expect).epsilon(0.05));
}

TEST_CASE("find_disc error paths") {
    // the center itself is part of the local cloud, so only one point spans
    Eigen::MatrixXd two(3, 2);
    two << 0, 1, 0, 0, 0, 0;
    CHECK_THROWS_WITH_AS(find_disc(PointCloud{two}, Eigen::Vector3d::Zero(), 1.0, 2),
                         "insufficient local points", Error);

    // Collinear points cannot span a 2-disc.
    Eigen::MatrixXd line(3, 5);
    for (int i = 0; i < 5; ++i) {
        line.col(i).setZero();
        line(0, i) = 0.2 * (i + 1);
    }
    CHECK_THROWS_WITH_AS(find_disc(PointCloud{line}, Eigen::Vector3d::Zero(), 1.5, 2),
                         "degenerate basis", Error);
}

TEST_CASE("find_disc is independent of input order") {
    Rng rng(7);
    const int n = 4, d = 2;
    Eigen::VectorXd center = Eigen::VectorXd::Zero(n);
    const Eigen::MatrixXd frame = random_frame(rng, n, d);
    const Disc truth(center, frame, 1.0);
    Eigen::MatrixXd pts(n, 25);
    for (int i = 0; i < 25; ++i) {
        Eigen::VectorXd v(d);
        for (int j = 0; j < d; ++j) v[j] = rng.next_gaussian();
        v *= (0.2 + 0.75 * rng.next_double()) / v.norm();
        Eigen::VectorXd noise(n);
        for (int j = 0; j < n; ++j) noise[j] = 1e-3 * rng.next_gaussian();
        pts.col(i) = truth.lift(v) + noise;
    }
    const auto [base, base_rep] = find_disc(PointCloud{pts}, center, 1.0, d);

    std::vector<int> perm(25);
    std::iota(perm.begin(), perm.end(), 0);
    for (int shuffle = 0; shuffle < 20; ++shuffle) {
        for (int i = 24; i > 0; --i)
            std::swap(perm[i], perm[rng.next_u64() % (i + 1)]);
        Eigen::MatrixXd shuffled(n, 25);
        for (int i = 0; i < 25; ++i) shuffled.col(i) = pts.col(perm[i]);
        const auto [disc, rep] = find_disc(PointCloud{shuffled}, center, 1.0, d);
        CHECK((disc.frame() * disc.frame().transpose() -
               base.frame() * base.frame().transpose())
                  .norm() < 1e-9);
    }
}

TEST_CASE("find_disc guarantee over randomized perturbed discs") {
    Rng rng(11);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 1 + trial % 3;
        const int n = d + 2;
        const double delta = (0.02 + 0.4 * rng.next_double()) / (2.0 * d);
        Eigen::VectorXd center = Eigen::VectorXd::Zero(n);
        const Disc truth(center, random_frame(rng, n, d), 1.0);

        Eigen::MatrixXd pts(n, 30 * d);
        for (int i = 0; i < pts.cols(); ++i) {
            Eigen::VectorXd v(d);
            do {
                for (int j = 0; j < d; ++j) v[j] = 2.0 * rng.next_double() - 1.0;
            } while (v.norm() > 1.0);
            Eigen::VectorXd off(n);
            for (int j = 0; j < n; ++j) off[j] = rng.next_gaussian();
            off *= delta * rng.next_double() / off.norm();
            pts.col(i) = truth.lift(v) + off;
        }
        const auto [disc, rep] = find_disc(PointCloud{pts}, center, 1.0, d);
        const double ratio = disc_hausdorff(disc, truth, rng, 1000) / (d * delta);
        worst = std::max(worst, ratio);
    }
    MESSAGE("max d_H / (d delta) over 100 trials: ", worst);
    CHECK(worst <= 100.0);
}

TEST_CASE("fine tune keeps an exactly fitted disc") {
    Rng rng(13);
    const Disc truth(Eigen::Vector3d::Zero(), random_frame(rng, 3, 2), 1.0);
    Eigen::MatrixXd pts(3, 20);
    for (int i = 0; i < 20; ++i) {
        Eigen::Vector2d v(rng.next_gaussian(), rng.next_gaussian());
        v *= 0.8 * rng.next_double() / v.norm();
        pts.col(i) = truth.lift(v);
    }
    const FineTuneResult res = fine_tune_disc(PointCloud{pts}, truth, 0.1, 0.2);
    CHECK(res.feasible);
    CHECK(res.iterations == 0);  // A = 0 already satisfies everything
    CHECK(res.residual_sup < 1e-10);
}

TEST_CASE("fine tune reaches the grid-search optimum on a tilted line") {
    // Points on the line y = s x, initial disc along the x axis.
    const double s = 0.05;
    Eigen::MatrixXd pts(2, 21);
    for (int i = 0; i <= 20; ++i) {
        // stay inside the rim so distances are pure plane distances
        const double x = 0.9 * (-1.0 + 0.1 * i);
        pts.col(i) << x, s * x;
    }
    Eigen::MatrixXd axis(2, 1);
    axis << 1, 0;
    const Disc initial(Eigen::Vector2d(0, 0), axis, 1.0);

    // Oracle: dense 1-parameter search over tilt angles for the best
    // sup-distance delta2.
    double delta2 = std::numeric_limits<double>::infinity();
    for (int t = -500; t <= 500; ++t) {
        const double ang = 0.25 * t / 500.0;
        Eigen::MatrixXd f(2, 1);
        f << std::cos(ang), std::sin(ang);
        const Disc cand(Eigen::Vector2d(0, 0), f, 1.0);
        double sup = 0.0;
        for (int i = 0; i < pts.cols(); ++i)
            sup = std::max(sup, cand.distance(pts.col(i)));
        delta2 = std::min(delta2, sup);
    }

    const FineTuneResult res =
        fine_tune_disc(PointCloud{pts}, initial, std::max(delta2, 1e-6), 2.0 * s);
    CHECK(res.feasible);
    CHECK(res.residual_sup <= 2.0 * std::max(delta2, 1e-6) + 1e-8);
    CHECK((res.disc.frame().transpose() * res.disc.frame() -
           Eigen::MatrixXd::Identity(1, 1))
              .norm() < 1e-10);
}

TEST_CASE("fine tune flags infeasibility at zero budget") {
    Rng rng(17);
    const Disc initial(Eigen::Vector3d::Zero(), random_frame(rng, 3, 1), 1.0);
    Eigen::MatrixXd pts(3, 10);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 3; ++j) pts(j, i) = 0.5 * rng.next_gaussian();
    const FineTuneResult res = fine_tune_disc(PointCloud{pts}, initial, 0.0, 1.0);
    CHECK(!res.feasible);
}

TEST_CASE("fine tune never exceeds twice the budget when feasible") {
    Rng rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 4, d = 2;
        const Disc truth(Eigen::VectorXd::Zero(n), random_frame(rng, n, d), 1.0);
        const double noise = 0.02 * rng.next_double();
        Eigen::MatrixXd pts(n, 30);
        for (int i = 0; i < 30; ++i) {
            Eigen::VectorXd v(d);
            do {
                for (int j = 0; j < d; ++j) v[j] = 2.0 * rng.next_double() - 1.0;
            } while (v.norm() > 1.0);
            Eigen::VectorXd off(n);
            for (int j = 0; j < n; ++j) off[j] = noise * rng.next_gaussian();
            pts.col(i) = truth.lift(v) + off;
        }
        const PointCloud cloud{pts};
        const auto [initial, rep] = find_disc(cloud, Eigen::VectorXd::Zero(n), 1.0, d);
        const double budget = std::max(rep.hausdorff_to_points, 1e-9);
        const FineTuneResult res =
            fine_tune_disc(cloud, initial, budget, 2.0 * budget);
        if (res.feasible) CHECK(res.residual_sup <= 2.0 * budget + 1e-7);
    }
}

TEST_CASE("fine tune rejects mismatched dimensions") {
    Rng rng(23);
    const Disc initial(Eigen::Vector3d::Zero(), random_frame(rng, 3, 1), 1.0);
    Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(2, 5);
    CHECK_THROWS_AS(fine_tune_disc(PointCloud{pts}, initial, 0.1, 0.1), Error);
}
