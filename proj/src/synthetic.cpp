#include "mfit/synthetic.hpp"

#include <cmath>

#include "mfit/error.hpp"

namespace mfit {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Eigen::VectorXd embed(int n, std::initializer_list<double> head) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    int i = 0;
    for (double x : head) v[i++] = x;
    return v;
}

class Circle final : public SyntheticManifold {
public:
    Circle(double rho, int n) : rho_(rho), n_(n) {
        if (rho <= 0.0 || n < 2) throw Error("circle: need rho > 0 and ambient dim >= 2");
    }
    int intrinsic_dim() const override { return 1; }
    int ambient_dim() const override { return n_; }
    double reach() const override { return rho_; }
    double volume() const override { return kTwoPi * rho_; }
    std::string kind() const override { return "circle"; }

    Eigen::VectorXd exact_sample(Rng& rng) const override {
        const double t = kTwoPi * rng.next_double();
        return embed(n_, {rho_ * std::cos(t), rho_ * std::sin(t)});
    }
    Eigen::VectorXd exact_project(const Eigen::VectorXd& p) const override {
        const double r = std::hypot(p[0], p[1]);
        if (r < 1e-300) return embed(n_, {rho_, 0.0});
        return embed(n_, {rho_ * p[0] / r, rho_ * p[1] / r});
    }
    Eigen::MatrixXd exact_tangent(const Eigen::VectorXd& p) const override {
        const double r = std::hypot(p[0], p[1]);
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n_, 1);
        t(0, 0) = -p[1] / r;
        t(1, 0) = p[0] / r;
        return t;
    }

private:
    double rho_;
    int n_;
};

class Sphere final : public SyntheticManifold {
public:
    Sphere(double rho, int n) : rho_(rho), n_(n) {
        if (rho <= 0.0 || n < 3) throw Error("sphere: need rho > 0 and ambient dim >= 3");
    }
    int intrinsic_dim() const override { return 2; }
    int ambient_dim() const override { return n_; }
    double reach() const override { return rho_; }
    double volume() const override { return 2.0 * kTwoPi * rho_ * rho_; }
    std::string kind() const override { return "sphere"; }

    Eigen::VectorXd exact_sample(Rng& rng) const override {
        Eigen::Vector3d g;
        do {
            g << rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian();
        } while (g.norm() < 1e-12);
        g *= rho_ / g.norm();
        return embed(n_, {g[0], g[1], g[2]});
    }
    Eigen::VectorXd exact_project(const Eigen::VectorXd& p) const override {
        Eigen::Vector3d h = p.head<3>();
        const double r = h.norm();
        if (r < 1e-300) return embed(n_, {rho_, 0.0, 0.0});
        h *= rho_ / r;
        return embed(n_, {h[0], h[1], h[2]});
    }
    Eigen::MatrixXd exact_tangent(const Eigen::VectorXd& p) const override {
        const Eigen::Vector3d u = p.head<3>().normalized();
        // Pick the coordinate axis least aligned with u, orthogonalize.
        int k = 0;
        u.cwiseAbs().minCoeff(&k);
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e[k] = 1.0;
        const Eigen::Vector3d t1 = (e - e.dot(u) * u).normalized();
        const Eigen::Vector3d t2 = u.cross(t1);
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n_, 2);
        t.block<3, 1>(0, 0) = t1;
        t.block<3, 1>(0, 1) = t2;
        return t;
    }

private:
    double rho_;
    int n_;
};

class FlatTorus final : public SyntheticManifold {
public:
    FlatTorus(double rho, int d, int n) : rho_(rho), d_(d), n_(n) {
        if (rho <= 0.0 || d < 1 || n < 2 * d)
            throw Error("flat torus: need rho > 0 and ambient dim >= 2d");
    }
    int intrinsic_dim() const override { return d_; }
    int ambient_dim() const override { return n_; }
    double reach() const override { return rho_; }
    double volume() const override { return std::pow(kTwoPi * rho_, d_); }
    std::string kind() const override { return "flat-torus"; }

    Eigen::VectorXd exact_sample(Rng& rng) const override {
        Eigen::VectorXd p = Eigen::VectorXd::Zero(n_);
        for (int j = 0; j < d_; ++j) {
            const double t = kTwoPi * rng.next_double();
            p[2 * j] = rho_ * std::cos(t);
            p[2 * j + 1] = rho_ * std::sin(t);
        }
        return p;
    }
    Eigen::VectorXd exact_project(const Eigen::VectorXd& p) const override {
        Eigen::VectorXd q = Eigen::VectorXd::Zero(n_);
        for (int j = 0; j < d_; ++j) {
            const double r = std::hypot(p[2 * j], p[2 * j + 1]);
            if (r < 1e-300) {
                q[2 * j] = rho_;
            } else {
                q[2 * j] = rho_ * p[2 * j] / r;
                q[2 * j + 1] = rho_ * p[2 * j + 1] / r;
            }
        }
        return q;
    }
    Eigen::MatrixXd exact_tangent(const Eigen::VectorXd& p) const override {
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n_, d_);
        for (int j = 0; j < d_; ++j) {
            const double r = std::hypot(p[2 * j], p[2 * j + 1]);
            t(2 * j, j) = -p[2 * j + 1] / r;
            t(2 * j + 1, j) = p[2 * j] / r;
        }
        return t;
    }

private:
    double rho_;
    int d_;
    int n_;
};

// Radial graph over the round sphere: m(u) = rho (1 + eps h(u)) u with
// h(u) = u0 u1 u2. Projection runs Gauss-Newton on the sphere parameter.
class PerturbedSphere final : public SyntheticManifold {
public:
    PerturbedSphere(double rho, double eps, int n) : rho_(rho), eps_(eps), n_(n) {
        if (rho <= 0.0 || n < 3)
            throw Error("perturbed sphere: need rho > 0 and ambient dim >= 3");
        if (std::abs(eps) > 0.2) throw Error("perturbed sphere: |eps| too large");
        reach_ = estimate_reach_numerically();
    }
    int intrinsic_dim() const override { return 2; }
    int ambient_dim() const override { return n_; }
    double reach() const override { return reach_; }
    double volume() const override { return 2.0 * kTwoPi * rho_ * rho_; }
    std::string kind() const override { return "graph-perturbed-sphere"; }

    Eigen::VectorXd exact_sample(Rng& rng) const override {
        Eigen::Vector3d g;
        do {
            g << rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian();
        } while (g.norm() < 1e-12);
        const Eigen::Vector3d m = surface(g.normalized());
        return embed(n_, {m[0], m[1], m[2]});
    }

    Eigen::VectorXd exact_project(const Eigen::VectorXd& p) const override {
        Eigen::Vector3d q = p.head<3>();
        Eigen::Vector3d u = q.norm() < 1e-300 ? Eigen::Vector3d(1, 0, 0) : q.normalized();
        for (int iter = 0; iter < 100; ++iter) {
            Eigen::Matrix<double, 3, 2> J;
            Eigen::Matrix<double, 3, 2> frame = tangent_frame(u);
            J.col(0) = dsurface(u, frame.col(0));
            J.col(1) = dsurface(u, frame.col(1));
            const Eigen::Vector3d res = surface(u) - q;
            const Eigen::Vector2d step =
                (J.transpose() * J).ldlt().solve(-J.transpose() * res);
            u = (u + frame * step).normalized();
            if (step.norm() < 1e-14) break;
        }
        const Eigen::Vector3d m = surface(u);
        return embed(n_, {m[0], m[1], m[2]});
    }

    Eigen::MatrixXd exact_tangent(const Eigen::VectorXd& p) const override {
        const Eigen::Vector3d u = radial_parameter(p.head<3>());
        const Eigen::Matrix<double, 3, 2> frame = tangent_frame(u);
        Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(n_, 2);
        cols.block<3, 1>(0, 0) = dsurface(u, frame.col(0));
        cols.block<3, 1>(0, 1) = dsurface(u, frame.col(1));
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(cols);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n_, 2);
        return q;
    }

private:
    static double h(const Eigen::Vector3d& u) { return u[0] * u[1] * u[2]; }
    static Eigen::Vector3d grad_h(const Eigen::Vector3d& u) {
        return {u[1] * u[2], u[0] * u[2], u[0] * u[1]};
    }
    Eigen::Vector3d surface(const Eigen::Vector3d& u) const {
        return rho_ * (1.0 + eps_ * h(u)) * u;
    }
    // Directional derivative of the surface map along tangent direction t.
    Eigen::Vector3d dsurface(const Eigen::Vector3d& u, const Eigen::Vector3d& t) const {
        const Eigen::Vector3d g = grad_h(u) - grad_h(u).dot(u) * u;
        return rho_ * ((1.0 + eps_ * h(u)) * t + eps_ * g.dot(t) * u);
    }
    static Eigen::Matrix<double, 3, 2> tangent_frame(const Eigen::Vector3d& u) {
        int k = 0;
        u.cwiseAbs().minCoeff(&k);
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e[k] = 1.0;
        Eigen::Matrix<double, 3, 2> f;
        f.col(0) = (e - e.dot(u) * u).normalized();
        f.col(1) = u.cross(f.col(0));
        return f;
    }
    Eigen::Vector3d radial_parameter(const Eigen::Vector3d& p) const {
        // Points on the manifold determine u by direction (radial graph).
        return p.normalized();
    }

    // Federer-criterion sup over a deterministic sample; upper bound on reach.
    double estimate_reach_numerically() const {
        const int count = 600;
        std::vector<Eigen::Vector3d> pts;
        std::vector<Eigen::Matrix<double, 3, 2>> tans;
        pts.reserve(count);
        // Fibonacci sphere covering.
        const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
        for (int i = 0; i < count; ++i) {
            const double z = 1.0 - 2.0 * (i + 0.5) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double t = kTwoPi * i / golden;
            Eigen::Vector3d u(r * std::cos(t), r * std::sin(t), z);
            pts.push_back(surface(u));
            Eigen::Matrix<double, 3, 2> frame = tangent_frame(u);
            Eigen::Matrix<double, 3, 2> cols;
            cols.col(0) = dsurface(u, frame.col(0));
            cols.col(1) = dsurface(u, frame.col(1));
            Eigen::HouseholderQR<Eigen::Matrix<double, 3, 2>> qr(cols);
            Eigen::Matrix<double, 3, 2> q =
                qr.householderQ() * Eigen::Matrix<double, 3, 2>::Identity();
            tans.push_back(q);
        }
        double sup = 0.0;
        for (int a = 0; a < count; ++a) {
            for (int b = 0; b < count; ++b) {
                if (a == b) continue;
                const Eigen::Vector3d v = pts[b] - pts[a];
                const double d2 = v.squaredNorm();
                if (d2 < 1e-24) continue;
                const Eigen::Vector3d nrm = v - tans[a] * (tans[a].transpose() * v);
                sup = std::max(sup, 2.0 * nrm.norm() / d2);
            }
        }
        return sup > 0.0 ? 1.0 / sup : rho_;
    }

    double rho_;
    double eps_;
    int n_;
    double reach_ = 0.0;
};

}  // namespace

std::unique_ptr<SyntheticManifold> make_circle(double rho, int ambient_dim) {
    return std::make_unique<Circle>(rho, ambient_dim);
}
std::unique_ptr<SyntheticManifold> make_sphere(double rho, int ambient_dim) {
    return std::make_unique<Sphere>(rho, ambient_dim);
}
std::unique_ptr<SyntheticManifold> make_flat_torus(double rho, int d, int ambient_dim) {
    return std::make_unique<FlatTorus>(rho, d, ambient_dim);
}
std::unique_ptr<SyntheticManifold> make_perturbed_sphere(double rho, double eps,
                                                         int ambient_dim) {
    return std::make_unique<PerturbedSphere>(rho, eps, ambient_dim);
}

NoisySample sample_noisy(const SyntheticManifold& manifold, const NoiseModel& noise,
                         int count) {
    if (count < 1) throw Error("sample_noisy: count must be >= 1");
    if (noise.sigma < 0.0) throw Error("sample_noisy: sigma must be >= 0");
    const int n = manifold.ambient_dim();
    Rng rng(noise.seed);
    Eigen::MatrixXd clean(n, count), xi(n, count);
    for (int i = 0; i < count; ++i) {
        clean.col(i) = manifold.exact_sample(rng);
        for (int j = 0; j < n; ++j) xi(j, i) = noise.sigma * rng.next_gaussian();
    }
    NoisySample out;
    out.cloud = PointCloud(clean + xi);
    out.clean = PointCloud(std::move(clean));
    out.noise = std::move(xi);
    return out;
}

}  // namespace mfit
