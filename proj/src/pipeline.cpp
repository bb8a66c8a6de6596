#include "mfit/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <thread>

#include "mfit/distances.hpp"
#include "mfit/error.hpp"
#include "mfit/kd_tree.hpp"
#include "mfit/refine.hpp"
#include "mfit/subspace.hpp"

namespace mfit {

namespace {

double to_double(const std::string& v, const std::string& key) {
    size_t pos = 0;
    double x;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw Error("config: bad value for " + key);
    }
    if (pos != v.size()) throw Error("config: bad value for " + key);
    return x;
}

long to_long(const std::string& v, const std::string& key) {
    size_t pos = 0;
    long x;
    try {
        x = std::stol(v, &pos);
    } catch (const std::exception&) {
        throw Error("config: bad value for " + key);
    }
    if (pos != v.size()) throw Error("config: bad value for " + key);
    return x;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void set_config_key(PipelineConfig& cfg, const std::string& key,
                    const std::string& value) {
    if (key == "kind") cfg.kind = value;
    else if (key == "d") cfg.d = static_cast<int>(to_long(value, key));
    else if (key == "n") cfg.n = static_cast<int>(to_long(value, key));
    else if (key == "rho") cfg.rho = to_double(value, key);
    else if (key == "perturb_eps") cfg.perturb_eps = to_double(value, key);
    else if (key == "sigma") cfg.sigma = to_double(value, key);
    else if (key == "N0") cfg.N0 = static_cast<int>(to_long(value, key));
    else if (key == "N2") cfg.N2 = static_cast<int>(to_long(value, key));
    else if (key == "D") cfg.D = static_cast<int>(to_long(value, key));
    else if (key == "alpha") cfg.alpha = to_double(value, key);
    else if (key == "r_p") cfg.r_p = to_double(value, key);
    else if (key == "r_c") cfg.r_c = to_double(value, key);
    else if (key == "r") cfg.r = to_double(value, key);
    else if (key == "auto_r_C") cfg.auto_r_C = to_double(value, key);
    else if (key == "k") cfg.k = static_cast<int>(to_long(value, key));
    else if (key == "candidates") cfg.candidates = static_cast<int>(to_long(value, key));
    else if (key == "grid_per_dim") cfg.grid_per_dim = static_cast<int>(to_long(value, key));
    else if (key == "min_cell_count") cfg.min_cell_count = static_cast<int>(to_long(value, key));
    else if (key == "net_c") cfg.net_c = to_double(value, key);
    else if (key == "boost_eps_factor") cfg.boost_eps_factor = to_double(value, key);
    else if (key == "delta2_c") cfg.delta2_c = to_double(value, key);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_long(value, key));
    else if (key == "newton_tol_factor") cfg.newton_tol_factor = to_double(value, key);
    else if (key == "newton_max_iter") cfg.newton_max_iter = static_cast<int>(to_long(value, key));
    else if (key == "probe_count") cfg.probe_count = static_cast<int>(to_long(value, key));
    else if (key == "deriv_probes") cfg.deriv_probes = static_cast<int>(to_long(value, key));
    else if (key == "deriv_h_factor") cfg.deriv_h_factor = to_double(value, key);
    else if (key == "query_count") cfg.query_count = static_cast<int>(to_long(value, key));
    else if (key == "out_dir") cfg.out_dir = value;
    else throw Error("config: unknown key " + key);
}

PipelineConfig parse_config(std::istream& in) {
    PipelineConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        const size_t b = line.find_last_not_of(" \t\r");
        line = line.substr(a, b - a + 1);
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("config: line " + std::to_string(lineno) + " is not key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        size_t vs = value.find_first_not_of(" \t");
        value = vs == std::string::npos ? "" : value.substr(vs);
        set_config_key(cfg, key, value);
    }
    return cfg;
}

PipelineConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("config: cannot open " + path);
    return parse_config(in);
}

std::unique_ptr<SyntheticManifold> make_manifold(const PipelineConfig& cfg) {
    if (cfg.kind == "circle") return make_circle(cfg.rho, cfg.n);
    if (cfg.kind == "sphere") return make_sphere(cfg.rho, cfg.n);
    if (cfg.kind == "flat-torus") return make_flat_torus(cfg.rho, cfg.d, cfg.n);
    if (cfg.kind == "perturbed-sphere")
        return make_perturbed_sphere(cfg.rho, cfg.perturb_eps, cfg.n);
    throw Error("config: unknown manifold kind " + cfg.kind);
}

namespace {

class StageClock {
public:
    explicit StageClock(std::vector<std::pair<std::string, double>>& sink)
        : sink_(sink) {}
    template <class F>
    auto run(const std::string& name, F&& f) -> decltype(f()) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            auto result = f();
            record(name, t0);
            return result;
        } catch (const Error& e) {
            record(name, t0);
            throw Error(name + " stage: " + e.what());
        }
    }
    void record(const std::string& name,
                std::chrono::steady_clock::time_point t0) {
        const auto t1 = std::chrono::steady_clock::now();
        sink_.emplace_back(name,
                           std::chrono::duration<double>(t1 - t0).count());
    }

private:
    std::vector<std::pair<std::string, double>>& sink_;
};

}  // namespace

PipelineReport run_pipeline(const PipelineConfig& raw_cfg) {
    PipelineConfig cfg = raw_cfg;
    if (cfg.sigma < 0.0) throw Error("config: sigma must be >= 0");
    if (cfg.d < 1 || cfg.n <= cfg.d) throw Error("config: need 1 <= d < n");
    if (cfg.N0 < 10 || cfg.N2 < 10) throw Error("config: sample counts too small");
    if (cfg.candidates < 1) throw Error("config: candidates must be >= 1");

    std::unique_ptr<SyntheticManifold> truth = make_manifold(cfg);
    if (truth->intrinsic_dim() != cfg.d || truth->ambient_dim() != cfg.n)
        throw Error("config: d/n inconsistent with manifold kind");
    const double tau = truth->reach();
    const double volume = truth->volume();

    if (cfg.D == 0)
        cfg.D = suggest_subspace_dim(volume, cfg.d, tau, cfg.alpha, cfg.n);
    if (cfg.D <= cfg.d || cfg.D > cfg.n)
        throw Error("config: need d < D <= n");
    if (cfg.r_c == 0.0) cfg.r_c = tau / (8.0 * cfg.d * cfg.d);
    if (cfg.r_p == 0.0) cfg.r_p = 2.0 * cfg.r_c;
    // The Voronoi strips are ~ net_c r / (2d) wide, so the grid cells must
    // be finer than that or aliasing can starve a disc of grid points.
    if (cfg.grid_per_dim == 0) cfg.grid_per_dim = std::max(12, 48 / cfg.d);

    PipelineReport rep;
    StageClock clock(rep.stage_seconds);
    Rng master(cfg.seed);

    // Stage 1: PCA subspace and noise scale.
    const NoisySample x0 = clock.run("subspace", [&] {
        return sample_noisy(*truth, NoiseModel{cfg.sigma, master.fork(1).next_u64()},
                            cfg.N0);
    });
    SubspaceFit fit = fit_pca_subspace(x0.cloud, cfg.D);
    if (cfg.D < cfg.n) {
        rep.sigma_hat = estimate_sigma(x0.cloud, fit).sigma_hat;
    } else {
        rep.sigma_hat = cfg.sigma;  // no residual directions at D = n
    }
    rep.sigma_eff = std::max(rep.sigma_hat, 1e-3 * cfg.r_c);
    rep.D_used = cfg.D;

    if (cfg.r == 0.0) cfg.r = cfg.auto_r_C * std::sqrt(double(cfg.d)) * rep.sigma_eff;
    if (!(cfg.r < cfg.r_c && cfg.r_c < cfg.r_p))
        throw Error("config: radii must satisfy r < r_c < r_p");

    // Stage 2: putative discs in the projected D-coordinates, where the
    // out-of-subspace noise is already gone. Each center is recentered at
    // its neighborhood mean so the later cylinder truncation stays
    // symmetric around the manifold.
    std::vector<Disc> putative = clock.run("discs", [&] {
        const ProjectedCloud proj = project_cloud(x0.cloud, fit.subspace);
        RefinedNet all{proj.coords, {}};
        const PointCloud centers = greedy_net(all, cfg.r_c / 2.0);
        KdTree tree(proj.coords.matrix());
        std::vector<Disc> discs;
        for (int i = 0; i < centers.size(); ++i) {
            const Eigen::VectorXd c = centers.point(i);
            const std::vector<int> idx = tree.radius_search(c, cfg.r_c);
            if (idx.empty()) continue;
            Eigen::MatrixXd local(cfg.D, idx.size());
            for (size_t j = 0; j < idx.size(); ++j)
                local.col(static_cast<int>(j)) = proj.coords.point(idx[j]);
            const Eigen::VectorXd mean = local.rowwise().mean();
            try {
                PointCloud cloud(std::move(local));
                auto [disc, report] = find_disc(cloud, mean, cfg.r_c, cfg.d);
                const double budget = std::max(cfg.delta2_c * cfg.r_c * cfg.r_c / tau,
                                               report.hausdorff_to_points);
                FineTuneResult ft = fine_tune_disc(cloud, disc, budget,
                                                   2.0 * report.hausdorff_to_points);
                discs.push_back(std::move(ft.disc));
            } catch (const Error&) {
                // center with too few or degenerate neighbors; neighbors cover it
            }
        }
        if (discs.empty()) throw Error("no putative disc could be fitted");
        return discs;
    });
    rep.putative_discs = static_cast<int>(putative.size());

    // Stage 3: refined net by cell averaging, optionally boosted.
    RefinedNet rnet = clock.run("refine", [&] {
        std::vector<RefinedNet> cands;
        const int per = std::max(10, cfg.N2 / cfg.candidates);
        for (int j = 0; j < cfg.candidates; ++j) {
            const NoisySample x2 = sample_noisy(
                *truth, NoiseModel{cfg.sigma, master.fork(100 + j).next_u64()}, per);
            const ProjectedCloud p2 = project_cloud(x2.cloud, fit.subspace);
            std::vector<Eigen::VectorXd> pts;
            std::vector<int> counts;
            for (const Disc& disc : putative) {
                const std::vector<Eigen::VectorXd> lattice =
                    build_lattice(disc, rep.sigma_eff);
                for (const VoronoiCellAverage& cell :
                     average_cells(disc, lattice, p2.coords, cfg.min_cell_count)) {
                    // back to ambient coordinates for the net
                    pts.push_back(fit.subspace.lift(cell.average));
                    counts.push_back(cell.count);
                }
            }
            if (pts.empty()) throw Error("refined net is empty");
            cands.push_back(RefinedNet{PointCloud::from_points(pts), counts});
        }
        if (cfg.candidates >= 3) {
            const double eps =
                cfg.boost_eps_factor * cfg.d * rep.sigma_eff * rep.sigma_eff / tau;
            return boost_net(cands, eps);
        }
        return cands[0];
    });
    rep.rnet_size = rnet.points.size();
    rep.rnet_max_dist = one_sided_dist(rnet.points, *truth);
    rep.rnet = rnet.points;

    // Stage 4: greedy net, atlas discs and partition weights.
    WeightedAtlas watlas = clock.run("atlas", [&] {
        const PointCloud x3 = greedy_net(rnet, cfg.net_c * cfg.r / cfg.d);
        AtlasBuild built = build_atlas(x3, rnet.points, cfg.r, cfg.d, tau,
                                       cfg.delta2_c * cfg.r * cfg.r / tau);
        return compute_weights(built.discs, cfg.grid_per_dim, cfg.k);
    });
    rep.atlas_size = static_cast<int>(watlas.discs.size());
    rep.atlas = watlas;

    // Stage 5: output manifold and its measured geometry.
    clock.run("outman", [&] {
        OutputManifold om(watlas, cfg.net_c * cfg.r / cfg.d);
        const double tol = cfg.newton_tol_factor * cfg.r;

        const OutputGeometry geo = estimate_output_geometry(
            om, *truth, cfg.probe_count, master.fork(7).next_u64());
        rep.hausdorff_to_truth = geo.hausdorff_to_truth;
        rep.reach_estimate = geo.reach_lower;
        rep.reach_infinite = geo.reach_infinite;

        // Residual magnitude over true-manifold samples.
        Rng probe_rng = master.fork(8);
        for (int i = 0; i < cfg.probe_count; ++i) {
            const Eigen::VectorXd x = truth->exact_sample(probe_rng);
            try {
                rep.max_residual_on_truth =
                    std::max(rep.max_residual_on_truth, residual(om, x).norm());
            } catch (const Error&) {
            }
        }

        // Derivative diagnostics at points pulled onto the output manifold.
        Rng deriv_rng = master.fork(9);
        std::vector<Eigen::VectorXd> dprobes;
        for (int i = 0; i < cfg.deriv_probes && static_cast<int>(dprobes.size()) <
                                                     cfg.deriv_probes;
             ++i) {
            const Eigen::VectorXd x = truth->exact_sample(deriv_rng);
            try {
                ProjectionResult pr = project_to_manifold(om, x, tol, cfg.newton_max_iter);
                if (pr.converged) dprobes.push_back(pr.point_on_manifold);
            } catch (const Error&) {
            }
        }
        if (!dprobes.empty()) {
            const DerivativeReport dr = derivative_diagnostics(
                om, PointCloud::from_points(dprobes), cfg.deriv_h_factor * cfg.r, tau,
                master.fork(19).next_u64());
            rep.deriv_first = dr.first_defect;
            rep.deriv_second = dr.second_norm;
            rep.deriv_third = dr.third_norm;
        }

        // Denoising queries: noisy draws pulled back onto the manifold.
        const NoisySample queries = sample_noisy(
            *truth, NoiseModel{cfg.sigma, master.fork(11).next_u64()}, cfg.query_count);
        std::vector<double> raw;
        int converged = 0, within12 = 0, attempted = 0;
        for (int i = 0; i < cfg.query_count; ++i) {
            const Eigen::VectorXd y = queries.cloud.point(i);
            raw.push_back(truth->distance(y));
            // Pull the query into the tube before Newton: clamp onto the
            // nearest disc first.
            const Disc& disc = om.atlas().discs[om.nearest_disc(y)];
            Eigen::VectorXd c = disc.coords(y);
            const double cn = c.norm();
            if (cn > 0.9 * disc.radius()) c *= 0.9 * disc.radius() / cn;
            const Eigen::VectorXd q0 = disc.lift(c);
            ++attempted;
            try {
                ProjectionResult pr =
                    project_to_manifold(om, q0, tol, cfg.newton_max_iter);
                if (pr.converged) {
                    ++converged;
                    if (pr.iterations <= 12) ++within12;
                    rep.newton_max_iters_seen =
                        std::max(rep.newton_max_iters_seen, pr.iterations);
                    for (size_t s = 1; s < pr.step_norms.size(); ++s) {
                        const double prev = pr.step_norms[s - 1];
                        if (prev > 1e-14)
                            rep.newton_step_ratio =
                                std::max(rep.newton_step_ratio,
                                         pr.step_norms[s] / (prev * prev));
                    }
                    rep.denoised_max_dist =
                        std::max(rep.denoised_max_dist,
                                 truth->distance(pr.point_on_manifold));
                }
            } catch (const Error&) {
            }
        }
        if (attempted > 0)
            rep.newton_converged_fraction = double(within12) / double(attempted);
        std::sort(raw.begin(), raw.end());
        rep.raw_noise_median = raw[raw.size() / 2];
        return 0;
    });

    rep.config = cfg;
    return rep;
}

const char* kCsvSchema = "schema=1";

std::string csv_header() {
    return std::string("# ") + kCsvSchema +
           "\nkind,d,n,sigma,D,N0,N2,r,r_c,sigma_hat,putative_discs,rnet_size,"
           "atlas_size,hausdorff,reach,max_residual,rnet_max_dist,"
           "raw_noise_median,denoised_max_dist,deriv1,deriv2,deriv3,"
           "newton_step_ratio,newton_conv_frac\n";
}

std::string csv_row(const PipelineReport& rep) {
    std::ostringstream out;
    const PipelineConfig& c = rep.config;
    out << c.kind << ',' << c.d << ',' << c.n << ',' << fmt(c.sigma) << ','
        << rep.D_used << ',' << c.N0 << ',' << c.N2 << ',' << fmt(c.r) << ','
        << fmt(c.r_c) << ',' << fmt(rep.sigma_hat) << ',' << rep.putative_discs
        << ',' << rep.rnet_size << ',' << rep.atlas_size << ','
        << fmt(rep.hausdorff_to_truth) << ','
        << (rep.reach_infinite ? "inf" : fmt(rep.reach_estimate)) << ','
        << fmt(rep.max_residual_on_truth) << ',' << fmt(rep.rnet_max_dist) << ','
        << fmt(rep.raw_noise_median) << ',' << fmt(rep.denoised_max_dist) << ','
        << fmt(rep.deriv_first) << ',' << fmt(rep.deriv_second) << ','
        << fmt(rep.deriv_third) << ',' << fmt(rep.newton_step_ratio) << ','
        << fmt(rep.newton_converged_fraction) << '\n';
    return out.str();
}

SweepResult sweep(const PipelineConfig& base, const std::string& param,
                  const std::vector<double>& values, bool parallel) {
    if (param != "sigma" && param != "N0" && param != "N2" && param != "D" &&
        param != "k")
        throw Error("sweep: parameter not sweepable: " + param);
    const size_t m = values.size();
    std::vector<std::string> rows(m);
    std::vector<double> haus(m, -1.0);
    auto one = [&](size_t i) {
        PipelineConfig cfg = base;
        set_config_key(cfg, param, fmt(values[i]));
        try {
            const PipelineReport rep = run_pipeline(cfg);
            rows[i] = csv_row(rep);
            haus[i] = rep.hausdorff_to_truth;
        } catch (const Error& e) {
            rows[i] = std::string("# failed ") + param + "=" + fmt(values[i]) +
                      ": " + e.what() + "\n";
        }
    };
    if (parallel) {
        std::vector<std::thread> workers;
        for (size_t i = 0; i < m; ++i) workers.emplace_back(one, i);
        for (std::thread& t : workers) t.join();
    } else {
        for (size_t i = 0; i < m; ++i) one(i);
    }
    SweepResult out;
    std::vector<double> log_v, log_h;
    for (size_t i = 0; i < m; ++i) {
        out.rows.push_back(rows[i]);
        if (values[i] > 0.0 && haus[i] > 0.0) {
            log_v.push_back(std::log(values[i]));
            log_h.push_back(std::log(haus[i]));
        }
    }
    if (log_v.size() >= 2) {
        const size_t m = log_v.size();
        double mv = 0.0, mh = 0.0;
        for (size_t i = 0; i < m; ++i) {
            mv += log_v[i];
            mh += log_h[i];
        }
        mv /= double(m);
        mh /= double(m);
        double num = 0.0, den = 0.0;
        for (size_t i = 0; i < m; ++i) {
            num += (log_v[i] - mv) * (log_h[i] - mh);
            den += (log_v[i] - mv) * (log_v[i] - mv);
        }
        if (den > 0.0) {
            out.slope = num / den;
            out.slope_valid = true;
        }
    }
    return out;
}

}  // namespace mfit
