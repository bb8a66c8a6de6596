#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mfit/error.hpp"
#include "mfit/outman.hpp"
#include "mfit/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

mfit::PipelineConfig load_config(const std::string& path, std::uint64_t seed,
                                 bool seed_set, const std::string& out_dir) {
    mfit::PipelineConfig cfg;
    if (!path.empty()) cfg = mfit::parse_config_file(path);
    if (seed_set) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    // Environment override applies to the output directory only.
    if (const char* env = std::getenv("MANIFIT_OUT_DIR")) cfg.out_dir = env;
    return cfg;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw mfit::Error("cannot open " + path);
    out << text;
}

int run_fit(const std::string& config_path, std::uint64_t seed, bool seed_set,
            const std::string& out_dir) {
    const mfit::PipelineConfig cfg = load_config(config_path, seed, seed_set, out_dir);
    const mfit::PipelineReport rep = mfit::run_pipeline(cfg);
    std::filesystem::create_directories(rep.config.out_dir);
    const std::string base = rep.config.out_dir + "/";
    write_text(base + "metrics.csv", mfit::csv_header() + mfit::csv_row(rep));
    mfit::write_atlas_file(base + "atlas.txt", rep.atlas);
    {
        std::ofstream out(base + "rnet.txt");
        if (!out) throw mfit::Error("cannot open " + base + "rnet.txt");
        mfit::write_point_cloud(out, rep.rnet);
    }
    {
        std::ostringstream t;
        for (const auto& [name, secs] : rep.stage_seconds)
            t << name << ' ' << secs << "\n";
        write_text(base + "timings.txt", t.str());
    }
    std::cout << mfit::csv_header() << mfit::csv_row(rep);
    return 0;
}

int run_sweep(const std::string& config_path, std::uint64_t seed, bool seed_set,
              const std::string& out_dir, const std::string& param,
              const std::vector<double>& values, bool parallel) {
    const mfit::PipelineConfig cfg = load_config(config_path, seed, seed_set, out_dir);
    const mfit::SweepResult res = mfit::sweep(cfg, param, values, parallel);
    std::ostringstream out;
    out << mfit::csv_header();
    for (const std::string& row : res.rows) out << row;
    if (res.slope_valid) out << "# slope=" << res.slope << "\n";
    std::filesystem::create_directories(cfg.out_dir);
    write_text(cfg.out_dir + "/sweep.csv", out.str());
    std::cout << out.str();
    return 0;
}

int run_project(const std::string& atlas_path, const std::string& in_path,
                const std::string& out_path, double tol_factor, int max_iter,
                double margin_c) {
    const mfit::WeightedAtlas atlas = mfit::read_atlas_file(atlas_path);
    const int d = atlas.discs.at(0).dim();
    mfit::OutputManifold om(atlas, margin_c * atlas.radius / d);
    const mfit::PointCloud in = mfit::read_point_cloud_file(in_path);
    const double tol = tol_factor * atlas.radius;

    std::ofstream out(out_path);
    if (!out) throw mfit::Error("cannot open " + out_path);
    out << "n=" << in.ambient_dim() + 2 << " count=" << in.size() << "\n";
    char buf[40];
    for (int i = 0; i < in.size(); ++i) {
        const mfit::ProjectionResult pr =
            mfit::project_to_manifold(om, in.point(i), tol, max_iter);
        for (int j = 0; j < in.ambient_dim(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", pr.point_on_manifold[j]);
            out << buf << ' ';
        }
        std::snprintf(buf, sizeof buf, "%.17g", pr.final_residual);
        out << buf << ' ' << pr.iterations << "\n";
    }
    return 0;
}

int run_gen(const std::string& kind, double rho, int d, int n, double sigma,
            int count, std::uint64_t seed, double perturb_eps,
            const std::string& out_path) {
    mfit::PipelineConfig cfg;
    cfg.kind = kind;
    cfg.rho = rho;
    cfg.d = kind == "circle" ? 1 : (kind == "flat-torus" ? d : 2);
    cfg.n = n;
    cfg.perturb_eps = perturb_eps;
    const auto manifold = mfit::make_manifold(cfg);
    const mfit::NoisySample sample =
        mfit::sample_noisy(*manifold, mfit::NoiseModel{sigma, seed}, count);
    std::ofstream out(out_path);
    if (!out) throw mfit::Error("cannot open " + out_path);
    mfit::write_point_cloud(out, sample.cloud);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"manifold fitting pipeline"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    bool parallel = false;

    auto* fit = app.add_subcommand("fit", "run the full pipeline");
    fit->add_option("--config", config_path);
    auto* fit_seed = fit->add_option("--seed", seed);
    fit->add_option("--out-dir", out_dir);
    fit->add_flag("--parallel", parallel);

    std::string param = "sigma";
    std::vector<double> values;
    auto* sw = app.add_subcommand("sweep", "run the pipeline over a parameter grid");
    sw->add_option("--config", config_path);
    auto* sw_seed = sw->add_option("--seed", seed);
    sw->add_option("--out-dir", out_dir);
    sw->add_flag("--parallel", parallel);
    sw->add_option("--param", param);
    sw->add_option("--values", values)->delimiter(',');

    std::string atlas_path, in_path, out_path = "projected.txt";
    double tol_factor = 1e-9, margin_c = 0.25;
    int max_iter = 30;
    auto* pr = app.add_subcommand("project", "project points onto a fitted manifold");
    pr->add_option("--atlas", atlas_path)->required();
    pr->add_option("--in", in_path)->required();
    pr->add_option("--out", out_path);
    pr->add_option("--tol-factor", tol_factor);
    pr->add_option("--max-iter", max_iter);
    pr->add_option("--margin-c", margin_c);

    std::string kind = "circle";
    double rho = 1.0, sigma = 0.0, perturb_eps = 0.05;
    int gd = 1, gn = 3, count = 1000;
    std::string gen_out = "cloud.txt";
    auto* gen = app.add_subcommand("gen", "emit a synthetic noisy point cloud");
    gen->add_option("--kind", kind);
    gen->add_option("--rho", rho);
    gen->add_option("--d", gd);
    gen->add_option("--n", gn);
    gen->add_option("--sigma", sigma);
    gen->add_option("--count", count);
    gen->add_option("--seed", seed);
    gen->add_option("--perturb-eps", perturb_eps);
    gen->add_option("--out", gen_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (fit->parsed())
            return run_fit(config_path, seed, !fit_seed->empty(), out_dir);
        if (sw->parsed())
            return run_sweep(config_path, seed, !sw_seed->empty(), out_dir, param,
                             values, parallel);
        if (pr->parsed())
            return run_project(atlas_path, in_path, out_path, tol_factor, max_iter,
                               margin_c);
        if (gen->parsed())
            return run_gen(kind, rho, gd, gn, sigma, count, seed, perturb_eps,
                           gen_out);
    } catch (const mfit::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        const std::string msg = e.what();
        return msg.rfind("config", 0) == 0 ? kExitConfig : kExitStage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    }
    return 0;
}
