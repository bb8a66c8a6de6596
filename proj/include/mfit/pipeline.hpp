#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "mfit/atlas.hpp"
#include "mfit/outman.hpp"
#include "mfit/synthetic.hpp"

namespace mfit {

// Everything the pipeline needs, exposed directly rather than through the
// theory's unquantified constants. Zeros mean "derive a default".
struct PipelineConfig {
    std::string kind = "circle";  // circle | sphere | flat-torus | perturbed-sphere
    int d = 1;
    int n = 10;
    double rho = 1.0;         // circle radii; also the reach for these kinds
    double perturb_eps = 0.05;  // perturbed-sphere amplitude

    double sigma = 0.02;
    int N0 = 10000;           // subspace + putative-disc sample
    int N2 = 100000;          // refinement sample, split across candidates
    int D = 0;                // 0: dimension formula with alpha below
    double alpha = 0.5;

    double r_p = 0.0;         // 0: 2 r_c
    double r_c = 0.0;         // 0: tau / (8 d^2)
    double r = 0.0;           // 0: auto_r_C sqrt(d) sigma_eff
    double auto_r_C = 3.0;

    int k = 3;
    int candidates = 9;
    int grid_per_dim = 0;     // 0: max(12, 48/d)
    int min_cell_count = 5;
    double net_c = 0.25;      // c in the cr/d net separation and tube width
    double boost_eps_factor = 40.0;  // eps = factor * d * sigma_eff^2 / tau
    double delta2_c = 0.25;   // delta2 budget = delta2_c * radius^2 / tau

    std::uint64_t seed = 1;

    double newton_tol_factor = 1e-9;  // tol = factor * r
    int newton_max_iter = 30;
    int probe_count = 800;    // geometry probes
    int deriv_probes = 200;
    double deriv_h_factor = 1e-3;    // h = factor * r
    int query_count = 200;    // denoising queries

    std::string out_dir = ".";
};

// key=value per line, '#' comments. Unknown keys are errors.
PipelineConfig parse_config(std::istream& in);
PipelineConfig parse_config_file(const std::string& path);
void set_config_key(PipelineConfig& cfg, const std::string& key,
                    const std::string& value);

std::unique_ptr<SyntheticManifold> make_manifold(const PipelineConfig& cfg);

struct PipelineReport {
    PipelineConfig config;       // with derived values filled in
    double sigma_hat = 0.0;
    double sigma_eff = 0.0;
    int D_used = 0;
    int putative_discs = 0;
    int rnet_size = 0;
    int atlas_size = 0;
    double hausdorff_to_truth = 0.0;
    double reach_estimate = 0.0;
    bool reach_infinite = false;
    double max_residual_on_truth = 0.0;
    double rnet_max_dist = 0.0;      // max dist(Rnet, M)
    double raw_noise_median = 0.0;   // median dist of noisy queries to M
    double denoised_max_dist = 0.0;  // max dist of projected queries to M
    double deriv_first = 0.0;
    double deriv_second = 0.0;
    double deriv_third = 0.0;
    double newton_step_ratio = 0.0;  // max ||s_{i+1}|| / ||s_i||^2 observed
    int newton_max_iters_seen = 0;
    double newton_converged_fraction = 0.0;
    std::vector<std::pair<std::string, double>> stage_seconds;

    WeightedAtlas atlas;
    PointCloud rnet;
};

// Runs subspace -> discs -> refine -> atlas -> outman and measures the
// result against the analytic manifold. Deterministic given the seed.
PipelineReport run_pipeline(const PipelineConfig& cfg);

// Stable CSV schema; bump the version when columns change.
extern const char* kCsvSchema;  // header line, starts with "schema=..."
std::string csv_header();
std::string csv_row(const PipelineReport& rep);

struct SweepResult {
    std::vector<std::string> rows;       // CSV rows, failed runs marked
    double slope = 0.0;                  // log-log slope of hausdorff vs value
    bool slope_valid = false;
};

// One run per value of the named parameter (sigma, N0, N2, D or k).
// parallel runs the values on separate threads; rows keep value order.
SweepResult sweep(const PipelineConfig& base, const std::string& param,
                  const std::vector<double>& values, bool parallel = false);

}  // namespace mfit
