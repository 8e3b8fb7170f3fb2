#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pathhjb/fields.hpp"
#include "pathhjb/model.hpp"
#include "pathhjb/value.hpp"

namespace pathhjb {

// One verdict of the verification suite. Every report cites exactly
// one statement id from the fixed registry.
struct CheckReport {
    std::string check;
    std::string digest;  // model digest the check ran against
    double statistic = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::optional<double> se;
    uint64_t seed = 0;
    std::string note;
};

// --- standalone verification operations ---

struct ItoResidualResult {
    double rms = 0.0;
    std::vector<double> residuals;
    double field_scale = 0.0;  // max over paths of sup_t |u(t, X_t)|
};

// Residual of the reconstruction
//   u(T, X_T) - u(r, x_r) - sum L^v u dt - sum (grad u' sigma + d_w u) dW
// along simulated paths; exactly zero for constant fields.
ItoResidualResult ito_residual(const RandomField& field, const ModelSpec& spec,
                               const ControlPolicy& policy, double r, const DiscretePath& xi,
                               const NoiseBundle& noise, int workers = 1);

struct ClassicalResidualResult {
    double super_res = 0.0;  // min over the approach family
    double sub_res = 0.0;    // max over the approach family
};

// Evaluates -d_t u - H(t, x, grad u, hess u, d_w grad u) over a finite
// right-approach family: times t+dt..t+n_ahead*dt, paths ranging over
// Holder-ball continuations of x_t. A supersolution keeps super_res
// >= -tol, a subsolution keeps sub_res <= tol.
ClassicalResidualResult classical_residual(const RandomField& field, const ModelSpec& spec,
                                           double t, const DiscretePath& x_t,
                                           const RandomnessContext& ctx, int n_continuations,
                                           int n_ahead, uint64_t seed);

struct KolmogorovReport {
    double moment_coarse = 0.0;
    double moment_fine = 0.0;
    double ratio = 0.0;  // fine over coarse
    std::vector<double> ladder_k;
    std::vector<double> exit_fraction;  // P(tau_{k,alpha} < T) per rung
    bool ladder_monotone = false;
    double ladder_top_fraction = 1.0;
    bool unstable_regime = false;  // alpha >= 1/2 on Brownian-type input
};

using PathSampler = std::function<DiscretePath(long path_index, int n_steps)>;

// Empirical E||X||^q_{0,T;alpha} at two coupled resolutions plus the
// exit-time ladder P(tau_{k,alpha} < T) for k in a doubling ladder.
KolmogorovReport kolmogorov_check(const PathSampler& sampler, double alpha, double q, long n_paths,
                                  int coarse_steps, int refine_factor, double ladder_base_k,
                                  int ladder_rungs, int workers = 1);

// Brownian sampler coupled across resolutions (decimation of a finest
// grid), first coordinate of an m-dimensional Wiener path.
PathSampler make_brownian_sampler(uint64_t seed, double T, int finest_steps);

// --- suite ---

struct VerifyBudgets {
    long paths = 2000;
    int steps = 256;
    int flow_specs = 25;
    int classical_triples = 100;
    long kolmogorov_paths = 800;
    long lsmc_paths = 20000;
    int tree_depth = 5;
    long witness_samples = 2000;
};

struct VerifyConfig {
    ModelSpec spec;
    std::string digest = "none";
    uint64_t seed = 1;
    int workers = 1;
    std::vector<std::string> checks;  // empty means the full registry
    VerifyBudgets budgets;
};

const std::vector<std::string>& registry_ids();

CheckReport run_check(const std::string& id, const VerifyConfig& config);

// Executes the selected checks (the full registry when none are named)
// and returns one report per check, in registry order.
std::vector<CheckReport> run_suite(const VerifyConfig& config);

}  // namespace pathhjb
