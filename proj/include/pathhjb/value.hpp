#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pathhjb/model.hpp"
#include "pathhjb/noise.hpp"
#include "pathhjb/simulate.hpp"

namespace pathhjb {

// Non-recombining scenario lattice: at every step the driving noise
// takes one of `branches` (each an m-vector increment) with the paired
// weight. Path dependence forbids recombination, so node counts grow
// as branching^depth and are guarded by caps.
struct ScenarioTree {
    TimeGrid grid;                          // [0, T] with n_steps = depth
    std::vector<Eigen::VectorXd> branches;  // noise increments per step
    std::vector<double> weights;            // same length, sums to 1
    Eigen::VectorXd x0;
    long node_cap = 1L << 20;
    long work_cap = 1L << 28;

    int depth() const { return grid.n_steps; }
    int branching() const { return static_cast<int>(branches.size()); }
    long leaf_count() const;
    long internal_node_count() const;
    void validate(const ModelSpec& spec) const;
};

// Two-point (+-sqrt(dt) per component) tree.
ScenarioTree make_pm_tree(const ModelSpec& spec, int depth, const Eigen::VectorXd& x0,
                          long node_cap = 1L << 20);

// Exact Bellman value on the tree. `values[k]` holds, for every noise
// history at level k reachable under the greedy policy, the value
// V(t_k, X) realized along greedy controls; `controls[k]` the argmin.
struct TreeValueResult {
    double root_value = 0.0;
    std::vector<std::vector<double>> values;
    std::vector<std::vector<int>> controls;
};

TreeValueResult tree_backward_induction(const ModelSpec& spec, const ScenarioTree& tree);

// Exhaustive minimization over all adapted strategies (one control per
// internal noise node). Budget-guarded; also returns the argmin.
struct EnumerationResult {
    double value = 0.0;
    std::vector<int> strategy;  // level-major over internal noise nodes
    long n_strategies = 0;
};

EnumerationResult enumerate_strategies(const ModelSpec& spec, const ScenarioTree& tree,
                                       long budget = 1L << 20);

// Monte Carlo estimate of the cost functional from (t, xi) under the
// policy: left-endpoint quadrature of f plus the terminal cost.
struct CostEstimate {
    double value = 0.0;
    double se = 0.0;
};

CostEstimate cost_mc(const ModelSpec& spec, const ControlPolicy& policy, double t,
                     const DiscretePath& xi, long n_paths, int n_steps, uint64_t seed,
                     NoiseKind kind = NoiseKind::Gaussian, int workers = 1,
                     const DiscretePath* w_prefix = nullptr);

// Snapshot-time feature map with a polynomial basis.
struct FeatureSpec {
    std::vector<double> snapshot_times;
    int degree = 2;  // 1 or 2
};

struct LsmcOptions {
    long n_paths = 10000;
    int n_steps = 8;
    FeatureSpec features;
    int n_policy_iters = 1;
    NoiseKind noise_kind = NoiseKind::Gaussian;
    uint64_t seed = 1;
    int workers = 1;
    double ridge_scale = 1e-8;
};

struct LsmcSlice {
    std::vector<int> w_feature_nodes;  // W~ snapshot node indices (deduplicated)
    std::vector<int> x_feature_nodes;  // x snapshot node indices, current node last
    std::vector<int> basis_keep;       // columns kept after dropping constant ones
    std::vector<Eigen::VectorXd> coef; // one coefficient vector per control
    bool ridge_used = false;
    int rank = 0;
    int n_basis = 0;
};

// Regression value surface: per time slice, per-control regression
// coefficients over the snapshot-feature basis; evaluation takes the
// pointwise min over controls and clips to the a-priori value bound.
class LsmcSurface {
public:
    TimeGrid grid;
    FeatureSpec features;
    double L = 1.0;
    double T = 1.0;
    int d = 1;
    int m0 = 0;
    NoiseKind noise_kind = NoiseKind::Gaussian;
    std::vector<LsmcSlice> slices;  // index 0..n_steps-1
    double root_value = 0.0;

    double clip_bound(int step) const;
    // Raw feature scalars at a slice for a path prefix with noise ctx.
    Eigen::VectorXd raw_features(int step, const PathView& x, const RandomnessContext& ctx) const;
    Eigen::VectorXd basis(int step, const Eigen::VectorXd& raw) const;
    double q_value(int step, int control, const PathView& x, const RandomnessContext& ctx) const;
    // min over controls, clipped.
    double eval(int step, const PathView& x, const RandomnessContext& ctx) const;
    int greedy_control(int step, const PathView& x, const RandomnessContext& ctx) const;
};

// Least-squares Monte Carlo backward induction with per-control
// regressions under shared one-step noise, greedy policy improvement
// iterated n_policy_iters times.
LsmcSurface lsmc_value(const ModelSpec& spec, const Eigen::VectorXd& x0, const LsmcOptions& opts);

// One-step dynamic-programming identity on the tree: recomputes the
// Bellman recursion and reports the largest deviation from the stored
// tables (identically 0 up to float reproduction).
double dpp_residual_tree(const ModelSpec& spec, const ScenarioTree& tree,
                         const TreeValueResult& result);

// Worst value of Q(node, strategy(node)) - min_v Q(node, v) over all
// noise nodes reached under a strategy sampled from the seed. The
// one-step supermartingale inequality makes this exactly >= 0.
double tree_supermartingale_violation(const ModelSpec& spec, const ScenarioTree& tree,
                                      uint64_t strategy_seed);

struct DppResidualReport {
    double max_residual = 0.0;
    double max_allowed = 0.0;  // 3 SE of the inner estimates
    bool pass = true;
};

// |V(t, xi) - min_v MC[ int f + V(t_hat, X) ]| over the supplied test
// prefixes, controls frozen on [t, t_hat].
DppResidualReport dpp_residual_lsmc(const ModelSpec& spec, const LsmcSurface& surface, int step_t,
                                    int step_that, const std::vector<SimPath>& test_paths,
                                    long n_inner, uint64_t seed, int workers = 1);

}  // namespace pathhjb
