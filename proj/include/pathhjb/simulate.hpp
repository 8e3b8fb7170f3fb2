#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "pathhjb/model.hpp"
#include "pathhjb/noise.hpp"

namespace pathhjb {

// A grid-adapted control: either a fixed control index per step, or a
// feedback rule reading only the path prefix and noise up to the
// current node. Always yields a member of the control grid.
class ControlPolicy {
public:
    using FeedbackFn = std::function<int(int step, const PathView& prefix, const RandomnessContext& ctx)>;

    static ControlPolicy constant(int control_index);
    static ControlPolicy open_loop(std::vector<int> per_step);
    static ControlPolicy feedback(FeedbackFn fn);

    int control_index(int step, const PathView& prefix, const RandomnessContext& ctx) const;

private:
    std::vector<int> open_loop_;
    int constant_ = -1;
    FeedbackFn feedback_;
};

struct SimOptions {
    double holder_alpha = 0.25;
    double holder_k = 0.0;          // <= 0 disables the annotation
    double d0_delta = 0.0;          // <= 0 disables the annotation
    double divergence_guard = 1e6;  // bounded coefficients should never trip this
};

struct PathAnnotations {
    double holder_exit = std::numeric_limits<double>::quiet_NaN();
    double d0_exit = std::numeric_limits<double>::quiet_NaN();
};

struct SimPath {
    DiscretePath x;             // state on the full noise grid, prefix included
    DiscretePath w;             // driving W on the same grid (0 before the start time)
    std::vector<int> controls;  // control index used at each step in [r, T)
    PathAnnotations ann;
};

struct SimResult {
    std::vector<SimPath> paths;
    double r = 0.0;
};

// One explicit Euler step from the prefix ending at t_i:
// X(t_{i+1}) = X(t_i) + beta*dt + sigma*dW. Returns the next point and
// the control index used.
std::pair<Eigen::VectorXd, int> euler_step(const ModelSpec& spec, const ControlPolicy& policy,
                                           int step, const PathView& prefix,
                                           const Eigen::VectorXd& dW, const RandomnessContext& ctx);

// Rolls one noise path from (r, xi) to the end of the noise grid.
// w_prefix, when given, supplies the driving-noise history on [0, r].
SimPath simulate_path(const ModelSpec& spec, const ControlPolicy& policy, double r,
                      const DiscretePath& xi, const NoiseBundle& noise, long path_index,
                      const SimOptions& opts = {}, const DiscretePath* w_prefix = nullptr);

// All noise paths, data-parallel over path index.
SimResult simulate(const ModelSpec& spec, const ControlPolicy& policy, double r,
                   const DiscretePath& xi, const NoiseBundle& noise, const SimOptions& opts = {},
                   int workers = 1, const DiscretePath* w_prefix = nullptr);

struct MomentEntry {
    double p = 2.0;
    double growth_ratio = 0.0;       // E max ||X||_0^p over (1 + ||xi||_0^p)
    double increment_ratio = 0.0;    // worst E d0(X_s, X_t)^p over |s-t|^p + |s-t|^{p/2}
    double stability_ratio = 0.0;    // E max ||X - X_hat||_0^{p+1} over ||xi - xi_hat||_0^{p+1}
    double stability_diff = 0.0;     // numerator of the above
    bool stability_degenerate = false;  // identical starts: ratio reported as 0
};

struct MomentReport {
    std::vector<MomentEntry> entries;
    long n_paths = 0;
    uint64_t seed = 0;
};

// Empirical moment-bound shapes for growth, time increments and
// perturbed-start stability, under shared noise for the two starts.
MomentReport moment_report(const ModelSpec& spec, const ControlPolicy& policy, double r,
                           const DiscretePath& xi, const DiscretePath& xi_hat,
                           const std::vector<double>& p_values, long n_paths, int n_steps,
                           uint64_t seed, int workers = 1);

// Same, driven by a caller-supplied bundle (e.g. a coarsened one, so
// two resolutions share the same underlying noise).
MomentReport moment_report(const ModelSpec& spec, const ControlPolicy& policy, double r,
                           const DiscretePath& xi, const DiscretePath& xi_hat,
                           const std::vector<double>& p_values, const NoiseBundle& noise,
                           int workers = 1);

}  // namespace pathhjb
