#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pathhjb/path.hpp"

namespace pathhjb {

using Control = Eigen::VectorXd;

// Sampled driving-noise history available to coefficients and fields.
// w is the full m-dimensional W prefix on the simulation grid starting
// at time 0; coefficients declared adapted to the W~ block must only
// read the first m0 components. An empty w means "no noise context".
struct RandomnessContext {
    PathView w;
    int m0 = 0;
    uint64_t seed_id = 0;
    long path_index = -1;  // set during simulation; -1 outside

    bool has_noise() const { return !w.empty(); }

    double w_comp_at(int j, double t) const {
        if (!has_noise()) return 0.0;
        const double s = std::min(t, w.t());
        return w.value_at(s)[j];
    }
    Eigen::VectorXd w_tilde_at(double t) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(m0);
        if (!has_noise()) return out;
        const double s = std::min(t, w.t());
        const auto v = w.value_at(s);
        for (int j = 0; j < m0; ++j) out[j] = v[j];
        return out;
    }
    Eigen::VectorXd w_at(double t) const {
        if (!has_noise()) return Eigen::VectorXd();
        const double s = std::min(t, w.t());
        return w.value_at(s);
    }
    // Context restricted to noise nodes at or before t (adaptedness).
    RandomnessContext truncated(double t) const {
        RandomnessContext c = *this;
        if (has_noise()) {
            const int idx = w.node_index_at(std::min(t, w.t()));
            c.w = w.prefix(idx + 1);
        }
        return c;
    }
};

using DriftFn = std::function<Eigen::VectorXd(double, const PathView&, const Control&,
                                              const RandomnessContext&)>;
using DiffusionFn = std::function<Eigen::MatrixXd(double, const PathView&, const Control&,
                                                  const RandomnessContext&)>;
using RunningCostFn = std::function<double(double, const PathView&, const Control&,
                                           const RandomnessContext&)>;
using TerminalCostFn = std::function<double(const PathView&, const RandomnessContext&)>;

// Problem data: coefficients, control set, declared bound/Lipschitz
// constant L, optional uniform-ellipticity constant for the W-bar
// diffusion block. Immutable after construction; coefficient
// functionals must be pure and thread-safe.
struct ModelSpec {
    int d = 1;
    int m = 1;
    int m0 = 0;
    double T = 1.0;
    std::vector<Control> control_grid;
    double L = 1.0;
    std::optional<double> lambda;
    DriftFn beta;
    DiffusionFn sigma;
    RunningCostFn f;
    TerminalCostFn G;
    std::string family = "custom";

    int m1() const { return m - m0; }
    void validate() const;
};

struct HamiltonianResult {
    double value = 0.0;
    int argmin_index = 0;
};

// Pointwise minimum over the control grid of
//   tr(0.5*sigma*sigma'*A + sigma*B) + beta'p + f,
// with ties broken by lowest control index.
HamiltonianResult hamiltonian(const ModelSpec& spec, double t, const PathView& x,
                              const Eigen::VectorXd& p, const Eigen::MatrixXd& A,
                              const Eigen::MatrixXd& B, const RandomnessContext& ctx);

// Canonical super/subsolution envelope at time t: (L e^{L(T-t)}, -L e^{L(T-t)}).
std::pair<double, double> classical_bounds(double L, double T, double t);

struct SuperparabolicReport {
    bool ok = false;
    double worst_eigenvalue = 0.0;
    int n_samples = 0;
};

// Smallest eigenvalue of sigma_bar*sigma_bar' over randomly sampled
// (t, path, control) triples; ok iff it stays >= the declared lambda.
SuperparabolicReport check_superparabolic(const ModelSpec& spec, int n_samples, uint64_t seed);

struct LipschitzEntry {
    std::string name;
    double max_ratio = 0.0;
    double max_abs = 0.0;
};

struct LipschitzReport {
    std::vector<LipschitzEntry> entries;
    double declared_L = 0.0;
    bool ratio_ok = false;
    bool bound_ok = false;
    bool pass = false;  // statistical spot check, not a proof
};

// Samples random path pairs (including pairs differing only at the
// endpoint) and reports empirical Lipschitz ratios and sup bounds for
// f, beta, sigma, G against the declared L.
LipschitzReport check_lipschitz(const ModelSpec& spec, int n_samples, uint64_t seed);

// --- built-in coefficient families ---

// d=m=2, m0=1, two controls, trigonometric bounded coefficients with
// L=1, running-max terminal payoff; f reads the W~ context.
ModelSpec demo_model();

// d=m=m0=1, two controls, linear drift in the control, constant
// diffusion, snapshot-linear terminal payoff; the value function is
// exactly linear in the snapshot features.
ModelSpec lsmc_tree_model();

// Same dynamics but a singleton control grid.
ModelSpec lsmc_tree_single_model();

// Declares L=1 but its drift has Lipschitz constant 2 and exceeds the
// bound; used to exercise the audit and failure paths.
ModelSpec faulty_lipschitz_model();

// Bounded trigonometric d=m=1 family with randomized amplitudes and a
// declared L in [1, 2.5] that genuinely dominates the coefficients.
ModelSpec random_bounded_spec(uint64_t seed);

// Resolve a family name ("demo", "lsmc-tree", ...) with an optional
// seed parameter for the randomized family.
ModelSpec builtin_model(const std::string& family, uint64_t seed = 0);

}  // namespace pathhjb
