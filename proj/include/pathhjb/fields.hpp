#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "pathhjb/model.hpp"
#include "pathhjb/noise.hpp"
#include "pathhjb/simulate.hpp"
#include "pathhjb/stats.hpp"

namespace pathhjb {

// A time-path functional u(t, x_t) with an optional closed-form
// derivative suite. Missing members are empty std::functions.
//   grad, hess : vertical derivatives at the path endpoint
//   d_t, d_w   : drift and Brownian-integrand parts of the
//                decomposition along horizontal extensions
//   d_w_grad   : m x d mixed derivative defined through covariation
//                brackets of grad against test martingales
struct RandomField {
    using EvalFn = std::function<double(double, const PathView&, const RandomnessContext&)>;
    using GradFn = std::function<Eigen::VectorXd(double, const PathView&, const RandomnessContext&)>;
    using HessFn = std::function<Eigen::MatrixXd(double, const PathView&, const RandomnessContext&)>;
    using ScalarFn = std::function<double(double, const PathView&, const RandomnessContext&)>;
    using VecFn = std::function<Eigen::VectorXd(double, const PathView&, const RandomnessContext&)>;
    using MatFn = std::function<Eigen::MatrixXd(double, const PathView&, const RandomnessContext&)>;

    std::string name = "field";
    int d = 1;
    int m = 1;
    EvalFn eval;
    GradFn grad;
    HessFn hess;
    ScalarFn d_t;
    VecFn d_w;
    MatFn d_w_grad;
    double alpha = 0.5;                  // exponent metadata
    std::vector<double> partition;       // associated partition (empty = {0, T})

    bool has_full_suite() const { return grad && hess && d_t && d_w && d_w_grad; }
};

// --- finite-difference vertical derivatives ---

double default_bump(const PathView& x);

// Central difference over endpoint bumps +-bump*e_i.
Eigen::VectorXd fd_gradient(const RandomField& field, double t, const PathView& x,
                            const RandomnessContext& ctx, double bump = 0.0);

// Central difference through the left-limit construction: the bump is
// applied to the path frozen one node earlier and re-extended, which
// realizes the vertical derivative of a left-limit functional.
Eigen::VectorXd fd_gradient_left_limit(const RandomField& field, double t, const PathView& x,
                                       const RandomnessContext& ctx, double bump = 0.0);

// Nested central differences of the gradient (closed form if present),
// symmetrized; *asymmetry reports the pre-symmetrization defect.
Eigen::MatrixXd fd_hessian(const RandomField& field, double t, const PathView& x,
                           const RandomnessContext& ctx, double bump = 0.0,
                           double* asymmetry = nullptr);

// Field with any missing grad/hess filled by finite differences.
RandomField with_fd_derivatives(RandomField field, double bump = 0.0);

// --- brackets and decomposition estimators ---

// Sum over steps of (A_{i+1}-A_i)(B_{i+1}-B_i).
double covariation(const std::vector<double>& a, const std::vector<double>& b);

struct DecompositionEstimate {
    double d_t = 0.0;
    double d_t_se = 0.0;
    Eigen::VectorXd d_w;
    Eigen::VectorXd d_w_se;
    long n_samples = 0;
    uint64_t seed = 0;
};

// Estimates (d_t, d_w) at (r, x_r) from the integral identity along
// horizontally extended paths with freshly resampled noise on a short
// window of `window_steps` grid steps.
DecompositionEstimate estimate_decomposition(const RandomField& field, const DiscretePath& x_r,
                                             int window_steps, long n_samples, uint64_t seed,
                                             const RandomnessContext& ctx, int workers = 1);

// Covariation bracket of grad_i u(., X_.) against the step martingale
// dM = g(t) dW^l over node window [i0, i1], averaged over the given
// simulated ensemble. Uses the closed-form gradient when present and
// finite differences otherwise.
MeanSe estimate_dw_grad(const RandomField& field, const std::vector<SimPath>& ensemble, int i0,
                        int i1, const std::function<double(double)>& g, int l, int i);

// Reference value: the time integral of the closed-form mixed
// derivative against g along each path, averaged over the ensemble.
MeanSe integrated_dw_grad(const RandomField& field, const std::vector<SimPath>& ensemble, int i0,
                          int i1, const std::function<double(double)>& g, int l, int i);

// --- consistency audit of a catalog entry ---

struct CrosscheckTolerances {
    double fd_bump = 1e-4;
    double fd_tol = 1e-6;      // deterministic derivative comparisons
    double stat_sigmas = 3.0;  // statistical comparisons
    long decomposition_samples = 4000;
    int decomposition_window = 4;
    // The decomposition estimators are window averages; suites that vary
    // along the window carry an O(window) bias this allowance covers.
    double decomposition_bias = 0.03;
};

struct CrosscheckEntry {
    std::string derivative;
    double max_error = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    bool checked = false;
};

struct CrosscheckReport {
    std::string field;
    std::vector<CrosscheckEntry> entries;
    bool pass = true;
    uint64_t seed = 0;
};

// Compares every closed-form derivative of the field against its
// numerical estimator at random (t, x_t) points. The mixed derivative
// is checked against the bracket estimator on a small simulated
// ensemble when a model is provided.
CrosscheckReport crosscheck_suite(const RandomField& field, int n_points,
                                  const CrosscheckTolerances& tol, uint64_t seed,
                                  const ModelSpec* spec_for_dwgrad = nullptr, int workers = 1);

// --- generator ---

// d_t u + beta'grad u + tr{0.5 sigma sigma' hess u + sigma d_w_grad u}.
double generator(const ModelSpec& spec, const RandomField& field, double t, const PathView& x,
                 const Control& v, const RandomnessContext& ctx);

// --- built-in catalog ---

// (a) Ito-integral field: int_0^t sin(x_1(s)) dW^1(s), realized as a
// left-endpoint sum on the context grid. grad = 0, d_w^1 = sin(x_1(t-)).
RandomField sin_integral_field(int d, int m);

// The first component of the decomposition integrand of (a) as a field
// of its own: sin(x_1(t-)). Carries no registered gradient; its
// left-limit vertical derivative is cos(x_1(t-)).
RandomField sin_integral_dw_component(int d, int m);

// (b) endpoint field |x(t)|^2 (a0 + a1 t).
RandomField endpoint_square_field(int d, int m, double a0 = 1.0, double a1 = 0.5);

// (c) running-integral field int_0^t cos(x_1(s)) ds (left-endpoint sum).
RandomField running_integral_field(int d, int m);

// (d) the classical envelope fields; upper = L e^{L(T-t)}, lower = -upper.
RandomField classical_bound_field(int d, int m, double L, double T, bool upper);

struct SnapshotFieldParams {
    std::vector<double> snapshot_times;  // s_1 < ... < s_N, inside (0, T]
    Eigen::VectorXd a;                   // sin(W~) amplitudes, size N
    Eigen::VectorXd c;                   // coupling amplitudes, size N
    Eigen::MatrixXd b;                   // d x (N+1): linear x coefficients, column j for s_j (s_0 = 0)
    Eigen::MatrixXd Q;                   // d x d symmetric
    Eigen::VectorXd e;                   // coupling direction, size d
};

// (e) smooth N-point field
//   h = sum_j a_j sin(W~(s_j ^ t)) + sum_j b_j' x(s_j ^ t)
//     + 0.5 x(t)' Q x(t) + (sum_j c_j sin(W~(s_j ^ t))) e' x(t),
// with the full closed-form suite.
RandomField snapshot_smooth_field(int d, int m, const SnapshotFieldParams& params);

SnapshotFieldParams default_snapshot_params(int d, double T);

// Entry lookup by name with a default parameterization.
RandomField catalog_field(const std::string& name, int d, int m, double L = 1.0, double T = 1.0);

}  // namespace pathhjb
