#include "pathhjb/simulate.hpp"

#include <algorithm>

#include "pathhjb/parallel.hpp"
#include "pathhjb/stats.hpp"

namespace pathhjb {

ControlPolicy ControlPolicy::constant(int control_index) {
    ControlPolicy p;
    p.constant_ = control_index;
    return p;
}

ControlPolicy ControlPolicy::open_loop(std::vector<int> per_step) {
    ControlPolicy p;
    p.open_loop_ = std::move(per_step);
    return p;
}

ControlPolicy ControlPolicy::feedback(FeedbackFn fn) {
    ControlPolicy p;
    p.feedback_ = std::move(fn);
    return p;
}

int ControlPolicy::control_index(int step, const PathView& prefix, const RandomnessContext& ctx) const {
    if (feedback_) return feedback_(step, prefix, ctx);
    if (!open_loop_.empty())
        return open_loop_[std::min<std::size_t>(static_cast<std::size_t>(step), open_loop_.size() - 1)];
    if (constant_ >= 0) return constant_;
    throw ValidationError("ControlPolicy: empty policy");
}

std::pair<Eigen::VectorXd, int> euler_step(const ModelSpec& spec, const ControlPolicy& policy,
                                           int step, const PathView& prefix,
                                           const Eigen::VectorXd& dW, const RandomnessContext& ctx) {
    const double t = prefix.t();
    const int vi = policy.control_index(step, prefix, ctx);
    if (vi < 0 || vi >= static_cast<int>(spec.control_grid.size()))
        throw ValidationError("euler_step: policy produced an out-of-grid control index");
    const Control& v = spec.control_grid[vi];
    const Eigen::VectorXd b = spec.beta(t, prefix, v, ctx);
    const Eigen::MatrixXd s = spec.sigma(t, prefix, v, ctx);
    Eigen::VectorXd next = prefix.back() + b * prefix.dt + s * dW;
    return {next, vi};
}

SimPath simulate_path(const ModelSpec& spec, const ControlPolicy& policy, double r,
                      const DiscretePath& xi, const NoiseBundle& noise, long path_index,
                      const SimOptions& opts, const DiscretePath* w_prefix) {
    const TimeGrid& g = noise.grid();
    const int ir = g.index_of(r);
    if (noise.m() != spec.m) throw ValidationError("simulate: noise dimension mismatch");

    SimPath out;
    out.x = DiscretePath(g, spec.d);
    out.w = DiscretePath(g, spec.m);

    // Initial prefix: xi on [0, r] (same dt as the simulation grid).
    if (!xi.grid().same_dt(g) && ir > 0)
        throw ValidationError("simulate: xi must share the simulation grid dt");
    for (int i = 0; i <= ir; ++i) {
        const int xi_node = std::min(i, xi.n_nodes() - 1);
        out.x.mutable_node(i) = xi.node(xi_node);
    }
    Eigen::VectorXd wacc = Eigen::VectorXd::Zero(spec.m);
    if (w_prefix) {
        for (int i = 0; i <= ir; ++i)
            out.w.mutable_node(i) = w_prefix->node(std::min(i, w_prefix->n_nodes() - 1));
        wacc = out.w.node(ir);
    }

    RandomnessContext ctx;
    ctx.m0 = spec.m0;
    ctx.seed_id = noise.seed();
    ctx.path_index = path_index;
    for (int i = ir; i < g.n_steps; ++i) {
        const PathView prefix = out.x.prefix_view(i);
        ctx.w = out.w.prefix_view(i);
        const Eigen::VectorXd dW = noise.increment_vec(path_index, i);
        auto [next, vi] = euler_step(spec, policy, i, prefix, dW, ctx);
        if (!next.allFinite() || next.norm() > opts.divergence_guard)
            throw DivergenceError("simulate: state left the divergence guard", path_index, i);
        out.x.mutable_node(i + 1) = next;
        wacc += dW;
        out.w.mutable_node(i + 1) = wacc;
        out.controls.push_back(vi);
    }

    if (opts.holder_k > 0.0)
        out.ann.holder_exit = first_holder_exit(out.x.view(), r, opts.holder_alpha, opts.holder_k);
    if (opts.d0_delta > 0.0) {
        out.ann.d0_exit = g.t_end;
        const PathView xi_view = out.x.prefix_view(ir);
        for (int i = ir + 1; i <= g.n_steps; ++i) {
            if (d0(xi_view, out.x.prefix_view(i)) > opts.d0_delta) {
                out.ann.d0_exit = g.time(i);
                break;
            }
        }
    }
    return out;
}

SimResult simulate(const ModelSpec& spec, const ControlPolicy& policy, double r,
                   const DiscretePath& xi, const NoiseBundle& noise, const SimOptions& opts,
                   int workers, const DiscretePath* w_prefix) {
    SimResult res;
    res.r = r;
    res.paths.resize(static_cast<std::size_t>(noise.n_paths()));
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(noise.n_paths()));
    parallel_for(static_cast<std::size_t>(noise.n_paths()), workers, [&](std::size_t p) {
        try {
            res.paths[p] =
                simulate_path(spec, policy, r, xi, noise, static_cast<long>(p), opts, w_prefix);
        } catch (...) {
            errs[p] = std::current_exception();
        }
    });
    for (const auto& e : errs)
        if (e) std::rethrow_exception(e);
    return res;
}

MomentReport moment_report(const ModelSpec& spec, const ControlPolicy& policy, double r,
                           const DiscretePath& xi, const DiscretePath& xi_hat,
                           const std::vector<double>& p_values, long n_paths, int n_steps,
                           uint64_t seed, int workers) {
    TimeGrid g(0.0, spec.T, n_steps);
    NoiseBundle noise(g, spec.m, spec.m0, n_paths, seed);
    return moment_report(spec, policy, r, xi, xi_hat, p_values, noise, workers);
}

MomentReport moment_report(const ModelSpec& spec, const ControlPolicy& policy, double r,
                           const DiscretePath& xi, const DiscretePath& xi_hat,
                           const std::vector<double>& p_values, const NoiseBundle& noise,
                           int workers) {
    for (double p : p_values)
        if (!(p > 0.0)) throw ValidationError("moment_report: p values must be positive");
    MomentReport rep;
    const long n_paths = noise.n_paths();
    rep.n_paths = n_paths;
    rep.seed = noise.seed();
    const TimeGrid& g = noise.grid();

    const int ir = g.index_of(r);
    // A small (s,t) lattice past the start time.
    std::vector<std::pair<int, int>> lattice;
    const int rem = g.n_steps - ir;
    for (int a = 1; a <= 3; ++a)
        for (int b = a + 1; b <= 4; ++b)
            lattice.emplace_back(ir + (rem * a) / 4, ir + (rem * b) / 4);

    struct PerPath {
        double sup = 0.0;
        double sup_diff = 0.0;
        std::vector<double> d0s;
    };
    std::vector<PerPath> slots(static_cast<std::size_t>(n_paths));
    parallel_for(static_cast<std::size_t>(n_paths), workers, [&](std::size_t p) {
        SimPath a = simulate_path(spec, policy, r, xi, noise, static_cast<long>(p));
        SimPath b = simulate_path(spec, policy, r, xi_hat, noise, static_cast<long>(p));
        PerPath& s = slots[p];
        s.sup = sup_norm(a.x.view());
        double diff = 0.0;
        for (int i = 0; i < a.x.n_nodes(); ++i)
            diff = std::max(diff, (a.x.node(i) - b.x.node(i)).norm());
        s.sup_diff = diff;
        s.d0s.reserve(lattice.size());
        for (const auto& [is, it] : lattice)
            s.d0s.push_back(d0(a.x.prefix_view(is), a.x.prefix_view(it)));
    });

    double xi_norm = sup_norm(xi.view());
    double start_diff = 0.0;
    for (int i = 0; i < std::min(xi.n_nodes(), xi_hat.n_nodes()); ++i)
        start_diff = std::max(start_diff, (xi.node(i) - xi_hat.node(i)).norm());

    for (double p : p_values) {
        MomentEntry e;
        e.p = p;
        double acc_sup = 0.0, acc_diff = 0.0;
        std::vector<double> acc_d0(lattice.size(), 0.0);
        for (const auto& s : slots) {
            acc_sup += std::pow(s.sup, p);
            acc_diff += std::pow(s.sup_diff, p + 1.0);
            for (std::size_t k = 0; k < lattice.size(); ++k)
                acc_d0[k] += std::pow(s.d0s[k], p);
        }
        const double inv = 1.0 / static_cast<double>(n_paths);
        e.growth_ratio = acc_sup * inv / (1.0 + std::pow(xi_norm, p));
        for (std::size_t k = 0; k < lattice.size(); ++k) {
            const double gap = g.dt * (lattice[k].second - lattice[k].first);
            const double shape = std::pow(gap, p) + std::pow(gap, p / 2.0);
            e.increment_ratio = std::max(e.increment_ratio, acc_d0[k] * inv / shape);
        }
        e.stability_diff = acc_diff * inv;
        if (start_diff <= 1e-15) {
            e.stability_degenerate = true;
            e.stability_ratio = 0.0;
        } else {
            e.stability_ratio = e.stability_diff / std::pow(start_diff, p + 1.0);
        }
        rep.entries.push_back(e);
    }
    return rep;
}

}  // namespace pathhjb
