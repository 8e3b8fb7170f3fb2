#include "pathhjb/value.hpp"

#include <algorithm>
#include <cmath>

#include "pathhjb/parallel.hpp"
#include "pathhjb/rng.hpp"
#include "pathhjb/stats.hpp"

namespace pathhjb {

long ScenarioTree::leaf_count() const {
    long n = 1;
    for (int k = 0; k < depth(); ++k) {
        if (n > node_cap / branching() + 1) return node_cap + 1;
        n *= branching();
    }
    return n;
}

long ScenarioTree::internal_node_count() const {
    long total = 0, level = 1;
    for (int k = 0; k < depth(); ++k) {
        total += level;
        level *= branching();
    }
    return total;
}

void ScenarioTree::validate(const ModelSpec& spec) const {
    if (branches.empty()) throw ValidationError("ScenarioTree: no branches");
    if (branches.size() != weights.size())
        throw ValidationError("ScenarioTree: branches/weights length mismatch");
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    if (std::abs(wsum - 1.0) > 1e-12) throw ValidationError("ScenarioTree: weights must sum to 1");
    for (const auto& b : branches)
        if (b.size() != spec.m) throw ValidationError("ScenarioTree: branch dimension mismatch");
    if (x0.size() != spec.d) throw ValidationError("ScenarioTree: x0 dimension mismatch");
    if (leaf_count() > node_cap)
        throw ResourceError("ScenarioTree: branching^depth exceeds the node cap");
    double work = 1.0;
    for (int k = 0; k < depth(); ++k) work *= static_cast<double>(branching()) * spec.control_grid.size();
    if (work > static_cast<double>(work_cap))
        throw ResourceError("ScenarioTree: recursion work exceeds the work cap");
}

ScenarioTree make_pm_tree(const ModelSpec& spec, int depth, const Eigen::VectorXd& x0,
                          long node_cap) {
    ScenarioTree tree;
    tree.grid = TimeGrid(0.0, spec.T, depth);
    tree.x0 = x0;
    tree.node_cap = node_cap;
    const double s = std::sqrt(tree.grid.dt);
    const int b = 1 << spec.m;
    for (int mask = 0; mask < b; ++mask) {
        Eigen::VectorXd inc(spec.m);
        for (int j = 0; j < spec.m; ++j) inc[j] = (mask >> j) & 1 ? s : -s;
        tree.branches.push_back(inc);
        tree.weights.push_back(1.0 / b);
    }
    return tree;
}

namespace {

// DFS workspace for the tree recursions. The state/noise prefixes live
// in flat buffers indexed by level; a node at level k writes slot k+1
// before descending, which is safe in depth-first order.
struct TreeWalk {
    const ModelSpec& spec;
    const ScenarioTree& tree;
    std::vector<double> xbuf;
    std::vector<double> wbuf;
    TreeValueResult* rec = nullptr;

    TreeWalk(const ModelSpec& s, const ScenarioTree& t) : spec(s), tree(t) {
        xbuf.assign(static_cast<std::size_t>(t.depth() + 1) * s.d, 0.0);
        wbuf.assign(static_cast<std::size_t>(t.depth() + 1) * s.m, 0.0);
        Eigen::Map<Eigen::VectorXd>(xbuf.data(), s.d) = t.x0;
    }

    PathView xview(int k) const {
        return PathView{xbuf.data(), k + 1, spec.d, tree.grid.t_start, tree.grid.dt};
    }
    PathView wview(int k) const {
        return PathView{wbuf.data(), k + 1, spec.m, tree.grid.t_start, tree.grid.dt};
    }
    RandomnessContext ctx(int k) const {
        RandomnessContext c;
        c.w = wview(k);
        c.m0 = spec.m0;
        return c;
    }
    void write_child(int k, const Eigen::VectorXd& x_next, int branch) {
        Eigen::Map<Eigen::VectorXd>(xbuf.data() + static_cast<std::size_t>(k + 1) * spec.d, spec.d) =
            x_next;
        Eigen::Map<Eigen::VectorXd> wn(wbuf.data() + static_cast<std::size_t>(k + 1) * spec.m, spec.m);
        wn = Eigen::Map<const Eigen::VectorXd>(wbuf.data() + static_cast<std::size_t>(k) * spec.m,
                                               spec.m) +
             tree.branches[static_cast<std::size_t>(branch)];
    }

    // Bellman value of the current prefix at level k. rec_idx >= 0 marks
    // a node of the greedy subtree whose value/control are tabulated.
    double bellman(int k, long rec_idx) {
        if (k == tree.depth()) {
            const double g = spec.G(xview(k), ctx(k));
            if (rec != nullptr && rec_idx >= 0)
                rec->values[static_cast<std::size_t>(k)][static_cast<std::size_t>(rec_idx)] = g;
            return g;
        }
        const double t = tree.grid.time(k);
        const PathView xv = xview(k);
        const RandomnessContext cx = ctx(k);
        const int n_controls = static_cast<int>(spec.control_grid.size());
        const int nb = tree.branching();
        double best = std::numeric_limits<double>::infinity();
        int best_vi = 0;
        for (int vi = 0; vi < n_controls; ++vi) {
            const Control& v = spec.control_grid[static_cast<std::size_t>(vi)];
            const Eigen::VectorXd b = spec.beta(t, xv, v, cx);
            const Eigen::MatrixXd s = spec.sigma(t, xv, v, cx);
            const double fc = spec.f(t, xv, v, cx);
            const Eigen::VectorXd base = xv.back() + b * tree.grid.dt;
            double acc = 0.0;
            for (int j = 0; j < nb; ++j) {
                write_child(k, base + s * tree.branches[static_cast<std::size_t>(j)], j);
                acc += tree.weights[static_cast<std::size_t>(j)] * bellman(k + 1, -1);
            }
            const double q = fc * tree.grid.dt + acc;
            if (q < best) {
                best = q;
                best_vi = vi;
            }
        }
        if (rec != nullptr && rec_idx >= 0) {
            rec->values[static_cast<std::size_t>(k)][static_cast<std::size_t>(rec_idx)] = best;
            rec->controls[static_cast<std::size_t>(k)][static_cast<std::size_t>(rec_idx)] = best_vi;
            // Re-descend the greedy children to tabulate their subtrees.
            const Control& v = spec.control_grid[static_cast<std::size_t>(best_vi)];
            const Eigen::VectorXd b = spec.beta(t, xv, v, cx);
            const Eigen::MatrixXd s = spec.sigma(t, xv, v, cx);
            const Eigen::VectorXd base = xv.back() + b * tree.grid.dt;
            for (int j = 0; j < nb; ++j) {
                write_child(k, base + s * tree.branches[static_cast<std::size_t>(j)], j);
                bellman(k + 1, rec_idx * nb + j);
            }
        }
        return best;
    }

    // Expected cost of a fixed strategy (level-major control table).
    double strategy_cost(int k, long idx, const std::vector<int>& strategy,
                         const std::vector<long>& level_offset, double run_cost) {
        if (k == tree.depth()) return run_cost + spec.G(xview(k), ctx(k));
        const double t = tree.grid.time(k);
        const PathView xv = xview(k);
        const RandomnessContext cx = ctx(k);
        const int vi = strategy[static_cast<std::size_t>(level_offset[static_cast<std::size_t>(k)] + idx)];
        const Control& v = spec.control_grid[static_cast<std::size_t>(vi)];
        const Eigen::VectorXd b = spec.beta(t, xv, v, cx);
        const Eigen::MatrixXd s = spec.sigma(t, xv, v, cx);
        const double fc = spec.f(t, xv, v, cx);
        const Eigen::VectorXd base = xv.back() + b * tree.grid.dt;
        double acc = 0.0;
        for (int j = 0; j < tree.branching(); ++j) {
            write_child(k, base + s * tree.branches[static_cast<std::size_t>(j)], j);
            acc += tree.weights[static_cast<std::size_t>(j)] *
                   strategy_cost(k + 1, idx * tree.branching() + j, strategy, level_offset,
                                 run_cost + fc * tree.grid.dt);
        }
        return acc;
    }
};

}  // namespace

TreeValueResult tree_backward_induction(const ModelSpec& spec, const ScenarioTree& tree) {
    tree.validate(spec);
    TreeValueResult res;
    res.values.resize(static_cast<std::size_t>(tree.depth()) + 1);
    res.controls.resize(static_cast<std::size_t>(tree.depth()));
    long level = 1;
    for (int k = 0; k <= tree.depth(); ++k) {
        res.values[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(level), 0.0);
        if (k < tree.depth())
            res.controls[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(level), 0);
        level *= tree.branching();
    }
    TreeWalk walk(spec, tree);
    walk.rec = &res;
    res.root_value = walk.bellman(0, 0);
    return res;
}

EnumerationResult enumerate_strategies(const ModelSpec& spec, const ScenarioTree& tree,
                                       long budget) {
    tree.validate(spec);
    const long internal = tree.internal_node_count();
    const int n_controls = static_cast<int>(spec.control_grid.size());
    double n_strat_real = 1.0;
    for (long i = 0; i < internal; ++i) n_strat_real *= n_controls;
    if (n_strat_real > static_cast<double>(budget))
        throw ResourceError("enumerate_strategies: strategy count exceeds the budget");
    const long n_strat = static_cast<long>(n_strat_real);

    std::vector<long> level_offset(static_cast<std::size_t>(tree.depth()), 0);
    long off = 0, lvl = 1;
    for (int k = 0; k < tree.depth(); ++k) {
        level_offset[static_cast<std::size_t>(k)] = off;
        off += lvl;
        lvl *= tree.branching();
    }

    EnumerationResult out;
    out.n_strategies = n_strat;
    out.value = std::numeric_limits<double>::infinity();
    std::vector<int> strategy(static_cast<std::size_t>(internal), 0);
    TreeWalk walk(spec, tree);
    for (long s = 0; s < n_strat; ++s) {
        const double cost = walk.strategy_cost(0, 0, strategy, level_offset, 0.0);
        if (cost < out.value) {
            out.value = cost;
            out.strategy = strategy;
        }
        // Odometer increment.
        for (std::size_t pos = 0; pos < strategy.size(); ++pos) {
            if (++strategy[pos] < n_controls) break;
            strategy[pos] = 0;
        }
    }
    return out;
}

CostEstimate cost_mc(const ModelSpec& spec, const ControlPolicy& policy, double t,
                     const DiscretePath& xi, long n_paths, int n_steps, uint64_t seed,
                     NoiseKind kind, int workers, const DiscretePath* w_prefix) {
    TimeGrid g(0.0, spec.T, n_steps);
    NoiseBundle noise(g, spec.m, spec.m0, n_paths, seed, kind);
    const int it = g.index_of(t);
    std::vector<double> costs(static_cast<std::size_t>(n_paths), 0.0);
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(n_paths));
    parallel_for(static_cast<std::size_t>(n_paths), workers, [&](std::size_t p) {
        try {
            const SimPath sp =
                simulate_path(spec, policy, t, xi, noise, static_cast<long>(p), {}, w_prefix);
            RandomnessContext cx;
            cx.m0 = spec.m0;
            double acc = 0.0;
            for (int k = it; k < g.n_steps; ++k) {
                cx.w = sp.w.prefix_view(k);
                const Control& v =
                    spec.control_grid[static_cast<std::size_t>(sp.controls[static_cast<std::size_t>(k - it)])];
                acc += spec.f(g.time(k), sp.x.prefix_view(k), v, cx) * g.dt;
            }
            cx.w = sp.w.view();
            acc += spec.G(sp.x.view(), cx);
            costs[p] = acc;
        } catch (...) {
            errs[p] = std::current_exception();
        }
    });
    for (const auto& e : errs)
        if (e) std::rethrow_exception(e);
    const MeanSe ms = mean_se(costs);
    return CostEstimate{ms.mean, ms.se};
}

// --- LSMC ---

double LsmcSurface::clip_bound(int step) const {
    return L * (T - grid.time(step) + 1.0);
}

Eigen::VectorXd LsmcSurface::raw_features(int step, const PathView& x,
                                          const RandomnessContext& ctx) const {
    const LsmcSlice& slice = slices[static_cast<std::size_t>(step)];
    const int nw = static_cast<int>(slice.w_feature_nodes.size());
    const int nx = static_cast<int>(slice.x_feature_nodes.size());
    Eigen::VectorXd raw(nw * m0 + nx * d);
    int pos = 0;
    for (int node : slice.w_feature_nodes) {
        const double s = grid.time(node);
        for (int j = 0; j < m0; ++j) raw[pos++] = ctx.w_comp_at(j, s);
    }
    for (int node : slice.x_feature_nodes) {
        const double s = std::min(grid.time(node), x.t());
        const auto v = x.value_at(s);
        for (int j = 0; j < d; ++j) raw[pos++] = v[j];
    }
    return raw;
}

Eigen::VectorXd LsmcSurface::basis(int step, const Eigen::VectorXd& raw) const {
    const LsmcSlice& slice = slices[static_cast<std::size_t>(step)];
    const int q = static_cast<int>(raw.size());
    int nb = 1 + q;
    if (features.degree >= 2) nb += q * (q + 1) / 2;
    Eigen::VectorXd full(nb);
    full[0] = 1.0;
    for (int i = 0; i < q; ++i) full[1 + i] = raw[i];
    if (features.degree >= 2) {
        int pos = 1 + q;
        for (int i = 0; i < q; ++i)
            for (int j = i; j < q; ++j) full[pos++] = raw[i] * raw[j];
    }
    if (slice.basis_keep.empty()) return full;
    Eigen::VectorXd kept(slice.basis_keep.size());
    for (std::size_t i = 0; i < slice.basis_keep.size(); ++i)
        kept[static_cast<Eigen::Index>(i)] = full[slice.basis_keep[i]];
    return kept;
}

double LsmcSurface::q_value(int step, int control, const PathView& x,
                            const RandomnessContext& ctx) const {
    const LsmcSlice& slice = slices[static_cast<std::size_t>(step)];
    return slice.coef[static_cast<std::size_t>(control)].dot(basis(step, raw_features(step, x, ctx)));
}

double LsmcSurface::eval(int step, const PathView& x, const RandomnessContext& ctx) const {
    const Eigen::VectorXd b = basis(step, raw_features(step, x, ctx));
    const LsmcSlice& slice = slices[static_cast<std::size_t>(step)];
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : slice.coef) best = std::min(best, c.dot(b));
    const double bound = clip_bound(step);
    return std::clamp(best, -bound, bound);
}

int LsmcSurface::greedy_control(int step, const PathView& x, const RandomnessContext& ctx) const {
    const Eigen::VectorXd b = basis(step, raw_features(step, x, ctx));
    const LsmcSlice& slice = slices[static_cast<std::size_t>(step)];
    double best = std::numeric_limits<double>::infinity();
    int best_vi = 0;
    for (std::size_t vi = 0; vi < slice.coef.size(); ++vi) {
        const double q = slice.coef[vi].dot(b);
        if (q < best) {
            best = q;
            best_vi = static_cast<int>(vi);
        }
    }
    return best_vi;
}

namespace {

// Snapshot node lists for a slice, with values frozen at the current
// node deduplicated into it.
void slice_feature_nodes(const TimeGrid& grid, const FeatureSpec& features, int step,
                         std::vector<int>* w_nodes, std::vector<int>* x_nodes) {
    w_nodes->clear();
    x_nodes->clear();
    bool any_future = false;
    for (double s : features.snapshot_times) {
        const int node = grid.index_of(s);
        if (node < step) {
            w_nodes->push_back(node);
            x_nodes->push_back(node);
        } else {
            any_future = true;
        }
    }
    if (any_future) w_nodes->push_back(step);
    x_nodes->push_back(step);  // current state, always a feature
}

struct FitResult {
    Eigen::VectorXd coef;
    bool ridge_used = false;
    int rank = 0;
};

FitResult fit_least_squares(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                            double ridge_scale) {
    FitResult res;
    const int q = static_cast<int>(gram.rows());
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
    res.rank = static_cast<int>(qr.rank());
    if (res.rank == q) {
        Eigen::VectorXd coef = gram.ldlt().solve(rhs);
        if (coef.allFinite()) {
            res.coef = coef;
            return res;
        }
    }
    // Rank-deficient design: ridge fallback with reported conditioning.
    res.ridge_used = true;
    const double lam = ridge_scale * (gram.trace() / q + 1.0);
    res.coef = (gram + lam * Eigen::MatrixXd::Identity(q, q)).ldlt().solve(rhs);
    return res;
}

LsmcSurface lsmc_backward_pass(const ModelSpec& spec, const std::vector<SimPath>& paths,
                               const NoiseBundle& noise, const LsmcOptions& opts) {
    const TimeGrid& grid = noise.grid();
    const int n = grid.n_steps;
    const long np = static_cast<long>(paths.size());

    LsmcSurface surf;
    surf.grid = grid;
    surf.features = opts.features;
    surf.L = spec.L;
    surf.T = spec.T;
    surf.d = spec.d;
    surf.m0 = spec.m0;
    surf.noise_kind = opts.noise_kind;
    surf.slices.resize(static_cast<std::size_t>(n));

    const int n_controls = static_cast<int>(spec.control_grid.size());

    for (int i = n - 1; i >= 0; --i) {
        LsmcSlice& slice = surf.slices[static_cast<std::size_t>(i)];
        slice_feature_nodes(grid, opts.features, i, &slice.w_feature_nodes, &slice.x_feature_nodes);
        slice.coef.assign(static_cast<std::size_t>(n_controls), Eigen::VectorXd());

        // Full basis over all paths; then drop (near-)constant columns.
        Eigen::MatrixXd zfull;
        {
            slice.basis_keep.clear();  // raw basis while building
            RandomnessContext cx;
            cx.m0 = spec.m0;
            cx.w = paths[0].w.prefix_view(i);
            const Eigen::VectorXd probe =
                surf.basis(i, surf.raw_features(i, paths[0].x.prefix_view(i), cx));
            zfull.resize(np, probe.size());
            for (long p = 0; p < np; ++p) {
                RandomnessContext c2;
                c2.m0 = spec.m0;
                c2.w = paths[static_cast<std::size_t>(p)].w.prefix_view(i);
                zfull.row(p) = surf
                                   .basis(i, surf.raw_features(
                                                 i, paths[static_cast<std::size_t>(p)].x.prefix_view(i), c2))
                                   .transpose();
            }
            std::vector<int> keep{0};
            for (int c = 1; c < zfull.cols(); ++c) {
                const double mean = zfull.col(c).mean();
                const double var = (zfull.col(c).array() - mean).square().sum() / np;
                if (var > 1e-12 * (1.0 + mean * mean)) keep.push_back(c);
            }
            slice.basis_keep = keep;
        }
        const int q = static_cast<int>(slice.basis_keep.size());
        Eigen::MatrixXd Z(np, q);
        for (int c = 0; c < q; ++c) Z.col(c) = zfull.col(slice.basis_keep[static_cast<std::size_t>(c)]);
        const Eigen::MatrixXd gram = Z.transpose() * Z;
        slice.n_basis = q;

        // Per-control targets under shared one-step noise.
        for (int vi = 0; vi < n_controls; ++vi) {
            const Control& v = spec.control_grid[static_cast<std::size_t>(vi)];
            std::vector<double> y(static_cast<std::size_t>(np), 0.0);
            parallel_for(static_cast<std::size_t>(np), opts.workers, [&](std::size_t p) {
                const SimPath& sp = paths[p];
                RandomnessContext cx;
                cx.m0 = spec.m0;
                cx.w = sp.w.prefix_view(i);
                const PathView prefix = sp.x.prefix_view(i);
                const double t = grid.time(i);
                const double fc = spec.f(t, prefix, v, cx);
                const Eigen::VectorXd x_next =
                    prefix.back() + spec.beta(t, prefix, v, cx) * grid.dt +
                    spec.sigma(t, prefix, v, cx) * noise.increment_vec(static_cast<long>(p), i);
                // Path with the step under control v spliced in.
                DiscretePath mod = to_path(sp.x.prefix_view(i + 1));
                mod.mutable_node(i + 1) = x_next;
                RandomnessContext cnext;
                cnext.m0 = spec.m0;
                cnext.w = sp.w.prefix_view(i + 1);
                double cont;
                if (i + 1 == n) {
                    cont = spec.G(mod.view(), cnext);
                } else {
                    cont = surf.eval(i + 1, mod.view(), cnext);
                }
                y[p] = fc * grid.dt + cont;
            });
            const Eigen::VectorXd rhs =
                Z.transpose() * Eigen::Map<const Eigen::VectorXd>(y.data(), np);
            FitResult fit = fit_least_squares(gram, rhs, opts.ridge_scale);
            slice.coef[static_cast<std::size_t>(vi)] = fit.coef;
            slice.ridge_used = slice.ridge_used || fit.ridge_used;
            slice.rank = fit.rank;
        }
    }

    // Root value at the deterministic start.
    {
        RandomnessContext cx;
        cx.m0 = spec.m0;
        surf.root_value = surf.eval(0, paths[0].x.prefix_view(0), cx);
    }
    return surf;
}

}  // namespace

LsmcSurface lsmc_value(const ModelSpec& spec, const Eigen::VectorXd& x0, const LsmcOptions& opts) {
    if (opts.n_paths < 2) throw ValidationError("lsmc_value: need at least two paths");
    if (opts.n_policy_iters < 1) throw ValidationError("lsmc_value: n_policy_iters must be >= 1");
    for (double s : opts.features.snapshot_times)
        TimeGrid(0.0, spec.T, opts.n_steps).index_of(s);  // snapshots must be grid nodes
    const double mem =
        static_cast<double>(opts.n_paths) * (opts.n_steps + 1) * (spec.d + spec.m);
    if (mem > 2e8) throw ResourceError("lsmc_value: path storage exceeds the budget");

    TimeGrid grid(0.0, spec.T, opts.n_steps);
    NoiseBundle noise(grid, spec.m, spec.m0, opts.n_paths, opts.seed, opts.noise_kind);
    const DiscretePath xi = DiscretePath::constant(TimeGrid(0.0, grid.dt, 1), x0);

    // Training paths keep randomized controls: under a deterministic
    // policy the state is an affine function of the driving noise, the
    // feature design degenerates and the per-control regressions can no
    // longer identify the state slope of the continuation value. Later
    // passes concentrate on the greedy policy but stay epsilon-greedy.
    const int n_controls = static_cast<int>(spec.control_grid.size());
    const uint64_t explore_seed = substream(opts.seed, 0x9e3779b9ULL);
    auto explore_control = [explore_seed, n_controls](uint64_t iter, int step, long path) {
        return static_cast<int>(counter_hash(explore_seed, iter, static_cast<uint64_t>(path),
                                             static_cast<uint64_t>(step)) %
                                static_cast<uint64_t>(n_controls));
    };
    LsmcSurface surf;
    for (int iter = 0; iter < opts.n_policy_iters; ++iter) {
        ControlPolicy policy;
        if (iter == 0) {
            policy = ControlPolicy::feedback(
                [explore_control](int step, const PathView&, const RandomnessContext& ctx) {
                    return explore_control(0, step, ctx.path_index);
                });
        } else {
            const LsmcSurface frozen = surf;
            const uint64_t it = static_cast<uint64_t>(iter);
            policy = ControlPolicy::feedback(
                [frozen, explore_control, it](int step, const PathView& prefix,
                                              const RandomnessContext& ctx) {
                    if (counter_hash(0x5bd1e995ULL, it, static_cast<uint64_t>(ctx.path_index),
                                     static_cast<uint64_t>(step)) %
                            4 ==
                        0)
                        return explore_control(it, step, ctx.path_index);
                    return frozen.greedy_control(step, prefix, ctx);
                });
        }
        SimResult sim = simulate(spec, policy, 0.0, xi, noise, {}, opts.workers);
        surf = lsmc_backward_pass(spec, sim.paths, noise, opts);
    }
    return surf;
}

double dpp_residual_tree(const ModelSpec& spec, const ScenarioTree& tree,
                         const TreeValueResult& result) {
    TreeValueResult fresh = tree_backward_induction(spec, tree);
    double max_diff = std::abs(fresh.root_value - result.root_value);
    for (std::size_t k = 0; k < fresh.values.size(); ++k)
        for (std::size_t idx = 0; idx < fresh.values[k].size(); ++idx)
            max_diff = std::max(max_diff,
                                std::abs(fresh.values[k][idx] - result.values[k][idx]));
    return max_diff;
}

namespace {

// Q-values at the current TreeWalk prefix; reuses the Bellman DFS for
// the children so the min is taken over the same computed doubles.
void tree_q_values(TreeWalk& walk, int k, std::vector<double>* q) {
    const ModelSpec& spec = walk.spec;
    const ScenarioTree& tree = walk.tree;
    const double t = tree.grid.time(k);
    const PathView xv = walk.xview(k);
    const RandomnessContext cx = walk.ctx(k);
    q->resize(spec.control_grid.size());
    for (std::size_t vi = 0; vi < spec.control_grid.size(); ++vi) {
        const Control& v = spec.control_grid[vi];
        const Eigen::VectorXd b = spec.beta(t, xv, v, cx);
        const Eigen::MatrixXd s = spec.sigma(t, xv, v, cx);
        const double fc = spec.f(t, xv, v, cx);
        const Eigen::VectorXd base = xv.back() + b * tree.grid.dt;
        double acc = 0.0;
        for (int j = 0; j < tree.branching(); ++j) {
            walk.write_child(k, base + s * tree.branches[static_cast<std::size_t>(j)], j);
            acc += tree.weights[static_cast<std::size_t>(j)] * walk.bellman(k + 1, -1);
        }
        (*q)[vi] = fc * tree.grid.dt + acc;
    }
}

double supermartingale_walk(TreeWalk& walk, int k, long idx, uint64_t seed) {
    const ScenarioTree& tree = walk.tree;
    if (k == tree.depth()) return std::numeric_limits<double>::infinity();
    std::vector<double> q;
    tree_q_values(walk, k, &q);
    double vmin = q[0];
    for (double qv : q) vmin = std::min(vmin, qv);
    const int vi = static_cast<int>(counter_hash(seed, static_cast<uint64_t>(k),
                                                 static_cast<uint64_t>(idx), 3) %
                                    q.size());
    double worst = q[static_cast<std::size_t>(vi)] - vmin;
    // Descend the strategy's children.
    const ModelSpec& spec = walk.spec;
    const double t = tree.grid.time(k);
    const PathView xv = walk.xview(k);
    const RandomnessContext cx = walk.ctx(k);
    const Control& v = spec.control_grid[static_cast<std::size_t>(vi)];
    const Eigen::VectorXd b = spec.beta(t, xv, v, cx);
    const Eigen::MatrixXd s = spec.sigma(t, xv, v, cx);
    const Eigen::VectorXd base = xv.back() + b * tree.grid.dt;
    for (int j = 0; j < tree.branching(); ++j) {
        walk.write_child(k, base + s * tree.branches[static_cast<std::size_t>(j)], j);
        worst = std::min(worst,
                         supermartingale_walk(walk, k + 1, idx * tree.branching() + j, seed));
    }
    return worst;
}

}  // namespace

double tree_supermartingale_violation(const ModelSpec& spec, const ScenarioTree& tree,
                                      uint64_t strategy_seed) {
    tree.validate(spec);
    TreeWalk walk(spec, tree);
    return supermartingale_walk(walk, 0, 0, strategy_seed);
}

DppResidualReport dpp_residual_lsmc(const ModelSpec& spec, const LsmcSurface& surface, int step_t,
                                    int step_that, const std::vector<SimPath>& test_paths,
                                    long n_inner, uint64_t seed, int workers) {
    if (!(step_t < step_that)) throw ValidationError("dpp_residual: need step_t < step_that");
    const TimeGrid& grid = surface.grid;
    const double t = grid.time(step_t);
    DppResidualReport rep;
    const int n_controls = static_cast<int>(spec.control_grid.size());
    for (std::size_t pi = 0; pi < test_paths.size(); ++pi) {
        const SimPath& tp = test_paths[pi];
        const DiscretePath prefix = to_path(tp.x.prefix_view(step_t));
        const DiscretePath wpre = to_path(tp.w.prefix_view(step_t));
        RandomnessContext cx;
        cx.m0 = spec.m0;
        cx.w = tp.w.prefix_view(step_t);
        const double v_here = surface.eval(step_t, tp.x.prefix_view(step_t), cx);

        double best = std::numeric_limits<double>::infinity();
        double best_se = 0.0;
        for (int vi = 0; vi < n_controls; ++vi) {
            NoiseBundle inner(grid, spec.m, spec.m0, n_inner,
                              substream(seed, 1000 + pi * 16 + static_cast<uint64_t>(vi)),
                              surface.noise_kind);
            std::vector<double> vals(static_cast<std::size_t>(n_inner), 0.0);
            parallel_for(static_cast<std::size_t>(n_inner), workers, [&](std::size_t p) {
                const SimPath sp = simulate_path(spec, ControlPolicy::constant(vi), t, prefix,
                                                 inner, static_cast<long>(p), {}, &wpre);
                RandomnessContext c2;
                c2.m0 = spec.m0;
                double acc = 0.0;
                for (int k = step_t; k < step_that; ++k) {
                    c2.w = sp.w.prefix_view(k);
                    acc += spec.f(grid.time(k), sp.x.prefix_view(k),
                                  spec.control_grid[static_cast<std::size_t>(vi)], c2) *
                           grid.dt;
                }
                c2.w = sp.w.prefix_view(step_that);
                acc += surface.eval(step_that, sp.x.prefix_view(step_that), c2);
                vals[p] = acc;
            });
            const MeanSe ms = mean_se(vals);
            if (ms.mean < best) {
                best = ms.mean;
                best_se = ms.se;
            }
        }
        rep.max_residual = std::max(rep.max_residual, std::abs(v_here - best));
        rep.max_allowed = std::max(rep.max_allowed, 3.0 * best_se);
    }
    rep.pass = rep.max_residual <= rep.max_allowed + 1e-12;
    return rep;
}

}  // namespace pathhjb
