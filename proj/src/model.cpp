#include "pathhjb/model.hpp"

#include <algorithm>
#include <cmath>

#include "pathhjb/rng.hpp"

namespace pathhjb {

void ModelSpec::validate() const {
    if (d <= 0 || m <= 0) throw ValidationError("ModelSpec: dimensions must be positive");
    if (m0 < 0 || m0 > m) throw ValidationError("ModelSpec: m0 must lie in [0, m]");
    if (!(T > 0.0)) throw ValidationError("ModelSpec: T must be positive");
    if (control_grid.empty()) throw ValidationError("ModelSpec: control grid must be non-empty");
    if (!(L > 0.0)) throw ValidationError("ModelSpec: L must be positive");
    if (lambda && m1() == 0)
        throw ValidationError("ModelSpec: lambda declared but the W-bar block is empty (m1 = 0)");
    if (!beta || !sigma || !f || !G) throw ValidationError("ModelSpec: missing coefficient functional");
}

HamiltonianResult hamiltonian(const ModelSpec& spec, double t, const PathView& x,
                              const Eigen::VectorXd& p, const Eigen::MatrixXd& A,
                              const Eigen::MatrixXd& B, const RandomnessContext& ctx) {
    if (p.size() != spec.d) throw ValidationError("hamiltonian: p must have size d");
    if (A.rows() != spec.d || A.cols() != spec.d) throw ValidationError("hamiltonian: A must be d x d");
    if (!A.isApprox(A.transpose(), 1e-10)) throw ValidationError("hamiltonian: A must be symmetric");
    if (B.rows() != spec.m || B.cols() != spec.d) throw ValidationError("hamiltonian: B must be m x d");
    HamiltonianResult best;
    best.value = std::numeric_limits<double>::infinity();
    best.argmin_index = 0;
    for (int vi = 0; vi < static_cast<int>(spec.control_grid.size()); ++vi) {
        const Control& v = spec.control_grid[vi];
        const Eigen::MatrixXd sig = spec.sigma(t, x, v, ctx);
        const Eigen::VectorXd b = spec.beta(t, x, v, ctx);
        const double fc = spec.f(t, x, v, ctx);
        const double val = 0.5 * (sig * sig.transpose() * A).trace() + (sig * B).trace() +
                           b.dot(p) + fc;
        if (!std::isfinite(val))
            throw EvaluationError("hamiltonian: non-finite coefficient output at t=" +
                                  std::to_string(t) + ", control index " + std::to_string(vi));
        if (val < best.value) {
            best.value = val;
            best.argmin_index = vi;
        }
    }
    return best;
}

std::pair<double, double> classical_bounds(double L, double T, double t) {
    if (t < 0.0 || t > T + 1e-12) throw ValidationError("classical_bounds: t must lie in [0, T]");
    const double e = L * std::exp(L * (T - t));
    return {e, -e};
}

namespace {

// Random Brownian-style path on [0, horizon]; used by the audits.
DiscretePath sample_audit_path(int d, double horizon, int steps, uint64_t seed, uint64_t id) {
    TimeGrid g(0.0, horizon, steps);
    DiscretePath p(g, d);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
    for (int j = 0; j < d; ++j) x[j] = 2.0 * normal_draw(seed, id, 0, static_cast<uint64_t>(j) + 1000);
    p.mutable_node(0) = x;
    const double sdt = std::sqrt(g.dt);
    for (int i = 1; i <= steps; ++i) {
        for (int j = 0; j < d; ++j)
            x[j] += sdt * normal_draw(seed, id, static_cast<uint64_t>(i), static_cast<uint64_t>(j));
        p.mutable_node(i) = x;
    }
    return p;
}

RandomnessContext sample_audit_ctx(const DiscretePath& w_storage, int m0, uint64_t seed) {
    RandomnessContext ctx;
    ctx.w = w_storage.view();
    ctx.m0 = m0;
    ctx.seed_id = seed;
    return ctx;
}

}  // namespace

SuperparabolicReport check_superparabolic(const ModelSpec& spec, int n_samples, uint64_t seed) {
    if (!spec.lambda) throw ValidationError("check_superparabolic: spec declares no lambda");
    if (spec.m1() < 1) throw ValidationError("check_superparabolic: m1 must be >= 1");
    SuperparabolicReport rep;
    rep.n_samples = n_samples;
    rep.worst_eigenvalue = std::numeric_limits<double>::infinity();
    const uint64_t s2 = substream(seed, 71);
    for (int k = 0; k < n_samples; ++k) {
        const DiscretePath x = sample_audit_path(spec.d, spec.T, 16, seed, static_cast<uint64_t>(k));
        const DiscretePath w = sample_audit_path(spec.m, spec.T, 16, s2, static_cast<uint64_t>(k));
        const RandomnessContext ctx = sample_audit_ctx(w, spec.m0, seed);
        const int node = static_cast<int>(uniform_draw(seed, 9000, k, 0) * 16.0);
        const double t = x.grid().time(std::min(node, 16));
        const int vi = static_cast<int>(uniform_draw(seed, 9001, k, 0) * spec.control_grid.size());
        const Control& v = spec.control_grid[std::min<int>(vi, spec.control_grid.size() - 1)];
        const Eigen::MatrixXd sig =
            spec.sigma(t, x.prefix_view(x.grid().index_of(t)), v, ctx.truncated(t));
        const Eigen::MatrixXd bar = sig.rightCols(spec.m1());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bar * bar.transpose());
        rep.worst_eigenvalue = std::min(rep.worst_eigenvalue, es.eigenvalues().minCoeff());
    }
    rep.ok = rep.worst_eigenvalue >= *spec.lambda - 1e-12;
    return rep;
}

LipschitzReport check_lipschitz(const ModelSpec& spec, int n_samples, uint64_t seed) {
    LipschitzReport rep;
    rep.declared_L = spec.L;
    std::vector<std::string> names;
    names.push_back("f");
    for (int i = 0; i < spec.d; ++i) names.push_back("beta[" + std::to_string(i) + "]");
    for (int i = 0; i < spec.d; ++i)
        for (int j = 0; j < spec.m; ++j)
            names.push_back("sigma[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    names.push_back("G");
    rep.entries.resize(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) rep.entries[i].name = names[i];

    const int steps = 16;
    const uint64_t sy = substream(seed, 1);
    const uint64_t sw = substream(seed, 2);
    for (int k = 0; k < n_samples; ++k) {
        const DiscretePath x = sample_audit_path(spec.d, spec.T, steps, seed, static_cast<uint64_t>(k));
        DiscretePath y = (k % 2 == 0)
                             ? sample_audit_path(spec.d, spec.T, steps, sy, static_cast<uint64_t>(k))
                             : x;
        if (k % 2 == 1) {
            // Pair differing only at the endpoint: catches violations local
            // to the current state.
            Eigen::VectorXd h = Eigen::VectorXd::Zero(spec.d);
            for (int j = 0; j < spec.d; ++j)
                h[j] = 0.5 * normal_draw(seed, 31, static_cast<uint64_t>(k), static_cast<uint64_t>(j));
            y = vertical_perturb(y, h);
        }
        const DiscretePath w = sample_audit_path(spec.m, spec.T, steps, sw, static_cast<uint64_t>(k));
        const RandomnessContext ctx = sample_audit_ctx(w, spec.m0, seed);
        const int node = 1 + static_cast<int>(uniform_draw(seed, 9100, k, 0) * (steps - 1));
        const double t = x.grid().time(node);
        const PathView xv = x.prefix_view(node);
        const PathView yv = y.prefix_view(node);
        const int vi = static_cast<int>(uniform_draw(seed, 9101, k, 0) * spec.control_grid.size());
        const Control& v = spec.control_grid[std::min<int>(vi, spec.control_grid.size() - 1)];
        const RandomnessContext ctx_t = ctx.truncated(t);

        Eigen::VectorXd dx = Eigen::VectorXd::Zero(spec.d);
        double dist = 0.0;
        for (int i = 0; i <= node; ++i) dist = std::max(dist, (x.node(i) - y.node(i)).norm());
        (void)dx;

        std::size_t e = 0;
        auto record = [&](double gx, double gy) {
            rep.entries[e].max_abs = std::max({rep.entries[e].max_abs, std::abs(gx), std::abs(gy)});
            if (dist > 1e-12)
                rep.entries[e].max_ratio = std::max(rep.entries[e].max_ratio, std::abs(gx - gy) / dist);
            ++e;
        };
        record(spec.f(t, xv, v, ctx_t), spec.f(t, yv, v, ctx_t));
        {
            const Eigen::VectorXd bx = spec.beta(t, xv, v, ctx_t);
            const Eigen::VectorXd by = spec.beta(t, yv, v, ctx_t);
            for (int i = 0; i < spec.d; ++i) record(bx[i], by[i]);
        }
        {
            const Eigen::MatrixXd sx = spec.sigma(t, xv, v, ctx_t);
            const Eigen::MatrixXd sy2 = spec.sigma(t, yv, v, ctx_t);
            for (int i = 0; i < spec.d; ++i)
                for (int j = 0; j < spec.m; ++j) record(sx(i, j), sy2(i, j));
        }
        {
            double gdist = 0.0;
            for (int i = 0; i < x.n_nodes(); ++i) gdist = std::max(gdist, (x.node(i) - y.node(i)).norm());
            const double gx = spec.G(x.view(), ctx);
            const double gy = spec.G(y.view(), ctx);
            auto& entry = rep.entries.back();
            entry.max_abs = std::max({entry.max_abs, std::abs(gx), std::abs(gy)});
            if (gdist > 1e-12) entry.max_ratio = std::max(entry.max_ratio, std::abs(gx - gy) / gdist);
        }
    }
    rep.ratio_ok = true;
    rep.bound_ok = true;
    for (const auto& entry : rep.entries) {
        if (entry.max_ratio > spec.L * (1.0 + 1e-9)) rep.ratio_ok = false;
        if (entry.max_abs > spec.L * (1.0 + 1e-9)) rep.bound_ok = false;
    }
    rep.pass = rep.ratio_ok && rep.bound_ok;
    return rep;
}

// --- built-in families ---

ModelSpec demo_model() {
    ModelSpec spec;
    spec.d = 2;
    spec.m = 2;
    spec.m0 = 1;
    spec.T = 1.0;
    spec.L = 1.0;
    spec.family = "demo";
    Control lo(1), hi(1);
    lo << -1.0;
    hi << 1.0;
    spec.control_grid = {lo, hi};
    spec.beta = [](double, const PathView& x, const Control& v, const RandomnessContext&) {
        const auto xt = x.back();
        Eigen::VectorXd b(2);
        b << 0.3 * std::sin(xt[0]) + 0.2 * v[0], 0.3 * std::cos(xt[1]) - 0.2 * v[0];
        return b;
    };
    spec.sigma = [](double, const PathView& x, const Control&, const RandomnessContext&) {
        const auto xt = x.back();
        Eigen::MatrixXd s(2, 2);
        s << 0.4 + 0.2 * std::cos(xt[0]), 0.1 * std::sin(xt[0] + xt[1]),
             0.0,                          0.35 + 0.15 * std::sin(xt[1]);
        return s;
    };
    spec.f = [](double t, const PathView& x, const Control& v, const RandomnessContext& ctx) {
        const auto xt = x.back();
        return 0.2 + 0.15 * std::sin(xt[0]) + 0.1 * v[0] + 0.1 * std::cos(ctx.w_comp_at(0, t));
    };
    spec.G = [](const PathView& x, const RandomnessContext&) {
        double running_max = x.node(0)[0];
        for (int i = 1; i < x.n_nodes; ++i) running_max = std::max(running_max, x.node(i)[0]);
        return 0.5 * std::tanh(running_max);
    };
    return spec;
}

namespace {

ModelSpec lsmc_tree_base() {
    ModelSpec spec;
    spec.d = 1;
    spec.m = 1;
    spec.m0 = 1;
    spec.T = 1.0;
    spec.L = 3.0;
    spec.family = "lsmc-tree";
    spec.beta = [](double, const PathView&, const Control& v, const RandomnessContext&) {
        Eigen::VectorXd b(1);
        b << 0.3 * v[0];
        return b;
    };
    spec.sigma = [](double, const PathView&, const Control&, const RandomnessContext&) {
        Eigen::MatrixXd s(1, 1);
        s << 0.5;
        return s;
    };
    spec.f = [](double, const PathView&, const Control& v, const RandomnessContext&) {
        return 0.1 * v[0];
    };
    spec.G = [](const PathView& x, const RandomnessContext&) {
        const double half = 0.5;
        const double g = 0.8 * x.back()[0] - 1.2 * x.value_at(std::min(half, x.t()))[0];
        return std::clamp(g, -3.0, 3.0);
    };
    return spec;
}

}  // namespace

ModelSpec lsmc_tree_model() {
    ModelSpec spec = lsmc_tree_base();
    Control lo(1), hi(1);
    lo << -1.0;
    hi << 1.0;
    spec.control_grid = {lo, hi};
    return spec;
}

ModelSpec lsmc_tree_single_model() {
    ModelSpec spec = lsmc_tree_base();
    spec.family = "lsmc-tree-single";
    Control v(1);
    v << -1.0;
    spec.control_grid = {v};
    return spec;
}

ModelSpec faulty_lipschitz_model() {
    ModelSpec spec;
    spec.d = 1;
    spec.m = 1;
    spec.m0 = 1;
    spec.T = 1.0;
    spec.L = 1.0;  // deliberately understated
    spec.family = "faulty-lipschitz";
    Control lo(1), hi(1);
    lo << -1.0;
    hi << 1.0;
    spec.control_grid = {lo, hi};
    spec.beta = [](double, const PathView& x, const Control&, const RandomnessContext&) {
        Eigen::VectorXd b(1);
        b << std::clamp(2.0 * x.back()[0], -5.0, 5.0);
        return b;
    };
    spec.sigma = [](double, const PathView&, const Control&, const RandomnessContext&) {
        Eigen::MatrixXd s(1, 1);
        s << 0.5;
        return s;
    };
    spec.f = [](double, const PathView&, const Control&, const RandomnessContext&) { return 0.0; };
    spec.G = [](const PathView& x, const RandomnessContext&) { return std::tanh(x.back()[0]); };
    return spec;
}

ModelSpec random_bounded_spec(uint64_t seed) {
    ModelSpec spec;
    spec.d = 1;
    spec.m = 1;
    spec.m0 = 1;
    spec.T = 1.0;
    spec.family = "random-bounded";
    auto u = [seed](uint64_t tag) { return uniform_draw(seed, 777, tag, 0); };
    spec.L = 1.0 + 1.5 * u(0);
    const double cap = 0.9 * spec.L;
    // Amplitudes chosen so both the sup bound and the Lipschitz constant
    // stay strictly below the declared L.
    const double b0 = cap * 0.3 * (2.0 * u(1) - 1.0);
    const double b1 = cap * 0.3 * (2.0 * u(2) - 1.0);
    const double b2 = cap * 0.3 * (2.0 * u(3) - 1.0);
    const double s0 = 0.2 + 0.3 * u(4);
    const double s1 = 0.15 * (2.0 * u(5) - 1.0) * s0;
    const double c0 = cap * 0.3 * (2.0 * u(6) - 1.0);
    const double c1 = cap * 0.3 * (2.0 * u(7) - 1.0);
    const double c2 = cap * 0.3 * (2.0 * u(8) - 1.0);
    const double g0 = cap * 0.5 * (2.0 * u(9) - 1.0);
    const double g1 = cap * 0.4 * (2.0 * u(10) - 1.0);
    Control lo(1), hi(1);
    lo << -1.0 + 0.5 * u(11);
    hi << 1.0 - 0.5 * u(12);
    spec.control_grid = {lo, hi};
    spec.beta = [b0, b1, b2](double, const PathView& x, const Control& v, const RandomnessContext&) {
        Eigen::VectorXd b(1);
        b << b0 + b1 * std::sin(x.back()[0]) + b2 * v[0];
        return b;
    };
    spec.sigma = [s0, s1](double, const PathView& x, const Control&, const RandomnessContext&) {
        Eigen::MatrixXd s(1, 1);
        s << s0 + s1 * std::cos(x.back()[0]);
        return s;
    };
    spec.f = [c0, c1, c2](double, const PathView& x, const Control& v, const RandomnessContext&) {
        return c0 + c1 * std::sin(x.back()[0]) + c2 * v[0];
    };
    spec.G = [g0, g1](const PathView& x, const RandomnessContext&) {
        double running_max = x.node(0)[0];
        for (int i = 1; i < x.n_nodes; ++i) running_max = std::max(running_max, x.node(i)[0]);
        return g0 * std::tanh(x.back()[0]) + g1 * std::tanh(running_max);
    };
    return spec;
}

ModelSpec builtin_model(const std::string& family, uint64_t seed) {
    if (family == "demo") return demo_model();
    if (family == "lsmc-tree") return lsmc_tree_model();
    if (family == "lsmc-tree-single") return lsmc_tree_single_model();
    if (family == "faulty-lipschitz") return faulty_lipschitz_model();
    if (family == "random-bounded") return random_bounded_spec(seed);
    throw ValidationError("unknown model family: " + family);
}

}  // namespace pathhjb
