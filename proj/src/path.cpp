#include "pathhjb/path.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pathhjb {

namespace {

constexpr double kAlignTol = 1e-9;

bool close(double a, double b, double scale) { return std::abs(a - b) <= kAlignTol * std::max(1.0, std::abs(scale)); }

}  // namespace

TimeGrid::TimeGrid(double start, double end, int steps) : t_start(start), t_end(end), n_steps(steps) {
    if (!(start < end)) throw ValidationError("TimeGrid: t_start must be < t_end");
    if (steps <= 0) throw ValidationError("TimeGrid: n_steps must be positive");
    dt = (end - start) / static_cast<double>(steps);
}

bool TimeGrid::aligned(double t) const {
    const double u = (t - t_start) / dt;
    const double r = std::round(u);
    return r >= -0.5 && r <= n_steps + 0.5 && std::abs(u - r) * dt <= kAlignTol * std::max(1.0, span());
}

int TimeGrid::index_of(double t) const {
    const double u = (t - t_start) / dt;
    const int r = static_cast<int>(std::lround(u));
    if (r < 0 || r > n_steps || std::abs(u - r) * dt > kAlignTol * std::max(1.0, span()))
        throw ValidationError("time " + std::to_string(t) + " is not a grid node");
    return r;
}

bool TimeGrid::same_dt(const TimeGrid& other) const { return close(dt, other.dt, dt); }

Eigen::Map<const Eigen::VectorXd> PathView::value_at(double s) const {
    return node(node_index_at(s));
}

int PathView::node_index_at(double s) const {
    if (empty()) throw ValidationError("value_at on empty path");
    const double u = (s - t0) / dt;
    int i = static_cast<int>(std::floor(u + kAlignTol));
    i = std::clamp(i, 0, n_nodes - 1);
    return i;
}

DiscretePath::DiscretePath(TimeGrid grid, int dim) : grid_(grid), dim_(dim) {
    if (dim <= 0) throw ValidationError("DiscretePath: dim must be positive");
    values_.assign(static_cast<std::size_t>(grid_.n_nodes()) * dim_, 0.0);
}

DiscretePath::DiscretePath(TimeGrid grid, std::vector<double> values, int dim)
    : grid_(grid), dim_(dim), values_(std::move(values)) {
    if (dim <= 0) throw ValidationError("DiscretePath: dim must be positive");
    if (values_.size() != static_cast<std::size_t>(grid_.n_nodes()) * dim_)
        throw ValidationError("DiscretePath: values length must be (n_steps+1)*dim");
    for (double v : values_)
        if (!std::isfinite(v)) throw ValidationError("DiscretePath: non-finite entry");
}

DiscretePath DiscretePath::constant(const TimeGrid& grid, const Eigen::VectorXd& value) {
    DiscretePath p(grid, static_cast<int>(value.size()));
    for (int i = 0; i < grid.n_nodes(); ++i) p.mutable_node(i) = value;
    return p;
}

void DiscretePath::set_node(int i, const Eigen::VectorXd& v) {
    if (v.size() != dim_) throw ValidationError("set_node: dimension mismatch");
    mutable_node(i) = v;
}

DiscretePath DiscretePath::restricted(double t) const {
    const int idx = grid_.index_of(t);
    TimeGrid g(grid_.t_start, t, idx == 0 ? 1 : idx);
    if (idx == 0) {
        // Degenerate request: a single-node path is not representable on a
        // TimeGrid, so keep one step and freeze the start value.
        g = TimeGrid(grid_.t_start, grid_.t_start + grid_.dt, 1);
        DiscretePath p(g, dim_);
        p.mutable_node(0) = node(0);
        p.mutable_node(1) = node(0);
        return p;
    }
    g.dt = grid_.dt;  // exact, avoids re-division drift
    std::vector<double> vals(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(idx + 1) * dim_);
    return DiscretePath(g, std::move(vals), dim_);
}

bool DiscretePath::operator==(const DiscretePath& other) const {
    return dim_ == other.dim_ && grid_.n_steps == other.grid_.n_steps &&
           close(grid_.t_start, other.grid_.t_start, 1.0) && close(grid_.t_end, other.grid_.t_end, 1.0) &&
           values_ == other.values_;
}

DiscretePath to_path(const PathView& view) {
    if (view.empty()) throw ValidationError("to_path: empty view");
    const int steps = std::max(1, view.n_nodes - 1);
    TimeGrid g(view.t0, view.t0 + view.dt * steps, steps);
    g.dt = view.dt;
    DiscretePath p(g, view.dim);
    for (int i = 0; i < view.n_nodes; ++i) p.mutable_node(i) = view.node(i);
    if (view.n_nodes == 1) p.mutable_node(1) = view.node(0);
    return p;
}

double sup_norm(const PathView& x) {
    if (x.empty()) throw ValidationError("sup_norm: empty path");
    double m = 0.0;
    for (int i = 0; i < x.n_nodes; ++i) m = std::max(m, x.node(i).norm());
    return m;
}

double d0(const PathView& a, const PathView& b) {
    if (a.empty() || b.empty()) throw ValidationError("d0: empty path");
    if (a.dim != b.dim) throw ValidationError("d0: dimension mismatch");
    if (!close(a.t0, b.t0, 1.0)) throw ValidationError("d0: paths must share the start time");
    // x is the shorter path (length r), y the longer (length t).
    const PathView& x = (a.t() <= b.t()) ? a : b;
    const PathView& y = (a.t() <= b.t()) ? b : a;
    // Grids must match, or one must be a refinement of the other.
    double fine_dt = std::min(x.dt, y.dt);
    {
        const double ratio = std::max(x.dt, y.dt) / fine_dt;
        if (std::abs(ratio - std::round(ratio)) > 1e-9)
            throw ValidationError("d0: grids are not nested");
    }
    const double r = x.t();
    const double t = y.t();
    const int n_fine = static_cast<int>(std::lround((t - x.t0) / fine_dt));
    const Eigen::VectorXd xr = x.back();
    double sup = 0.0;
    for (int i = 0; i <= n_fine; ++i) {
        const double s = x.t0 + fine_dt * i;
        const Eigen::VectorXd ys = y.value_at(std::min(s, t));
        double dist;
        if (s < r - kAlignTol) {
            dist = (x.value_at(s) - ys).norm();
        } else {
            dist = (xr - ys).norm();
        }
        sup = std::max(sup, dist);
    }
    return std::sqrt(std::max(0.0, t - r)) + sup;
}

DiscretePath horizontal_extend(const PathView& x, double delta) {
    if (x.empty()) throw ValidationError("horizontal_extend: empty path");
    if (delta < 0) throw ValidationError("horizontal_extend: delta must be >= 0");
    const double steps_real = delta / x.dt;
    const int extra = static_cast<int>(std::lround(steps_real));
    if (std::abs(steps_real - extra) * x.dt > kAlignTol)
        throw ValidationError("horizontal_extend: delta is not a multiple of dt");
    const int steps = std::max(1, x.n_nodes - 1 + extra);
    TimeGrid g(x.t0, x.t0 + x.dt * steps, steps);
    g.dt = x.dt;
    DiscretePath p(g, x.dim);
    for (int i = 0; i < x.n_nodes; ++i) p.mutable_node(i) = x.node(i);
    const Eigen::VectorXd last = x.back();
    for (int i = x.n_nodes; i <= steps; ++i) p.mutable_node(i) = last;
    return p;
}

DiscretePath vertical_perturb(const PathView& x, const Eigen::VectorXd& h) {
    if (x.empty()) throw ValidationError("vertical_perturb: empty path");
    if (h.size() != x.dim) throw ValidationError("vertical_perturb: bump dimension mismatch");
    DiscretePath p = to_path(x);
    p.mutable_node(p.n_nodes() - 1) += h;
    return p;
}

double holder_seminorm(const PathView& x, double t0, double t1, double alpha, int max_lag) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("holder_seminorm: alpha must be in (0,1)");
    if (!(t0 < t1)) throw ValidationError("holder_seminorm: t0 must be < t1");
    if (x.empty()) throw ValidationError("holder_seminorm: empty path");
    const double u0 = (t0 - x.t0) / x.dt;
    const double u1 = (t1 - x.t0) / x.dt;
    const int i0 = static_cast<int>(std::lround(u0));
    const int i1 = static_cast<int>(std::lround(u1));
    if (std::abs(u0 - i0) * x.dt > kAlignTol || std::abs(u1 - i1) * x.dt > kAlignTol || i0 < 0 ||
        i1 > x.n_nodes - 1)
        throw ValidationError("holder_seminorm: window must lie on grid nodes");
    const int span = i1 - i0;
    const int lag_cap = (max_lag > 0) ? std::min(max_lag, span) : span;
    // Precompute lag^{-alpha} weights.
    std::vector<double> w(static_cast<std::size_t>(lag_cap) + 1, 0.0);
    for (int lag = 1; lag <= lag_cap; ++lag) w[lag] = 1.0 / std::pow(x.dt * lag, alpha);
    double m = 0.0;
    for (int i = i0; i < i1; ++i) {
        const auto xi = x.node(i);
        const int jmax = std::min(i1, i + lag_cap);
        for (int j = i + 1; j <= jmax; ++j) {
            const double diff = (x.node(j) - xi).norm();
            m = std::max(m, diff * w[j - i]);
        }
    }
    return m;
}

HolderClassParams::HolderClassParams(double k_in, double alpha_in, DiscretePath anchor_in)
    : k(k_in), alpha(alpha_in), anchor(std::move(anchor_in)) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("HolderClassParams: alpha must be in (0,1)");
    if (!(k > 0.0)) throw ValidationError("HolderClassParams: k must be positive");
}

bool in_holder_ball(const PathView& x, const HolderClassParams& params, double t) {
    const PathView xi = params.anchor.view();
    if (x.dim != xi.dim) throw ValidationError("in_holder_ball: dimension mismatch");
    if (std::abs(x.dt - xi.dt) > kAlignTol) throw ValidationError("in_holder_ball: grids must share dt");
    const int it = x.node_index_at(t);
    if (std::abs(x.time(it) - t) > kAlignTol) throw ValidationError("in_holder_ball: t must be a grid node");
    // The history before t must coincide with the anchor.
    for (int i = 0; i < it && i < xi.n_nodes; ++i) {
        if ((x.node(i) - xi.node(i)).norm() > 1e-12)
            throw ValidationError("in_holder_ball: path disagrees with anchor before t");
    }
    const int anchor_it = std::min(it, xi.n_nodes - 1);
    if ((x.node(it) - xi.node(anchor_it)).norm() > 1e-12) return false;
    const double s = x.t();
    if (s <= t + kAlignTol) return true;
    return holder_seminorm(x, t, s, params.alpha) <= params.k;
}

double first_holder_exit(const PathView& x, double r, double alpha, double k) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("first_holder_exit: alpha must be in (0,1)");
    if (x.empty()) throw ValidationError("first_holder_exit: empty path");
    const double ur = (r - x.t0) / x.dt;
    const int ir = static_cast<int>(std::lround(ur));
    if (ir < 0 || ir > x.n_nodes - 1 || std::abs(ur - ir) * x.dt > kAlignTol)
        throw ValidationError("first_holder_exit: r must be a grid node");
    const int last = x.n_nodes - 1;
    // Same weight arithmetic as holder_seminorm, so window seminorms
    // reproduce bitwise and the boundary case k == seminorm stays inside.
    std::vector<double> w(static_cast<std::size_t>(last - ir) + 1, 0.0);
    for (int lag = 1; lag <= last - ir; ++lag) w[lag] = 1.0 / std::pow(x.dt * lag, alpha);
    double running = 0.0;
    for (int j = ir + 1; j <= last; ++j) {
        // Extend the window to node j: only pairs (i, j) are new.
        const auto xj = x.node(j);
        for (int i = ir; i < j; ++i)
            running = std::max(running, (xj - x.node(i)).norm() * w[j - i]);
        if (running > k) return x.time(j);
    }
    return x.time(last);
}

void save_path(const DiscretePath& path, std::ostream& os) {
    os << "t";
    for (int j = 1; j <= path.dim(); ++j) os << ",x" << j;
    os << "\n";
    char buf[32];
    for (int i = 0; i < path.n_nodes(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", path.grid().time(i));
        os << buf;
        const auto v = path.node(i);
        for (int j = 0; j < path.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", v[j]);
            os << "," << buf;
        }
        os << "\n";
    }
}

void save_path(const DiscretePath& path, const std::string& file) {
    std::ofstream os(file);
    if (!os) throw ValidationError("save_path: cannot open " + file);
    save_path(path, os);
}

DiscretePath load_path(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("load_path: empty input");
    int dim = 0;
    {
        std::stringstream hs(line);
        std::string tok;
        bool first = true;
        while (std::getline(hs, tok, ',')) {
            if (first) {
                if (tok != "t") throw ValidationError("load_path: header must start with 't'");
                first = false;
            } else {
                ++dim;
            }
        }
    }
    if (dim <= 0) throw ValidationError("load_path: no coordinate columns");
    std::vector<double> times;
    std::vector<double> values;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string tok;
        int col = 0;
        while (std::getline(ls, tok, ',')) {
            const double v = std::stod(tok);
            if (col == 0)
                times.push_back(v);
            else
                values.push_back(v);
            ++col;
        }
        if (col != dim + 1) throw ValidationError("load_path: ragged row");
    }
    if (times.size() < 2) throw ValidationError("load_path: need at least two nodes");
    const int steps = static_cast<int>(times.size()) - 1;
    TimeGrid g(times.front(), times.back(), steps);
    return DiscretePath(g, std::move(values), dim);
}

DiscretePath load_path(const std::string& file) {
    std::ifstream is(file);
    if (!is) throw ValidationError("load_path: cannot open " + file);
    return load_path(is);
}

}  // namespace pathhjb
