#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "pathhjb/errors.hpp"

namespace pathhjb {

// Uniform mesh on [t_start, t_end] with n_steps steps.
struct TimeGrid {
    double t_start = 0.0;
    double t_end = 1.0;
    int n_steps = 1;
    double dt = 1.0;

    TimeGrid() = default;
    TimeGrid(double start, double end, int steps);

    int n_nodes() const { return n_steps + 1; }
    double time(int i) const { return t_start + dt * static_cast<double>(i); }
    double span() const { return t_end - t_start; }

    bool aligned(double t) const;
    // Nearest node index; throws ValidationError if t is off-grid.
    int index_of(double t) const;
    bool same_dt(const TimeGrid& other) const;
};

// Non-owning window onto path data: nodes 0..n_nodes-1, node i at time
// t0 + i*dt, each node a point in R^dim. Value semantics on [t0, t()]
// are right-continuous steps; the path value at off-node times inside
// the window is the value at the last node at or before that time.
struct PathView {
    const double* data = nullptr;
    int n_nodes = 0;
    int dim = 0;
    double t0 = 0.0;
    double dt = 1.0;

    bool empty() const { return n_nodes == 0; }
    double t() const { return t0 + dt * static_cast<double>(n_nodes - 1); }
    double time(int i) const { return t0 + dt * static_cast<double>(i); }

    Eigen::Map<const Eigen::VectorXd> node(int i) const {
        return Eigen::Map<const Eigen::VectorXd>(data + static_cast<std::ptrdiff_t>(i) * dim, dim);
    }
    Eigen::Map<const Eigen::VectorXd> back() const { return node(n_nodes - 1); }
    // Left limit at the terminal time: the penultimate node when there
    // is one, otherwise the single node.
    Eigen::Map<const Eigen::VectorXd> back_left_limit() const {
        return node(n_nodes >= 2 ? n_nodes - 2 : 0);
    }
    // Step-interpolated value at time s in [t0, t()].
    Eigen::Map<const Eigen::VectorXd> value_at(double s) const;
    int node_index_at(double s) const;

    PathView prefix(int n) const {
        PathView v = *this;
        v.n_nodes = n;
        return v;
    }
};

// A sampled path: grid nodes plus one d-vector per node, stored flat
// node-major. Immutable by convention once built; operations return
// fresh paths.
class DiscretePath {
public:
    DiscretePath() = default;
    DiscretePath(TimeGrid grid, int dim);
    DiscretePath(TimeGrid grid, std::vector<double> values, int dim);

    static DiscretePath constant(const TimeGrid& grid, const Eigen::VectorXd& value);

    const TimeGrid& grid() const { return grid_; }
    int dim() const { return dim_; }
    int n_nodes() const { return grid_.n_nodes(); }
    double t_end() const { return grid_.t_end; }

    Eigen::Map<const Eigen::VectorXd> node(int i) const {
        return Eigen::Map<const Eigen::VectorXd>(values_.data() + static_cast<std::ptrdiff_t>(i) * dim_, dim_);
    }
    Eigen::Map<Eigen::VectorXd> mutable_node(int i) {
        return Eigen::Map<Eigen::VectorXd>(values_.data() + static_cast<std::ptrdiff_t>(i) * dim_, dim_);
    }
    void set_node(int i, const Eigen::VectorXd& v);

    PathView view() const {
        return PathView{values_.data(), grid_.n_nodes(), dim_, grid_.t_start, grid_.dt};
    }
    // View of the first n+1 nodes (times t_start..t_start+n*dt).
    PathView prefix_view(int end_node) const {
        PathView v = view();
        v.n_nodes = end_node + 1;
        return v;
    }

    // Copy of the path restricted to [t_start, t]; t must be a node.
    DiscretePath restricted(double t) const;

    const std::vector<double>& raw() const { return values_; }

    bool operator==(const DiscretePath& other) const;

private:
    TimeGrid grid_;
    int dim_ = 0;
    std::vector<double> values_;
};

DiscretePath to_path(const PathView& view);

// --- path-space operations ---

// Sup over grid nodes of the Euclidean norm.
double sup_norm(const PathView& x);
inline double sup_norm(const DiscretePath& x) { return sup_norm(x.view()); }

// Quasi-metric between paths of possibly different lengths:
// sqrt(|t-r|) plus the two-regime sup distance. Grids must share dt or
// one dt must be an integer multiple of the other.
double d0(const PathView& x, const PathView& y);
inline double d0(const DiscretePath& x, const DiscretePath& y) { return d0(x.view(), y.view()); }

// Freeze the terminal value for duration delta (a multiple of dt).
DiscretePath horizontal_extend(const PathView& x, double delta);
inline DiscretePath horizontal_extend(const DiscretePath& x, double delta) {
    return horizontal_extend(x.view(), delta);
}

// Bump only the final node by h.
DiscretePath vertical_perturb(const PathView& x, const Eigen::VectorXd& h);
inline DiscretePath vertical_perturb(const DiscretePath& x, const Eigen::VectorXd& h) {
    return vertical_perturb(x.view(), h);
}

// Exact pairwise scan of |x(s)-x(t)| / (s-t)^alpha over grid nodes
// t0 <= t < s <= t1. max_lag > 0 restricts to s-t <= max_lag*dt.
double holder_seminorm(const PathView& x, double t0, double t1, double alpha, int max_lag = 0);
inline double holder_seminorm(const DiscretePath& x, double t0, double t1, double alpha,
                              int max_lag = 0) {
    return holder_seminorm(x.view(), t0, t1, alpha, max_lag);
}

struct HolderClassParams {
    double k = 1.0;
    double alpha = 0.5;
    DiscretePath anchor;

    HolderClassParams() = default;
    HolderClassParams(double k_in, double alpha_in, DiscretePath anchor_in);
};

// Membership of x (on [0,s]) in the Holder ball of radius k anchored
// at the prefix xi up to time t.
bool in_holder_ball(const PathView& x, const HolderClassParams& params, double t);
inline bool in_holder_ball(const DiscretePath& x, const HolderClassParams& params, double t) {
    return in_holder_ball(x.view(), params, t);
}

// First grid node s > r where the window seminorm on [r,s] exceeds k,
// capped at the end of the path.
double first_holder_exit(const PathView& x, double r, double alpha, double k);
inline double first_holder_exit(const DiscretePath& x, double r, double alpha, double k) {
    return first_holder_exit(x.view(), r, alpha, k);
}

// --- columnar plain-text serialization: "t,x1,..,xd" header ---

void save_path(const DiscretePath& path, std::ostream& os);
void save_path(const DiscretePath& path, const std::string& file);
DiscretePath load_path(std::istream& is);
DiscretePath load_path(const std::string& file);

}  // namespace pathhjb
