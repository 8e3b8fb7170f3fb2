#include "pathhjb/noise.hpp"

#include <cmath>

#include "pathhjb/rng.hpp"

namespace pathhjb {

NoiseBundle::NoiseBundle(TimeGrid grid, int m, int m0, long n_paths, uint64_t seed, NoiseKind kind)
    : grid_(grid), m_(m), m0_(m0), n_paths_(n_paths), seed_(seed), kind_(kind) {
    if (m <= 0) throw ValidationError("NoiseBundle: m must be positive");
    if (m0 < 0 || m0 > m) throw ValidationError("NoiseBundle: m0 must lie in [0, m]");
    if (n_paths < 1) throw ValidationError("NoiseBundle: n_paths must be >= 1");
}

NoiseBundle NoiseBundle::coarsened(int factor) const {
    if (factor < 2) throw ValidationError("coarsened: factor must be >= 2");
    if (grid_.n_steps % factor != 0)
        throw ValidationError("coarsened: factor must divide n_steps");
    NoiseBundle out = *this;
    TimeGrid g(grid_.t_start, grid_.t_end, grid_.n_steps / factor);
    out.grid_ = g;
    out.parent_ = std::make_shared<NoiseBundle>(*this);
    out.factor_ = factor;
    return out;
}

double NoiseBundle::increment(long path, int step, int comp) const {
    if (parent_) {
        double s = 0.0;
        for (int k = 0; k < factor_; ++k)
            s += parent_->increment(path, step * factor_ + k, comp);
        return s;
    }
    const double scale = std::sqrt(grid_.dt);
    if (kind_ == NoiseKind::Gaussian)
        return scale * normal_draw(seed_, static_cast<uint64_t>(path), static_cast<uint64_t>(step),
                                   static_cast<uint64_t>(comp));
    return scale * sign_draw(seed_, static_cast<uint64_t>(path), static_cast<uint64_t>(step),
                             static_cast<uint64_t>(comp));
}

Eigen::VectorXd NoiseBundle::increment_vec(long path, int step) const {
    Eigen::VectorXd v(m_);
    for (int j = 0; j < m_; ++j) v[j] = increment(path, step, j);
    return v;
}

DiscretePath NoiseBundle::brownian_path(long path) const {
    DiscretePath w(grid_, m_);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(m_);
    w.mutable_node(0) = acc;
    for (int i = 0; i < grid_.n_steps; ++i) {
        for (int j = 0; j < m_; ++j) acc[j] += increment(path, i, j);
        w.mutable_node(i + 1) = acc;
    }
    return w;
}

}  // namespace pathhjb
