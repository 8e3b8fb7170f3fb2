#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>

#include "pathhjb/path.hpp"

namespace pathhjb {

enum class NoiseKind { Gaussian, Rademacher };

// Reproducible driving noise: increment (path, step, comp) is a pure
// function of (seed, path, step, comp), so draws are identical across
// runs and worker counts. Increments are N(0, dt) (or +-sqrt(dt) for
// the two-point kind). A coarsened bundle sums consecutive increments
// of its parent, which couples resolutions for refinement tests.
class NoiseBundle {
public:
    NoiseBundle(TimeGrid grid, int m, int m0, long n_paths, uint64_t seed,
                NoiseKind kind = NoiseKind::Gaussian);

    NoiseBundle coarsened(int factor) const;

    const TimeGrid& grid() const { return grid_; }
    int m() const { return m_; }
    int m0() const { return m0_; }
    long n_paths() const { return n_paths_; }
    uint64_t seed() const { return seed_; }
    NoiseKind kind() const { return kind_; }

    double increment(long path, int step, int comp) const;
    Eigen::VectorXd increment_vec(long path, int step) const;

    // Cumulative W on the grid for one sample path, starting at 0.
    DiscretePath brownian_path(long path) const;

private:
    TimeGrid grid_;
    int m_ = 1;
    int m0_ = 0;
    long n_paths_ = 0;
    uint64_t seed_ = 0;
    NoiseKind kind_ = NoiseKind::Gaussian;
    std::shared_ptr<const NoiseBundle> parent_;
    int factor_ = 1;
};

}  // namespace pathhjb
