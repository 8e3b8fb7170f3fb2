#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pathhjb/noise.hpp"
#include "pathhjb/path.hpp"
#include "pathhjb/rng.hpp"

using namespace pathhjb;

namespace {

DiscretePath path_1d(double t_end, std::vector<double> vals) {
    TimeGrid g(0.0, t_end, static_cast<int>(vals.size()) - 1);
    return DiscretePath(g, std::move(vals), 1);
}

DiscretePath brownian(uint64_t seed, int steps, int dim = 1, double t_end = 1.0) {
    NoiseBundle b(TimeGrid(0.0, t_end, steps), dim, 0, 1, seed);
    return b.brownian_path(0);
}

}  // namespace

TEST(TimeGrid, Basics) {
    TimeGrid g(0.0, 1.0, 4);
    EXPECT_DOUBLE_EQ(g.dt, 0.25);
    EXPECT_EQ(g.index_of(0.75), 3);
    EXPECT_TRUE(g.aligned(0.5));
    EXPECT_FALSE(g.aligned(0.51));
    EXPECT_THROW(g.index_of(0.1), ValidationError);
    EXPECT_THROW(TimeGrid(1.0, 0.0, 4), ValidationError);
    EXPECT_THROW(TimeGrid(0.0, 1.0, 0), ValidationError);
}

TEST(SupNorm, Examples) {
    EXPECT_DOUBLE_EQ(sup_norm(path_1d(1.0, {0, 0, 0, 0})), 0.0);
    TimeGrid g(0.0, 2.0, 3);
    Eigen::VectorXd c(2);
    c << 3.0, -4.0;
    EXPECT_DOUBLE_EQ(sup_norm(DiscretePath::constant(g, c)), 5.0);
    EXPECT_DOUBLE_EQ(sup_norm(path_1d(1.0, {0.0, 1.0, -2.0, 1.5})), 2.0);
    PathView empty;
    EXPECT_THROW(sup_norm(empty), ValidationError);
}

TEST(D0, Examples) {
    const DiscretePath x = path_1d(1.0, {0, 0, 0, 0, 0});
    EXPECT_DOUBLE_EQ(d0(x, x), 0.0);
    // Same values, longer horizon: only the time term remains.
    TimeGrid g2(0.0, 1.25, 5);
    DiscretePath y(g2, std::vector<double>(6, 0.0), 1);
    EXPECT_DOUBLE_EQ(d0(x, y), 0.5);
    EXPECT_DOUBLE_EQ(d0(y, x), 0.5);
    const DiscretePath one = path_1d(1.0, {1, 1, 1, 1, 1});
    EXPECT_DOUBLE_EQ(d0(x, one), 1.0);
    // Nested grids are fine, incommensurate ones are rejected.
    TimeGrid g3(0.0, 1.0, 8);
    DiscretePath z(g3, std::vector<double>(9, 0.0), 1);
    EXPECT_NO_THROW(d0(x, z));
    TimeGrid g4(0.0, 1.0, 5);
    DiscretePath w(g4, std::vector<double>(6, 0.0), 1);
    EXPECT_THROW(d0(x, w), ValidationError);
}

TEST(D0, MetricAxiomsOnRandomTriples) {
    for (int rep = 0; rep < 50; ++rep) {
        const DiscretePath a = brownian(100 + rep, 16);
        const DiscretePath b = brownian(200 + rep, 16);
        const DiscretePath c = brownian(300 + rep, 16);
        const double dab = d0(a, b), dba = d0(b, a), dac = d0(a, c), dcb = d0(c, b);
        EXPECT_DOUBLE_EQ(dab, dba);
        EXPECT_GE(dab, 0.0);
        EXPECT_LE(dab, dac + dcb + 1e-12);
        EXPECT_DOUBLE_EQ(d0(a, a), 0.0);
        if (dab == 0.0) {
            EXPECT_TRUE(a == b);
        }
    }
}

TEST(HorizontalExtend, Examples) {
    const DiscretePath x = path_1d(0.5, {1.0, 2.0});
    const DiscretePath same = horizontal_extend(x, 0.0);
    EXPECT_TRUE(same == x);
    const DiscretePath ext = horizontal_extend(x, 1.0);  // two extra steps of dt=0.5
    ASSERT_EQ(ext.n_nodes(), 4);
    EXPECT_DOUBLE_EQ(ext.node(0)[0], 1.0);
    EXPECT_DOUBLE_EQ(ext.node(1)[0], 2.0);
    EXPECT_DOUBLE_EQ(ext.node(2)[0], 2.0);
    EXPECT_DOUBLE_EQ(ext.node(3)[0], 2.0);
    EXPECT_THROW(horizontal_extend(x, 0.3), ValidationError);
}

TEST(HorizontalExtend, Properties) {
    for (int rep = 0; rep < 20; ++rep) {
        const DiscretePath x = brownian(400 + rep, 8);
        const double dt = x.grid().dt;
        EXPECT_DOUBLE_EQ(sup_norm(horizontal_extend(x, 4 * dt)), sup_norm(x));
        const DiscretePath ab = horizontal_extend(horizontal_extend(x, 2 * dt), 3 * dt);
        const DiscretePath once = horizontal_extend(x, 5 * dt);
        EXPECT_TRUE(ab == once);
    }
}

TEST(VerticalPerturb, Examples) {
    const DiscretePath x = path_1d(0.5, {1.0, 2.0});
    Eigen::VectorXd h(1);
    h << 0.0;
    EXPECT_TRUE(vertical_perturb(x, h) == x);
    h << 3.0;
    const DiscretePath up = vertical_perturb(x, h);
    EXPECT_DOUBLE_EQ(up.node(0)[0], 1.0);
    EXPECT_DOUBLE_EQ(up.node(1)[0], 5.0);
    Eigen::VectorXd hm(1);
    hm << -3.0;
    EXPECT_TRUE(vertical_perturb(up, hm) == x);
}

TEST(HolderSeminorm, Examples) {
    const DiscretePath c = path_1d(1.0, {2, 2, 2, 2, 2});
    EXPECT_DOUBLE_EQ(holder_seminorm(c, 0.0, 1.0, 0.5), 0.0);
    std::vector<double> lin;
    for (int i = 0; i <= 10; ++i) lin.push_back(i / 10.0);
    EXPECT_NEAR(holder_seminorm(path_1d(1.0, lin), 0.0, 1.0, 0.5), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(holder_seminorm(path_1d(0.25, {0.0, 1.0}), 0.0, 0.25, 0.5), 2.0);
    EXPECT_THROW(holder_seminorm(c, 0.5, 0.5, 0.5), ValidationError);
    EXPECT_THROW(holder_seminorm(c, 0.0, 1.0, 1.5), ValidationError);
}

TEST(HolderSeminorm, MaxLagCutoff) {
    const DiscretePath x = brownian(640, 64);
    const double full = holder_seminorm(x, 0.0, 1.0, 0.3);
    EXPECT_DOUBLE_EQ(holder_seminorm(x, 0.0, 1.0, 0.3, 64), full);
    EXPECT_DOUBLE_EQ(holder_seminorm(x, 0.0, 1.0, 0.3, 500), full);
    EXPECT_LE(holder_seminorm(x, 0.0, 1.0, 0.3, 4), full);
}

TEST(HolderSeminorm, ScalingProperty) {
    for (int rep = 0; rep < 20; ++rep) {
        const DiscretePath x = brownian(500 + rep, 32);
        const double s = holder_seminorm(x, 0.0, 1.0, 0.3);
        std::vector<double> scaled = x.raw();
        for (double& v : scaled) v *= -2.5;
        const DiscretePath y(x.grid(), std::move(scaled), 1);
        EXPECT_NEAR(holder_seminorm(y, 0.0, 1.0, 0.3), 2.5 * s, 1e-12 * (1.0 + s));
    }
}

TEST(InHolderBall, Examples) {
    const DiscretePath xi = path_1d(0.5, {0.0, 0.4});
    HolderClassParams params(0.5, 0.5, xi);
    // Constant continuation: zero seminorm, always inside.
    const DiscretePath flat = horizontal_extend(xi, 1.0);
    EXPECT_TRUE(in_holder_ball(flat, params, 0.5));
    // Unit-slope continuation on [0.5, 1.5]: seminorm 1.
    DiscretePath ramp = horizontal_extend(xi, 1.0);
    for (int i = 2; i <= 3; ++i) ramp.mutable_node(i)[0] = 0.4 + (i - 1) * 0.5;
    EXPECT_FALSE(in_holder_ball(ramp, params, 0.5));
    HolderClassParams wide(1.0, 0.5, xi);
    EXPECT_TRUE(in_holder_ball(ramp, wide, 0.5));
    // Disagreement with the anchor before t is invalid input.
    DiscretePath bad = ramp;
    bad.mutable_node(0)[0] = 9.0;
    EXPECT_THROW(in_holder_ball(bad, params, 0.5), ValidationError);
    // Mismatch exactly at t is just "outside".
    DiscretePath off = ramp;
    off.mutable_node(1)[0] = 0.5;
    EXPECT_FALSE(in_holder_ball(off, wide, 0.5));
}

// Independent oracle: an explicit pairwise scan, kept separate from the
// incremental implementation it checks.
namespace {
double exit_time_oracle(const DiscretePath& x, double r, double alpha, double k) {
    const TimeGrid& g = x.grid();
    const int ir = g.index_of(r);
    for (int j = ir + 1; j <= g.n_steps; ++j) {
        double sem = 0.0;
        for (int a = ir; a < j; ++a)
            for (int b = a + 1; b <= j; ++b)
                sem = std::max(sem, std::abs(x.node(b)[0] - x.node(a)[0]) /
                                        std::pow(g.dt * (b - a), alpha));
        if (sem > k) return g.time(j);
    }
    return g.t_end;
}
}  // namespace

TEST(FirstHolderExit, Examples) {
    const DiscretePath c = path_1d(1.0, {1, 1, 1, 1, 1});
    EXPECT_DOUBLE_EQ(first_holder_exit(c, 0.0, 0.5, 0.01), 1.0);
    const DiscretePath lin = path_1d(1.0, {0.0, 0.25, 0.5, 0.75, 1.0});
    EXPECT_DOUBLE_EQ(exit_time_oracle(lin, 0.0, 0.5, 0.6), 0.5);
    EXPECT_DOUBLE_EQ(first_holder_exit(lin, 0.0, 0.5, 0.6), 0.5);
    EXPECT_THROW(first_holder_exit(lin, 0.1, 0.5, 0.6), ValidationError);
}

TEST(FirstHolderExit, MonotoneInKAndMatchesOracle) {
    for (int rep = 0; rep < 100; ++rep) {
        const DiscretePath x = brownian(700 + rep, 32);
        double prev = 0.0;
        for (double k = 0.25; k <= 4.0; k *= 2.0) {
            const double exit = first_holder_exit(x, 0.0, 0.4, k);
            EXPECT_GE(exit, prev);
            prev = exit;
            if (rep < 10) {
                EXPECT_DOUBLE_EQ(exit, exit_time_oracle(x, 0.0, 0.4, k));
            }
        }
        const double full = holder_seminorm(x, 0.0, 1.0, 0.4);
        EXPECT_DOUBLE_EQ(first_holder_exit(x, 0.0, 0.4, full), 1.0);
    }
}

TEST(Restriction, Consistency) {
    for (int rep = 0; rep < 20; ++rep) {
        const DiscretePath x = brownian(800 + rep, 16);
        const DiscretePath r = x.restricted(0.5);
        EXPECT_LE(sup_norm(r), sup_norm(x));
        for (int i = 0; i < r.n_nodes(); ++i) EXPECT_DOUBLE_EQ(r.node(i)[0], x.node(i)[0]);
    }
}

TEST(Serialization, RoundTripBitwise) {
    for (int rep = 0; rep < 10; ++rep) {
        const DiscretePath x = brownian(900 + rep, 17, 3);
        std::stringstream ss;
        save_path(x, ss);
        const DiscretePath y = load_path(ss);
        EXPECT_TRUE(x == y);
    }
    std::stringstream bad("u,x1\n0,1\n");
    EXPECT_THROW(load_path(bad), ValidationError);
}
