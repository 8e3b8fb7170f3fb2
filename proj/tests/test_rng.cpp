#include <gtest/gtest.h>

#include <cmath>

#include "pathhjb/noise.hpp"
#include "pathhjb/rng.hpp"

using namespace pathhjb;

TEST(CounterRng, Deterministic) {
    EXPECT_DOUBLE_EQ(normal_draw(7, 1, 2, 3), normal_draw(7, 1, 2, 3));
    EXPECT_NE(normal_draw(7, 1, 2, 3), normal_draw(7, 1, 2, 4));
    EXPECT_NE(normal_draw(7, 1, 2, 3), normal_draw(8, 1, 2, 3));
    TimeGrid g(0.0, 1.0, 64);
    NoiseBundle a(g, 2, 1, 10, 42);
    NoiseBundle b(g, 2, 1, 10, 42);
    for (long p = 0; p < 10; ++p)
        for (int i = 0; i < 64; ++i)
            for (int j = 0; j < 2; ++j)
                EXPECT_DOUBLE_EQ(a.increment(p, i, j), b.increment(p, i, j));
}

TEST(CounterRng, MomentsWithinCltBounds) {
    TimeGrid g(0.0, 1.0, 100);
    NoiseBundle n(g, 1, 0, 1000, 9001);
    double sum = 0.0, sumsq = 0.0;
    long count = 0;
    for (long p = 0; p < 1000; ++p)
        for (int i = 0; i < 100; ++i) {
            const double x = n.increment(p, i, 0);
            sum += x;
            sumsq += x * x;
            ++count;
        }
    const double mean = sum / count;
    EXPECT_LE(std::abs(mean), 4.0 * std::sqrt(g.dt / count));
    const double var = sumsq / count;
    EXPECT_NEAR(var, g.dt, 5.0 * g.dt * std::sqrt(2.0 / count));
}

TEST(CounterRng, BrownianQuadraticVariation) {
    TimeGrid g(0.0, 1.0, 256);
    NoiseBundle n(g, 2, 1, 200, 5150);
    for (int j = 0; j < 2; ++j) {
        double mean_qv = 0.0;
        for (long p = 0; p < 200; ++p) {
            double qv = 0.0;
            for (int i = 0; i < g.n_steps; ++i) {
                const double inc = n.increment(p, i, j);
                qv += inc * inc;
            }
            mean_qv += qv / 200.0;
        }
        EXPECT_NEAR(mean_qv, 1.0, 5.0 * std::sqrt(2.0 * g.dt / 200.0));
    }
}

TEST(CounterRng, RademacherSupport) {
    TimeGrid g(0.0, 1.0, 16);
    NoiseBundle n(g, 1, 0, 50, 33, NoiseKind::Rademacher);
    const double s = std::sqrt(g.dt);
    int plus = 0, minus = 0;
    for (long p = 0; p < 50; ++p)
        for (int i = 0; i < 16; ++i) {
            const double x = n.increment(p, i, 0);
            EXPECT_TRUE(x == s || x == -s);
            (x > 0 ? plus : minus)++;
        }
    EXPECT_GT(plus, 200);
    EXPECT_GT(minus, 200);
}

TEST(CounterRng, CoarseningSumsFineIncrements) {
    TimeGrid g(0.0, 1.0, 64);
    NoiseBundle fine(g, 2, 1, 5, 77);
    NoiseBundle coarse = fine.coarsened(4);
    EXPECT_EQ(coarse.grid().n_steps, 16);
    EXPECT_DOUBLE_EQ(coarse.grid().dt, 4.0 * g.dt);
    for (long p = 0; p < 5; ++p)
        for (int i = 0; i < 16; ++i)
            for (int j = 0; j < 2; ++j) {
                double s = 0.0;
                for (int k = 0; k < 4; ++k) s += fine.increment(p, 4 * i + k, j);
                EXPECT_DOUBLE_EQ(coarse.increment(p, i, j), s);
            }
    EXPECT_THROW(fine.coarsened(3), ValidationError);
    // Brownian terminal values agree across resolutions.
    const DiscretePath wf = fine.brownian_path(2);
    const DiscretePath wc = coarse.brownian_path(2);
    EXPECT_NEAR(wf.node(64)[0], wc.node(16)[0], 1e-12);
}

TEST(CounterRng, BrownianPathCumsum) {
    TimeGrid g(0.0, 1.0, 8);
    NoiseBundle n(g, 1, 0, 1, 123);
    const DiscretePath w = n.brownian_path(0);
    double acc = 0.0;
    EXPECT_DOUBLE_EQ(w.node(0)[0], 0.0);
    for (int i = 0; i < 8; ++i) {
        acc += n.increment(0, i, 0);
        EXPECT_DOUBLE_EQ(w.node(i + 1)[0], acc);
    }
}
