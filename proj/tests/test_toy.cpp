// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pic/adapters.hpp"
#include "pic/error.hpp"
#include "pic/toy.hpp"
#include "pic/toy_studies.hpp"

using namespace pic;

namespace {

std::shared_ptr<GaussianWorld> small_world(double data_std, uint64_t seed = 3) {
    std::mt19937_64 rng(seed);
    return std::make_shared<GaussianWorld>(make_two_domain_world(3, 2, 2, 4, data_std, 1.0, rng));
}

PromptEmbedding embedding(uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    PromptEmbedding y;
    y.tokens = Tensor({2, 4});
    for (size_t i = 0; i < 8; ++i) y.tokens[i] = n(rng);
    y.meaningful_len = 2;
    return y;
}

}  // namespace

// E[eps | x] is linear in x for Gaussian data, so regressing sampled eps on the
// centred latent recovers the Bayes-optimal slope.
TEST(AnalyticEps, MatchesMonteCarloRegression) {
    auto world = small_world(0.7);
    auto sched = build_schedule(1000, 50, ScheduleKind::scaled_linear);
    PromptEmbedding y = embedding(5);
    Tensor mu = world->mean(y);
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> n;
    const int samples = 1000000;
    for (int t : {5, 25, 49}) {
        const double a = sched.alpha(t), sa = std::sqrt(a), sn = std::sqrt(1.0 - a);
        for (size_t i = 0; i < mu.size(); ++i) {
            double sxy = 0.0, sxx = 0.0, syy = 0.0;
            for (int s = 0; s < samples; ++s) {
                double x0 = mu[i] + world->data_std * n(rng), e = n(rng);
                double r = sa * x0 + sn * e - sa * mu[i];
                sxy += r * e;
                sxx += r * r;
                syy += e * e;
            }
            double k_hat = sxy / sxx;
            double resid = (syy - k_hat * sxy) / (samples - 1);
            double se = std::sqrt(resid / sxx);

            Tensor probe = mu;
            for (size_t j = 0; j < probe.size(); ++j) probe[j] = sa * mu[j];
            probe[i] += 1.0;
            double k = analytic_eps(*world, probe, t, y, sched)[i];
            EXPECT_LE(std::abs(k - k_hat), 3.0 * se) << "t=" << t << " coord=" << i;
        }
    }
}

TEST(AnalyticEps, VanishingDataSpreadGivesExactNoise) {
    auto world = small_world(1e-9);
    auto sched = build_schedule(1000, 20, ScheduleKind::scaled_linear);
    PromptEmbedding y = embedding(1);
    Tensor mu = world->mean(y);
    const int t = 12;
    const double a = sched.alpha(t);
    Tensor e({3}, {0.3, -1.1, 0.8});
    Tensor x = mu;
    for (size_t i = 0; i < x.size(); ++i) x[i] = std::sqrt(a) * mu[i] + std::sqrt(1.0 - a) * e[i];
    EXPECT_LT(max_abs_diff(analytic_eps(*world, x, t, y, sched), e), 1e-9);
}

TEST(AnalyticEps, PriorMeanIsFixedPoint) {
    auto world = small_world(1.3);
    auto sched = build_schedule(1000, 20, ScheduleKind::scaled_linear);
    PromptEmbedding y = embedding(9);
    Tensor mu = world->mean(y);
    for (int t = 0; t <= 20; ++t) {
        Tensor x = std::sqrt(sched.alpha(t)) * mu;
        EXPECT_LT(analytic_eps(*world, x, t, y, sched).norm(), 1e-14);
    }
}

TEST(AnalyticEps, CleanStepIsZero) {
    auto world = small_world(1.0);
    auto sched = build_schedule(1000, 20, ScheduleKind::scaled_linear);
    Tensor x({3}, {4.0, -2.0, 1.0});
    EXPECT_EQ(analytic_eps(*world, x, 0, embedding(2), sched).norm(), 0.0);
}

TEST(AnalyticEps, AgreesWithPosteriorForm) {
    auto world = small_world(0.9);
    auto sched = build_schedule(1000, 50, ScheduleKind::scaled_linear);
    PromptEmbedding y = embedding(4);
    Tensor mu = world->mean(y);
    Tensor x({3}, {0.2, 1.7, -0.6});
    for (int t = 1; t <= 50; ++t) {
        Tensor a = analytic_eps(*world, x, t, y, sched);
        Tensor b = analytic_eps_posterior(*world, x, sched.alpha(t), mu);
        EXPECT_LT(max_abs_diff(a, b), 1e-9 * (1.0 + a.norm())) << t;
    }
    EXPECT_THROW(analytic_eps_posterior(*world, x, 1.0, mu), SingularScheduleError);
}

TEST(AnalyticEps, ShapeChecks) {
    auto world = small_world(1.0);
    auto sched = build_schedule(1000, 20, ScheduleKind::scaled_linear);
    EXPECT_THROW(analytic_eps(*world, Tensor({4}), 3, embedding(1), sched), ValidationError);
    PromptEmbedding wrong;
    wrong.tokens = Tensor({3, 4});
    EXPECT_THROW(world->mean(wrong), ValidationError);
}

TEST(GaussianWorld, SharedCoordinatesIgnorePrompt) {
    auto world = small_world(1.0);
    world->validate();
    Tensor a = world->mean(embedding(1)), b = world->mean(embedding(2));
    for (size_t i : world->shared_coords) EXPECT_EQ(a[i], b[i]);
    for (size_t i : world->edited_coords) EXPECT_NE(a[i], b[i]);
}

TEST(GaussianWorld, ValidationRejectsBadWorlds) {
    auto w = *small_world(1.0);
    auto leak = w;
    leak.mean_map.at(2, 0) = 0.5;
    EXPECT_THROW(leak.validate(), ValidationError);
    auto overlap = w;
    overlap.shared_coords.push_back(0);
    EXPECT_THROW(overlap.validate(), ValidationError);
    auto flat = w;
    flat.data_std = 0.0;
    EXPECT_THROW(flat.validate(), ValidationError);
    std::mt19937_64 rng(1);
    EXPECT_THROW(make_two_domain_world(3, 4, 2, 4, 1.0, 1.0, rng), ValidationError);
}

TEST(ToyDraw, DeterministicPerSeed) {
    ToyDraw a = make_toy_draw({}, 17), b = make_toy_draw({}, 17), c = make_toy_draw({}, 18);
    EXPECT_TRUE(bitwise_equal(a.x0, b.x0));
    EXPECT_TRUE(bitwise_equal(a.y_tgt.tokens, b.y_tgt.tokens));
    EXPECT_FALSE(bitwise_equal(a.x0, c.x0));
    for (size_t j = 0; j < a.y_src.dim(); ++j) EXPECT_EQ(a.y_src.tokens.at(0, j), a.y_tgt.tokens.at(0, j));
}

TEST(AttentionStub, MapsAreRowStochastic) {
    auto world = std::make_shared<GaussianWorld>(make_image_world(8, 4, 3, 1));
    auto sched = build_schedule(1000, 10, ScheduleKind::scaled_linear);
    AttentionToyDenoiser model(world, sched, 2, 3, 0.1, 7);
    PromptEmbedding y;
    y.tokens = Tensor({4, 3}, 0.4);
    y.tokens[5] = -1.0;
    Tensor x(world->latent_shape, 0.2);
    AttentionSnapshot snap = model.cross_maps(x, 4, y);
    ASSERT_EQ(snap.cross_maps.size(), 2u);
    for (const auto& [name, m] : snap.cross_maps) EXPECT_NO_THROW(validate_attention_rows(m, name, 1e-12));
    EXPECT_EQ(model.hook_points().size(), 6u);
}
