// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdlib>

#include "pic/config.hpp"
#include "pic/error.hpp"

using namespace pic;

TEST(Config, DefaultsMatchSamplerSettings) {
    RunConfig c;
    EXPECT_EQ(c.edit.gamma, 1.0);
    EXPECT_EQ(c.edit.tau, 25);
    EXPECT_EQ(c.edit.num_steps, 50);
    EXPECT_EQ(c.edit.guidance_scale, 7.5);
    EXPECT_EQ(c.edit.variant, Variant::PIC);
    EXPECT_EQ(c.gamma_grid, (std::vector<double>{0.5, 1.0, 1.5, 2.0, 2.5}));
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, JsonRoundTrip) {
    RunConfig c;
    c.edit.gamma = 1.5;
    c.edit.tau = 20;
    c.beta = 0.4;
    c.edit.variant = Variant::DDIM_NC;
    c.backbone = "toy-attention";
    c.integration.kind = IntegrationKind::ptp;
    c.integration.ptp.self_replace = 0.3;
    c.task = task_preset("horse2zebra");
    c.source_prompt = "a horse in a field";
    c.gamma_grid = {0.0, 3.0};
    c.metrics.cs = false;
    c.workers = 3;
    RunConfig back = config_from_json(to_json(c));
    EXPECT_EQ(back, c);
}

TEST(Config, UnknownKeyIsError) {
    EXPECT_THROW(config_from_json({{"gama", 1.0}}), ConfigError);
    EXPECT_THROW(config_from_json({{"tau", "many"}}), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json::array()), ConfigError);
    EXPECT_THROW(config_from_json({{"variant", "PIX"}}), ConfigError);
}

TEST(Config, LaterLayerOverrides) {
    RunConfig file = config_from_json({{"gamma", 2.0}, {"tau", 10}, {"ptp", {{"cross_replace", 0.5}}}});
    RunConfig flags = config_from_json({{"tau", 30}, {"ptp", {{"self_replace", 0.2}}}}, file);
    EXPECT_EQ(flags.edit.gamma, 2.0);
    EXPECT_EQ(flags.edit.tau, 30);
    EXPECT_EQ(flags.integration.ptp.cross_replace, 0.5);
    EXPECT_EQ(flags.integration.ptp.self_replace, 0.2);
}

TEST(Config, ValidationRanges) {
    RunConfig c;
    c.edit.tau = 51;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.beta = 1.2;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.edit.gamma = -0.1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.edit.num_steps = 1001;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.workers = 0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, PathChecks) {
    RunConfig c;
    EXPECT_THROW(c.validate_paths("edit"), ConfigError);
    c.input = "/nonexistent/picture.png";
    EXPECT_THROW(c.validate_paths("edit"), ConfigError);
    EXPECT_THROW(c.validate_paths("evaluate"), ConfigError);
    EXPECT_NO_THROW(c.validate_paths("toy-verify"));
}

TEST(Config, CacheRootResolution) {
    RunConfig c;
    ::unsetenv(kCacheRootEnv);
    EXPECT_EQ(cache_root(c), ".pic-cache");
    ::setenv(kCacheRootEnv, "/tmp/pic-env-root", 1);
    EXPECT_EQ(cache_root(c), "/tmp/pic-env-root");
    c.cache_dir = "/tmp/explicit";
    EXPECT_EQ(cache_root(c), "/tmp/explicit");
    ::unsetenv(kCacheRootEnv);
}
