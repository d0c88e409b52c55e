// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pic/adapters.hpp"
#include "pic/correction.hpp"
#include "pic/integrations.hpp"

namespace pic {

inline constexpr const char* kCacheRootEnv = "PIC_CACHE_ROOT";

struct MetricToggles {
    bool cs = true;
    bool bd = true;
    bool sd = true;
    bool operator==(const MetricToggles&) const = default;
};

/// Everything a command needs. Keys in the JSON form mirror the sampler symbols
/// (gamma, tau, beta, steps, guidance_scale); flags override file values.
struct RunConfig {
    EditConfig edit;
    std::optional<double> beta;  // unset: default for the task family / plan kind
    int train_steps = 1000;
    ScheduleKind schedule = ScheduleKind::scaled_linear;
    std::string backbone = "toy";
    std::string weights;
    IntegrationConfig integration;

    std::optional<TaskSpec> task;
    std::optional<std::string> source_prompt;
    std::optional<std::string> target_prompt;
    std::optional<InterpolationPlan> plan;

    std::string input;
    std::string output_dir = "pic-out";
    std::string cache_dir;  // root holding one sub-directory per cache fingerprint
    std::string cache;      // explicit cache directory, overrides the root layout
    bool auto_invert = true;
    bool force = false;
    int workers = 1;

    std::vector<double> gamma_grid{0.5, 1.0, 1.5, 2.0, 2.5};

    MetricToggles metrics;
    int bd_margin = 4;
    std::string source_dir;
    std::string translated_dir;
    std::string tasks_root;
    std::string embeddings;
    std::string detections;

    bool operator==(const RunConfig&) const = default;

    /// Numeric/enum invariants only; path checks live in validate_paths.
    void validate() const;
    /// Checks that the inputs a command reads exist.
    void validate_paths(const std::string& command) const;
};

nlohmann::json to_json(const RunConfig& c);
/// Starts from `base` and applies every key present in `j`. Unknown keys are errors.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path);

/// Cache root: explicit cache_dir, else $PIC_CACHE_ROOT, else ".pic-cache".
std::filesystem::path cache_root(const RunConfig& c);

}  // namespace pic
