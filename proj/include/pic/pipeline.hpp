// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "pic/config.hpp"
#include "pic/invariant_suite.hpp"

namespace pic {

/// Everything prepared for one source image before inversion.
struct EditJob {
    EditJob(Backbone b, DiffusionSchedule s) : backbone(std::move(b)), sched(std::move(s)) {}

    Backbone backbone;
    DiffusionSchedule sched;
    std::shared_ptr<const Denoiser> model;  // guided, shareable
    std::filesystem::path input;
    std::string input_sha256;
    int source_width = 0;
    int source_height = 0;
    std::string resize_policy;
    Tensor x0;
    std::string source_prompt;
    std::string target_prompt;
    PromptEmbedding y_src;
    PromptEmbedding y_tgt;
    InterpolationPlan plan;
    EditConfig edit;  // beta resolved from the plan
    std::vector<std::string> warnings;
};

/// Inversion only needs the source side; `with_target` = false skips the target prompt and plan.
EditJob prepare_job(const RunConfig& config, const std::filesystem::path& image, bool with_target = true);

/// Fingerprint over everything the forward trajectory depends on.
std::string cache_fingerprint(const EditJob& job, const RunConfig& config);

struct InvertOutcome {
    std::filesystem::path dir;
    std::string fingerprint;
    bool hit = false;
    long model_calls = 0;  // evaluations spent by this invocation (0 on a hit)
    TrajectoryCache cache;
};

InvertOutcome invert_or_load(const EditJob& job, const RunConfig& config);

/// PNG inputs of a command: the file itself, or the sorted *.png files of a directory.
std::vector<std::filesystem::path> input_images(const std::filesystem::path& input);

nlohmann::json cmd_invert(const RunConfig& config);
nlohmann::json cmd_edit(const RunConfig& config);
nlohmann::json cmd_evaluate(const RunConfig& config);
nlohmann::json cmd_ablate(const RunConfig& config);
nlohmann::json cmd_sweep(const RunConfig& config);
/// Writes toy_verify.json under `output_dir` and returns the report.
SuiteReport cmd_toy_verify(const SuiteOptions& options, const std::filesystem::path& output_dir);

}  // namespace pic
