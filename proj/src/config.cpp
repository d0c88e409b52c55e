// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include "pic/config.hpp"

#include <cstdlib>
#include <set>

#include "pic/error.hpp"
#include "pic/util.hpp"

namespace pic {

void RunConfig::validate() const {
    edit.validate();
    if (beta && !(*beta >= 0.0 && *beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
    if (train_steps < 1 || edit.num_steps > train_steps)
        throw ConfigError("need 1 <= steps <= train_steps, got steps " + std::to_string(edit.num_steps) +
                          " and train_steps " + std::to_string(train_steps));
    integration.validate();
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (bd_margin < 0) throw ConfigError("bd_margin must be >= 0");
    for (double g : gamma_grid)
        if (!(g >= 0.0)) throw ConfigError("gamma_grid entries must be >= 0");
    if (plan) plan->validate();
}

void RunConfig::validate_paths(const std::string& command) const {
    namespace fs = std::filesystem;
    auto need = [&](const std::string& p, const std::string& what) {
        if (p.empty()) throw ConfigError(command + " needs " + what);
        if (!fs::exists(p)) throw ConfigError(what + " '" + p + "' does not exist");
    };
    if (command == "invert" || command == "edit" || command == "ablate" || command == "sweep") need(input, "--input");
    if (command == "evaluate") {
        if (tasks_root.empty()) {
            need(source_dir, "--source-dir");
            need(translated_dir, "--translated-dir");
        } else {
            need(tasks_root, "--tasks-root");
        }
        if (!embeddings.empty()) need(embeddings, "--embeddings");
        if (!detections.empty()) need(detections, "--detections");
    }
}

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["gamma"] = c.edit.gamma;
    j["tau"] = c.edit.tau;
    j["beta"] = c.beta ? nlohmann::json(*c.beta) : nlohmann::json(nullptr);
    j["steps"] = c.edit.num_steps;
    j["guidance_scale"] = c.edit.guidance_scale;
    j["seed"] = c.edit.seed;
    j["variant"] = to_string(c.edit.variant);
    j["train_steps"] = c.train_steps;
    j["schedule"] = to_string(c.schedule);
    j["backbone"] = c.backbone;
    j["weights"] = c.weights;
    nlohmann::json integ = c.integration;
    for (auto& [k, v] : integ.items()) j[k] = v;
    j["task"] = c.task ? nlohmann::json(*c.task) : nlohmann::json(nullptr);
    j["source_prompt"] = c.source_prompt ? nlohmann::json(*c.source_prompt) : nlohmann::json(nullptr);
    j["target_prompt"] = c.target_prompt ? nlohmann::json(*c.target_prompt) : nlohmann::json(nullptr);
    j["plan"] = c.plan ? nlohmann::json(*c.plan) : nlohmann::json(nullptr);
    j["input"] = c.input;
    j["output_dir"] = c.output_dir;
    j["cache_dir"] = c.cache_dir;
    j["cache"] = c.cache;
    j["auto_invert"] = c.auto_invert;
    j["force"] = c.force;
    j["workers"] = c.workers;
    j["gamma_grid"] = c.gamma_grid;
    j["metrics"] = {{"cs", c.metrics.cs}, {"bd", c.metrics.bd}, {"sd", c.metrics.sd}};
    j["bd_margin"] = c.bd_margin;
    j["source_dir"] = c.source_dir;
    j["translated_dir"] = c.translated_dir;
    j["tasks_root"] = c.tasks_root;
    j["embeddings"] = c.embeddings;
    j["detections"] = c.detections;
    return j;
}

RunConfig config_from_json(const nlohmann::json& j, RunConfig c) {
    static const std::set<std::string> known{
        "schema_version", "gamma",     "tau",          "beta",       "steps",         "guidance_scale", "seed",
        "variant",        "train_steps", "schedule",   "backbone",   "weights",       "integration",    "ptp",
        "pnp",            "p2p",       "task",         "source_prompt", "target_prompt", "plan",         "input",
        "output_dir",     "cache_dir", "cache", "auto_invert",  "force",      "workers",       "gamma_grid",     "metrics",
        "bd_margin",      "source_dir", "translated_dir", "tasks_root", "embeddings",  "detections"};
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (auto& [k, v] : j.items())
        if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");
    try {
        if (j.contains("schema_version") && j["schema_version"] != kSchemaVersion)
            throw ConfigError("unsupported config schema_version");
        auto opt_string = [&](const char* key, std::optional<std::string>& out) {
            if (!j.contains(key)) return;
            if (j[key].is_null()) out.reset();
            else out = j[key].get<std::string>();
        };
        if (j.contains("gamma")) c.edit.gamma = j["gamma"];
        if (j.contains("tau")) c.edit.tau = j["tau"];
        if (j.contains("beta")) {
            if (j["beta"].is_null()) c.beta.reset();
            else c.beta = j["beta"].get<double>();
        }
        if (j.contains("steps")) c.edit.num_steps = j["steps"];
        if (j.contains("guidance_scale")) c.edit.guidance_scale = j["guidance_scale"];
        if (j.contains("seed")) c.edit.seed = j["seed"];
        if (j.contains("variant")) c.edit.variant = variant_from_string(j["variant"]);
        if (j.contains("train_steps")) c.train_steps = j["train_steps"];
        if (j.contains("schedule")) c.schedule = schedule_kind_from_string(j["schedule"]);
        if (j.contains("backbone")) c.backbone = j["backbone"];
        if (j.contains("weights")) c.weights = j["weights"];
        if (j.contains("integration") || j.contains("ptp") || j.contains("pnp") || j.contains("p2p")) {
            nlohmann::json integ = c.integration;
            for (const char* key : {"integration", "ptp", "pnp", "p2p"})
                if (j.contains(key)) {
                    if (j[key].is_object()) integ[key].update(j[key]);
                    else integ[key] = j[key];
                }
            c.integration = integ.get<IntegrationConfig>();
        }
        if (j.contains("task")) {
            if (j["task"].is_null()) c.task.reset();
            else c.task = j["task"].get<TaskSpec>();
        }
        opt_string("source_prompt", c.source_prompt);
        opt_string("target_prompt", c.target_prompt);
        if (j.contains("plan")) {
            if (j["plan"].is_null()) c.plan.reset();
            else c.plan = j["plan"].get<InterpolationPlan>();
        }
        if (j.contains("input")) c.input = j["input"];
        if (j.contains("output_dir")) c.output_dir = j["output_dir"];
        if (j.contains("cache_dir")) c.cache_dir = j["cache_dir"];
        if (j.contains("cache")) c.cache = j["cache"];
        if (j.contains("auto_invert")) c.auto_invert = j["auto_invert"];
        if (j.contains("force")) c.force = j["force"];
        if (j.contains("workers")) c.workers = j["workers"];
        if (j.contains("gamma_grid")) c.gamma_grid = j["gamma_grid"].get<std::vector<double>>();
        if (j.contains("metrics")) {
            c.metrics.cs = j["metrics"].value("cs", c.metrics.cs);
            c.metrics.bd = j["metrics"].value("bd", c.metrics.bd);
            c.metrics.sd = j["metrics"].value("sd", c.metrics.sd);
        }
        if (j.contains("bd_margin")) c.bd_margin = j["bd_margin"];
        if (j.contains("source_dir")) c.source_dir = j["source_dir"];
        if (j.contains("translated_dir")) c.translated_dir = j["translated_dir"];
        if (j.contains("tasks_root")) c.tasks_root = j["tasks_root"];
        if (j.contains("embeddings")) c.embeddings = j["embeddings"];
        if (j.contains("detections")) c.detections = j["detections"];
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    auto j = read_json(path);
    // Manifests embed the full run config under "config".
    if (j.contains("config") && j["config"].is_object() && !j.contains("gamma")) j = j["config"];
    return config_from_json(j);
}

std::filesystem::path cache_root(const RunConfig& c) {
    if (!c.cache_dir.empty()) return c.cache_dir;
    if (const char* env = std::getenv(kCacheRootEnv); env && *env) return env;
    return ".pic-cache";
}

}  // namespace pic
