// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pic/error.hpp"
#include "pic/pipeline.hpp"

namespace {

struct Flags {
    std::string config;
    std::string input, output_dir, cache_dir, cache, backbone, weights, schedule, variant, integration;
    std::string task, replace, add, source_prompt, target_prompt;
    std::string source_dir, translated_dir, tasks_root, embeddings, detections;
    int steps = 0, train_steps = 0, tau = 0, workers = 0, bd_margin = 0;
    double gamma = 0, beta = 0, guidance = 0;
    double cross_replace = 0, self_replace = 0, feature_injection = 0, self_injection = 0, lambda_xa = 0,
           guidance_window = 0;
    uint64_t seed = 0;
    std::vector<double> gamma_grid;
    bool force = false, no_auto_invert = false, no_cs = false, no_bd = false, no_sd = false;
};

struct Registered {
    std::map<std::string, CLI::Option*> opts;
    bool given(const std::string& name) const {
        auto it = opts.find(name);
        return it != opts.end() && it->second->count() > 0;
    }
};

void add_sampler_flags(CLI::App* cmd, Flags& f, Registered& r) {
    auto& o = r.opts;
    o["config"] = cmd->add_option("--config", f.config, "JSON config file (flags override its values)");
    o["input"] = cmd->add_option("--input,-i", f.input, "source PNG or directory of PNGs");
    o["output_dir"] = cmd->add_option("--output-dir,-o", f.output_dir, "output directory");
    o["cache_dir"] = cmd->add_option("--cache-dir", f.cache_dir, "cache root (default $PIC_CACHE_ROOT or .pic-cache)");
    o["cache"] = cmd->add_option("--cache", f.cache, "explicit cache directory for a single image");
    o["backbone"] = cmd->add_option("--backbone", f.backbone, "toy, toy-attention or sd-v1.4");
    o["weights"] = cmd->add_option("--weights", f.weights, "checkpoint path for neural backbones");
    o["steps"] = cmd->add_option("--steps", f.steps, "inference steps T");
    o["train_steps"] = cmd->add_option("--train-steps", f.train_steps, "training steps of the noise schedule");
    o["schedule"] = cmd->add_option("--schedule", f.schedule, "linear or scaled_linear");
    o["tau"] = cmd->add_option("--tau", f.tau, "corrected window length");
    o["gamma"] = cmd->add_option("--gamma", f.gamma, "correction strength");
    o["beta"] = cmd->add_option("--beta", f.beta, "initial interpolation coefficient");
    o["guidance"] = cmd->add_option("--guidance-scale", f.guidance, "classifier-free guidance weight");
    o["seed"] = cmd->add_option("--seed", f.seed, "seed");
    o["variant"] = cmd->add_option("--variant", f.variant, "PIC, DDIM, DDIM_PI or DDIM_NC");
    o["integration"] = cmd->add_option("--integration", f.integration, "none, ptp, pnp or p2p");
    o["cross_replace"] = cmd->add_option("--cross-replace", f.cross_replace, "ptp cross-attention window fraction");
    o["self_replace"] = cmd->add_option("--self-replace", f.self_replace, "ptp self-attention window fraction");
    o["feature_injection"] = cmd->add_option("--feature-injection", f.feature_injection, "pnp feature window fraction");
    o["self_injection"] = cmd->add_option("--self-injection", f.self_injection, "pnp self-attention window fraction");
    o["lambda_xa"] = cmd->add_option("--lambda-xa", f.lambda_xa, "p2p guidance step size");
    o["guidance_window"] = cmd->add_option("--guidance-window", f.guidance_window, "p2p guidance window fraction");
    o["task"] = cmd->add_option("--task", f.task, "task preset (cat2dog, dog2cat, horse2zebra, ...)");
    o["replace"] = cmd->add_option("--replace", f.replace, "word replacement task as FROM=TO");
    o["add"] = cmd->add_option("--add", f.add, "adding-phrase task as PHRASE@ANCHOR");
    o["source_prompt"] = cmd->add_option("--source-prompt", f.source_prompt, "source prompt (skips captioning)");
    o["target_prompt"] = cmd->add_option("--target-prompt", f.target_prompt, "target prompt");
    o["workers"] = cmd->add_option("--workers,-j", f.workers, "parallel images");
    o["gamma_grid"] = cmd->add_option("--gamma-grid", f.gamma_grid, "gamma values for sweep");
    o["force"] = cmd->add_flag("--force", f.force, "recompute or overwrite a mismatched cache");
    o["no_auto_invert"] = cmd->add_flag("--no-auto-invert", f.no_auto_invert, "fail when no cache exists");
}

void add_eval_flags(CLI::App* cmd, Flags& f, Registered& r) {
    auto& o = r.opts;
    o["source_dir"] = cmd->add_option("--source-dir", f.source_dir, "source images");
    o["translated_dir"] = cmd->add_option("--translated-dir", f.translated_dir, "translated images, paired by file name");
    o["tasks_root"] = cmd->add_option("--tasks-root", f.tasks_root, "directory of <task>/{source,translated}");
    o["embeddings"] = cmd->add_option("--embeddings", f.embeddings, "precomputed joint embeddings JSON");
    o["detections"] = cmd->add_option("--detections", f.detections, "directory of <id>.json detection sidecars");
    o["bd_margin"] = cmd->add_option("--bd-margin", f.bd_margin, "mask dilation in pixels");
    o["no_cs"] = cmd->add_flag("--no-cs", f.no_cs, "skip CS");
    o["no_bd"] = cmd->add_flag("--no-bd", f.no_bd, "skip BD");
    o["no_sd"] = cmd->add_flag("--no-sd", f.no_sd, "skip SD");
}

pic::TaskSpec parse_task(const Flags& f, const Registered& r) {
    if (r.given("task")) return pic::task_preset(f.task);
    if (r.given("replace")) {
        auto eq = f.replace.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == f.replace.size())
            throw pic::ConfigError("--replace expects FROM=TO");
        return {f.replace, pic::TaskFamily::word_replacement, f.replace.substr(0, eq), f.replace.substr(eq + 1)};
    }
    auto at = f.add.rfind('@');
    if (at == std::string::npos || at == 0 || at + 1 == f.add.size()) throw pic::ConfigError("--add expects PHRASE@ANCHOR");
    return {f.add, pic::TaskFamily::adding_phrase, f.add.substr(at + 1), f.add.substr(0, at)};
}

pic::RunConfig build_config(const Flags& f, const Registered& r) {
    pic::RunConfig c;
    if (r.given("config")) c = pic::load_config(f.config);
    if (r.given("input")) c.input = f.input;
    if (r.given("output_dir")) c.output_dir = f.output_dir;
    if (r.given("cache_dir")) c.cache_dir = f.cache_dir;
    if (r.given("cache")) c.cache = f.cache;
    if (r.given("backbone")) c.backbone = f.backbone;
    if (r.given("weights")) c.weights = f.weights;
    if (r.given("steps")) c.edit.num_steps = f.steps;
    if (r.given("train_steps")) c.train_steps = f.train_steps;
    if (r.given("schedule")) c.schedule = pic::schedule_kind_from_string(f.schedule);
    if (r.given("tau")) c.edit.tau = f.tau;
    if (r.given("gamma")) c.edit.gamma = f.gamma;
    if (r.given("beta")) c.beta = f.beta;
    if (r.given("guidance")) c.edit.guidance_scale = f.guidance;
    if (r.given("seed")) c.edit.seed = f.seed;
    if (r.given("variant")) c.edit.variant = pic::variant_from_string(f.variant);
    if (r.given("integration")) c.integration.kind = pic::integration_from_string(f.integration);
    if (r.given("cross_replace")) c.integration.ptp.cross_replace = f.cross_replace;
    if (r.given("self_replace")) c.integration.ptp.self_replace = f.self_replace;
    if (r.given("feature_injection")) c.integration.pnp.feature_injection = f.feature_injection;
    if (r.given("self_injection")) c.integration.pnp.self_injection = f.self_injection;
    if (r.given("lambda_xa")) c.integration.p2p.lambda_xa = f.lambda_xa;
    if (r.given("guidance_window")) c.integration.p2p.injection_window = f.guidance_window;
    int task_flags = r.given("task") + r.given("replace") + r.given("add");
    if (task_flags > 1) throw pic::ConfigError("--task, --replace and --add are mutually exclusive");
    if (task_flags == 1) c.task = parse_task(f, r);
    if (r.given("source_prompt")) c.source_prompt = f.source_prompt;
    if (r.given("target_prompt")) c.target_prompt = f.target_prompt;
    if (r.given("workers")) c.workers = f.workers;
    if (r.given("gamma_grid")) c.gamma_grid = f.gamma_grid;
    if (r.given("force")) c.force = f.force;
    if (r.given("no_auto_invert")) c.auto_invert = false;
    if (r.given("source_dir")) c.source_dir = f.source_dir;
    if (r.given("translated_dir")) c.translated_dir = f.translated_dir;
    if (r.given("tasks_root")) c.tasks_root = f.tasks_root;
    if (r.given("embeddings")) c.embeddings = f.embeddings;
    if (r.given("detections")) c.detections = f.detections;
    if (r.given("bd_margin")) c.bd_margin = f.bd_margin;
    if (r.given("no_cs")) c.metrics.cs = false;
    if (r.given("no_bd")) c.metrics.bd = false;
    if (r.given("no_sd")) c.metrics.sd = false;
    c.validate();
    return c;
}

void print_warnings(const nlohmann::json& j) {
    if (j.is_object()) {
        if (j.contains("warnings") && j["warnings"].is_array())
            for (const auto& w : j["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
        for (const auto& [k, v] : j.items())
            if (k != "warnings" && (v.is_object() || v.is_array())) print_warnings(v);
    } else if (j.is_array()) {
        for (const auto& v : j) print_warnings(v);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Training-free text-driven image editing with prompt-interpolated noise correction"};
    app.require_subcommand(1);

    Flags f;
    auto* invert = app.add_subcommand("invert", "invert source images and write trajectory caches");
    auto* edit = app.add_subcommand("edit", "edit images and write PNG outputs with manifests");
    auto* evaluate = app.add_subcommand("evaluate", "compute CS / BD / SD over source and translated pairs");
    auto* ablate = app.add_subcommand("ablate", "run DDIM, DDIM_PI, DDIM_NC and PIC on a shared cache");
    auto* sweep = app.add_subcommand("sweep", "run the gamma grid and write a contact sheet");
    auto* verify = app.add_subcommand("toy-verify", "run the invariant suite on the analytic toy denoiser");

    // Each subcommand gets its own option objects bound to the same storage.
    std::map<CLI::App*, Registered> regs;
    for (auto* cmd : {invert, edit, ablate, sweep, evaluate}) {
        add_sampler_flags(cmd, f, regs[cmd]);
        if (cmd == evaluate) add_eval_flags(cmd, f, regs[cmd]);
    }

    pic::SuiteOptions suite;
    std::string verify_out = "pic-out";
    verify->add_option("--seed", suite.seed, "suite seed");
    verify->add_option("--draws", suite.draws, "random probes for algebraic checks");
    verify->add_option("--edit-seeds", suite.edit_seeds, "seeds for the toy edit ordering");
    verify->add_option("--recon-seeds", suite.recon_seeds, "seeds for the reconstruction table");
    verify->add_flag("--corrupt-schedule", suite.corrupt_schedule, "inject a non-monotone schedule (negative control)");
    verify->add_option("--output-dir,-o", verify_out, "where toy_verify.json is written");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(pic::ExitCode::validation);
    }

    try {
        if (verify->parsed()) {
            auto report = pic::cmd_toy_verify(suite, verify_out);
            std::cout << report.to_table();
            if (!report.all_passed()) throw pic::NumericalError("invariant suite reported failures");
            return 0;
        }
        nlohmann::json out;
        for (auto* cmd : {invert, edit, evaluate, ablate, sweep}) {
            if (!cmd->parsed()) continue;
            pic::RunConfig c = build_config(f, regs[cmd]);
            std::string name = cmd->get_name();
            if (name == "invert") out = pic::cmd_invert(c);
            else if (name == "edit") out = pic::cmd_edit(c);
            else if (name == "evaluate") out = pic::cmd_evaluate(c);
            else if (name == "ablate") out = pic::cmd_ablate(c);
            else out = pic::cmd_sweep(c);
        }
        print_warnings(out);
        if (out.contains("table")) std::cerr << out["table"].get<std::string>();
        std::cout << out.dump(2) << "\n";
        return 0;
    } catch (const pic::NumericalError& e) {
        std::cerr << "error: " << e.what();
        if (e.step() >= 0) std::cerr << " (step " << e.step() << ", branch " << e.branch() << ")";
        std::cerr << "\n";
        return static_cast<int>(e.exit_code());
    } catch (const pic::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(pic::ExitCode::validation);
    }
}
