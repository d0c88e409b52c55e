// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include "pic/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "pic/error.hpp"
#include "pic/metrics.hpp"
#include "pic/toy_studies.hpp"
#include "pic/util.hpp"

namespace pic {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_png_atomic(const fs::path& path, const Image& img) {
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    fs::path stage = staging_path(path);
    try {
        write_png(stage, img);
        fs::rename(stage, path);
    } catch (...) {
        std::error_code ec;
        fs::remove(stage, ec);
        throw;
    }
}

std::string gamma_label(double g) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", g);
    return buf;
}

BackboneOptions backbone_options(const RunConfig& c) {
    BackboneOptions o;
    o.num_train_steps = c.train_steps;
    o.num_steps = c.edit.num_steps;
    o.schedule = c.schedule;
    o.seed = c.edit.seed;
    o.weights_path = c.weights;
    return o;
}

Image decode_output(const EditJob& job, const Tensor& latent) {
    Image out = job.backbone.codec->decode(latent);
    if (out.width != job.source_width || out.height != job.source_height)
        out = resize_bilinear(out, job.source_width, job.source_height);
    return out;
}

struct VariantRun {
    EditResult result;
    double seconds = 0.0;
};

VariantRun run_edit(const EditJob& job, const InvertOutcome& inv, const RunConfig& config, Variant variant,
                    double gamma) {
    EditConfig cfg = job.edit;
    cfg.variant = variant;
    cfg.gamma = gamma;
    ReverseOptions options;
    std::unique_ptr<IntegrationCorrection> provider;
    if (config.integration.kind != IntegrationKind::none) {
        provider = std::make_unique<IntegrationCorrection>(config.integration, cfg.num_steps, job.backbone.gradient);
        options.provider = provider.get();
    }
    auto start = Clock::now();
    VariantRun run{run_variant(variant, inv.cache, job.y_src, job.y_tgt, job.plan, cfg, *job.model, job.sched, options),
                   0.0};
    run.seconds = seconds_since(start);
    return run;
}

nlohmann::json cache_json(const InvertOutcome& inv) {
    return {{"path", inv.dir.string()}, {"fingerprint", inv.fingerprint}, {"hit", inv.hit}, {"model_calls", inv.model_calls}};
}

nlohmann::json job_json(const EditJob& job) {
    return {{"input", job.input.string()},
            {"input_sha256", job.input_sha256},
            {"source_prompt", job.source_prompt},
            {"target_prompt", job.target_prompt},
            {"plan", job.plan},
            {"backbone", job.backbone.id},
            {"native_resolution", job.backbone.native_resolution},
            {"source_size", {job.source_width, job.source_height}},
            {"resize_policy", job.resize_policy},
            {"guidance_scale", job.edit.guidance_scale},
            {"beta", job.edit.beta}};
}

RunConfig per_image_config(const RunConfig& config, const fs::path& image) {
    RunConfig c = config;
    c.input = image.string();
    return c;
}

/// Runs `fn` over every item with up to `workers` threads; first error wins and is rethrown.
template <class Fn>
void parallel_for(size_t n, int workers, Fn fn) {
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (size_t i = next++; i < n; i = next++) {
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (error) return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    size_t count = std::min<size_t>(static_cast<size_t>(std::max(workers, 1)), n);
    std::vector<std::thread> threads;
    for (size_t k = 1; k < count; ++k) threads.emplace_back(body);
    body();
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<fs::path> input_images(const fs::path& input) {
    std::vector<fs::path> out;
    if (fs::is_directory(input)) {
        for (const auto& e : fs::directory_iterator(input)) {
            auto ext = e.path().extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
            if (e.is_regular_file() && ext == ".png") out.push_back(e.path());
        }
        std::sort(out.begin(), out.end());
    } else {
        out.push_back(input);
    }
    return out;
}

EditJob prepare_job(const RunConfig& config, const fs::path& image, bool with_target) {
    config.validate();
    EditJob job(make_backbone(config.backbone, backbone_options(config)),
                build_schedule(config.train_steps, config.edit.num_steps, config.schedule));
    job.input = image;
    job.input_sha256 = sha256_hex(read_bytes(image));
    Image src = read_png(image);
    job.source_width = src.width;
    job.source_height = src.height;
    const int R = job.backbone.native_resolution;
    if (src.width != R || src.height != R) {
        job.resize_policy = "bilinear " + std::to_string(src.width) + "x" + std::to_string(src.height) + " -> " +
                            std::to_string(R) + "x" + std::to_string(R) + ", output resized back to source size";
        src = resize_bilinear(src, R, R);
    } else {
        job.resize_policy = "none";
    }
    job.x0 = job.backbone.codec->encode(src);

    job.source_prompt = caption_source(src, job.backbone.captioner.get(), config.source_prompt);
    const TextEncoder& enc = *job.backbone.encoder;
    job.y_src = encode_prompt(job.source_prompt, enc, &job.warnings);
    job.edit = config.edit;
    PromptEmbedding null_embedding = encode_prompt("", enc);
    job.model = make_shareable(std::make_shared<GuidedDenoiser>(job.backbone.denoiser, null_embedding,
                                                                 job.edit.guidance_scale));
    if (!with_target) return job;

    if (config.target_prompt) job.target_prompt = *config.target_prompt;
    else if (config.task) job.target_prompt = build_target_prompt(job.source_prompt, *config.task);
    else throw ConfigError("edit needs --target-prompt or --task");

    job.y_tgt = encode_prompt(job.target_prompt, enc, &job.warnings);

    job.plan = config.plan ? *config.plan
                           : plan_from_prompts(job.source_prompt, job.target_prompt, enc.tokenizer(), config.edit.num_steps);
    job.plan.total_steps = config.edit.num_steps;
    if (config.beta) job.plan.beta = *config.beta;
    else if (config.task) job.plan.beta = task_default_beta(*config.task);
    else if (!config.plan) job.plan.beta = default_beta(job.plan.kind);
    job.plan.validate(enc.context_length());
    job.edit.beta = job.plan.beta;
    job.edit.validate();
    if (config.integration.kind != IntegrationKind::none && job.backbone.denoiser->hook_points().empty())
        job.warnings.push_back("backbone '" + job.backbone.id + "' exposes no attention hooks; " +
                               to_string(config.integration.kind) + " injection has no effect");
    return job;
}

std::string cache_fingerprint(const EditJob& job, const RunConfig& config) {
    nlohmann::json j{{"schema_version", kSchemaVersion},
                     {"image", job.input_sha256},
                     {"backbone", job.backbone.id},
                     {"weights", config.weights},
                     {"resolution", job.backbone.native_resolution},
                     {"steps", job.edit.num_steps},
                     {"train_steps", config.train_steps},
                     {"schedule", to_string(config.schedule)},
                     {"seed", job.edit.seed},
                     {"guidance_scale", job.edit.guidance_scale},
                     {"prompt", embedding_fingerprint(job.y_src)}};
    return sha256_hex(j.dump());
}

InvertOutcome invert_or_load(const EditJob& job, const RunConfig& config) {
    InvertOutcome out;
    out.fingerprint = cache_fingerprint(job, config);
    out.dir = config.cache.empty() ? cache_root(config) / out.fingerprint.substr(0, 24) : fs::path(config.cache);

    if (fs::exists(out.dir / "meta.json")) {
        CacheMeta meta = load_cache_meta(out.dir);
        if (meta.config_fingerprint == out.fingerprint && !config.force) {
            out.cache = load_cache(out.dir, job.sched);
            out.hit = true;
            return out;
        }
        if (meta.config_fingerprint != out.fingerprint && !config.force)
            throw ValidationError("cache '" + out.dir.string() + "' holds fingerprint " +
                                  meta.config_fingerprint.substr(0, 12) + ", this run needs " +
                                  out.fingerprint.substr(0, 12) + "; pass --force to overwrite");
        fs::remove_all(out.dir);
    } else if (!config.auto_invert) {
        throw ValidationError("no cache at '" + out.dir.string() + "' and auto-invert is disabled");
    }

    out.cache = invert_source(job.x0, job.y_src, *job.model, job.sched);
    out.model_calls = out.cache.forward_calls * guidance_passes_of(*job.model);
    CacheMeta meta;
    meta.num_steps = job.sched.num_steps();
    meta.num_train_steps = config.train_steps;
    meta.schedule_kind = config.schedule;
    meta.latent_shape = job.x0.shape();
    meta.prompt_fingerprint = out.cache.prompt_fingerprint;
    meta.config_fingerprint = out.fingerprint;
    meta.extra = {{"input_sha256", job.input_sha256}, {"backbone", job.backbone.id}, {"source_prompt", job.source_prompt}};
    save_cache(out.dir, out.cache, meta);
    return out;
}

nlohmann::json cmd_invert(const RunConfig& config) {
    config.validate_paths("invert");
    nlohmann::json summary{{"schema_version", kSchemaVersion}, {"command", "invert"}, {"caches", nlohmann::json::array()}};
    auto images = input_images(config.input);
    std::vector<nlohmann::json> rows(images.size());
    parallel_for(images.size(), config.workers, [&](size_t i) {
        RunConfig c = per_image_config(config, images[i]);
        if (images.size() > 1) c.cache.clear();
        EditJob job = prepare_job(c, images[i], false);
        auto start = Clock::now();
        InvertOutcome inv = invert_or_load(job, c);
        rows[i] = cache_json(inv);
        rows[i]["input"] = images[i].string();
        rows[i]["seconds"] = seconds_since(start);
        rows[i]["warnings"] = job.warnings;
    });
    for (auto& r : rows) summary["caches"].push_back(r);
    return summary;
}

nlohmann::json cmd_edit(const RunConfig& config) {
    config.validate_paths("edit");
    auto images = input_images(config.input);
    if (images.size() > 1 && !config.cache.empty())
        throw ConfigError("--cache names a single cache directory; use --cache-dir for batch input");
    nlohmann::json summary{{"schema_version", kSchemaVersion}, {"command", "edit"}, {"outputs", nlohmann::json::array()}};
    std::vector<nlohmann::json> rows(images.size());
    parallel_for(images.size(), config.workers, [&](size_t i) {
        RunConfig c = per_image_config(config, images[i]);
        auto t0 = Clock::now();
        EditJob job = prepare_job(c, images[i]);
        double prepare_s = seconds_since(t0);
        auto t1 = Clock::now();
        InvertOutcome inv = invert_or_load(job, c);
        double invert_s = seconds_since(t1);
        VariantRun run = run_edit(job, inv, c, job.edit.variant, job.edit.gamma);
        auto t2 = Clock::now();
        Image out = decode_output(job, run.result.output);
        double decode_s = seconds_since(t2);

        fs::path png = fs::path(c.output_dir) / (images[i].stem().string() + ".png");
        fs::path manifest_path = fs::path(c.output_dir) / (images[i].stem().string() + ".manifest.json");
        write_png_atomic(png, out);
        nlohmann::json m{{"schema_version", kSchemaVersion},
                         {"command", "edit"},
                         {"config", to_json(c)},
                         {"job", job_json(job)},
                         {"variant", to_string(job.edit.variant)},
                         {"cache", cache_json(inv)},
                         {"ledger", run.result.ledger},
                         {"model_evaluations", run.result.ledger.model_evaluations()},
                         {"timings_s", {{"prepare", prepare_s}, {"invert", invert_s}, {"edit", run.seconds}, {"decode", decode_s}}},
                         {"warnings", job.warnings},
                         {"output", png.string()},
                         {"output_sha256", sha256_hex(read_bytes(png))}};
        write_json_atomic(manifest_path, m);
        rows[i] = {{"input", images[i].string()}, {"output", png.string()}, {"manifest", manifest_path.string()},
                   {"warnings", job.warnings}};
    });
    for (auto& r : rows) summary["outputs"].push_back(r);
    return summary;
}

nlohmann::json cmd_sweep(const RunConfig& config) {
    config.validate_paths("sweep");
    if (config.gamma_grid.empty()) throw ConfigError("gamma_grid is empty");
    nlohmann::json summary{{"schema_version", kSchemaVersion}, {"command", "sweep"}, {"runs", nlohmann::json::array()}};
    for (const auto& image : input_images(config.input)) {
        RunConfig c = per_image_config(config, image);
        EditJob job = prepare_job(c, image);
        InvertOutcome inv = invert_or_load(job, c);
        std::string stem = image.stem().string();
        nlohmann::json m{{"schema_version", kSchemaVersion}, {"command", "sweep"}, {"config", to_json(c)},
                         {"job", job_json(job)}, {"cache", cache_json(inv)}, {"outputs", nlohmann::json::array()}};
        std::vector<Image> tiles;
        for (double g : c.gamma_grid) {
            VariantRun run = run_edit(job, inv, c, job.edit.variant, g);
            Image out = decode_output(job, run.result.output);
            fs::path png = fs::path(c.output_dir) / (stem + "_gamma" + gamma_label(g) + ".png");
            write_png_atomic(png, out);
            tiles.push_back(out);
            m["outputs"].push_back({{"gamma", g}, {"output", png.string()}, {"ledger", run.result.ledger},
                                    {"seconds", run.seconds}});
        }
        fs::path sheet = fs::path(c.output_dir) / (stem + "_sweep.png");
        write_png_atomic(sheet, contact_sheet(tiles));
        m["contact_sheet"] = sheet.string();
        m["contact_sheet_layout"] = "left to right in gamma_grid order";
        m["warnings"] = job.warnings;
        fs::path manifest_path = fs::path(c.output_dir) / (stem + "_sweep.manifest.json");
        write_json_atomic(manifest_path, m);
        summary["runs"].push_back({{"input", image.string()}, {"manifest", manifest_path.string()}, {"warnings", job.warnings}});
    }
    return summary;
}

nlohmann::json cmd_ablate(const RunConfig& config) {
    config.validate_paths("ablate");
    nlohmann::json summary{{"schema_version", kSchemaVersion}, {"command", "ablate"}, {"runs", nlohmann::json::array()}};
    for (const auto& image : input_images(config.input)) {
        RunConfig c = per_image_config(config, image);
        EditJob job = prepare_job(c, image);
        InvertOutcome inv = invert_or_load(job, c);
        std::string stem = image.stem().string();
        nlohmann::json m{{"schema_version", kSchemaVersion}, {"command", "ablate"}, {"config", to_json(c)},
                         {"job", job_json(job)}, {"cache", cache_json(inv)}};
        std::optional<Tensor> reference;
        Tensor target_mean;
        if (job.backbone.world) {
            reference = reconstruct_cached(inv.cache, job.y_src, *job.model, job.sched);
            target_mean = job.backbone.world->mean(job.y_tgt);
        }
        std::vector<Image> tiles;
        for (Variant v : all_variants()) {
            VariantRun run = run_edit(job, inv, c, v, job.edit.gamma);
            Image out = decode_output(job, run.result.output);
            fs::path png = fs::path(c.output_dir) / (stem + "_" + to_string(v) + ".png");
            write_png_atomic(png, out);
            tiles.push_back(out);
            nlohmann::json row{{"output", png.string()}, {"ledger", run.result.ledger}, {"seconds", run.seconds}};
            if (reference) {
                auto s = surrogate_scores(*job.backbone.world, run.result.output, *reference, target_mean);
                row["surrogate_bd"] = s.bd;
                row["surrogate_cs"] = s.cs;
            }
            m["variants"][to_string(v)] = row;
        }
        // Variants share the cache, so the forward pass is paid once.
        m["forward_calls_total"] = inv.cache.forward_calls;
        fs::path sheet = fs::path(c.output_dir) / (stem + "_ablation.png");
        write_png_atomic(sheet, contact_sheet(tiles));
        m["side_by_side"] = sheet.string();
        m["side_by_side_layout"] = "DDIM, DDIM_PI, DDIM_NC, PIC";
        if (job.backbone.world) {
            AblationOptions ao;
            ao.first_seed = c.edit.seed;
            ao.steps = c.edit.num_steps;
            ao.tau = c.edit.tau;
            ao.gamma = c.edit.gamma;
            ao.beta = job.plan.beta;
            m["toy_ordering"] = toy_ablation(ao).to_json();
        }
        m["warnings"] = job.warnings;
        fs::path manifest_path = fs::path(c.output_dir) / (stem + "_ablation.manifest.json");
        write_json_atomic(manifest_path, m);
        summary["runs"].push_back({{"input", image.string()}, {"manifest", manifest_path.string()},
                                   {"toy_ordering", m.value("toy_ordering", nlohmann::json())},
                                   {"warnings", job.warnings}});
    }
    return summary;
}

namespace {

/// Sidecar files first, then an optional fallback detector.
class ChainDetector : public Detector {
public:
    ChainDetector(std::vector<std::unique_ptr<Detector>> detectors) : m_detectors(std::move(detectors)) {}
    std::optional<Detection> detect(const Image& image, const std::string& id, const std::string& object) const override {
        for (const auto& d : m_detectors)
            if (auto r = d->detect(image, id, object)) return r;
        return std::nullopt;
    }

private:
    std::vector<std::unique_ptr<Detector>> m_detectors;
};

std::map<std::string, fs::path> png_by_stem(const fs::path& dir) {
    std::map<std::string, fs::path> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& p : input_images(dir)) out[p.stem().string()] = p;
    return out;
}

/// {"<image id>": "target prompt"} from prompts.json, when present.
std::map<std::string, std::string> load_prompts(const std::vector<fs::path>& candidates) {
    std::map<std::string, std::string> out;
    for (const auto& p : candidates)
        if (fs::exists(p)) {
            auto j = read_json(p);
            for (auto& [k, v] : j.items()) out[k] = v.get<std::string>();
            break;
        }
    return out;
}

struct TaskDirs {
    std::string name;
    fs::path source;
    fs::path translated;
    fs::path root;
};

MetricsReport evaluate_task(const TaskDirs& task, const RunConfig& config, const JointEmbedder* embedder,
                            std::vector<std::string>& warnings) {
    MetricsReport report;
    report.task = task.name;
    report.config_fingerprint = sha256_hex(to_json(config).dump()).substr(0, 16);

    auto sources = png_by_stem(task.source);
    auto translated = png_by_stem(task.translated);
    for (const auto& [id, p] : sources)
        if (!translated.count(id)) report.skipped.push_back(id + ": no translated image");
    for (const auto& [id, p] : translated)
        if (!sources.count(id)) report.skipped.push_back(id + ": no source image");

    std::string object;
    if (config.task) object = config.task->source_word;
    else if (task_presets().count(task.name)) object = task_preset(task.name).source_word;

    std::vector<std::unique_ptr<Detector>> chain;
    chain.push_back(std::make_unique<SidecarDetector>(config.detections.empty() ? task.source : fs::path(config.detections)));
    if (config.backbone == "toy" || config.backbone == "toy-attention") {
        // Toy images are edited inside a fixed central box.
        chain.push_back(std::make_unique<FixedBoxDetector>(std::array<double, 4>{0.25, 0.25, 0.75, 0.75}));
    }
    ChainDetector detector(std::move(chain));
    MultiScaleDistance perceptual;
    PatchAffinityExtractor extractor;

    auto prompts = load_prompts({task.translated / "prompts.json", task.root / "prompts.json"});

    for (const auto& [id, src_path] : sources) {
        if (!translated.count(id)) continue;
        Image src = read_png(src_path), tgt = read_png(translated.at(id));
        if (!src.same_size(tgt)) {
            report.skipped.push_back(id + ": size mismatch");
            continue;
        }
        MetricsRow row;
        row.image_id = id;
        if (config.metrics.cs && embedder) {
            std::optional<std::string> p_tgt;
            if (prompts.count(id)) p_tgt = prompts.at(id);
            else if (config.target_prompt) p_tgt = config.target_prompt;
            if (p_tgt) {
                try {
                    row.cs = clip_similarity(tgt, id, *p_tgt, *embedder);
                } catch (const Error& e) {
                    report.skipped.push_back(id + ": CS unavailable (" + e.what() + ")");
                }
            }
        }
        if (config.metrics.bd) {
            auto bd = background_distance(src, tgt, id, object, detector, perceptual, config.bd_margin);
            row.bd = bd.value;
            row.bd_fallback = bd.fallback;
            row.mask_kind = bd.mask_kind;
        }
        if (config.metrics.sd) row.sd = structure_distance(src, tgt, extractor);
        report.rows.push_back(std::move(row));
    }
    if (report.rows.empty()) warnings.push_back("task '" + task.name + "': no image pairs found");
    return report;
}

}  // namespace

nlohmann::json cmd_evaluate(const RunConfig& config) {
    config.validate_paths("evaluate");
    std::vector<TaskDirs> tasks;
    if (!config.tasks_root.empty()) {
        for (const auto& e : fs::directory_iterator(config.tasks_root))
            if (e.is_directory()) tasks.push_back({e.path().filename().string(), e.path() / "source", e.path() / "translated", e.path()});
        std::sort(tasks.begin(), tasks.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    } else {
        std::string name = config.task ? config.task->name : fs::path(config.translated_dir).filename().string();
        tasks.push_back({name, config.source_dir, config.translated_dir, fs::path(config.translated_dir).parent_path()});
    }

    std::unique_ptr<JointEmbedder> embedder;
    std::vector<std::string> warnings;
    if (config.metrics.cs) {
        if (!config.embeddings.empty()) {
            embedder = std::make_unique<PrecomputedEmbedder>(PrecomputedEmbedder::from_file(config.embeddings));
        } else if (config.backbone == "toy" || config.backbone == "toy-attention") {
            Backbone b = make_backbone(config.backbone, backbone_options(config));
            embedder = std::make_unique<ToyJointEmbedder>(b.world, b.encoder);
        } else {
            warnings.push_back("no joint embedder for backbone '" + config.backbone + "'; CS omitted (pass --embeddings)");
        }
    }

    fs::create_directories(config.output_dir);
    std::vector<MetricsReport> reports;
    nlohmann::json summary{{"schema_version", kSchemaVersion}, {"command", "evaluate"}, {"reports", nlohmann::json::array()}};
    for (const auto& task : tasks) {
        MetricsReport r = evaluate_task(task, config, embedder.get(), warnings);
        fs::path json_path = fs::path(config.output_dir) / (task.name + ".metrics.json");
        fs::path csv_path = fs::path(config.output_dir) / (task.name + ".metrics.csv");
        write_json_atomic(json_path, r.to_json());
        write_file_atomic(csv_path, r.to_csv());
        summary["reports"].push_back({{"task", task.name}, {"json", json_path.string()}, {"csv", csv_path.string()},
                                      {"pairs", r.rows.size()}, {"skipped", r.skipped}});
        reports.push_back(std::move(r));
    }
    if (tasks.empty()) warnings.push_back("no task directories under '" + config.tasks_root + "'");
    std::string table = summary_table(reports);
    write_file_atomic(fs::path(config.output_dir) / "summary.txt", table);
    summary["table"] = table;
    summary["warnings"] = warnings;
    write_json_atomic(fs::path(config.output_dir) / "summary.json", summary);
    return summary;
}

SuiteReport cmd_toy_verify(const SuiteOptions& options, const fs::path& output_dir) {
    SuiteReport report = run_invariant_suite(options);
    fs::create_directories(output_dir);
    nlohmann::json j = report.to_json();
    j["options"] = {{"seed", options.seed},
                    {"draws", options.draws},
                    {"edit_seeds", options.edit_seeds},
                    {"recon_seeds", options.recon_seeds},
                    {"corrupt_schedule", options.corrupt_schedule}};
    write_json_atomic(output_dir / "toy_verify.json", j);
    return report;
}

}  // namespace pic
