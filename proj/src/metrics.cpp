// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include "pic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "pic/error.hpp"
#include "pic/util.hpp"

namespace pic {

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) throw MetricError("embedding sizes differ or are empty");
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (aa == 0.0 || bb == 0.0) throw MetricError("zero-norm embedding");
    return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

PrecomputedEmbedder::PrecomputedEmbedder(const nlohmann::json& table) {
    const nlohmann::json images = table.value("images", nlohmann::json::object());
    const nlohmann::json texts = table.value("texts", nlohmann::json::object());
    for (auto& [k, v] : images.items()) m_images[k] = v.get<std::vector<double>>();
    for (auto& [k, v] : texts.items()) m_texts[k] = v.get<std::vector<double>>();
}

PrecomputedEmbedder PrecomputedEmbedder::from_file(const std::filesystem::path& path) {
    return PrecomputedEmbedder(read_json(path));
}

std::vector<double> PrecomputedEmbedder::embed_image(const Image&, const std::string& image_id) const {
    auto it = m_images.find(image_id);
    if (it == m_images.end()) throw MetricError("no precomputed embedding for image '" + image_id + "'");
    return it->second;
}

std::vector<double> PrecomputedEmbedder::embed_text(const std::string& text) const {
    auto it = m_texts.find(text);
    if (it == m_texts.end()) throw MetricError("no precomputed embedding for text '" + text + "'");
    return it->second;
}

ToyJointEmbedder::ToyJointEmbedder(std::shared_ptr<const GaussianWorld> world, std::shared_ptr<const TextEncoder> encoder)
    : m_world(std::move(world)), m_encoder(std::move(encoder)) {
    if (m_world->latent_shape.size() != 3 || m_world->latent_shape[0] != 3)
        throw ValidationError("toy joint embedder needs an image-shaped world");
}

std::vector<double> ToyJointEmbedder::embed_image(const Image& image, const std::string&) const {
    const int R = static_cast<int>(m_world->latent_shape[1]);
    IdentityCodec codec(R);
    Tensor latent = codec.encode(image);
    std::vector<double> out;
    for (size_t i : m_world->edited_coords) out.push_back(latent[i] - m_world->bias[i]);
    return out;
}

std::vector<double> ToyJointEmbedder::embed_text(const std::string& text) const {
    Tensor mu = m_world->mean(m_encoder->encode(text));
    std::vector<double> out;
    for (size_t i : m_world->edited_coords) out.push_back(mu[i] - m_world->bias[i]);
    return out;
}

double clip_similarity(const Image& translated, const std::string& image_id, const std::string& p_tgt,
                       const JointEmbedder& embedder) {
    return cosine_similarity(embedder.embed_image(translated, image_id), embedder.embed_text(p_tgt));
}

std::optional<Detection> SidecarDetector::detect(const Image& image, const std::string& image_id,
                                                 const std::string& object) const {
    auto path = m_dir / (image_id + ".json");
    if (!std::filesystem::exists(path)) return std::nullopt;
    auto j = read_json(path);
    if (j.contains("masks") && j["masks"].contains(object)) {
        Image m = read_png(m_dir / j["masks"][object].get<std::string>());
        if (!m.same_size(image)) throw MetricError("mask for '" + image_id + "' has a different size than the image");
        Detection det;
        det.kind = "mask";
        det.mask.resize(static_cast<size_t>(m.width) * m.height);
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x) det.mask[static_cast<size_t>(y) * m.width + x] = m.at(x, y, 0) > 0.5;
        return det;
    }
    if (j.contains("boxes") && j["boxes"].contains(object)) {
        auto b = j["boxes"][object].get<std::vector<int>>();
        if (b.size() != 4) throw MetricError("box for '" + image_id + "' needs four values");
        Detection det;
        det.kind = "box";
        det.box = {b[0], b[1], b[2], b[3]};
        return det;
    }
    return std::nullopt;
}

std::optional<Detection> FixedBoxDetector::detect(const Image& image, const std::string&, const std::string&) const {
    Detection det;
    det.kind = "box";
    det.box = {static_cast<int>(std::lround(m_fractions[0] * image.width)),
               static_cast<int>(std::lround(m_fractions[1] * image.height)),
               static_cast<int>(std::lround(m_fractions[2] * image.width)),
               static_cast<int>(std::lround(m_fractions[3] * image.height))};
    return det;
}

std::vector<unsigned char> detection_mask(const Detection& det, int width, int height, int margin) {
    std::vector<unsigned char> base(static_cast<size_t>(width) * height, 0);
    if (det.kind == "mask") {
        if (det.mask.size() != base.size()) throw MetricError("detection mask size mismatch");
        base = det.mask;
    } else {
        for (int y = std::max(0, det.box[1]); y < std::min(height, det.box[3]); ++y)
            for (int x = std::max(0, det.box[0]); x < std::min(width, det.box[2]); ++x) base[static_cast<size_t>(y) * width + x] = 1;
    }
    if (margin <= 0) return base;
    std::vector<unsigned char> out(base.size(), 0);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            if (!base[static_cast<size_t>(y) * width + x]) continue;
            for (int dy = -margin; dy <= margin; ++dy)
                for (int dx = -margin; dx <= margin; ++dx) {
                    int xx = x + dx, yy = y + dy;
                    if (xx >= 0 && yy >= 0 && xx < width && yy < height) out[static_cast<size_t>(yy) * width + xx] = 1;
                }
        }
    return out;
}

namespace {

Image downsample2(const Image& img) {
    int w = std::max(1, img.width / 2), h = std::max(1, img.height / 2);
    Image out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                int n = 0;
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                        int xx = std::min(img.width - 1, 2 * x + dx), yy = std::min(img.height - 1, 2 * y + dy);
                        s += img.at(xx, yy, c);
                        ++n;
                    }
                out.at(x, y, c) = s / n;
            }
    return out;
}

double scale_distance(const Image& a, const Image& b) {
    double acc = 0.0;
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x)
            for (int c = 0; c < 3; ++c) {
                double dv = a.at(x, y, c) - b.at(x, y, c);
                int xr = std::min(a.width - 1, x + 1), yd = std::min(a.height - 1, y + 1);
                double gx = (a.at(xr, y, c) - a.at(x, y, c)) - (b.at(xr, y, c) - b.at(x, y, c));
                double gy = (a.at(x, yd, c) - a.at(x, y, c)) - (b.at(x, yd, c) - b.at(x, y, c));
                acc += dv * dv + gx * gx + gy * gy;
            }
    return acc / (static_cast<double>(a.width) * a.height);
}

}  // namespace

double MultiScaleDistance::distance(const Image& a, const Image& b) const {
    if (!a.same_size(b)) throw MetricError("perceptual distance needs images of equal size");
    Image sa = a, sb = b;
    double total = 0.0;
    const int scales = 3;
    for (int s = 0; s < scales; ++s) {
        total += scale_distance(sa, sb);
        sa = downsample2(sa);
        sb = downsample2(sb);
    }
    return total / scales;
}

BackgroundResult background_distance(const Image& src, const Image& tgt, const std::string& image_id,
                                     const std::string& object, const Detector& detector,
                                     const PerceptualDistance& perceptual, int margin) {
    if (!src.same_size(tgt)) throw MetricError("background distance needs images of equal size");
    BackgroundResult r;
    auto det = detector.detect(src, image_id, object);
    if (!det) {
        r.fallback = true;
        r.mask_kind = "none";
        r.value = perceptual.distance(src, tgt);
        return r;
    }
    r.mask_kind = det->kind;
    auto mask = detection_mask(*det, src.width, src.height, margin);
    Image a = src, b = tgt;
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x)
            if (mask[static_cast<size_t>(y) * src.width + x])
                for (int c = 0; c < 3; ++c) a.at(x, y, c) = b.at(x, y, c) = 0.0;
    r.value = perceptual.distance(a, b);
    return r;
}

Tensor PatchAffinityExtractor::self_attention(const Image& image) const {
    const int px = std::max(1, image.width / m_patch), py = std::max(1, image.height / m_patch);
    const size_t N = static_cast<size_t>(px) * py;
    const size_t P = static_cast<size_t>(m_patch) * m_patch * 3;
    Tensor feats({N, P});
    for (int gy = 0; gy < py; ++gy)
        for (int gx = 0; gx < px; ++gx) {
            size_t n = static_cast<size_t>(gy) * px + gx, k = 0;
            for (int y = 0; y < m_patch; ++y)
                for (int x = 0; x < m_patch; ++x)
                    for (int c = 0; c < 3; ++c) {
                        int xx = std::min(image.width - 1, gx * m_patch + x), yy = std::min(image.height - 1, gy * m_patch + y);
                        feats.at(n, k++) = image.at(xx, yy, c);
                    }
            double mean = 0.0;
            for (size_t j = 0; j < P; ++j) mean += feats.at(n, j);
            mean /= static_cast<double>(P);
            double norm = 0.0;
            for (size_t j = 0; j < P; ++j) {
                feats.at(n, j) -= mean;
                norm += feats.at(n, j) * feats.at(n, j);
            }
            norm = std::sqrt(norm);
            if (norm > 1e-12)
                for (size_t j = 0; j < P; ++j) feats.at(n, j) /= norm;
        }
    Tensor logits = matmul(feats, transpose(feats));
    logits *= 1.0 / m_temperature;
    return softmax_rows(logits);
}

double structure_distance_maps(const Tensor& a, const Tensor& b) {
    if (a.shape().size() != 2 || a.shape() != b.shape()) throw MetricError("structure maps differ in shape");
    return (a - b).norm() / static_cast<double>(a.shape()[0]);
}

double structure_distance(const Image& src, const Image& tgt, const StructureExtractor& extractor) {
    if (!src.same_size(tgt)) throw MetricError("structure distance needs images of equal size");
    return structure_distance_maps(extractor.self_attention(src), extractor.self_attention(tgt));
}

std::vector<std::string> select_task_images(const std::vector<PoolEntry>& pool, const std::vector<double>& text_embedding,
                                            size_t k, bool* warning) {
    if (pool.empty()) throw ValidationError("image pool is empty");
    std::vector<std::pair<double, const std::string*>> scored;
    for (const auto& e : pool) scored.emplace_back(cosine_similarity(e.embedding, text_embedding), &e.id);
    std::sort(scored.begin(), scored.end(), [](const auto& l, const auto& r) {
        if (l.first != r.first) return l.first > r.first;
        return *l.second < *r.second;
    });
    if (warning) *warning = k > pool.size();
    std::vector<std::string> out;
    for (size_t i = 0; i < std::min(k, scored.size()); ++i) out.push_back(*scored[i].second);
    return out;
}

MetricsReport::Averages MetricsReport::averages() const {
    Averages a;
    if (rows.empty()) return a;
    double cs = 0.0;
    size_t ncs = 0;
    for (const auto& r : rows) {
        a.bd += r.bd;
        a.sd += r.sd;
        if (r.cs) {
            cs += *r.cs;
            ++ncs;
        }
    }
    a.bd /= static_cast<double>(rows.size());
    a.sd /= static_cast<double>(rows.size());
    if (ncs) a.cs = cs / static_cast<double>(ncs);
    return a;
}

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["task"] = task;
    j["config_fingerprint"] = config_fingerprint;
    j["per_image"] = nlohmann::json::array();
    for (const auto& r : rows) {
        j["per_image"].push_back({{"image_id", r.image_id},
                                  {"cs", r.cs ? nlohmann::json(*r.cs) : nlohmann::json(nullptr)},
                                  {"bd", r.bd},
                                  {"sd", r.sd},
                                  {"bd_fallback", r.bd_fallback},
                                  {"mask_kind", r.mask_kind}});
    }
    auto a = averages();
    j["averages"] = {{"cs", a.cs ? nlohmann::json(*a.cs) : nlohmann::json(nullptr)}, {"bd", a.bd}, {"sd", a.sd}};
    j["skipped"] = skipped;
    return j;
}

std::string MetricsReport::to_csv() const {
    std::ostringstream out;
    out << "image_id,cs,bd,sd,bd_fallback,mask_kind\n";
    out.precision(17);
    for (const auto& r : rows) {
        out << r.image_id << ',';
        if (r.cs) out << *r.cs;
        out << ',' << r.bd << ',' << r.sd << ',' << (r.bd_fallback ? 1 : 0) << ',' << r.mask_kind << '\n';
    }
    return out.str();
}

std::string summary_table(const std::vector<MetricsReport>& reports) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-20s %8s %8s %8s %6s\n", "task", "CS", "BD", "SD", "n");
    out << line;
    double cs = 0.0, bd = 0.0, sd = 0.0;
    int ncs = 0, n = 0;
    for (const auto& r : reports) {
        auto a = r.averages();
        std::string cs_text = a.cs ? std::to_string(*a.cs).substr(0, 6) : "-";
        std::snprintf(line, sizeof line, "%-20s %8s %8.3f %8.3f %6zu\n", r.task.c_str(), cs_text.c_str(), a.bd, a.sd,
                      r.rows.size());
        out << line;
        if (r.rows.empty()) continue;
        if (a.cs) {
            cs += *a.cs;
            ++ncs;
        }
        bd += a.bd;
        sd += a.sd;
        ++n;
    }
    if (n) {
        std::string cs_text = ncs ? std::to_string(cs / ncs).substr(0, 6) : "-";
        std::snprintf(line, sizeof line, "%-20s %8s %8.3f %8.3f\n", "Average", cs_text.c_str(), bd / n, sd / n);
        out << line;
    }
    return out.str();
}

}  // namespace pic
