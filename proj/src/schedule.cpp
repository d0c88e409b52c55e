// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include "pic/schedule.hpp"

#include <cmath>

#include "pic/error.hpp"

namespace pic {

std::string to_string(ScheduleKind kind) {
    return kind == ScheduleKind::linear ? "linear" : "scaled_linear";
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
    if (name == "linear") return ScheduleKind::linear;
    if (name == "scaled_linear") return ScheduleKind::scaled_linear;
    throw ConfigError("unknown schedule kind '" + name + "' (expected linear or scaled_linear)");
}

std::vector<std::string> schedule_violations(const std::vector<double>& alphas) {
    std::vector<std::string> out;
    if (alphas.empty()) {
        out.push_back("schedule has no entries");
        return out;
    }
    for (size_t t = 0; t < alphas.size(); ++t) {
        if (!std::isfinite(alphas[t]) || alphas[t] <= 0.0 || alphas[t] > 1.0)
            out.push_back("alpha[" + std::to_string(t) + "] = " + std::to_string(alphas[t]) + " outside (0, 1]");
        if (t > 0 && !(alphas[t] < alphas[t - 1]))
            out.push_back("alpha not strictly decreasing at t = " + std::to_string(t));
    }
    return out;
}

DiffusionSchedule DiffusionSchedule::from_alphas(std::vector<double> alphas, std::vector<int> train_grid,
                                                 int num_train_steps, ScheduleKind kind) {
    auto bad = schedule_violations(alphas);
    if (!bad.empty()) throw ConfigError("invalid schedule: " + bad.front());
    if (train_grid.empty()) {
        for (size_t t = 0; t < alphas.size(); ++t) train_grid.push_back(static_cast<int>(t));
    }
    if (train_grid.size() != alphas.size()) throw ConfigError("train_grid length differs from alphas length");
    DiffusionSchedule s;
    s.m_alphas = std::move(alphas);
    s.m_train_grid = std::move(train_grid);
    s.m_num_train_steps = num_train_steps > 0 ? num_train_steps : s.num_steps();
    s.m_kind = kind;
    return s;
}

double DiffusionSchedule::alpha(int t) const {
    if (t < 0 || t > num_steps())
        throw IndexError("step " + std::to_string(t) + " outside schedule [0, " + std::to_string(num_steps()) + "]");
    return m_alphas[static_cast<size_t>(t)];
}

std::vector<double> training_alphas(int num_train_steps, ScheduleKind kind) {
    const double lo = 1e-4, hi = 0.02;
    const double slo = 0.00085, shi = 0.012;
    std::vector<double> out(static_cast<size_t>(num_train_steps) + 1);
    out[0] = 1.0;
    for (int i = 0; i < num_train_steps; ++i) {
        double frac = num_train_steps == 1 ? 0.0 : static_cast<double>(i) / (num_train_steps - 1);
        double beta;
        if (kind == ScheduleKind::linear) {
            beta = lo + (hi - lo) * frac;
        } else {
            double r = std::sqrt(slo) + (std::sqrt(shi) - std::sqrt(slo)) * frac;
            beta = r * r;
        }
        out[static_cast<size_t>(i) + 1] = out[static_cast<size_t>(i)] * (1.0 - beta);
    }
    return out;
}

DiffusionSchedule build_schedule(int num_train_steps, int num_inference_steps, ScheduleKind kind) {
    if (num_inference_steps < 1 || num_inference_steps > num_train_steps)
        throw ConfigError("need 1 <= inference steps (" + std::to_string(num_inference_steps) +
                          ") <= training steps (" + std::to_string(num_train_steps) + ")");
    auto train = training_alphas(num_train_steps, kind);
    std::vector<double> alphas;
    std::vector<int> grid;
    for (int t = 0; t <= num_inference_steps; ++t) {
        int k = static_cast<int>(std::lround(static_cast<double>(t) * num_train_steps / num_inference_steps));
        grid.push_back(k);
        alphas.push_back(train[static_cast<size_t>(k)]);
    }
    return DiffusionSchedule::from_alphas(std::move(alphas), std::move(grid), num_train_steps, kind);
}

Tensor predict_x0(const LatentState& x, const Tensor& eps, const DiffusionSchedule& sched) {
    require_same_shape(x.data, eps, "predict_x0");
    double a = sched.alpha(x.t);
    if (a <= 0.0) throw SingularScheduleError("alpha is zero, x0 prediction undefined", x.t);
    double sa = std::sqrt(a), s1 = std::sqrt(1.0 - a);
    Tensor out = x.data;
    for (size_t i = 0; i < out.size(); ++i) out[i] = (x.data[i] - s1 * eps[i]) / sa;
    return out;
}

Tensor ddim_transfer(const Tensor& x, const Tensor& eps, double a_from, double a_to) {
    require_same_shape(x, eps, "ddim step");
    if (a_from <= 0.0) throw SingularScheduleError("alpha is zero, x0 prediction undefined");
    double sf = std::sqrt(a_from), s1f = std::sqrt(1.0 - a_from);
    double st = std::sqrt(a_to), s1t = std::sqrt(1.0 - a_to);
    Tensor out = x;
    for (size_t i = 0; i < out.size(); ++i) {
        double f = (x[i] - s1f * eps[i]) / sf;
        out[i] = st * f + s1t * eps[i];
    }
    return out;
}

LatentState forward_step(const LatentState& x, const Tensor& eps, const DiffusionSchedule& sched) {
    if (x.t < 0 || x.t >= sched.num_steps())
        throw IndexError("forward step from t = " + std::to_string(x.t) + " needs t < T = " +
                         std::to_string(sched.num_steps()));
    return {ddim_transfer(x.data, eps, sched.alpha(x.t), sched.alpha(x.t + 1)), x.t + 1};
}

LatentState reverse_step(const LatentState& x, const Tensor& eps, const DiffusionSchedule& sched) {
    if (x.t < 1 || x.t > sched.num_steps())
        throw IndexError("reverse step from t = " + std::to_string(x.t) + " needs 1 <= t <= T = " +
                         std::to_string(sched.num_steps()));
    return {ddim_transfer(x.data, eps, sched.alpha(x.t), sched.alpha(x.t - 1)), x.t - 1};
}

}  // namespace pic
