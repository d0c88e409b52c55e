// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "pic/tensor.hpp"

namespace pic {

enum class ScheduleKind { linear, scaled_linear };

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& name);

/// Cumulative noise coefficients over the inference grid. alphas[0] == 1 is the clean
/// endpoint, alphas[T] the noisiest step. train_grid[t] counts how many training
/// noising steps inference index t corresponds to (0 for the clean endpoint).
class DiffusionSchedule {
public:
    /// Validates every invariant; throws ConfigError on violation.
    static DiffusionSchedule from_alphas(std::vector<double> alphas, std::vector<int> train_grid = {},
                                         int num_train_steps = 0, ScheduleKind kind = ScheduleKind::scaled_linear);

    int num_steps() const { return static_cast<int>(m_alphas.size()) - 1; }
    int num_train_steps() const { return m_num_train_steps; }
    ScheduleKind kind() const { return m_kind; }
    double alpha(int t) const;
    const std::vector<double>& alphas() const { return m_alphas; }
    const std::vector<int>& train_grid() const { return m_train_grid; }

private:
    DiffusionSchedule() = default;

    std::vector<double> m_alphas;
    std::vector<int> m_train_grid;
    int m_num_train_steps = 0;
    ScheduleKind m_kind = ScheduleKind::scaled_linear;
};

/// Human-readable list of schedule invariant violations (empty when valid).
std::vector<std::string> schedule_violations(const std::vector<double>& alphas);

/// Training-grid cumulative products, index k = number of noising steps (k = 0 -> 1.0).
std::vector<double> training_alphas(int num_train_steps, ScheduleKind kind);

DiffusionSchedule build_schedule(int num_train_steps, int num_inference_steps, ScheduleKind kind);

struct LatentState {
    Tensor data;
    int t = 0;
};

/// f_theta: the clean-sample estimate (x - sqrt(1-a) eps) / sqrt(a).
Tensor predict_x0(const LatentState& x, const Tensor& eps, const DiffusionSchedule& sched);

/// One deterministic DDIM move from coefficient a_from to a_to using a single eps
/// both inside the clean-sample estimate and in the additive term.
Tensor ddim_transfer(const Tensor& x, const Tensor& eps, double a_from, double a_to);

LatentState forward_step(const LatentState& x, const Tensor& eps, const DiffusionSchedule& sched);
LatentState reverse_step(const LatentState& x, const Tensor& eps, const DiffusionSchedule& sched);

}  // namespace pic
