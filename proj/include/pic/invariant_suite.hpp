// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace pic {

struct SuiteOptions {
    uint64_t seed = 0;
    int draws = 1000;      // random probes for algebraic checks
    int edit_seeds = 100;  // seeds for the toy edit ordering
    int recon_seeds = 50;
    /// Negative control: swap two schedule entries before the monotonicity check.
    bool corrupt_schedule = false;
};

struct SuiteCheck {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct SuiteReport {
    std::vector<SuiteCheck> checks;
    nlohmann::json tables;

    bool all_passed() const;
    nlohmann::json to_json() const;
    std::string to_table() const;
};

/// Runs the invariant catalogue against the analytic denoiser and the attention stub.
SuiteReport run_invariant_suite(const SuiteOptions& options);

}  // namespace pic
