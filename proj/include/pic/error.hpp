// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace pic {

/// Process exit codes used by the command-line front end.
enum class ExitCode : int {
    success = 0,
    validation = 1,
    numerical = 2,
    model_unavailable = 3,
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept { return ExitCode::validation; }
};

/// Bad shapes, bad spans, out-of-range hyperparameters, malformed files.
class ValidationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Step index outside the schedule (e.g. forward from t = T).
class IndexError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Target prompt surgery could not find the task's anchor word.
class TaskMismatchError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Token diff is not a single contiguous replacement / insertion / removal.
class UnsupportedEditError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NumericalError : public Error {
public:
    NumericalError(const std::string& what, int step = -1, std::string branch = {})
        : Error(format(what, step, branch)), m_step(step), m_branch(std::move(branch)) {}

    ExitCode exit_code() const noexcept override { return ExitCode::numerical; }
    int step() const noexcept { return m_step; }
    const std::string& branch() const noexcept { return m_branch; }

private:
    static std::string format(const std::string& what, int step, const std::string& branch) {
        std::string msg = what;
        if (step >= 0) msg += " (step " + std::to_string(step);
        if (!branch.empty()) msg += (step >= 0 ? ", " : " (") + branch;
        if (step >= 0 || !branch.empty()) msg += ")";
        return msg;
    }

    int m_step;
    std::string m_branch;
};

/// ᾱ_t = 0 makes the x0 predictor undefined.
class SingularScheduleError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ModelUnavailableError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::model_unavailable; }
};

class MetricError : public Error {
public:
    using Error::Error;
};

}  // namespace pic
