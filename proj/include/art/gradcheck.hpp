#pragma once

#include <string>
#include <vector>

namespace art {

constexpr double kGradCheckTolerance = 1e-4;

struct GradCheckOptions {
    std::string component;     // empty = whole suite
    int seeds = 100;
    std::string inject_fault;  // test hook: corrupt one component's backward
};

struct GradCheckResult {
    std::string component;
    double max_rel_err = 0.0;
    bool passed() const { return max_rel_err < kGradCheckTolerance; }
};

// Central-difference verification of every differentiable operation and the
// full target cell, plus an end-to-end classification loss through source
// LSTM, bidirectional target encoder and head (d=3, d_a=3, n=4).
std::vector<GradCheckResult> run_gradcheck_suite(const GradCheckOptions& opts);

std::vector<std::string> gradcheck_component_names();

}  // namespace art
