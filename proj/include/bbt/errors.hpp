#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bbt {

// Malformed or inconsistent input data (unknown team codes, bad files, ...).
struct data_error : std::runtime_error {
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

// A numerical procedure failed (non-convergence, divergent sampler, ...).
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// The win/loss record admits no finite maximum-likelihood solution: some
// team (or group of teams) has wins crossing in only one direction.
struct ford_error : numerical_error {
    std::vector<int> teams;  // offending team indices, when known

    explicit ford_error(const std::string& what, std::vector<int> offenders = {})
        : numerical_error(what), teams(std::move(offenders)) {}
};

}  // namespace bbt
