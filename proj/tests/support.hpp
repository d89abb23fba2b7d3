#pragma once

#include <random>
#include <string>

#include "fuzzyheat/problem.hpp"

namespace support {

inline std::string example_path(int n) {
    return std::string(FUZZYHEAT_DATA_DIR) + "/examples/ex" + std::to_string(n) + ".json";
}

inline fuzzyheat::HeatLikeProblem example(int n) { return fuzzyheat::load_problem_file(example_path(n)); }

/// Example n with a JSON merge patch applied.
inline fuzzyheat::HeatLikeProblem variant(int n, const std::string& patch) {
    nlohmann::json doc = fuzzyheat::problem_to_json(example(n));
    doc.merge_patch(nlohmann::json::parse(patch));
    return fuzzyheat::load_problem(doc.dump());
}

/// Fixed seed per test so failures reproduce.
inline std::mt19937_64 rng(std::uint64_t salt = 0) { return std::mt19937_64(0x5eed0000ULL + salt); }

}  // namespace support
