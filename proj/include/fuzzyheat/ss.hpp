#pragma once

// Seikkala solutions: the lower/upper endpoint system of a fuzzy heat-like
// problem, solved per alpha level, and the region where the endpoint pair is
// a genuine family of alpha-cuts.
//
// With P > 0 the lower equation is  (u1)_t + P1 (u1)_xx = F1.  With P < 0 it
// takes its second derivative from the upper endpoint instead:
// (u1)_t + P1 (u2)_xx = F1, and symmetrically for u2.  Q works the same way.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fuzzyheat/bfs.hpp"
#include "fuzzyheat/fuzzy.hpp"
#include "fuzzyheat/grid.hpp"
#include "fuzzyheat/problem.hpp"
#include "fuzzyheat/signs.hpp"
#include "fuzzyheat/vim.hpp"

namespace fuzzyheat {

enum class Coupling { uncoupled, cross_coupled_x, cross_coupled_y, cross_coupled_both };

const char* to_string(Coupling c) noexcept;

struct SeikkalaSystem {
    Coupling coupling = Coupling::uncoupled;
    /// Index 0 is the lower equation, 1 the upper one.
    BoundEndpoint pxx[2];
    std::size_t xx_source[2] = {0, 1};
    std::optional<BoundEndpoint> qyy[2];
    std::size_t yy_source[2] = {0, 1};
    BoundEndpoint f[2];
    BoundEndpoint initial[2];

    /// Parameter-free two-equation VIM system at one alpha level.
    VimSystem at(double alpha) const;
};

/// Throws ValidationError when the sign of P or Q is not definite on the domain.
SeikkalaSystem assemble_system(const HeatLikeProblem& p, const SignProfile& profile);

/// Profile of the coefficients, source and initial condition only (no closed form needed).
SignProfile coefficient_profile(const HeatLikeProblem& p, const SamplingConfig& cfg = {});

struct SsLevel {
    double alpha = 0.0;
    GridFunction u1;
    GridFunction u2;
    int iterations = 0;
    double final_delta = 0.0;
};

/// Throws NumericalError when the iteration diverges or does not converge.
SsLevel solve_ss(const SeikkalaSystem& sys, double alpha, const GridSpec& grid, const VimConfig& cfg = {});

struct RegionBox {
    std::size_t it_end = 0;  // exclusive, counted from the t0 plane
    std::size_t ix_lo = 0, ix_end = 0;
    std::size_t iy_lo = 0, iy_end = 0;
    double t_lo = 0.0, t_hi = 0.0;
    double x_lo = 0.0, x_hi = 0.0;
    double y_lo = 0.0, y_hi = 0.0;
};

struct ValidityRegion {
    GridSpec grid;
    std::vector<std::uint8_t> mask;
    std::size_t valid_nodes = 0;
    /// Largest box of valid nodes resting on the t0 plane; absent when none.
    std::optional<RegionBox> region;
    /// Largest t such that every node at or below it is valid; absent when t0 itself fails.
    std::optional<double> t_band_end;

    bool valid(std::size_t it, std::size_t ix, std::size_t iy = 0) const { return mask[grid.index(it, ix, iy)] != 0; }
    bool empty() const noexcept { return !region; }
};

/// Needs at least 3 levels sorted by alpha on a common grid.
ValidityRegion validity_region(const std::vector<SsLevel>& levels);

struct SsSolution {
    GridSpec grid;
    Coupling coupling = Coupling::uncoupled;
    std::vector<SsLevel> levels;
    ValidityRegion validity;
};

/// Every level of the uniform alpha grid, solved concurrently.
SsSolution solve_ss_levels(const SeikkalaSystem& sys, const GridSpec& grid, int level_count,
                           const VimConfig& cfg = {});

/// Runs assembly, all levels and the region for a problem.
SsSolution run_ss(const HeatLikeProblem& p, const GridOverrides& grid = {}, const VimConfig& cfg = {},
                  const SamplingConfig& sampling = {});

FuzzyOrRejection ss_fuzzy_solution(const SsSolution& sol, std::size_t it, std::size_t ix, std::size_t iy = 0);

/// Values of the oracle endpoint pair (p_lo / p_hi symbols) at one level.
std::pair<GridFunction, GridFunction> ss_oracle_values(const HeatLikeProblem& p, double alpha, const GridSpec& grid);

}  // namespace fuzzyheat
