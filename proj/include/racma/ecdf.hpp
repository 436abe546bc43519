#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "racma/strategy.hpp"

namespace racma
{
    enum class RunStatus
    {
        budget_exhausted,
        target_reached,
        degeneracy,
    };

    std::string_view status_name(RunStatus status);
    RunStatus parse_status(std::string_view name);

    /// Rows of one trial, one per completed iteration (no row for the initial state).
    struct RunRecord
    {
        int trial = 0;
        std::uint64_t seed = 0;
        double f0 = 0.0;  // f at the initial mean
        std::vector<IterationLog> rows;
        RunStatus status = RunStatus::budget_exhausted;
        std::string message;

        bool operator==(const RunRecord&) const = default;
    };

    /// n values from f0 down to final_target, evenly spaced in log10, endpoints exact.
    std::vector<double> generate_targets(double f0, int n = 500, double final_target = 1e-3);

    /// n evaluation counts geometrically spaced from first to last, endpoints exact.
    std::vector<double> generate_checkpoints(double first, double last, int n = 101);

    struct EcdfCurve
    {
        std::vector<double> targets;
        std::vector<double> checkpoints;
        std::vector<double> proportion;
    };

    /**
     * Fraction of (trial, target) pairs whose best-so-far f at the mean over rows with
     * evals_cum <= checkpoint is at or below the target.
     */
    EcdfCurve compute_ecdf(std::span<const RunRecord> records, std::span<const double> targets,
                           std::span<const double> checkpoints);
}
