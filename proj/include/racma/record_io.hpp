#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "racma/ecdf.hpp"
#include "racma/harness.hpp"

namespace racma
{
    /// Column order of per-iteration CSV files.
    const std::vector<std::string>& row_csv_columns();

    /// Header plus one line per row; absent optional values are empty cells.
    void write_rows_csv(std::ostream& out, const std::vector<IterationLog>& rows);
    /// Throws InvalidArgument on a malformed header or cell.
    std::vector<IterationLog> read_rows_csv(std::istream& in);

    struct TrialSummary
    {
        int trial = 0;
        std::uint64_t seed = 0;
        double f0 = 0.0;
        RunStatus status = RunStatus::budget_exhausted;
        std::string message;
        std::uint64_t evaluations = 0;
        double final_f = 0.0;
        std::string file;
    };

    struct ExperimentSummary
    {
        ExperimentConfig config;
        std::uint64_t budget = 0;
        int lambda = 0;  // initial population size
        double f0 = 0.0;
        std::vector<TrialSummary> trials;
    };

    std::string summary_to_json(const ExperimentSummary& summary);
    ExperimentSummary summary_from_json(const std::string& text);

    /// summary.json plus trial_XX.csv under dir (created if missing).
    ExperimentSummary write_experiment(const std::filesystem::path& dir, const ExperimentConfig& config,
                                       const std::vector<RunRecord>& records, int lambda);

    /// Inverse of write_experiment.
    std::vector<RunRecord> read_experiment(const std::filesystem::path& dir, ExperimentSummary* summary = nullptr);

    /// "checkpoint,proportion" lines.
    void write_ecdf_csv(std::ostream& out, const EcdfCurve& curve);
}
