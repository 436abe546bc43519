#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "racma/ecdf.hpp"
#include "racma/problems.hpp"
#include "racma/ra.hpp"
#include "racma/strategy.hpp"

namespace racma
{
    /// Optional knobs; unset fields keep each strategy's defaults.
    struct StrategyOverrides
    {
        std::optional<int> lambda;
        // reevaluation adaptation
        std::optional<double> n_min;
        std::optional<double> rho_base;
        std::optional<double> reeval_gamma;
        std::optional<CorrelationNumerator> numerator;
        std::optional<ReevalDirection> reeval_direction;
        // learning-rate adaptation
        std::optional<double> lra_alpha;
        std::optional<double> lra_gamma;
        std::optional<double> beta_m;
        std::optional<double> beta_Sigma;
        std::optional<StepSizeCorrection> step_correction;
        // uncertainty handling
        std::optional<double> theta;
        std::optional<double> uh_alpha;
        std::optional<double> reev_fraction;
        // population size adaptation
        std::optional<int> psa_lambda_max;
        std::optional<int> psa_n_mc;
        std::optional<bool> psa_step_correction;
        std::optional<bool> psa_strict_coefficient;
    };

    struct ExperimentConfig
    {
        StrategyKind strategy = StrategyKind::ra;
        ProblemKey problem;
        std::optional<std::uint64_t> budget;  // unset: 1e6 * d
        int trials = 20;
        std::uint64_t seed = 1;
        std::string out;
        double target_f = 1e-3;
        int jobs = 1;
        StrategyOverrides overrides;

        /// Budget with the default applied.
        [[nodiscard]] std::uint64_t effective_budget() const;
        void validate() const;
    };

    /// Reads a JSON config document; unknown keys are an error.
    ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base = {});
    std::string config_to_json(const ExperimentConfig& config);

    std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const NoisyProblem& problem, StreamFactory streams,
                                            const StrategyOverrides& overrides = {});

    /**
     * Iterates until the evaluation count reaches the budget or f at the mean drops to
     * target_f. Deterministic in (seed, trial). Degeneracy ends the trial with a status.
     */
    RunRecord run_trial(const ExperimentConfig& config, int trial);

    /// Runs all trials, up to `jobs` at a time; results are ordered by trial index.
    std::vector<RunRecord> run_experiment(const ExperimentConfig& config);
}
