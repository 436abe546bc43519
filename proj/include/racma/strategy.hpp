#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>

#include "racma/gaussian.hpp"
#include "racma/problems.hpp"

namespace racma
{
    /// One row of a run log. Fields a strategy does not have stay empty.
    struct IterationLog
    {
        long t = 0;
        std::uint64_t evals_cum = 0;
        double f_clean_at_mean = 0.0;
        double sigma = 0.0;
        int lambda = 0;
        std::optional<double> n_eval;
        std::optional<int> n_eval_bar;
        std::optional<double> eta_m;
        std::optional<double> eta_Sigma;
        std::optional<double> rho_m;
        std::optional<double> rho_Sigma;
        std::optional<double> rho_target;
        std::optional<double> s;
        bool clamped = false;

        bool operator==(const IterationLog&) const = default;
    };

    /// A stateful optimizer that advances by whole iterations on a noisy problem.
    class Strategy
    {
    public:
        virtual ~Strategy() = default;

        /// Runs one iteration; the returned row reflects the state after it.
        virtual IterationLog iterate(NoisyProblem& problem) = 0;

        [[nodiscard]] virtual const GaussianParams& params() const = 0;
        [[nodiscard]] virtual std::string_view name() const = 0;
        /// Population size of the next iteration.
        [[nodiscard]] virtual int lambda() const = 0;
    };

    enum class StrategyKind
    {
        cmaes,
        ra,
        uh,
        psa,
        lra,
    };

    std::string_view strategy_name(StrategyKind kind);
    StrategyKind parse_strategy(std::string_view name);
}
