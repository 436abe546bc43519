#pragma once

#include <span>
#include <vector>

#include "racma/cmaes.hpp"
#include "racma/strategy.hpp"

namespace racma
{
    struct UhConfig
    {
        double theta = 0.2;
        double alpha = 1.5;
        double reev_fraction = 0.1;
        double n_eval = 1.0;

        void validate() const;
        /// max(floor(reev_fraction * lambda), 2), capped at lambda.
        [[nodiscard]] int reev_count(int lambda) const;
    };

    struct RankChangeReport
    {
        double s = 0.0;
        std::vector<int> deltas;  // one per reevaluated solution, in reev_set order
    };

    /**
     * Lower (theta/2)-quantile of {|1 - r|, |2 - r|, ..., |2 lambda - 1 - r|}: the
     * k-th smallest value with k = max(1, ceil(theta/2 * (2 lambda - 1))). Defined for
     * r in [0, 2 lambda].
     */
    int delta_lim(int r, double theta, int lambda);

    /**
     * Rank-change uncertainty level. Ranks live in the union of both evaluation sets,
     * ties broken by (value, solution index, copy index).
     */
    RankChangeReport uncertainty_level(std::span<const double> f1, std::span<const double> f2,
                                       std::span<const int> reev_set, double theta);

    /// n_eval * alpha if s > 0, n_eval / alpha otherwise; never below 1.
    UhConfig adapt_n_eval_uh(const UhConfig& config, double s);

    struct UhOptions
    {
        int lambda = 0;  // 0: default_lambda(d)
        UhConfig config;
    };

    class UhCmaes final : public Strategy
    {
    public:
        UhCmaes(const NoisyProblem& problem, StreamFactory streams, UhOptions options = {});

        IterationLog iterate(NoisyProblem& problem) override;
        [[nodiscard]] const GaussianParams& params() const override { return params_; }
        [[nodiscard]] std::string_view name() const override { return "uh"; }
        [[nodiscard]] int lambda() const override { return hyper_.lambda; }
        [[nodiscard]] const UhConfig& config() const { return config_; }

    private:
        GaussianParams params_;
        CmaState cma_;
        CmaHyperparams hyper_;
        UhConfig config_;
        StreamFactory streams_;
    };
}
