#pragma once

#include <optional>

#include "racma/cmaes.hpp"
#include "racma/lra.hpp"
#include "racma/strategy.hpp"

namespace racma
{
    /// Relaxed (real-valued) reevaluation count and its adaptation constants.
    struct ReevalState
    {
        double n_eval = 1.2;
        double n_min = 1.2;
        double rho_base = 0.8;
        double gamma = 0.1;
    };

    /// Smoothed moments of two paired whitened directions and their cross term.
    struct CorrAccumulator
    {
        Vector E1;
        Vector E2;
        double V1 = 0.0;
        double V2 = 0.0;
        double I = 0.0;
        double beta = 0.1;
        long count = 0;

        static CorrAccumulator zeros(int dim, double beta);
    };

    /// Per-solution means over the first half, the second half, and all reevaluations.
    struct HalfAverages
    {
        Vector f_bar_1;
        Vector f_bar_2;
        Vector f_bar_full;
        int n_half = 0;
    };

    /// floor(n) + 1 with probability n - floor(n), floor(n) otherwise.
    int stochastic_round(double n_eval, Rng& rng);

    /**
     * Columns 1..n_half feed the first half, n_half+1..2 n_half the second (disjoint);
     * an odd trailing column only enters the full mean. With a single column all
     * three averages coincide.
     */
    HalfAverages half_averages(const Matrix& raw_evals);

    CorrAccumulator accumulate_correlation(const CorrAccumulator& acc, const Vector& d1, const Vector& d2);

    /// (I - E1.E2) / sqrt((V1 - |E1|^2)(V2 - |E2|^2)), variances floored at 1e-30, clipped to [-1, 1].
    double estimate_correlation(const CorrAccumulator& acc);

    /// Same estimate with the E1.E2 term supplied by the caller.
    double estimate_correlation(const CorrAccumulator& acc, double mean_inner_product);

    /// (1 + ln n_eval - ln n_min) * min(n_eval - 1, 1).
    double target_exponent(double n_eval, double n_min);

    /// rho_base ^ target_exponent(n_eval, n_min).
    double target_correlation(double n_eval, double n_min, double rho_base);

    /// Orientation of the multiplicative n_eval update.
    enum class ReevalDirection
    {
        /// exp(gamma clip(1 - rho_min / rho_target)): correlation below target asks for more reevaluations.
        raise_when_below_target,
        /// exp(gamma clip(rho_min / rho_target - 1)) as printed; grows n_eval when correlation is high.
        raise_when_above_target,
    };

    /// n_eval exp(+-gamma clip(rho_min / rho_target - 1, -1, 1)), floored at n_min.
    ReevalState update_n_eval(const ReevalState& state, double rho_min, double rho_target,
                              ReevalDirection direction = ReevalDirection::raise_when_below_target);

    /// How the mean-product term of the correlation numerator is formed.
    enum class CorrelationNumerator
    {
        /// Plain inner product of the smoothed whitened directions.
        plain,
        /// Smooth raw directions and whiten their means with the current Fisher metric at read time.
        fisher_at_read,
    };

    struct RaOptions
    {
        int lambda = 0;  // 0: default_lambda(d)
        ReevalState reeval;
        LraHyperparams lra;
        CorrelationNumerator numerator = CorrelationNumerator::plain;
        ReevalDirection direction = ReevalDirection::raise_when_below_target;
    };

    class RaCmaes final : public Strategy
    {
    public:
        RaCmaes(const NoisyProblem& problem, StreamFactory streams, RaOptions options = {});

        IterationLog iterate(NoisyProblem& problem) override;
        [[nodiscard]] const GaussianParams& params() const override { return params_; }
        [[nodiscard]] std::string_view name() const override { return "ra"; }
        [[nodiscard]] int lambda() const override { return hyper_.lambda; }

        [[nodiscard]] const ReevalState& reeval() const { return reeval_; }
        [[nodiscard]] const LraState& lra_state() const { return lra_; }
        [[nodiscard]] const CorrAccumulator& mean_correlation() const { return corr_m_; }
        [[nodiscard]] const CorrAccumulator& cov_correlation() const { return corr_Sigma_; }

    private:
        double correlation(const CorrAccumulator& acc, const std::optional<CorrAccumulator>& raw, bool cov_block) const;

        GaussianParams params_;
        CmaState cma_;
        CmaHyperparams hyper_;
        RaOptions options_;
        ReevalState reeval_;
        LraState lra_;
        CorrAccumulator corr_m_;
        CorrAccumulator corr_Sigma_;
        std::optional<CorrAccumulator> raw_m_;
        std::optional<CorrAccumulator> raw_Sigma_;
        StreamFactory streams_;
    };
}
