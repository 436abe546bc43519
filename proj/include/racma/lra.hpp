#pragma once

#include "racma/cmaes.hpp"
#include "racma/strategy.hpp"

namespace racma
{
    /// Exponentially smoothed first and second moments of a whitened direction.
    struct SnrAccumulator
    {
        Vector E;
        double V = 0.0;
        double beta = 0.1;
        long count = 0;

        static SnrAccumulator zeros(int dim, double beta);
    };

    /// E <- (1-b)E + b x,  V <- (1-b)V + b |x|^2.
    SnrAccumulator accumulate(const SnrAccumulator& acc, const Vector& tilde_delta);

    /// (|E|^2 - b/(2-b) V) / (V - |E|^2), denominator floored at 1e-30.
    double estimate_snr(const SnrAccumulator& acc);

    /// eta exp(min(gamma eta, beta) clip(snr / (alpha eta) - 1, -1, 1)), kept in (0, 1].
    double update_learning_rate(double eta, double snr_hat, double alpha, double gamma, double beta);

    struct LearningRates
    {
        double eta_m = 1.0;
        double eta_Sigma = 1.0;
    };

    /// How sigma follows a change of eta_m after the Sigma split.
    enum class StepSizeCorrection
    {
        /// sigma *= eta_m_old / eta_m_new: a smaller mean rate samples wider.
        inverse,
        /// sigma *= eta_m_new / eta_m_old.
        proportional,
    };

    struct LraHyperparams
    {
        double alpha = 1.4;
        double gamma = 0.1;
        double beta_m = 0.1;
        double beta_Sigma = 0.03;
        LearningRates initial{};
        StepSizeCorrection step_correction = StepSizeCorrection::inverse;
    };

    /// Number of accumulations before an estimate built with factor beta is trusted.
    long warmup_iterations(double beta);

    /**
     * m += eta_m delta_m, Sigma += eta_Sigma delta_Sigma, then Sigma is split into
     * sigma = det(Sigma)^{1/(2d)} and a unit-determinant C, and sigma is finally scaled
     * by the eta_m ratio. Throws NumericalDegeneracy if the new Sigma is not PD.
     */
    GaussianParams apply_lra_update(const GaussianParams& params, const Vector& delta_m, const Matrix& delta_Sigma,
                                    const LearningRates& rates, double previous_eta_m,
                                    StepSizeCorrection correction = StepSizeCorrection::inverse);

    /// Accumulators and learning rates for both parameter blocks.
    struct LraState
    {
        SnrAccumulator mean_acc;
        SnrAccumulator cov_acc;
        LearningRates rates;
        double snr_m = 0.0;
        double snr_Sigma = 0.0;

        static LraState initial(int d, const LraHyperparams& hyper);
    };

    /**
     * Feeds whitened directions into the accumulators and updates the learning rates
     * once each block has passed its warm-up.
     */
    void adapt_learning_rates(LraState& state, const Vector& tilde_m, const Vector& tilde_Sigma, const LraHyperparams& hyper);

    /// Applies the update and, if Sigma leaves the PD cone, keeps the parameters and halves eta_Sigma.
    GaussianParams apply_or_reject(const GaussianParams& params, const StepOutcome& outcome, LraState& state, double previous_eta_m,
                                   StepSizeCorrection correction = StepSizeCorrection::inverse);

    struct LraOptions
    {
        int lambda = 0;  // 0: default_lambda(d)
        LraHyperparams hyper;
    };

    class LraCmaes final : public Strategy
    {
    public:
        LraCmaes(const NoisyProblem& problem, StreamFactory streams, LraOptions options = {});

        IterationLog iterate(NoisyProblem& problem) override;
        [[nodiscard]] const GaussianParams& params() const override { return params_; }
        [[nodiscard]] std::string_view name() const override { return "lra"; }
        [[nodiscard]] int lambda() const override { return hyper_.lambda; }
        [[nodiscard]] const LraState& lra_state() const { return lra_; }

    private:
        GaussianParams params_;
        CmaState cma_;
        CmaHyperparams hyper_;
        LraOptions options_;
        LraState lra_;
        StreamFactory streams_;
    };
}
