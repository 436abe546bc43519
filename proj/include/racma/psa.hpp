#pragma once

#include <map>

#include "racma/cmaes.hpp"
#include "racma/strategy.hpp"

namespace racma
{
    struct PsaState
    {
        Vector p_theta;  // length d + d^2
        double gamma_theta = 0.0;
        double lambda_real = 0.0;
        int lambda_min = 2;
        int lambda_max = 2;
        double beta = 0.4;
        double alpha = 1.4;
        /// Use the sqrt(2 (2 - beta)) path coefficient instead of sqrt(beta (2 - beta)).
        bool strict_coefficient = false;

        /// lambda_min = default_lambda(d), lambda_max = 2^10 lambda_min.
        static PsaState initial(int d);
    };

    /**
     * Monte-Carlo estimate of E|(tilde delta_m, tilde delta_Sigma)| when the ranking is a
     * uniformly random permutation. Paths are drawn from their stationary law under
     * random selection (p_sigma ~ N(0, I), p_c ~ N(0, C)), so the estimate depends only
     * on (d, lambda).
     */
    double normalization_factor(const GaussianParams& params, const CmaHyperparams& hyper, int n_mc, Rng& rng);

    /// Path, normalizer and population-size update, clamped to [lambda_min, lambda_max].
    PsaState psa_update(const PsaState& state, const Vector& whitened_delta_theta, double norm_factor);

    /**
     * Optimal normalized step-size on the sphere from quality-gain analysis,
     *   sigma*(lambda) = mu_w(lambda) * sum_i w_i(lambda) * (-E[N_{i:lambda}]),
     * with Blom's approximation E[N_{i:lambda}] ~ Phi^{-1}((i - 0.375) / (lambda + 0.25)).
     */
    double optimal_normalized_step(int lambda);

    struct PsaOptions
    {
        int lambda_min = 0;  // 0: default_lambda(d)
        int lambda_max = 0;  // 0: 2^10 lambda_min
        int n_mc = 200;
        bool strict_coefficient = false;
        bool step_size_correction = true;
    };

    class PsaCmaes final : public Strategy
    {
    public:
        PsaCmaes(const NoisyProblem& problem, StreamFactory streams, PsaOptions options = {});

        IterationLog iterate(NoisyProblem& problem) override;
        [[nodiscard]] const GaussianParams& params() const override { return params_; }
        [[nodiscard]] std::string_view name() const override { return "psa"; }
        [[nodiscard]] int lambda() const override;
        [[nodiscard]] const PsaState& psa_state() const { return psa_; }

    private:
        double cached_normalization(const CmaHyperparams& hyper);

        GaussianParams params_;
        CmaState cma_;
        PsaState psa_;
        PsaOptions options_;
        StreamFactory streams_;
        std::map<int, double> normalization_cache_;
    };
}
