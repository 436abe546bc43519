#pragma once

#include <span>
#include <utility>
#include <vector>

#include "racma/gaussian.hpp"

namespace racma
{
    /// 4 + floor(3 ln d).
    int default_lambda(int d);

    /**
     * Learning rates and damping of one CMA-ES instance. `defaults` uses the standard
     * recommended settings (positive weights only):
     *
     *   c_sigma = (mu_w + 2) / (d + mu_w + 5)
     *   d_sigma = 1 + 2 max(0, sqrt((mu_w - 1)/(d + 1)) - 1) + c_sigma
     *   c_c     = (4 + mu_w/d) / (d + 4 + 2 mu_w/d)
     *   c_1     = 2 / ((d + 1.3)^2 + mu_w)
     *   c_mu    = min(1 - c_1, 2 (mu_w - 2 + 1/mu_w) / ((d + 2)^2 + mu_w))
     *   c_m     = 1
     */
    struct CmaHyperparams
    {
        int lambda = 0;
        RecombinationWeights weights;
        double c_sigma = 0.0;
        double c_c = 0.0;
        double c_1 = 0.0;
        double c_mu = 0.0;
        double c_m = 1.0;
        double d_sigma = 1.0;

        static CmaHyperparams defaults(int d, int lambda);
        void validate() const;
    };

    struct CmaState
    {
        Vector p_sigma;
        Vector p_c;
        long t = 0;

        static CmaState initial(int d);
    };

    /// Population columns reordered best-first.
    struct RankedPopulation
    {
        Matrix z;
        Matrix y;
    };

    /// Everything one baseline update produces; the "ori" parameters are not decomposed yet.
    struct StepOutcome
    {
        Vector m_ori;
        double sigma_ori = 0.0;
        Matrix C_ori;
        Vector delta_m;      // m_ori - m
        Matrix delta_Sigma;  // sigma_ori^2 C_ori - sigma^2 C
        Vector delta_z;
        Vector delta_y;
        int h_sigma = 1;

        /// Throws NumericalDegeneracy if C_ori is not positive definite.
        [[nodiscard]] GaussianParams new_params() const;
    };

    /// Indices (0-based) in ascending fitness; ties keep sampling order.
    std::vector<int> rank_indices(std::span<const double> fitness);

    RankedPopulation rank_population(const SampledPopulation& pop, std::span<const int> order);

    /// (delta_z, delta_y) = sum_i w_i (z_{i:lambda}, y_{i:lambda}) over the mu best.
    std::pair<Vector, Vector> weighted_directions(const RecombinationWeights& weights, const Matrix& ranked_z, const Matrix& ranked_y);

    /// One CMA-ES update of paths, mean, step-size and covariance.
    std::pair<StepOutcome, CmaState> step(const GaussianParams& params, const CmaState& state,
                                          const CmaHyperparams& hyper, const RankedPopulation& ranked);
}

#include "racma/strategy.hpp"

namespace racma
{
    struct CmaesOptions
    {
        int lambda = 0;  // 0: default_lambda(d)
    };

    /// Plain CMA-ES: one evaluation per solution, parameters set to the "ori" update.
    class Cmaes final : public Strategy
    {
    public:
        Cmaes(const NoisyProblem& problem, StreamFactory streams, CmaesOptions options = {});

        IterationLog iterate(NoisyProblem& problem) override;
        [[nodiscard]] const GaussianParams& params() const override { return params_; }
        [[nodiscard]] std::string_view name() const override { return "cmaes"; }
        [[nodiscard]] int lambda() const override { return hyper_.lambda; }

    private:
        GaussianParams params_;
        CmaState state_;
        CmaHyperparams hyper_;
        StreamFactory streams_;
    };
}
