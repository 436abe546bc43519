#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "racma/gaussian.hpp"

namespace racma
{
    /// A non-increasing w on [0, 1] with its closed-form antiderivative W (W(0) = 0).
    class SelectionScheme
    {
    public:
        enum class Kind
        {
            linear,      // 1 - q
            convex,      // (1 - q)^2
            concave,     // 1 - q^2
            truncation,  // lambda w_i on [(i-1)/lambda, i/lambda), 0 past mu
        };

        static SelectionScheme linear();
        static SelectionScheme convex();
        static SelectionScheme concave();
        static SelectionScheme truncation(int lambda);

        [[nodiscard]] double w(double q) const;
        [[nodiscard]] double W(double q) const;
        [[nodiscard]] Kind kind() const { return kind_; }
        [[nodiscard]] std::string name() const;

    private:
        explicit SelectionScheme(Kind kind) : kind_(kind) {}

        Kind kind_;
        std::vector<double> levels_;      // truncation only, one per 1/lambda cell
        std::vector<double> cumulative_;  // W at cell boundaries
    };

    struct QuantilePair
    {
        double q_lt = 0.0;
        double q_le = 0.0;
    };

    /// (#{k : f_k < f_i}, #{k : f_k <= f_i}) / lambda over noisy values. Throws InvalidEvaluation on NaN.
    QuantilePair estimated_quantiles_dependent(std::span<const double> values, int i);

    /// The same counting rule applied to reevaluation averages.
    QuantilePair estimated_quantiles_independent(std::span<const double> averages, int i);

    /// w(q_lt) for a point quantile, the mean of w over [q_lt, q_le] otherwise.
    double utility_from_quantiles(const QuantilePair& q, const SelectionScheme& scheme);

    /**
     * f(x, z) = z f_x(x) + b with z in {-1, +1} drawn independently of x, and a
     * sampling distribution that puts no mass on x*.
     *   convex:  f_x(x*) = 0, f_x(x) = 1 elsewhere
     *   concave: f_x(x*) = -1, f_x(x) = 0 elsewhere
     */
    struct CounterexampleSpec
    {
        enum class Case
        {
            convex_counterexample,
            concave_counterexample,
        };

        Case kind = Case::convex_counterexample;
        double p_plus = 0.55;

        /// p_plus = 1/2 + delta, so Pr(z = -1) = 1/2 - delta.
        static CounterexampleSpec convex_counterexample(double delta);
        static CounterexampleSpec concave_counterexample(double p_plus);
        void validate() const;
    };

    /// Exact quantile pair of (x, z) under the construction.
    QuantilePair counterexample_quantiles(const CounterexampleSpec& spec, bool at_optimum, int z);

    /// E_z[v(x, z)] computed from the two-point noise law.
    double expected_dependent_utility(const CounterexampleSpec& spec, const SelectionScheme& scheme, bool at_optimum);

    struct McEstimate
    {
        double mean = 0.0;
        double standard_error = 0.0;
    };

    /// Sample mean and standard error of v(x, z) over independent draws of z. Needs samples >= 1e4.
    McEstimate mc_expected_dependent_utility(const CounterexampleSpec& spec, const SelectionScheme& scheme,
                                             bool at_optimum, long samples, Rng& rng);

    /**
     * Finite candidate set, uniform sampling over it, additive N(0, sigma_n^2) noise.
     * Estimates E_z[w(q(x_j, z))] with q = mean_k Phi((f_j + z - f_k) / sigma_n)
     * for every candidate j.
     */
    std::vector<McEstimate> mc_additive_candidate_utilities(std::span<const double> f_values, double sigma_n,
                                                            const SelectionScheme& scheme, long samples, Rng& rng);

    struct LemmaCheckConfig
    {
        long samples = 1000000;
        std::uint64_t seed = 1;
        int dim = 10;
        int reference_samples = 100;
        double convex_delta = 0.05;
        double concave_p_plus = 0.6;
        std::vector<double> candidate_f = {0.0, 1.0, 2.0};
        double candidate_sigma_n = 1.0;
    };

    struct CheckResult
    {
        std::string name;
        double lhs = 0.0;  // expected larger side
        double rhs = 0.0;
        double standard_error = 0.0;
        bool passed = false;

        [[nodiscard]] double margin() const { return lhs - rhs; }
    };

    std::vector<CheckResult> lemma_checks(const LemmaCheckConfig& config = {});
}
