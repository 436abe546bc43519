#include "racma/utility.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <boost/math/distributions/normal.hpp>

#include "racma/errors.hpp"
#include "racma/problems.hpp"

namespace racma
{
    namespace
    {
        double clamp01(double q)
        {
            return std::clamp(q, 0.0, 1.0);
        }

        QuantilePair count_quantiles(std::span<const double> values, int i, const char* who)
        {
            if (values.empty())
                throw InvalidArgument(std::string(who) + ": empty population");
            if (i < 0 || i >= static_cast<int>(values.size()))
                throw InvalidArgument(std::string(who) + ": index out of range");
            long lt = 0;
            long le = 0;
            const double fi = values[i];
            for (const double f : values)
            {
                if (std::isnan(f))
                    throw InvalidEvaluation(std::string(who) + ": NaN value");
                lt += f < fi;
                le += f <= fi;
            }
            const auto n = static_cast<double>(values.size());
            return {lt / n, le / n};
        }

        std::string format_value(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", v);
            return buf;
        }

        McEstimate summarize(double sum, double sum_sq, long n)
        {
            const double mean = sum / n;
            const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1));
            return {mean, std::sqrt(var / n)};
        }
    }

    SelectionScheme SelectionScheme::linear()
    {
        return SelectionScheme(Kind::linear);
    }

    SelectionScheme SelectionScheme::convex()
    {
        return SelectionScheme(Kind::convex);
    }

    SelectionScheme SelectionScheme::concave()
    {
        return SelectionScheme(Kind::concave);
    }

    SelectionScheme SelectionScheme::truncation(int lambda)
    {
        const auto weights = compute_weights(lambda);
        SelectionScheme s(Kind::truncation);
        s.levels_.assign(lambda, 0.0);
        for (int i = 0; i < weights.mu(); ++i)
            s.levels_[i] = lambda * weights.w[i];
        s.cumulative_.assign(lambda + 1, 0.0);
        for (int i = 0; i < lambda; ++i)
            s.cumulative_[i + 1] = s.cumulative_[i] + s.levels_[i] / lambda;
        return s;
    }

    double SelectionScheme::w(double q) const
    {
        q = clamp01(q);
        switch (kind_)
        {
        case Kind::linear:
            return 1.0 - q;
        case Kind::convex:
            return (1.0 - q) * (1.0 - q);
        case Kind::concave:
            return 1.0 - q * q;
        case Kind::truncation:
        {
            const int n = static_cast<int>(levels_.size());
            const int cell = std::min(static_cast<int>(std::floor(q * n)), n - 1);
            return levels_[cell];
        }
        }
        return 0.0;
    }

    double SelectionScheme::W(double q) const
    {
        q = clamp01(q);
        switch (kind_)
        {
        case Kind::linear:
            return q - 0.5 * q * q;
        case Kind::convex:
            return (1.0 - std::pow(1.0 - q, 3)) / 3.0;
        case Kind::concave:
            return q - q * q * q / 3.0;
        case Kind::truncation:
        {
            const int n = static_cast<int>(levels_.size());
            const int cell = std::min(static_cast<int>(std::floor(q * n)), n - 1);
            return cumulative_[cell] + levels_[cell] * (q - static_cast<double>(cell) / n);
        }
        }
        return 0.0;
    }

    std::string SelectionScheme::name() const
    {
        switch (kind_)
        {
        case Kind::linear:
            return "linear";
        case Kind::convex:
            return "convex";
        case Kind::concave:
            return "concave";
        case Kind::truncation:
            return "truncation(" + std::to_string(levels_.size()) + ")";
        }
        return "?";
    }

    QuantilePair estimated_quantiles_dependent(std::span<const double> values, int i)
    {
        return count_quantiles(values, i, "estimated_quantiles_dependent");
    }

    QuantilePair estimated_quantiles_independent(std::span<const double> averages, int i)
    {
        return count_quantiles(averages, i, "estimated_quantiles_independent");
    }

    double utility_from_quantiles(const QuantilePair& q, const SelectionScheme& scheme)
    {
        if (q.q_lt == q.q_le)
            return scheme.w(q.q_lt);
        return (scheme.W(q.q_le) - scheme.W(q.q_lt)) / (q.q_le - q.q_lt);
    }

    CounterexampleSpec CounterexampleSpec::convex_counterexample(double delta)
    {
        CounterexampleSpec s{Case::convex_counterexample, 0.5 + delta};
        s.validate();
        return s;
    }

    CounterexampleSpec CounterexampleSpec::concave_counterexample(double p_plus)
    {
        CounterexampleSpec s{Case::concave_counterexample, p_plus};
        s.validate();
        return s;
    }

    void CounterexampleSpec::validate() const
    {
        if (!(p_plus > 0.5 && p_plus < 1.0))
            throw InvalidArgument("CounterexampleSpec: need 1/2 < Pr(z = 1) < 1");
    }

    QuantilePair counterexample_quantiles(const CounterexampleSpec& spec, bool at_optimum, int z)
    {
        if (z != 1 && z != -1)
            throw InvalidArgument("counterexample_quantiles: z must be +1 or -1");
        const double p_minus = 1.0 - spec.p_plus;
        if (spec.kind == CounterexampleSpec::Case::convex_counterexample)
        {
            // f(x*) = b sits between b - 1 (z = -1) and b + 1 (z = +1)
            if (at_optimum)
                return {p_minus, p_minus};
            return z == -1 ? QuantilePair{0.0, p_minus} : QuantilePair{p_minus, 1.0};
        }
        // every other solution evaluates to b regardless of z
        if (at_optimum)
            return z == 1 ? QuantilePair{0.0, 0.0} : QuantilePair{1.0, 1.0};
        return {0.0, 1.0};
    }

    double expected_dependent_utility(const CounterexampleSpec& spec, const SelectionScheme& scheme, bool at_optimum)
    {
        spec.validate();
        return spec.p_plus * utility_from_quantiles(counterexample_quantiles(spec, at_optimum, 1), scheme)
            + (1.0 - spec.p_plus) * utility_from_quantiles(counterexample_quantiles(spec, at_optimum, -1), scheme);
    }

    McEstimate mc_expected_dependent_utility(const CounterexampleSpec& spec, const SelectionScheme& scheme,
                                             bool at_optimum, long samples, Rng& rng)
    {
        spec.validate();
        if (samples < 10000)
            throw InvalidArgument("mc_expected_dependent_utility: need at least 1e4 samples");
        const double v_plus = utility_from_quantiles(counterexample_quantiles(spec, at_optimum, 1), scheme);
        const double v_minus = utility_from_quantiles(counterexample_quantiles(spec, at_optimum, -1), scheme);
        std::bernoulli_distribution draw(spec.p_plus);
        long plus = 0;
        for (long k = 0; k < samples; ++k)
            plus += draw(rng);
        // v takes two values, so the sample moments follow from the count
        const double p_hat = static_cast<double>(plus) / samples;
        const double mean = p_hat * v_plus + (1.0 - p_hat) * v_minus;
        const double var = samples * p_hat * (1.0 - p_hat) * (v_plus - v_minus) * (v_plus - v_minus) / (samples - 1);
        return {mean, std::sqrt(var / samples)};
    }

    std::vector<McEstimate> mc_additive_candidate_utilities(std::span<const double> f_values, double sigma_n,
                                                            const SelectionScheme& scheme, long samples, Rng& rng)
    {
        if (f_values.empty() || !(sigma_n > 0.0) || samples < 2)
            throw InvalidArgument("mc_additive_candidate_utilities: invalid arguments");
        const boost::math::normal normal;
        const auto n = static_cast<double>(f_values.size());
        std::vector<McEstimate> out;
        out.reserve(f_values.size());
        for (const double fj : f_values)
        {
            double sum = 0.0;
            double sum_sq = 0.0;
            for (long s = 0; s < samples; ++s)
            {
                const double z = sigma_n * standard_normal(rng);
                double q = 0.0;
                for (const double fk : f_values)
                    q += boost::math::cdf(normal, (fj + z - fk) / sigma_n);
                const double v = scheme.w(q / n);
                sum += v;
                sum_sq += v * v;
            }
            out.push_back(summarize(sum, sum_sq, samples));
        }
        return out;
    }

    std::vector<CheckResult> lemma_checks(const LemmaCheckConfig& config)
    {
        std::vector<CheckResult> report;
        const StreamFactory streams(config.seed);
        std::uint64_t shard = 0;

        auto agreement = [&](const std::string& name, const McEstimate& mc, double exact) {
            const double tolerance = 3.0 * mc.standard_error + 1e-12 * std::max(1.0, std::abs(exact));
            const double error = std::abs(mc.mean - exact);
            report.push_back({name, tolerance, error, mc.standard_error, error <= tolerance});
        };
        auto ordered = [&](const std::string& name, const McEstimate& hi, const McEstimate& lo) {
            const double se = std::hypot(hi.standard_error, lo.standard_error);
            report.push_back({name, hi.mean, lo.mean, se, hi.mean - lo.mean > 3.0 * se});
        };

        const std::pair<CounterexampleSpec, SelectionScheme> constructions[] = {
            {CounterexampleSpec::convex_counterexample(config.convex_delta), SelectionScheme::convex()},
            {CounterexampleSpec::concave_counterexample(config.concave_p_plus), SelectionScheme::concave()},
        };
        for (const auto& [spec, scheme] : constructions)
        {
            const std::string tag = "rank-dependent/" + scheme.name();
            const double exact_other = expected_dependent_utility(spec, scheme, false);
            const double exact_opt = expected_dependent_utility(spec, scheme, true);
            report.push_back({tag + "/closed-form E[v|x!=x*] > E[v|x*]", exact_other, exact_opt, 0.0, exact_other > exact_opt});

            auto rng_other = streams.stream(shard++, StreamPurpose::monte_carlo);
            auto rng_opt = streams.stream(shard++, StreamPurpose::monte_carlo);
            const auto mc_other = mc_expected_dependent_utility(spec, scheme, false, config.samples, rng_other);
            const auto mc_opt = mc_expected_dependent_utility(spec, scheme, true, config.samples, rng_opt);
            agreement(tag + "/mc agrees E[v|x!=x*]", mc_other, exact_other);
            agreement(tag + "/mc agrees E[v|x*]", mc_opt, exact_opt);
            ordered(tag + "/mc E[v|x!=x*] > E[v|x*]", mc_other, mc_opt);
        }

        std::vector<std::pair<double, int>> candidates;
        for (int j = 0; j < static_cast<int>(config.candidate_f.size()); ++j)
            candidates.emplace_back(config.candidate_f[j], j);
        std::sort(candidates.begin(), candidates.end());
        for (const auto& scheme : {SelectionScheme::linear(), SelectionScheme::convex(), SelectionScheme::concave()})
        {
            auto rng = streams.stream(shard++, StreamPurpose::monte_carlo);
            const auto est = mc_additive_candidate_utilities(config.candidate_f, config.candidate_sigma_n, scheme, config.samples, rng);
            for (std::size_t k = 0; k + 1 < candidates.size(); ++k)
            {
                const int better = candidates[k].second;
                const int worse = candidates[k + 1].second;
                ordered("additive-ordering/" + scheme.name() + "/E[v|f=" + format_value(candidates[k].first) + "] > E[v|f="
                            + format_value(candidates[k + 1].first) + "]",
                        est[better], est[worse]);
            }
        }

        for (const FunctionId id : all_functions())
        {
            const BenchmarkFunction fn(id, config.dim);
            const auto init = initial_params(id, config.dim);
            const auto params = GaussianParams::create(init.m, init.sigma, init.C);
            auto rng = streams.stream(shard++, StreamPurpose::sampling);
            const auto pop = sample_population(params, config.reference_samples, rng);
            std::vector<double> f(config.reference_samples);
            for (int k = 0; k < config.reference_samples; ++k)
                f[k] = fn(pop.x.col(k));
            const double f_star = fn(fn.optimum());

            for (const auto& scheme : {SelectionScheme::linear(), SelectionScheme::convex(), SelectionScheme::concave(),
                                       SelectionScheme::truncation(config.reference_samples)})
            {
                long lt = 0;
                long le = 0;
                for (const double fk : f)
                {
                    lt += fk < f_star;
                    le += fk <= f_star;
                }
                const QuantilePair q_star{static_cast<double>(lt) / f.size(), static_cast<double>(le) / f.size()};
                const double u_star = utility_from_quantiles(q_star, scheme);
                double u_max = -1e300;
                for (int k = 0; k < config.reference_samples; ++k)
                    u_max = std::max(u_max, utility_from_quantiles(estimated_quantiles_independent(f, k), scheme));
                const bool passed = q_star.q_lt == 0.0 && q_star.q_le == 0.0 && u_star == scheme.w(0.0) && u_star >= u_max;
                report.push_back({"noise-independent/" + std::string(function_name(id)) + "/" + scheme.name() + " u(x*) = w(0) >= u(x)",
                                  u_star, u_max, 0.0, passed});
            }
        }
        return report;
    }
}
