#include "racma/uh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <tuple>

#include "racma/errors.hpp"
#include "racma/ra.hpp"

namespace racma
{
    void UhConfig::validate() const
    {
        if (!(theta > 0.0 && theta < 1.0))
            throw InvalidArgument("UhConfig: theta must lie in (0, 1)");
        if (!(alpha > 1.0))
            throw InvalidArgument("UhConfig: alpha must exceed 1");
        if (!(reev_fraction > 0.0 && reev_fraction <= 1.0))
            throw InvalidArgument("UhConfig: reev_fraction must lie in (0, 1]");
        if (!(n_eval >= 1.0))
            throw InvalidArgument("UhConfig: n_eval must be >= 1");
    }

    int UhConfig::reev_count(int lambda) const
    {
        const int n = std::max(static_cast<int>(std::floor(reev_fraction * lambda)), 2);
        return std::min(n, lambda);
    }

    int delta_lim(int r, double theta, int lambda)
    {
        if (lambda < 1 || r < 0 || r > 2 * lambda)
            throw InvalidArgument("delta_lim: r must lie in [0, 2 lambda]");
        const int count = 2 * lambda - 1;
        const int k = std::max(1, static_cast<int>(std::ceil(theta / 2.0 * count - 1e-12)));

        // Smallest v with #{j in [1, count] : |j - r| <= v} >= k.
        for (int v = 0;; ++v)
        {
            const int lo = std::max(1, r - v);
            const int hi = std::min(count, r + v);
            if (hi >= lo && hi - lo + 1 >= k)
                return v;
        }
    }

    RankChangeReport uncertainty_level(std::span<const double> f1, std::span<const double> f2,
                                       std::span<const int> reev_set, double theta)
    {
        const int lambda = static_cast<int>(f1.size());
        if (f2.size() != f1.size() || lambda < 1)
            throw InvalidArgument("uncertainty_level: f1 and f2 must have equal nonzero length");
        if (reev_set.empty())
            throw InvalidArgument("uncertainty_level: empty reevaluation set");
        for (const double v : f1)
            if (std::isnan(v))
                throw InvalidEvaluation("uncertainty_level: NaN value");
        for (const double v : f2)
            if (std::isnan(v))
                throw InvalidEvaluation("uncertainty_level: NaN value");

        std::vector<std::tuple<double, int, int>> all;
        all.reserve(2 * lambda);
        for (int i = 0; i < lambda; ++i)
        {
            all.emplace_back(f1[i], i, 0);
            all.emplace_back(f2[i], i, 1);
        }
        std::sort(all.begin(), all.end());

        std::vector<int> r1(lambda), r2(lambda);
        for (int pos = 0; pos < 2 * lambda; ++pos)
        {
            const auto [value, i, copy] = all[pos];
            (copy == 0 ? r1 : r2)[i] = pos + 1;
        }

        RankChangeReport report;
        double sum = 0.0;
        for (const int i : reev_set)
        {
            if (i < 0 || i >= lambda)
                throw InvalidArgument("uncertainty_level: reevaluation index out of range");
            const int delta = std::abs(r1[i] - r2[i]) - 1;
            report.deltas.push_back(delta);
            sum += 2.0 * delta
                - delta_lim(r2[i] - (f2[i] > f1[i] ? 1 : 0), theta, lambda)
                - delta_lim(r1[i] - (f1[i] > f2[i] ? 1 : 0), theta, lambda);
        }
        report.s = sum / static_cast<double>(reev_set.size());
        return report;
    }

    UhConfig adapt_n_eval_uh(const UhConfig& config, double s)
    {
        UhConfig next = config;
        next.n_eval = std::max(1.0, s > 0.0 ? config.n_eval * config.alpha : config.n_eval / config.alpha);
        return next;
    }

    UhCmaes::UhCmaes(const NoisyProblem& problem, StreamFactory streams, UhOptions options)
        : params_(GaussianParams::create(problem.initial().m, problem.initial().sigma, problem.initial().C)),
          cma_(CmaState::initial(problem.dim())),
          hyper_(CmaHyperparams::defaults(problem.dim(), options.lambda > 0 ? options.lambda : default_lambda(problem.dim()))),
          config_(options.config),
          streams_(streams)
    {
        config_.validate();
    }

    IterationLog UhCmaes::iterate(NoisyProblem& problem)
    {
        const auto t = static_cast<std::uint64_t>(cma_.t);
        auto rounding = streams_.stream(t, StreamPurpose::rounding);
        auto sampling = streams_.stream(t, StreamPurpose::sampling);
        auto selection = streams_.stream(t, StreamPurpose::selection);
        auto noise = streams_.stream(t, StreamPurpose::noise);

        const int lambda = hyper_.lambda;
        const int n_bar = stochastic_round(config_.n_eval, rounding);
        const auto pop = sample_population(params_, lambda, sampling);
        const Vector f1 = evaluate_repeated(problem, pop.x, n_bar, noise).rowwise().mean();

        std::vector<int> candidates(lambda);
        std::iota(candidates.begin(), candidates.end(), 0);
        std::shuffle(candidates.begin(), candidates.end(), selection);
        std::vector<int> reev(candidates.begin(), candidates.begin() + config_.reev_count(lambda));
        std::sort(reev.begin(), reev.end());

        Vector f2 = f1;
        Vector f_rank = f1;
        for (const int i : reev)
        {
            Matrix x(pop.x.rows(), 1);
            x.col(0) = pop.x.col(i);
            f2[i] = evaluate_repeated(problem, x, n_bar, noise).row(0).mean();
            f_rank[i] = 0.5 * (f1[i] + f2[i]);
        }

        const auto report = uncertainty_level(std::span<const double>(f1.data(), f1.size()),
                                              std::span<const double>(f2.data(), f2.size()), reev, config_.theta);

        const auto order = rank_indices(std::span<const double>(f_rank.data(), f_rank.size()));
        auto [outcome, next] = step(params_, cma_, hyper_, rank_population(pop, order));
        params_ = outcome.new_params();
        cma_ = std::move(next);
        config_ = adapt_n_eval_uh(config_, report.s);

        IterationLog log;
        log.t = cma_.t;
        log.evals_cum = problem.evaluations();
        log.f_clean_at_mean = problem.eval_clean(params_.mean());
        log.sigma = params_.sigma();
        log.lambda = lambda;
        log.n_eval = config_.n_eval;
        log.n_eval_bar = n_bar;
        log.s = report.s;
        log.clamped = params_.clamped();
        return log;
    }
}
