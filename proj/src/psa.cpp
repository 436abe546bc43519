#include "racma/psa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "racma/errors.hpp"
#include "racma/ra.hpp"

namespace racma
{
    PsaState PsaState::initial(int d)
    {
        PsaState s;
        s.p_theta = Vector::Zero(d + d * d);
        s.lambda_min = default_lambda(d);
        s.lambda_max = s.lambda_min << 10;
        s.lambda_real = s.lambda_min;
        return s;
    }

    double normalization_factor(const GaussianParams& params, const CmaHyperparams& hyper, int n_mc, Rng& rng)
    {
        if (n_mc < 1)
            throw InvalidArgument("normalization_factor: n_mc must be positive");
        const int d = params.dim();
        std::vector<int> order(hyper.lambda);
        double total = 0.0;
        for (int k = 0; k < n_mc; ++k)
        {
            CmaState state;
            state.p_sigma.resize(d);
            Vector u(d);
            for (int i = 0; i < d; ++i)
            {
                state.p_sigma[i] = standard_normal(rng);
                u[i] = standard_normal(rng);
            }
            state.p_c = params.sqrt_cov() * u;
            state.t = 1L << 20;

            const auto pop = sample_population(params, hyper.lambda, rng);
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), rng);
            const StepOutcome out = step(params, state, hyper, rank_population(pop, order)).first;

            const double norm_sq = whiten_mean_direction(params, out.delta_m).squaredNorm()
                + whiten_cov_direction(params, out.delta_Sigma).squaredNorm();
            total += std::sqrt(norm_sq);
        }
        return total / n_mc;
    }

    PsaState psa_update(const PsaState& state, const Vector& whitened_delta_theta, double norm_factor)
    {
        if (!(norm_factor > 0.0))
            throw InvalidArgument("psa_update: norm_factor must be positive");
        if (whitened_delta_theta.size() != state.p_theta.size())
            throw InvalidArgument("psa_update: dimension mismatch");
        if (!whitened_delta_theta.allFinite())
            throw InvalidEvaluation("psa_update: non-finite direction");

        const double b = state.beta;
        const double coefficient = state.strict_coefficient ? std::sqrt(2.0 * (2.0 - b)) : std::sqrt(b * (2.0 - b));
        PsaState next = state;
        next.p_theta = (1.0 - b) * state.p_theta + coefficient * whitened_delta_theta / norm_factor;
        next.gamma_theta = (1.0 - b) * (1.0 - b) * state.gamma_theta + b * (2.0 - b);
        const double lambda = state.lambda_real * std::exp(b * (next.gamma_theta - next.p_theta.squaredNorm() / state.alpha));
        next.lambda_real = std::clamp(lambda, static_cast<double>(state.lambda_min), static_cast<double>(state.lambda_max));
        return next;
    }

    double optimal_normalized_step(int lambda)
    {
        const auto weights = compute_weights(lambda);
        const boost::math::normal normal;
        double sum = 0.0;
        for (int i = 0; i < weights.mu(); ++i)
        {
            const double p = (i + 1 - 0.375) / (lambda + 0.25);
            sum += weights.w[i] * -boost::math::quantile(normal, p);
        }
        return weights.mu_w * sum;
    }

    PsaCmaes::PsaCmaes(const NoisyProblem& problem, StreamFactory streams, PsaOptions options)
        : params_(GaussianParams::create(problem.initial().m, problem.initial().sigma, problem.initial().C)),
          cma_(CmaState::initial(problem.dim())),
          psa_(PsaState::initial(problem.dim())),
          options_(options),
          streams_(streams)
    {
        if (options_.lambda_min > 0)
            psa_.lambda_min = options_.lambda_min;
        psa_.lambda_max = options_.lambda_max > 0 ? options_.lambda_max : psa_.lambda_min << 10;
        if (psa_.lambda_min < 2 || psa_.lambda_max < psa_.lambda_min)
            throw InvalidArgument("PsaCmaes: need 2 <= lambda_min <= lambda_max");
        if (options_.n_mc < 1)
            throw InvalidArgument("PsaCmaes: n_mc must be positive");
        psa_.lambda_real = psa_.lambda_min;
        psa_.strict_coefficient = options_.strict_coefficient;
    }

    int PsaCmaes::lambda() const
    {
        return std::clamp(static_cast<int>(std::lround(psa_.lambda_real)), psa_.lambda_min, psa_.lambda_max);
    }

    double PsaCmaes::cached_normalization(const CmaHyperparams& hyper)
    {
        const auto it = normalization_cache_.find(hyper.lambda);
        if (it != normalization_cache_.end())
            return it->second;
        const auto standard = GaussianParams::isotropic(Vector::Zero(params_.dim()), 1.0);
        auto rng = streams_.stream(static_cast<std::uint64_t>(hyper.lambda), StreamPurpose::monte_carlo);
        const double value = normalization_factor(standard, hyper, options_.n_mc, rng);
        normalization_cache_.emplace(hyper.lambda, value);
        return value;
    }

    IterationLog PsaCmaes::iterate(NoisyProblem& problem)
    {
        const auto t = static_cast<std::uint64_t>(cma_.t);
        auto rounding = streams_.stream(t, StreamPurpose::rounding);
        auto sampling = streams_.stream(t, StreamPurpose::sampling);
        auto noise = streams_.stream(t, StreamPurpose::noise);

        const int lambda = std::clamp(stochastic_round(psa_.lambda_real, rounding), psa_.lambda_min, psa_.lambda_max);
        const auto hyper = CmaHyperparams::defaults(params_.dim(), lambda);

        const auto pop = sample_population(params_, lambda, sampling);
        const Vector f = evaluate_repeated(problem, pop.x, 1, noise).col(0);
        const auto order = rank_indices(std::span<const double>(f.data(), f.size()));
        auto [outcome, next] = step(params_, cma_, hyper, rank_population(pop, order));

        const Vector tilde_m = whiten_mean_direction(params_, outcome.delta_m);
        const Vector tilde_Sigma = whiten_cov_direction(params_, outcome.delta_Sigma);
        Vector joint(tilde_m.size() + tilde_Sigma.size());
        joint << tilde_m, tilde_Sigma;

        psa_ = psa_update(psa_, joint, cached_normalization(hyper));
        params_ = outcome.new_params();
        cma_ = std::move(next);

        const int next_lambda = this->lambda();
        if (options_.step_size_correction && next_lambda != lambda)
            params_ = params_.with_sigma(params_.sigma() * optimal_normalized_step(next_lambda) / optimal_normalized_step(lambda));

        IterationLog log;
        log.t = cma_.t;
        log.evals_cum = problem.evaluations();
        log.f_clean_at_mean = problem.eval_clean(params_.mean());
        log.sigma = params_.sigma();
        log.lambda = lambda;
        log.clamped = params_.clamped();
        return log;
    }
}
