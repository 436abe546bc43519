#include "racma/ra.hpp"

#include <algorithm>
#include <cmath>

#include "racma/errors.hpp"

namespace racma
{
    CorrAccumulator CorrAccumulator::zeros(int dim, double beta)
    {
        if (!(beta > 0.0 && beta <= 1.0))
            throw InvalidArgument("CorrAccumulator: beta must lie in (0, 1]");
        return CorrAccumulator{Vector::Zero(dim), Vector::Zero(dim), 0.0, 0.0, 0.0, beta, 0};
    }

    int stochastic_round(double n_eval, Rng& rng)
    {
        if (!(n_eval >= 1.0) || !std::isfinite(n_eval))
            throw InvalidArgument("stochastic_round: n_eval must be a finite value >= 1");
        const double base = std::floor(n_eval);
        const double frac = n_eval - base;
        return static_cast<int>(base) + (uniform01(rng) < frac ? 1 : 0);
    }

    HalfAverages half_averages(const Matrix& raw_evals)
    {
        const auto n = static_cast<int>(raw_evals.cols());
        if (n < 1)
            throw InvalidArgument("half_averages: need at least one evaluation per solution");

        HalfAverages h;
        h.f_bar_full = raw_evals.rowwise().mean();
        if (n == 1)
        {
            h.n_half = 1;
            h.f_bar_1 = h.f_bar_full;
            h.f_bar_2 = h.f_bar_full;
            return h;
        }
        h.n_half = n / 2;
        h.f_bar_1 = raw_evals.leftCols(h.n_half).rowwise().mean();
        h.f_bar_2 = raw_evals.middleCols(h.n_half, h.n_half).rowwise().mean();
        return h;
    }

    CorrAccumulator accumulate_correlation(const CorrAccumulator& acc, const Vector& d1, const Vector& d2)
    {
        if (d1.size() != acc.E1.size() || d2.size() != acc.E2.size())
            throw InvalidArgument("accumulate_correlation: dimension mismatch");
        if (!d1.allFinite() || !d2.allFinite())
            throw InvalidEvaluation("accumulate_correlation: non-finite direction");

        const double b = acc.beta;
        CorrAccumulator next = acc;
        next.E1 = (1.0 - b) * acc.E1 + b * d1;
        next.E2 = (1.0 - b) * acc.E2 + b * d2;
        // dot() everywhere, so identical inputs give bitwise identical V1, V2 and I.
        next.V1 = (1.0 - b) * acc.V1 + b * d1.dot(d1);
        next.V2 = (1.0 - b) * acc.V2 + b * d2.dot(d2);
        next.I = (1.0 - b) * acc.I + b * d1.dot(d2);
        ++next.count;
        return next;
    }

    double estimate_correlation(const CorrAccumulator& acc, double mean_inner_product)
    {
        if (acc.count == 0)
            throw UndefinedEstimate("estimate_correlation: nothing accumulated");
        const double var1 = acc.V1 - acc.E1.dot(acc.E1);
        const double var2 = acc.V2 - acc.E2.dot(acc.E2);
        if (!(var1 > 0.0) && !(var2 > 0.0))
            throw UndefinedEstimate("estimate_correlation: both directions have zero variance");

        const double denom = std::sqrt(std::max(var1, 1e-30) * std::max(var2, 1e-30));
        return std::clamp((acc.I - mean_inner_product) / denom, -1.0, 1.0);
    }

    double estimate_correlation(const CorrAccumulator& acc)
    {
        return estimate_correlation(acc, acc.E1.dot(acc.E2));
    }

    double target_exponent(double n_eval, double n_min)
    {
        if (!(n_min >= 1.0) || !(n_eval >= n_min))
            throw InvalidArgument("target_exponent: need n_eval >= n_min >= 1");
        return (1.0 + std::log(n_eval) - std::log(n_min)) * std::min(n_eval - 1.0, 1.0);
    }

    double target_correlation(double n_eval, double n_min, double rho_base)
    {
        if (!(rho_base > 0.0 && rho_base < 1.0))
            throw InvalidArgument("target_correlation: rho_base must lie in (0, 1)");
        return std::pow(rho_base, target_exponent(n_eval, n_min));
    }

    ReevalState update_n_eval(const ReevalState& state, double rho_min, double rho_target, ReevalDirection direction)
    {
        if (!(rho_target > 0.0))
            throw InvalidArgument("update_n_eval: rho_target must be positive");
        ReevalState next = state;
        double relative = std::clamp(rho_min / rho_target - 1.0, -1.0, 1.0);
        if (direction == ReevalDirection::raise_when_below_target)
            relative = -relative;
        next.n_eval = std::max(state.n_eval * std::exp(state.gamma * relative), state.n_min);
        return next;
    }

    RaCmaes::RaCmaes(const NoisyProblem& problem, StreamFactory streams, RaOptions options)
        : params_(GaussianParams::create(problem.initial().m, problem.initial().sigma, problem.initial().C)),
          cma_(CmaState::initial(problem.dim())),
          hyper_(CmaHyperparams::defaults(problem.dim(), options.lambda > 0 ? options.lambda : default_lambda(problem.dim()))),
          options_(options),
          reeval_(options.reeval),
          lra_(LraState::initial(problem.dim(), options.lra)),
          corr_m_(CorrAccumulator::zeros(problem.dim(), options.lra.beta_m)),
          corr_Sigma_(CorrAccumulator::zeros(problem.dim() * problem.dim(), options.lra.beta_Sigma)),
          streams_(streams)
    {
        if (!(reeval_.n_min >= 1.0) || reeval_.n_eval < reeval_.n_min)
            throw InvalidArgument("RaCmaes: need n_eval >= n_min >= 1");
        if (options_.numerator == CorrelationNumerator::fisher_at_read)
        {
            raw_m_ = CorrAccumulator::zeros(problem.dim(), options.lra.beta_m);
            raw_Sigma_ = CorrAccumulator::zeros(problem.dim() * problem.dim(), options.lra.beta_Sigma);
        }
    }

    double RaCmaes::correlation(const CorrAccumulator& acc, const std::optional<CorrAccumulator>& raw, bool cov_block) const
    {
        if (!raw)
            return estimate_correlation(acc);
        double inner = 0.0;
        if (cov_block)
        {
            const int d = params_.dim();
            inner = whiten_cov_direction(params_, unvec_row_major(raw->E1, d))
                        .dot(whiten_cov_direction(params_, unvec_row_major(raw->E2, d)));
        }
        else
        {
            inner = whiten_mean_direction(params_, raw->E1).dot(whiten_mean_direction(params_, raw->E2));
        }
        return estimate_correlation(acc, inner);
    }

    IterationLog RaCmaes::iterate(NoisyProblem& problem)
    {
        const auto t = static_cast<std::uint64_t>(cma_.t);
        auto rounding = streams_.stream(t, StreamPurpose::rounding);
        auto sampling = streams_.stream(t, StreamPurpose::sampling);
        auto noise = streams_.stream(t, StreamPurpose::noise);

        const int n_bar = stochastic_round(reeval_.n_eval, rounding);
        const auto pop = sample_population(params_, hyper_.lambda, sampling);
        const Matrix raw = evaluate_repeated(problem, pop.x, n_bar, noise);
        const HalfAverages avg = half_averages(raw);

        const auto rank_by = [&](const Vector& f) {
            return rank_population(pop, rank_indices(std::span<const double>(f.data(), f.size())));
        };
        auto [outcome, next] = step(params_, cma_, hyper_, rank_by(avg.f_bar_full));

        const Vector tilde_m = whiten_mean_direction(params_, outcome.delta_m);
        const Vector tilde_Sigma = whiten_cov_direction(params_, outcome.delta_Sigma);

        Vector tilde_m1 = tilde_m, tilde_m2 = tilde_m;
        Vector tilde_S1 = tilde_Sigma, tilde_S2 = tilde_Sigma;
        Vector raw_m1 = outcome.delta_m, raw_m2 = outcome.delta_m;
        Vector raw_S1 = vec_row_major(outcome.delta_Sigma), raw_S2 = raw_S1;
        if (n_bar != 1)
        {
            // Both half directions start from the same pre-update paths as the full one.
            const StepOutcome first = step(params_, cma_, hyper_, rank_by(avg.f_bar_1)).first;
            const StepOutcome second = step(params_, cma_, hyper_, rank_by(avg.f_bar_2)).first;
            tilde_m1 = whiten_mean_direction(params_, first.delta_m);
            tilde_m2 = whiten_mean_direction(params_, second.delta_m);
            tilde_S1 = whiten_cov_direction(params_, first.delta_Sigma);
            tilde_S2 = whiten_cov_direction(params_, second.delta_Sigma);
            raw_m1 = first.delta_m;
            raw_m2 = second.delta_m;
            raw_S1 = vec_row_major(first.delta_Sigma);
            raw_S2 = vec_row_major(second.delta_Sigma);
        }

        corr_m_ = accumulate_correlation(corr_m_, tilde_m1, tilde_m2);
        corr_Sigma_ = accumulate_correlation(corr_Sigma_, tilde_S1, tilde_S2);
        if (raw_m_)
        {
            raw_m_ = accumulate_correlation(*raw_m_, raw_m1, raw_m2);
            raw_Sigma_ = accumulate_correlation(*raw_Sigma_, raw_S1, raw_S2);
        }

        IterationLog log;
        const double rho_target = target_correlation(reeval_.n_eval, reeval_.n_min, reeval_.rho_base);
        log.rho_target = rho_target;
        const bool warmed_up = corr_m_.count >= warmup_iterations(corr_m_.beta)
            && corr_Sigma_.count >= warmup_iterations(corr_Sigma_.beta);
        if (warmed_up)
        {
            try
            {
                const double rho_m = correlation(corr_m_, raw_m_, false);
                const double rho_Sigma = correlation(corr_Sigma_, raw_Sigma_, true);
                log.rho_m = rho_m;
                log.rho_Sigma = rho_Sigma;
                reeval_ = update_n_eval(reeval_, std::min(rho_m, rho_Sigma), rho_target, options_.direction);
            }
            catch (const UndefinedEstimate&)
            {
                // No variability seen yet: leave n_eval untouched.
            }
        }

        const double previous_eta_m = lra_.rates.eta_m;
        adapt_learning_rates(lra_, tilde_m, tilde_Sigma, options_.lra);
        params_ = apply_or_reject(params_, outcome, lra_, previous_eta_m, options_.lra.step_correction);
        cma_ = std::move(next);

        log.t = cma_.t;
        log.evals_cum = problem.evaluations();
        log.f_clean_at_mean = problem.eval_clean(params_.mean());
        log.sigma = params_.sigma();
        log.lambda = hyper_.lambda;
        log.n_eval = reeval_.n_eval;
        log.n_eval_bar = n_bar;
        log.eta_m = lra_.rates.eta_m;
        log.eta_Sigma = lra_.rates.eta_Sigma;
        log.clamped = params_.clamped();
        return log;
    }
}
