#include "racma/lra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "racma/errors.hpp"

namespace racma
{
    SnrAccumulator SnrAccumulator::zeros(int dim, double beta)
    {
        if (!(beta > 0.0 && beta <= 1.0))
            throw InvalidArgument("SnrAccumulator: beta must lie in (0, 1]");
        return SnrAccumulator{Vector::Zero(dim), 0.0, beta, 0};
    }

    SnrAccumulator accumulate(const SnrAccumulator& acc, const Vector& tilde_delta)
    {
        if (tilde_delta.size() != acc.E.size())
            throw InvalidArgument("accumulate: dimension mismatch");
        if (!tilde_delta.allFinite())
            throw InvalidEvaluation("accumulate: non-finite direction");
        SnrAccumulator next = acc;
        next.E = (1.0 - acc.beta) * acc.E + acc.beta * tilde_delta;
        next.V = (1.0 - acc.beta) * acc.V + acc.beta * tilde_delta.squaredNorm();
        ++next.count;
        return next;
    }

    double estimate_snr(const SnrAccumulator& acc)
    {
        if (acc.count == 0 || !(acc.V > 0.0))
            throw UndefinedEstimate("estimate_snr: no signal accumulated");
        const double e2 = acc.E.squaredNorm();
        const double spread = std::max(acc.V - e2, 1e-30);
        return (e2 - acc.beta / (2.0 - acc.beta) * acc.V) / spread;
    }

    double update_learning_rate(double eta, double snr_hat, double alpha, double gamma, double beta)
    {
        if (!(eta > 0.0 && eta <= 1.0))
            throw InvalidArgument("update_learning_rate: eta must lie in (0, 1]");
        const double relative = std::clamp(snr_hat / (alpha * eta) - 1.0, -1.0, 1.0);
        const double next = eta * std::exp(std::min(gamma * eta, beta) * relative);
        return std::clamp(next, std::numeric_limits<double>::min(), 1.0);
    }

    long warmup_iterations(double beta)
    {
        return static_cast<long>(std::ceil(1.0 / beta - 1e-9));
    }

    GaussianParams apply_lra_update(const GaussianParams& params, const Vector& delta_m, const Matrix& delta_Sigma,
                                    const LearningRates& rates, double previous_eta_m, StepSizeCorrection correction)
    {
        const int d = params.dim();
        Vector m = params.mean() + rates.eta_m * delta_m;
        Matrix Sigma = params.full_cov() + rates.eta_Sigma * delta_Sigma;
        Sigma = 0.5 * (Sigma + Sigma.transpose()).eval();
        if (!Sigma.allFinite() || !m.allFinite())
            throw NumericalDegeneracy("apply_lra_update: non-finite parameters");

        const Eigen::SelfAdjointEigenSolver<Matrix> solver(Sigma);
        if (solver.info() != Eigen::Success)
            throw NumericalDegeneracy("apply_lra_update: eigendecomposition failed");
        const Vector& spectrum = solver.eigenvalues();
        if (!(spectrum.minCoeff() > 0.0))
            throw NumericalDegeneracy("apply_lra_update: updated Sigma is not positive definite");

        const double log_det = spectrum.array().log().sum();
        double sigma = std::exp(log_det / (2.0 * d));
        const Vector c_spectrum = spectrum / (sigma * sigma);

        double ratio = 1.0;
        if (rates.eta_m != previous_eta_m)
            ratio = correction == StepSizeCorrection::inverse ? previous_eta_m / rates.eta_m : rates.eta_m / previous_eta_m;
        sigma *= ratio;
        return GaussianParams::from_spectrum(std::move(m), sigma, c_spectrum, solver.eigenvectors());
    }

    LraState LraState::initial(int d, const LraHyperparams& hyper)
    {
        return LraState{SnrAccumulator::zeros(d, hyper.beta_m), SnrAccumulator::zeros(d * d, hyper.beta_Sigma),
                        hyper.initial, 0.0, 0.0};
    }

    void adapt_learning_rates(LraState& state, const Vector& tilde_m, const Vector& tilde_Sigma, const LraHyperparams& hyper)
    {
        state.mean_acc = accumulate(state.mean_acc, tilde_m);
        state.cov_acc = accumulate(state.cov_acc, tilde_Sigma);

        if (state.mean_acc.count >= warmup_iterations(hyper.beta_m))
        {
            state.snr_m = estimate_snr(state.mean_acc);
            state.rates.eta_m = update_learning_rate(state.rates.eta_m, state.snr_m, hyper.alpha, hyper.gamma, hyper.beta_m);
        }
        if (state.cov_acc.count >= warmup_iterations(hyper.beta_Sigma))
        {
            state.snr_Sigma = estimate_snr(state.cov_acc);
            state.rates.eta_Sigma = update_learning_rate(state.rates.eta_Sigma, state.snr_Sigma, hyper.alpha, hyper.gamma, hyper.beta_Sigma);
        }
    }

    GaussianParams apply_or_reject(const GaussianParams& params, const StepOutcome& outcome, LraState& state, double previous_eta_m,
                                   StepSizeCorrection correction)
    {
        try
        {
            return apply_lra_update(params, outcome.delta_m, outcome.delta_Sigma, state.rates, previous_eta_m, correction);
        }
        catch (const NumericalDegeneracy&)
        {
            state.rates.eta_Sigma *= 0.5;
            return params;
        }
    }

    LraCmaes::LraCmaes(const NoisyProblem& problem, StreamFactory streams, LraOptions options)
        : params_(GaussianParams::create(problem.initial().m, problem.initial().sigma, problem.initial().C)),
          cma_(CmaState::initial(problem.dim())),
          hyper_(CmaHyperparams::defaults(problem.dim(), options.lambda > 0 ? options.lambda : default_lambda(problem.dim()))),
          options_(options),
          lra_(LraState::initial(problem.dim(), options.hyper)),
          streams_(streams)
    {
    }

    IterationLog LraCmaes::iterate(NoisyProblem& problem)
    {
        const auto t = static_cast<std::uint64_t>(cma_.t);
        auto sampling = streams_.stream(t, StreamPurpose::sampling);
        auto noise = streams_.stream(t, StreamPurpose::noise);

        const auto pop = sample_population(params_, hyper_.lambda, sampling);
        const Vector f = evaluate_repeated(problem, pop.x, 1, noise).col(0);
        const auto order = rank_indices(std::span<const double>(f.data(), f.size()));
        auto [outcome, next] = step(params_, cma_, hyper_, rank_population(pop, order));

        const Vector tilde_m = whiten_mean_direction(params_, outcome.delta_m);
        const Vector tilde_Sigma = whiten_cov_direction(params_, outcome.delta_Sigma);
        const double previous_eta_m = lra_.rates.eta_m;
        adapt_learning_rates(lra_, tilde_m, tilde_Sigma, options_.hyper);
        params_ = apply_or_reject(params_, outcome, lra_, previous_eta_m, options_.hyper.step_correction);
        cma_ = std::move(next);

        IterationLog log;
        log.t = cma_.t;
        log.evals_cum = problem.evaluations();
        log.f_clean_at_mean = problem.eval_clean(params_.mean());
        log.sigma = params_.sigma();
        log.lambda = hyper_.lambda;
        log.eta_m = lra_.rates.eta_m;
        log.eta_Sigma = lra_.rates.eta_Sigma;
        log.clamped = params_.clamped();
        return log;
    }
}
