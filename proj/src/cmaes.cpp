#include "racma/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "racma/errors.hpp"

namespace racma
{
    int default_lambda(int d)
    {
        if (d < 1)
            throw InvalidArgument("default_lambda: d must be >= 1");
        return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(d))));
    }

    CmaHyperparams CmaHyperparams::defaults(int d, int lambda)
    {
        if (d < 1)
            throw InvalidArgument("CmaHyperparams: d must be >= 1");
        CmaHyperparams h;
        h.lambda = lambda;
        h.weights = compute_weights(lambda);
        const double n = d;
        const double mu_w = h.weights.mu_w;
        h.c_sigma = (mu_w + 2.0) / (n + mu_w + 5.0);
        h.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_w - 1.0) / (n + 1.0)) - 1.0) + h.c_sigma;
        h.c_c = (4.0 + mu_w / n) / (n + 4.0 + 2.0 * mu_w / n);
        h.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + mu_w);
        h.c_mu = std::min(1.0 - h.c_1, 2.0 * (mu_w - 2.0 + 1.0 / mu_w) / ((n + 2.0) * (n + 2.0) + mu_w));
        h.c_m = 1.0;
        h.validate();
        return h;
    }

    void CmaHyperparams::validate() const
    {
        if (lambda < 2 || weights.mu() < 1 || weights.mu() > lambda)
            throw InvalidArgument("CmaHyperparams: inconsistent lambda / weights");
        if (!(c_sigma > 0.0 && c_sigma <= 1.0) || !(c_c > 0.0 && c_c <= 1.0))
            throw InvalidArgument("CmaHyperparams: accumulation factors must lie in (0, 1]");
        if (c_1 < 0.0 || c_mu < 0.0 || c_1 + c_mu > 1.0)
            throw InvalidArgument("CmaHyperparams: c_1 + c_mu must not exceed 1");
        if (!(c_m > 0.0 && c_m <= 1.0) || !(d_sigma > 0.0))
            throw InvalidArgument("CmaHyperparams: c_m in (0, 1] and d_sigma > 0 required");
    }

    CmaState CmaState::initial(int d)
    {
        return CmaState{Vector::Zero(d), Vector::Zero(d), 0};
    }

    GaussianParams StepOutcome::new_params() const
    {
        return GaussianParams::create(m_ori, sigma_ori, C_ori);
    }

    std::vector<int> rank_indices(std::span<const double> fitness)
    {
        for (const double f : fitness)
            if (std::isnan(f))
                throw InvalidEvaluation("rank_indices: NaN fitness");

        std::vector<int> order(fitness.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return fitness[a] < fitness[b]; });
        return order;
    }

    RankedPopulation rank_population(const SampledPopulation& pop, std::span<const int> order)
    {
        RankedPopulation ranked{Matrix(pop.z.rows(), order.size()), Matrix(pop.y.rows(), order.size())};
        for (std::size_t k = 0; k < order.size(); ++k)
        {
            ranked.z.col(k) = pop.z.col(order[k]);
            ranked.y.col(k) = pop.y.col(order[k]);
        }
        return ranked;
    }

    std::pair<Vector, Vector> weighted_directions(const RecombinationWeights& weights, const Matrix& ranked_z, const Matrix& ranked_y)
    {
        const int mu = weights.mu();
        if (ranked_z.cols() < mu || ranked_y.cols() < mu)
            throw InvalidArgument("weighted_directions: fewer ranked solutions than weights");
        return {ranked_z.leftCols(mu) * weights.w, ranked_y.leftCols(mu) * weights.w};
    }

    std::pair<StepOutcome, CmaState> step(const GaussianParams& params, const CmaState& state,
                                          const CmaHyperparams& hyper, const RankedPopulation& ranked)
    {
        const int d = params.dim();
        const int mu = hyper.weights.mu();
        const double mu_w = hyper.weights.mu_w;

        StepOutcome out;
        std::tie(out.delta_z, out.delta_y) = weighted_directions(hyper.weights, ranked.z, ranked.y);

        CmaState next;
        next.t = state.t + 1;
        next.p_sigma = (1.0 - hyper.c_sigma) * state.p_sigma
            + std::sqrt(hyper.c_sigma * (2.0 - hyper.c_sigma) * mu_w) * out.delta_z;

        const double correction = 1.0 - std::pow(1.0 - hyper.c_sigma, 2.0 * static_cast<double>(next.t));
        const double threshold = (2.0 + 4.0 / (d + 1.0)) * d;
        out.h_sigma = next.p_sigma.squaredNorm() / correction < threshold ? 1 : 0;

        // The decay applies regardless of h_sigma; only the new term is gated.
        next.p_c = (1.0 - hyper.c_c) * state.p_c
            + out.h_sigma * std::sqrt(hyper.c_c * (2.0 - hyper.c_c) * mu_w) * out.delta_y;

        out.m_ori = params.mean() + hyper.c_m * params.sigma() * out.delta_y;
        out.sigma_ori = params.sigma()
            * std::exp(hyper.c_sigma / hyper.d_sigma * (next.p_sigma.norm() / expected_chi_norm(d) - 1.0));

        const Matrix& C = params.cov();
        const double delta_h = (1.0 - out.h_sigma) * hyper.c_c * (2.0 - hyper.c_c);
        const auto Y = ranked.y.leftCols(mu);
        const Matrix rank_mu = Y * hyper.weights.w.asDiagonal() * Y.transpose();
        out.C_ori = (1.0 + hyper.c_1 * delta_h) * C
            + hyper.c_1 * (next.p_c * next.p_c.transpose() - C)
            + hyper.c_mu * (rank_mu - hyper.weights.w.sum() * C);
        out.C_ori = 0.5 * (out.C_ori + out.C_ori.transpose()).eval();

        out.delta_m = out.m_ori - params.mean();
        out.delta_Sigma = out.sigma_ori * out.sigma_ori * out.C_ori - params.sigma() * params.sigma() * C;

        if (!out.m_ori.allFinite() || !std::isfinite(out.sigma_ori) || !out.C_ori.allFinite())
            throw NumericalDegeneracy("step: non-finite update");
        return {std::move(out), std::move(next)};
    }
}

namespace racma
{
    Cmaes::Cmaes(const NoisyProblem& problem, StreamFactory streams, CmaesOptions options)
        : params_(GaussianParams::create(problem.initial().m, problem.initial().sigma, problem.initial().C)),
          state_(CmaState::initial(problem.dim())),
          hyper_(CmaHyperparams::defaults(problem.dim(), options.lambda > 0 ? options.lambda : default_lambda(problem.dim()))),
          streams_(streams)
    {
    }

    IterationLog Cmaes::iterate(NoisyProblem& problem)
    {
        const auto t = static_cast<std::uint64_t>(state_.t);
        auto sampling = streams_.stream(t, StreamPurpose::sampling);
        auto noise = streams_.stream(t, StreamPurpose::noise);

        const auto pop = sample_population(params_, hyper_.lambda, sampling);
        const Vector f = evaluate_repeated(problem, pop.x, 1, noise).col(0);
        const auto order = rank_indices(std::span<const double>(f.data(), f.size()));
        auto [outcome, next] = step(params_, state_, hyper_, rank_population(pop, order));
        params_ = outcome.new_params();
        state_ = std::move(next);

        IterationLog log;
        log.t = state_.t;
        log.evals_cum = problem.evaluations();
        log.f_clean_at_mean = problem.eval_clean(params_.mean());
        log.sigma = params_.sigma();
        log.lambda = hyper_.lambda;
        log.clamped = params_.clamped();
        return log;
    }
}
