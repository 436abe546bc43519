#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "racma/errors.hpp"
#include "racma/lra.hpp"

using namespace racma;

namespace
{
    Vector gaussian_vector(const Vector& mean, Rng& rng)
    {
        Vector v(mean.size());
        for (Eigen::Index i = 0; i < v.size(); ++i)
            v[i] = mean[i] + standard_normal(rng);
        return v;
    }

    // mean and batch-means standard error of a correlated series
    std::pair<double, double> batch_mean(const std::vector<double>& xs, std::size_t batch)
    {
        std::vector<double> means;
        for (std::size_t i = 0; i + batch <= xs.size(); i += batch)
        {
            double s = 0;
            for (std::size_t j = i; j < i + batch; ++j)
                s += xs[j];
            means.push_back(s / batch);
        }
        double m = 0;
        for (double v : means)
            m += v;
        m /= means.size();
        double var = 0;
        for (double v : means)
            var += (v - m) * (v - m);
        var /= (means.size() - 1);
        return {m, std::sqrt(var / means.size())};
    }
}

TEST(Accumulate, FullStepAndDecay)
{
    auto acc = SnrAccumulator::zeros(3, 1.0);
    const Vector v = (Vector(3) << 1, -2, 0.5).finished();
    acc = accumulate(acc, v);
    EXPECT_EQ(acc.E, v);
    EXPECT_DOUBLE_EQ(acc.V, v.squaredNorm());

    auto b = SnrAccumulator::zeros(3, 0.25);
    b = accumulate(b, v);
    const Vector e1 = b.E;
    const double v1 = b.V;
    for (int k = 1; k <= 5; ++k)
    {
        b = accumulate(b, Vector::Zero(3));
        EXPECT_NEAR(b.V, v1 * std::pow(0.75, k), 1e-15);
        EXPECT_LE((b.E - e1 * std::pow(0.75, k)).norm(), 1e-15);
    }
    EXPECT_THROW(accumulate(b, Vector::Constant(3, std::nan(""))), InvalidEvaluation);
    EXPECT_THROW(accumulate(b, Vector::Zero(2)), InvalidArgument);
}

TEST(Accumulate, StationaryExpectation)
{
    const int d = 5;
    const double beta = 0.1;
    const Vector mu = (Vector(d) << 0.5, -0.2, 0.0, 0.3, 0.1).finished();
    Rng rng(21);
    auto acc = SnrAccumulator::zeros(d, beta);
    std::vector<double> e2;
    std::vector<double> vv;
    for (int t = 0; t < 10000; ++t)
    {
        acc = accumulate(acc, gaussian_vector(mu, rng));
        if (t >= 200)
        {
            e2.push_back(acc.E.squaredNorm());
            vv.push_back(acc.V);
        }
    }
    const auto [m_e, se_e] = batch_mean(e2, 200);
    const auto [m_v, se_v] = batch_mean(vv, 200);
    const double expected_e = mu.squaredNorm() + beta / (2 - beta) * d;
    const double expected_v = mu.squaredNorm() + d;
    EXPECT_LE(std::abs(m_e - expected_e), 3 * se_e);
    EXPECT_LE(std::abs(m_v - expected_v), 3 * se_v);
}

TEST(EstimateSnr, ConstantDirectionIsLarge)
{
    auto acc = SnrAccumulator::zeros(2, 0.1);
    const Vector v = (Vector(2) << 1, 1).finished();
    for (int t = 0; t < 2000; ++t)
        acc = accumulate(acc, v);
    EXPECT_GT(estimate_snr(acc), 1e6);
    EXPECT_TRUE(std::isfinite(estimate_snr(acc)));
}

TEST(EstimateSnr, UndefinedWithoutSignal)
{
    auto acc = SnrAccumulator::zeros(2, 0.1);
    EXPECT_THROW((void)estimate_snr(acc), UndefinedEstimate);
    acc = accumulate(acc, Vector::Zero(2));
    EXPECT_THROW((void)estimate_snr(acc), UndefinedEstimate);
}

TEST(EstimateSnr, MonteCarloZeroAndQuarter)
{
    const int d = 20;
    for (const double target : {0.0, 0.25})
    {
        const Vector mu = Vector::Constant(d, std::sqrt(target));
        Rng rng(target == 0.0 ? 5 : 6);
        auto acc = SnrAccumulator::zeros(d, 0.1);
        std::vector<double> estimates;
        for (int t = 0; t < 10000; ++t)
        {
            acc = accumulate(acc, gaussian_vector(mu, rng));
            if (t >= 200)
                estimates.push_back(estimate_snr(acc));
        }
        const auto [mean, se] = batch_mean(estimates, 200);
        EXPECT_NEAR(mean, target, 0.05) << "true snr " << target;
        EXPECT_LT(3 * se, 0.05);
    }
}

TEST(LearningRate, Examples)
{
    EXPECT_DOUBLE_EQ(update_learning_rate(0.3, 1.4 * 0.3, 1.4, 0.1, 0.1), 0.3);
    EXPECT_NEAR(update_learning_rate(0.1, 1e9, 1.4, 0.1, 0.1), 0.1 * std::exp(0.01), 1e-16);
    EXPECT_NEAR(update_learning_rate(0.5, 1e9, 1.4, 0.1, 0.03), 0.5 * std::exp(0.03), 1e-16);
    EXPECT_NEAR(update_learning_rate(0.1, 0.07, 1.4, 0.1, 0.1), 0.1 * std::exp(-0.005), 1e-16);
    EXPECT_DOUBLE_EQ(update_learning_rate(1.0, 1e9, 1.4, 0.1, 0.1), 1.0);
    EXPECT_THROW(update_learning_rate(0.0, 1.0, 1.4, 0.1, 0.1), InvalidArgument);
}

TEST(LearningRate, FixedPointAndClampOnRandomSequences)
{
    Rng rng(9);
    std::uniform_real_distribution<double> eta_dist(1e-6, 1.0);
    for (int k = 0; k < 1000; ++k)
    {
        const double eta = eta_dist(rng);
        EXPECT_NEAR(update_learning_rate(eta, 1.4 * eta, 1.4, 0.1, 0.1), eta, 1e-15);
    }
    std::normal_distribution<double> snr(0.0, 100.0);
    double eta = 1.0;
    for (int k = 0; k < 10000; ++k)
    {
        eta = update_learning_rate(eta, snr(rng), 1.4, 0.1, 0.1);
        ASSERT_GT(eta, 0.0);
        ASSERT_LE(eta, 1.0);
    }
}

TEST(ApplyLra, Examples)
{
    Rng rng(12);
    const auto p = GaussianParams::isotropic((Vector(2) << 1, 2).finished(), 0.5);
    const auto same = apply_lra_update(p, Vector::Ones(2), Matrix::Identity(2, 2), LearningRates{0.0, 0.0}, 0.0);
    EXPECT_LE((same.mean() - p.mean()).norm(), 1e-15);
    EXPECT_NEAR(same.sigma(), p.sigma(), 1e-15);
    EXPECT_LE((same.cov() - p.cov()).norm(), 1e-14);

    const auto four = GaussianParams::isotropic(Vector::Zero(2), 2.0);
    const auto split = apply_lra_update(four, Vector::Zero(2), Matrix::Zero(2, 2), LearningRates{1.0, 1.0}, 1.0);
    EXPECT_NEAR(split.sigma(), 2.0, 1e-14);
    EXPECT_LE((split.cov() - Matrix::Identity(2, 2)).norm(), 1e-14);
}

TEST(ApplyLra, UnitDeterminantAfterRandomUpdates)
{
    Rng rng(13);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int k = 0; k < 100; ++k)
    {
        const int d = 2 + k % 6;
        Matrix A(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                A(i, j) = standard_normal(rng);
        const auto p = GaussianParams::create(Vector::Zero(d), u(rng), A * A.transpose() + 0.1 * Matrix::Identity(d, d));
        Matrix B(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                B(i, j) = standard_normal(rng);
        const Matrix dS = 0.05 * p.full_cov().norm() * (B * B.transpose()) / B.squaredNorm();
        const double eta = u(rng);
        const auto q = apply_lra_update(p, Vector::Ones(d), dS, LearningRates{eta, u(rng)}, eta);
        EXPECT_NEAR(q.cov().determinant(), 1.0, 1e-9);
    }
}

TEST(ApplyLra, StepSizeCorrection)
{
    const auto p = GaussianParams::isotropic(Vector::Zero(3), 1.0);
    const LearningRates rates{0.5, 1.0};
    const auto inv = apply_lra_update(p, Vector::Zero(3), Matrix::Zero(3, 3), rates, 0.25, StepSizeCorrection::inverse);
    const auto prop = apply_lra_update(p, Vector::Zero(3), Matrix::Zero(3, 3), rates, 0.25, StepSizeCorrection::proportional);
    EXPECT_NEAR(inv.sigma(), 0.5, 1e-15);
    EXPECT_NEAR(prop.sigma(), 2.0, 1e-15);
}

TEST(ApplyLra, NonPositiveDefiniteIsRejected)
{
    const auto p = GaussianParams::isotropic(Vector::Zero(2), 1.0);
    EXPECT_THROW(apply_lra_update(p, Vector::Zero(2), -2 * Matrix::Identity(2, 2), LearningRates{1.0, 1.0}, 1.0),
                 NumericalDegeneracy);

    StepOutcome outcome;
    outcome.delta_m = Vector::Ones(2);
    outcome.delta_Sigma = -2 * Matrix::Identity(2, 2);
    auto state = LraState::initial(2, LraHyperparams{});
    const auto kept = apply_or_reject(p, outcome, state, 1.0);
    EXPECT_EQ(kept.mean(), p.mean());
    EXPECT_DOUBLE_EQ(state.rates.eta_Sigma, 0.5);
}

TEST(AdaptLearningRates, WarmupBeforeFirstUpdate)
{
    LraHyperparams h;
    EXPECT_EQ(warmup_iterations(0.1), 10);
    EXPECT_EQ(warmup_iterations(0.03), 34);
    auto s = LraState::initial(2, h);
    Rng rng(1);
    for (int t = 1; t < 10; ++t)
    {
        adapt_learning_rates(s, gaussian_vector(Vector::Zero(2), rng), gaussian_vector(Vector::Zero(4), rng), h);
        EXPECT_EQ(s.rates.eta_m, 1.0);
    }
    adapt_learning_rates(s, gaussian_vector(Vector::Zero(2), rng), gaussian_vector(Vector::Zero(4), rng), h);
    EXPECT_LT(s.rates.eta_m, 1.0);
    EXPECT_EQ(s.rates.eta_Sigma, 1.0);
}

TEST(LraCmaes, NoiselessSphereConverges)
{
    NoisyProblem problem(ProblemKey::parse("sphere:10"));
    LraCmaes es(problem, StreamFactory(3));
    double f = 1;
    while (problem.evaluations() < 20000 && f > 1e-8)
    {
        f = es.iterate(problem).f_clean_at_mean;
        ASSERT_NEAR(es.params().cov().determinant(), 1.0, 1e-9);
    }
    EXPECT_LE(f, 1e-8);
}
