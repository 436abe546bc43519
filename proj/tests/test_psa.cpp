#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "racma/errors.hpp"
#include "racma/psa.hpp"

using namespace racma;

TEST(PsaState, InitialBounds)
{
    const auto s = PsaState::initial(10);
    EXPECT_EQ(s.p_theta.size(), 110);
    EXPECT_EQ(s.lambda_min, 10);
    EXPECT_EQ(s.lambda_max, 10240);
    EXPECT_DOUBLE_EQ(s.lambda_real, 10.0);
    EXPECT_DOUBLE_EQ(s.gamma_theta, 0.0);
}

TEST(PsaUpdate, GammaConvergesToOne)
{
    auto s = PsaState::initial(2);
    double previous = 0.0;
    for (int k = 1; k <= 200; ++k)
    {
        s = psa_update(s, Vector::Zero(6), 1.0);
        const double closed = 1.0 - std::pow(1.0 - s.beta, 2 * k);
        EXPECT_NEAR(s.gamma_theta, closed, 1e-14);
        EXPECT_GE(s.gamma_theta, previous);
        EXPECT_LE(s.gamma_theta, 1.0);
        previous = s.gamma_theta;
    }
    EXPECT_NEAR(s.gamma_theta, 1.0, 1e-12);
}

TEST(PsaUpdate, FixedPoint)
{
    auto s = PsaState::initial(1);
    s.lambda_real = 20.0;
    s.lambda_max = 1000;
    s.gamma_theta = 0.5;
    const double b = s.beta;
    const double gamma_next = (1 - b) * (1 - b) * 0.5 + b * (2 - b);
    // choose the direction so that |p_next|^2 = alpha gamma_next
    Vector dir = Vector::Zero(2);
    dir[0] = std::sqrt(s.alpha * gamma_next) / std::sqrt(b * (2 - b));
    const auto next = psa_update(s, dir, 1.0);
    EXPECT_NEAR(next.p_theta.squaredNorm(), s.alpha * next.gamma_theta, 1e-12);
    EXPECT_NEAR(next.lambda_real, 20.0, 1e-12);
}

TEST(PsaUpdate, ClampAndCoefficient)
{
    auto s = PsaState::initial(1);
    for (int k = 0; k < 50; ++k)
    {
        s = psa_update(s, Vector::Constant(2, 100.0), 1.0);
        ASSERT_GE(s.lambda_real, s.lambda_min);
    }
    EXPECT_DOUBLE_EQ(s.lambda_real, s.lambda_min);
    for (int k = 0; k < 2000; ++k)
    {
        s = psa_update(s, Vector::Zero(2), 1.0);
        ASSERT_LE(s.lambda_real, s.lambda_max);
    }
    EXPECT_DOUBLE_EQ(s.lambda_real, s.lambda_max);

    auto a = PsaState::initial(1);
    auto b = a;
    b.strict_coefficient = true;
    const Vector v = Vector::Constant(2, 1.0);
    EXPECT_NEAR(psa_update(a, v, 2.0).p_theta[0], std::sqrt(0.4 * 1.6) / 2.0, 1e-15);
    EXPECT_NEAR(psa_update(b, v, 2.0).p_theta[0], std::sqrt(2 * 1.6) / 2.0, 1e-15);
    EXPECT_THROW(psa_update(a, v, 0.0), InvalidArgument);
    EXPECT_THROW(psa_update(a, Vector::Zero(3), 1.0), InvalidArgument);
}

TEST(PsaUpdate, RandomSelectionCalibration)
{
    // unit expected norm inputs: E|p|^2 tracks gamma
    const int dim = 30;
    auto s = PsaState::initial(5);
    s.p_theta = Vector::Zero(dim);
    s.lambda_max = 1 << 30;
    Rng rng(14);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    double sum = 0;
    int n = 0;
    for (int k = 0; k < 20000; ++k)
    {
        Vector v(dim);
        for (int i = 0; i < dim; ++i)
            v[i] = standard_normal(rng) * scale;
        s = psa_update(s, v, 1.0);
        if (k >= 100)
        {
            sum += s.p_theta.squaredNorm();
            ++n;
        }
    }
    EXPECT_NEAR(sum / n / s.gamma_theta, 1.0, 0.03);
}

TEST(NormalizationFactor, SingleParentMonteCarlo)
{
    // lambda = 2: the joint direction is built from one whitened sample; compare to a long self-oracle run
    const int d = 3;
    const auto p = GaussianParams::isotropic(Vector::Zero(d), 1.0);
    const auto h = CmaHyperparams::defaults(d, 2);
    Rng a(1);
    Rng b(2);
    const double reference = normalization_factor(p, h, 100000, a);
    const double estimate = normalization_factor(p, h, 20000, b);
    EXPECT_NEAR(estimate / reference, 1.0, 0.01);
}

TEST(NormalizationFactor, InvariantToMeanAndScale)
{
    const int d = 4;
    const auto h = CmaHyperparams::defaults(d, 8);
    const auto p = GaussianParams::isotropic(Vector::Zero(d), 1.0);
    const auto q = GaussianParams::isotropic(Vector::Constant(d, 7.0), 0.01);
    Rng a(3);
    Rng b(3);
    EXPECT_NEAR(normalization_factor(p, h, 500, a), normalization_factor(q, h, 500, b), 1e-9);
}

TEST(OptimalStep, BlomFormula)
{
    const boost::math::normal normal;
    for (int lambda : {4, 10, 17, 100})
    {
        const auto w = compute_weights(lambda);
        double sum = 0;
        for (int i = 1; i <= w.mu(); ++i)
            sum += w.w[i - 1] * -boost::math::quantile(normal, (i - 0.375) / (lambda + 0.25));
        EXPECT_NEAR(optimal_normalized_step(lambda), w.mu_w * sum, 1e-12);
    }
    EXPECT_LT(optimal_normalized_step(10), optimal_normalized_step(100));
}

TEST(PsaCmaes, PinnedLambdaMatchesBaseline)
{
    NoisyProblem p1(ProblemKey::parse("sphere:6"));
    NoisyProblem p2(ProblemKey::parse("sphere:6"));
    PsaOptions options;
    options.lambda_min = 10;
    options.lambda_max = 10;
    PsaCmaes psa(p1, StreamFactory(5), options);
    Cmaes base(p2, StreamFactory(5), CmaesOptions{10});
    for (int t = 0; t < 50; ++t)
    {
        const auto a = psa.iterate(p1);
        const auto b = base.iterate(p2);
        ASSERT_EQ(a.lambda, 10);
        ASSERT_EQ(a.f_clean_at_mean, b.f_clean_at_mean);
        ASSERT_EQ(a.sigma, b.sigma);
    }
}

TEST(PsaCmaes, LambdaGrowsUnderStrongAdditiveNoise)
{
    NoisyProblem problem(ProblemKey::parse("sphere:5:add_gauss:10"));
    PsaCmaes es(problem, StreamFactory(6));
    const int start = es.lambda();
    for (int t = 0; t < 300; ++t)
    {
        es.iterate(problem);
        ASSERT_GE(es.lambda(), es.psa_state().lambda_min);
        ASSERT_LE(es.lambda(), es.psa_state().lambda_max);
    }
    EXPECT_GT(es.lambda(), 4 * start);
}

TEST(PsaCmaes, SeededDeterminism)
{
    NoisyProblem p1(ProblemKey::parse("ackley:4:add_gauss:1"));
    NoisyProblem p2(ProblemKey::parse("ackley:4:add_gauss:1"));
    PsaCmaes a(p1, StreamFactory(7));
    PsaCmaes b(p2, StreamFactory(7));
    for (int t = 0; t < 40; ++t)
        ASSERT_EQ(a.iterate(p1), b.iterate(p2));
}
