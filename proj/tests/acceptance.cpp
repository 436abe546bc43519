// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "racma/ecdf.hpp"
#include "racma/errors.hpp"
#include "racma/harness.hpp"
#include "racma/lra.hpp"
#include "racma/psa.hpp"
#include "racma/ra.hpp"
#include "racma/uh.hpp"
#include "racma/utility.hpp"

using namespace racma;

namespace
{
    struct Outcome
    {
        bool passed = false;
        std::string detail;
    };

    std::string fmt(const char* pattern, double a = 0, double b = 0, double c = 0, double d = 0)
    {
        char buf[256];
        std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
        return buf;
    }

    Vector normal_vector(int d, Rng& rng)
    {
        Vector v(d);
        for (int i = 0; i < d; ++i)
            v[i] = standard_normal(rng);
        return v;
    }

    int hardware_jobs()
    {
        return std::max(1u, std::thread::hardware_concurrency());
    }

    // evaluations at which a trial first reached the target, +inf otherwise
    double evals_to_target(const RunRecord& r)
    {
        if (r.status != RunStatus::target_reached || r.rows.empty())
            return std::numeric_limits<double>::infinity();
        return static_cast<double>(r.rows.back().evals_cum);
    }

    double median(std::vector<double> v)
    {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }

    Outcome noiseless_regression()
    {
        const auto start = std::chrono::steady_clock::now();
        int solved = 0;
        for (int trial = 0; trial < 20; ++trial)
        {
            NoisyProblem problem(ProblemKey::parse("sphere:10"));
            Cmaes es(problem, StreamFactory(1).child(trial));
            double f = problem.eval_clean(es.params().mean());
            while (problem.evaluations() < 10000 && f > 1e-10)
                f = es.iterate(problem).f_clean_at_mean;
            solved += f <= 1e-10;
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return {solved >= 19 && seconds < 10.0, fmt("%g/20 trials reached 1e-10 within 1e4 evaluations in %.2f s", solved, seconds)};
    }

    ExperimentConfig sphere_experiment(StrategyKind kind, const char* key)
    {
        ExperimentConfig c;
        c.strategy = kind;
        c.problem = ProblemKey::parse(key);
        c.budget = 10000000;
        c.trials = 20;
        c.seed = 1;
        c.jobs = hardware_jobs();
        return c;
    }

    int reached(const std::vector<RunRecord>& records)
    {
        return static_cast<int>(std::count_if(records.begin(), records.end(),
                                              [](const RunRecord& r) { return r.status == RunStatus::target_reached; }));
    }

    Outcome multiplicative_headline()
    {
        const auto ra = run_experiment(sphere_experiment(StrategyKind::ra, "sphere:10:mult-gauss:2"));
        const auto lra = run_experiment(sphere_experiment(StrategyKind::lra, "sphere:10:mult-gauss:2"));
        const int n_ra = reached(ra);
        const int n_lra = reached(lra);
        return {n_ra >= 16 && n_lra < n_ra, fmt("ra %g/20, lra %g/20 reached 1e-3 within 1e7 evaluations", n_ra, n_lra)};
    }

    Outcome additive_competitiveness()
    {
        const auto ra = run_experiment(sphere_experiment(StrategyKind::ra, "sphere:10:add-gauss:1"));
        const auto lra = run_experiment(sphere_experiment(StrategyKind::lra, "sphere:10:add-gauss:1"));
        std::vector<double> e_ra;
        std::vector<double> e_lra;
        for (const auto& r : ra)
            e_ra.push_back(evals_to_target(r));
        for (const auto& r : lra)
            e_lra.push_back(evals_to_target(r));
        const double m_ra = median(e_ra);
        const double m_lra = median(e_lra);
        const double ratio = m_ra / m_lra;
        return {std::isfinite(ratio) && ratio <= 3.0,
                fmt("median evaluations to 1e-3: ra %.4g, lra %.4g, ratio %.3g (limit 3); reached ra %g/20", m_ra, m_lra, ratio,
                    reached(ra))};
    }

    Outcome correlation_estimator()
    {
        const int d = 10;
        std::string detail;
        bool ok = true;
        for (const double rho : {0.0, 0.5, 0.9})
        {
            int within = 0;
            const double s = std::sqrt(1.0 - rho * rho);
            for (int rep = 0; rep < 100; ++rep)
            {
                Rng rng = StreamFactory(4).stream(static_cast<std::uint64_t>(rep), StreamPurpose::monte_carlo);
                rng.discard(static_cast<unsigned long long>(rho * 1000));
                auto acc = CorrAccumulator::zeros(d, 0.1);
                for (int t = 0; t < 10000; ++t)
                {
                    const Vector z1 = normal_vector(d, rng);
                    const Vector z2 = normal_vector(d, rng);
                    acc = accumulate_correlation(acc, z1, rho * z1 + s * z2);
                }
                within += std::abs(estimate_correlation(acc) - rho) <= 0.1;
            }
            ok = ok && within >= 95;
            detail += fmt("rho=%g: %g/100 within 0.1; ", rho, within);
        }
        return {ok, detail};
    }

    Outcome snr_estimator()
    {
        const int d = 10;
        const double truth[] = {0.0, 0.25, 1.0};
        const double tolerance[] = {0.05, 0.05, 0.15};
        std::string detail;
        bool ok = true;
        for (int k = 0; k < 3; ++k)
        {
            const Vector mu = Vector::Constant(d, std::sqrt(truth[k]));
            const int reps = 100;
            double sum = 0;
            double sum_sq = 0;
            for (int rep = 0; rep < reps; ++rep)
            {
                Rng rng = StreamFactory(5 + k).stream(static_cast<std::uint64_t>(rep), StreamPurpose::monte_carlo);
                auto acc = SnrAccumulator::zeros(d, 0.1);
                for (int t = 0; t < 10000; ++t)
                    acc = accumulate(acc, mu + normal_vector(d, rng));
                const double est = estimate_snr(acc);
                sum += est;
                sum_sq += est * est;
            }
            const double mean = sum / reps;
            const double se = std::sqrt(std::max(0.0, sum_sq / reps - mean * mean) / (reps - 1));
            // the whole 3-s.e. interval has to sit inside the tolerance band
            const bool pass = std::abs(mean - truth[k]) + 3 * se <= tolerance[k];
            ok = ok && pass;
            detail += fmt("snr=%g: mean %.4f se %.4f tol %g; ", truth[k], mean, se, tolerance[k]);
        }
        return {ok, detail};
    }

    Outcome stochastic_rounding()
    {
        Rng rng = StreamFactory(6).stream(0, StreamPurpose::rounding);
        long sum = 0;
        for (int k = 0; k < 100000; ++k)
            sum += stochastic_round(1.2, rng);
        const double mean = sum / 1e5;
        return {std::abs(mean - 1.2) <= 0.01, fmt("mean %.5f", mean)};
    }

    Outcome target_values()
    {
        const double a = target_correlation(1.2, 1.2, 0.8);
        const double b = target_correlation(2.0, 1.2, 0.8);
        const double ea = std::pow(0.8, 0.2);
        const double eb = std::pow(0.8, 1.0 + std::log(5.0 / 3.0));
        return {std::abs(a - ea) <= 1e-12 && std::abs(b - eb) <= 1e-12,
                fmt("%.15f vs %.15f, %.15f vs %.15f", a, ea, b, eb)};
    }

    Outcome lemma_oracles()
    {
        const auto report = lemma_checks(LemmaCheckConfig{});
        int failed = 0;
        std::string first;
        for (const auto& r : report)
            if (!r.passed)
            {
                if (failed++ == 0)
                    first = r.name;
            }
        const auto convex = CounterexampleSpec::convex_counterexample(0.05);
        const auto concave = CounterexampleSpec::concave_counterexample(0.6);
        const double cv_other = expected_dependent_utility(convex, SelectionScheme::convex(), false);
        const double cv_opt = expected_dependent_utility(convex, SelectionScheme::convex(), true);
        const double cc_other = expected_dependent_utility(concave, SelectionScheme::concave(), false);
        const double cc_opt = expected_dependent_utility(concave, SelectionScheme::concave(), true);
        const bool closed = std::abs(cv_other - 1.0 / 3) < 1e-15 && std::abs(cv_opt - 0.3025) < 1e-15
            && std::abs(cc_other - 2.0 / 3) < 1e-15 && std::abs(cc_opt - 0.6) < 1e-15;
        std::string detail = fmt("%g checks, %g failed; convex %.4f > %.4f", report.size(), failed, cv_other, cv_opt);
        detail += fmt(", concave %.4f > %.4f", cc_other, cc_opt);
        if (failed)
            detail += "; first failure: " + first;
        return {failed == 0 && closed, detail};
    }

    std::vector<double> brute_ecdf(const std::vector<RunRecord>& records, const std::vector<double>& targets,
                                   const std::vector<double>& checkpoints)
    {
        std::vector<double> out;
        for (const double c : checkpoints)
        {
            long hits = 0;
            for (const auto& rec : records)
                for (const double target : targets)
                {
                    bool hit = false;
                    for (const auto& row : rec.rows)
                        hit = hit || (static_cast<double>(row.evals_cum) <= c && row.f_clean_at_mean <= target);
                    hits += hit;
                }
            out.push_back(static_cast<double>(hits) / (static_cast<double>(records.size()) * targets.size()));
        }
        return out;
    }

    Outcome ecdf_oracle()
    {
        Rng rng = StreamFactory(7).stream(0, StreamPurpose::monte_carlo);
        std::uniform_int_distribution<int> trials(1, 8);
        std::uniform_int_distribution<int> rows(0, 40);
        std::uniform_int_distribution<int> step(1, 100);
        std::uniform_real_distribution<double> logf(-4.0, 3.0);
        int matched = 0;
        for (int rep = 0; rep < 50; ++rep)
        {
            std::vector<RunRecord> records(trials(rng));
            for (auto& r : records)
            {
                std::uint64_t evals = 0;
                const int n = rows(rng);
                for (int k = 0; k < n; ++k)
                {
                    IterationLog row;
                    evals += step(rng);
                    row.evals_cum = evals;
                    row.f_clean_at_mean = std::pow(10.0, logf(rng));
                    r.rows.push_back(row);
                }
            }
            const auto targets = generate_targets(1000.0, 500);
            const auto checkpoints = generate_checkpoints(1, 4000, 101);
            matched += compute_ecdf(records, targets, checkpoints).proportion == brute_ecdf(records, targets, checkpoints);
        }
        return {matched == 50, fmt("%g/50 record sets match exactly", matched)};
    }

    Outcome weight_recoverability()
    {
        const int lambda = 10;
        const auto weights = compute_weights(lambda);
        const auto scheme = SelectionScheme::truncation(lambda);
        Rng rng = StreamFactory(8).stream(0, StreamPurpose::sampling);
        std::vector<double> f(lambda);
        for (auto& v : f)
            v = standard_normal(rng);
        double worst = 0;
        for (int i = 0; i < lambda; ++i)
        {
            int rank = 0;
            for (double v : f)
                rank += v < f[i];
            const double u = utility_from_quantiles(estimated_quantiles_dependent(f, i), scheme) / lambda;
            const double expected = rank < weights.mu() ? weights.w[rank] : 0.0;
            worst = std::max(worst, std::abs(u - expected));
        }
        return {worst <= 1e-12, fmt("max deviation %.3g", worst)};
    }

    Outcome delta_lim_enumeration()
    {
        long cases = 0;
        long mismatches = 0;
        for (int lambda = 1; lambda <= 20; ++lambda)
            for (int r = 0; r <= 2 * lambda; ++r)
                for (const int tenths : {1, 2, 5})
                {
                    const int count = 2 * lambda - 1;
                    std::vector<int> values;
                    for (int j = 1; j <= count; ++j)
                        values.push_back(std::abs(j - r));
                    std::sort(values.begin(), values.end());
                    const int k = std::max(1, (tenths * count + 19) / 20);
                    ++cases;
                    mismatches += delta_lim(r, tenths / 10.0, lambda) != values[k - 1];
                }
        return {mismatches == 0, fmt("%g cases, %g mismatches", cases, mismatches)};
    }

    Outcome invariant_fuzz()
    {
        Rng rng = StreamFactory(9).stream(0, StreamPurpose::selection);
        const StrategyKind kinds[] = {StrategyKind::cmaes, StrategyKind::ra, StrategyKind::uh, StrategyKind::psa, StrategyKind::lra};
        const NoiseKind noises[] = {NoiseKind::none, NoiseKind::mult_gauss, NoiseKind::mult_uniform, NoiseKind::add_gauss};
        std::uniform_int_distribution<int> pick_kind(0, 4);
        std::uniform_int_distribution<int> pick_fn(0, 7);
        std::uniform_int_distribution<int> pick_noise(0, 3);
        std::uniform_int_distribution<int> pick_d(2, 8);
        std::uniform_int_distribution<int> pick_lambda(2, 512);

        long iterations = 0;
        long violations = 0;
        long degenerate_runs = 0;
        long runs = 0;
        std::string first;
        auto violate = [&](const std::string& what) {
            if (violations++ == 0)
                first = what;
        };

        while (iterations < 10000)
        {
            const auto kind = kinds[pick_kind(rng)];
            const auto fn = all_functions()[pick_fn(rng)];
            const int d = pick_d(rng);
            const auto noise = noises[pick_noise(rng)];
            ProblemKey key;
            key.function = fn;
            key.d = d;
            key.noise.kind = noise;
            key.noise.sigma_n = noise == NoiseKind::none ? 0.0 : noise_grid(noise)[rng() % 4];
            NoisyProblem problem(key);
            auto strategy = make_strategy(kind, problem, StreamFactory(rng()));
            ++runs;
            try
            {
                for (int t = 0; t < 200 && iterations < 10000 && problem.evaluations() < 300000; ++t, ++iterations)
                {
                    const auto log = strategy->iterate(problem);
                    const auto& p = strategy->params();
                    const Matrix& C = p.cov();
                    if ((C - C.transpose()).cwiseAbs().maxCoeff() > 1e-12 * C.cwiseAbs().maxCoeff())
                        violate(key.str() + " asymmetric C");
                    if (!(p.cov_eigenvalues().minCoeff() > 0.0) || !(p.sigma() > 0.0))
                        violate(key.str() + " C not PD");
                    if ((kind == StrategyKind::ra || kind == StrategyKind::lra)
                        && std::abs(C.determinant() - 1.0) > 1e-9)
                        violate(key.str() + " det(C) != 1");
                    if (kind == StrategyKind::ra && *log.n_eval < 1.2)
                        violate(key.str() + " n_eval < n_min");
                    if (kind == StrategyKind::uh && *log.n_eval < 1.0)
                        violate(key.str() + " uh n_eval < 1");
                    if (kind == StrategyKind::psa)
                    {
                        const auto& s = static_cast<const PsaCmaes&>(*strategy).psa_state();
                        if (strategy->lambda() < s.lambda_min || strategy->lambda() > s.lambda_max
                            || log.lambda < s.lambda_min || log.lambda > s.lambda_max)
                            violate(key.str() + " lambda out of bounds");
                    }
                }
            }
            catch (const NumericalDegeneracy&)
            {
                ++degenerate_runs;
            }
        }
        for (int k = 0; k < 1000; ++k)
        {
            const auto w = compute_weights(pick_lambda(rng));
            if (std::abs(w.w.sum() - 1.0) > 1e-12)
                violate("weights do not sum to 1");
        }
        std::string detail = fmt("%g iterations over %g runs, %g violations, %g runs ended by surfaced degeneracy", iterations,
                                 runs, violations, degenerate_runs);
        if (violations)
            detail += "; first: " + first;
        return {violations == 0, detail};
    }
}

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"noiseless-regression", noiseless_regression},
        {"multiplicative-noise-headline", multiplicative_headline},
        {"additive-noise-competitiveness", additive_competitiveness},
        {"correlation-estimator", correlation_estimator},
        {"snr-estimator", snr_estimator},
        {"stochastic-rounding", stochastic_rounding},
        {"target-correlation-values", target_values},
        {"utility-lemma-oracles", lemma_oracles},
        {"ecdf-oracle-equivalence", ecdf_oracle},
        {"weight-utility-recoverability", weight_recoverability},
        {"uh-delta-lim-enumeration", delta_lim_enumeration},
        {"invariant-fuzz", invariant_fuzz},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria)
    {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = check();
        }
        catch (const std::exception& e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += !o.passed;
        std::printf("%s %s: %s [%.1f s]\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), seconds);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
