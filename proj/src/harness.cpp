#include "racma/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "racma/cmaes.hpp"
#include "racma/errors.hpp"
#include "racma/lra.hpp"
#include "racma/psa.hpp"
#include "racma/uh.hpp"

namespace racma
{
    std::string_view strategy_name(StrategyKind kind)
    {
        switch (kind)
        {
        case StrategyKind::cmaes:
            return "cmaes";
        case StrategyKind::ra:
            return "ra";
        case StrategyKind::uh:
            return "uh";
        case StrategyKind::psa:
            return "psa";
        case StrategyKind::lra:
            return "lra";
        }
        return "?";
    }

    StrategyKind parse_strategy(std::string_view name)
    {
        for (const auto k : {StrategyKind::cmaes, StrategyKind::ra, StrategyKind::uh, StrategyKind::psa, StrategyKind::lra})
            if (strategy_name(k) == name)
                return k;
        throw InvalidArgument("unknown strategy: " + std::string(name));
    }

    std::uint64_t ExperimentConfig::effective_budget() const
    {
        return budget.value_or(static_cast<std::uint64_t>(1000000) * static_cast<std::uint64_t>(problem.d));
    }

    void ExperimentConfig::validate() const
    {
        if (trials < 1)
            throw InvalidArgument("trials must be >= 1");
        if (jobs < 1)
            throw InvalidArgument("jobs must be >= 1");
        if (!(target_f > 0.0))
            throw InvalidArgument("target_f must be positive");
    }

    namespace
    {
        using nlohmann::json;

        template <typename T>
        void read_optional(const json& j, const char* key, std::optional<T>& out)
        {
            if (j.contains(key))
                out = j.at(key).get<T>();
        }

        template <typename T>
        void write_optional(json& j, const char* key, const std::optional<T>& value)
        {
            if (value)
                j[key] = *value;
        }

        std::string_view numerator_name(CorrelationNumerator n)
        {
            return n == CorrelationNumerator::plain ? "plain" : "fisher_at_read";
        }

        CorrelationNumerator parse_numerator(std::string_view name)
        {
            if (name == "plain")
                return CorrelationNumerator::plain;
            if (name == "fisher_at_read")
                return CorrelationNumerator::fisher_at_read;
            throw InvalidArgument("unknown correlation numerator: " + std::string(name));
        }

        std::string_view direction_name(ReevalDirection d)
        {
            return d == ReevalDirection::raise_when_below_target ? "raise_when_below_target" : "raise_when_above_target";
        }

        ReevalDirection parse_direction(std::string_view name)
        {
            if (name == "raise_when_below_target")
                return ReevalDirection::raise_when_below_target;
            if (name == "raise_when_above_target")
                return ReevalDirection::raise_when_above_target;
            throw InvalidArgument("unknown reevaluation direction: " + std::string(name));
        }

        std::string_view correction_name(StepSizeCorrection c)
        {
            return c == StepSizeCorrection::inverse ? "inverse" : "proportional";
        }

        StepSizeCorrection parse_correction(std::string_view name)
        {
            if (name == "inverse")
                return StepSizeCorrection::inverse;
            if (name == "proportional")
                return StepSizeCorrection::proportional;
            throw InvalidArgument("unknown step-size correction: " + std::string(name));
        }

        const char* const override_keys[] = {
            "lambda", "n_min", "rho_base", "reeval_gamma", "numerator", "reeval_direction", "step_correction", "lra_alpha", "lra_gamma", "beta_m", "beta_Sigma",
            "theta", "uh_alpha", "reev_fraction", "psa_lambda_max", "psa_n_mc", "psa_step_correction", "psa_strict_coefficient",
        };
        const char* const config_keys[] = {
            "strategy", "problem", "noise", "sigma_n", "budget", "trials", "seed", "out", "target_f", "jobs", "overrides",
        };

        template <std::size_t N>
        void reject_unknown(const json& j, const char* const (&known)[N], const char* where)
        {
            for (const auto& [key, value] : j.items())
            {
                bool found = false;
                for (const char* k : known)
                    found = found || key == k;
                if (!found)
                    throw InvalidArgument(std::string("unknown key in ") + where + ": " + key);
            }
        }
    }

    ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base)
    {
        json j;
        try
        {
            j = json::parse(text);
        }
        catch (const json::exception& e)
        {
            throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object())
            throw InvalidArgument("config must be a JSON object");
        reject_unknown(j, config_keys, "config");

        try
        {
            if (j.contains("strategy"))
                base.strategy = parse_strategy(j.at("strategy").get<std::string>());
            if (j.contains("problem"))
            {
                const auto key = j.at("problem").get<std::string>();
                const NoiseModel keep = base.problem.noise;
                base.problem = ProblemKey::parse(key);
                // "fn" and "fn:d" keys leave the noise settings alone
                if (std::count(key.begin(), key.end(), ':') < 3)
                    base.problem.noise = keep;
            }
            if (j.contains("noise"))
                base.problem.noise.kind = parse_noise(j.at("noise").get<std::string>());
            if (j.contains("sigma_n"))
                base.problem.noise.sigma_n = j.at("sigma_n").get<double>();
            if (j.contains("budget"))
                base.budget = static_cast<std::uint64_t>(j.at("budget").get<double>());
            if (j.contains("trials"))
                base.trials = j.at("trials").get<int>();
            if (j.contains("seed"))
                base.seed = j.at("seed").get<std::uint64_t>();
            if (j.contains("out"))
                base.out = j.at("out").get<std::string>();
            if (j.contains("target_f"))
                base.target_f = j.at("target_f").get<double>();
            if (j.contains("jobs"))
                base.jobs = j.at("jobs").get<int>();
            if (j.contains("overrides"))
            {
                const json& o = j.at("overrides");
                reject_unknown(o, override_keys, "overrides");
                auto& ov = base.overrides;
                read_optional(o, "lambda", ov.lambda);
                read_optional(o, "n_min", ov.n_min);
                read_optional(o, "rho_base", ov.rho_base);
                read_optional(o, "reeval_gamma", ov.reeval_gamma);
                if (o.contains("numerator"))
                    ov.numerator = parse_numerator(o.at("numerator").get<std::string>());
                if (o.contains("reeval_direction"))
                    ov.reeval_direction = parse_direction(o.at("reeval_direction").get<std::string>());
                if (o.contains("step_correction"))
                    ov.step_correction = parse_correction(o.at("step_correction").get<std::string>());
                read_optional(o, "lra_alpha", ov.lra_alpha);
                read_optional(o, "lra_gamma", ov.lra_gamma);
                read_optional(o, "beta_m", ov.beta_m);
                read_optional(o, "beta_Sigma", ov.beta_Sigma);
                read_optional(o, "theta", ov.theta);
                read_optional(o, "uh_alpha", ov.uh_alpha);
                read_optional(o, "reev_fraction", ov.reev_fraction);
                read_optional(o, "psa_lambda_max", ov.psa_lambda_max);
                read_optional(o, "psa_n_mc", ov.psa_n_mc);
                read_optional(o, "psa_step_correction", ov.psa_step_correction);
                read_optional(o, "psa_strict_coefficient", ov.psa_strict_coefficient);
            }
        }
        catch (const json::exception& e)
        {
            throw InvalidArgument(std::string("config has a value of the wrong type: ") + e.what());
        }
        base.validate();
        return base;
    }

    std::string config_to_json(const ExperimentConfig& config)
    {
        json j;
        j["strategy"] = std::string(strategy_name(config.strategy));
        j["problem"] = config.problem.str();
        j["budget"] = config.effective_budget();
        j["trials"] = config.trials;
        j["seed"] = config.seed;
        j["out"] = config.out;
        j["target_f"] = config.target_f;
        j["jobs"] = config.jobs;
        json o = json::object();
        const auto& ov = config.overrides;
        write_optional(o, "lambda", ov.lambda);
        write_optional(o, "n_min", ov.n_min);
        write_optional(o, "rho_base", ov.rho_base);
        write_optional(o, "reeval_gamma", ov.reeval_gamma);
        if (ov.numerator)
            o["numerator"] = std::string(numerator_name(*ov.numerator));
        if (ov.reeval_direction)
            o["reeval_direction"] = std::string(direction_name(*ov.reeval_direction));
        if (ov.step_correction)
            o["step_correction"] = std::string(correction_name(*ov.step_correction));
        write_optional(o, "lra_alpha", ov.lra_alpha);
        write_optional(o, "lra_gamma", ov.lra_gamma);
        write_optional(o, "beta_m", ov.beta_m);
        write_optional(o, "beta_Sigma", ov.beta_Sigma);
        write_optional(o, "theta", ov.theta);
        write_optional(o, "uh_alpha", ov.uh_alpha);
        write_optional(o, "reev_fraction", ov.reev_fraction);
        write_optional(o, "psa_lambda_max", ov.psa_lambda_max);
        write_optional(o, "psa_n_mc", ov.psa_n_mc);
        write_optional(o, "psa_step_correction", ov.psa_step_correction);
        write_optional(o, "psa_strict_coefficient", ov.psa_strict_coefficient);
        j["overrides"] = o;
        return j.dump(2);
    }

    std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const NoisyProblem& problem, StreamFactory streams,
                                            const StrategyOverrides& ov)
    {
        const int lambda = ov.lambda.value_or(0);
        auto lra_hyper = [&] {
            LraHyperparams h;
            h.alpha = ov.lra_alpha.value_or(h.alpha);
            h.gamma = ov.lra_gamma.value_or(h.gamma);
            h.beta_m = ov.beta_m.value_or(h.beta_m);
            h.beta_Sigma = ov.beta_Sigma.value_or(h.beta_Sigma);
            h.step_correction = ov.step_correction.value_or(h.step_correction);
            return h;
        };
        switch (kind)
        {
        case StrategyKind::cmaes:
            return std::make_unique<Cmaes>(problem, streams, CmaesOptions{lambda});
        case StrategyKind::lra:
            return std::make_unique<LraCmaes>(problem, streams, LraOptions{lambda, lra_hyper()});
        case StrategyKind::ra:
        {
            RaOptions o;
            o.lambda = lambda;
            o.lra = lra_hyper();
            if (ov.n_min)
                o.reeval.n_eval = o.reeval.n_min = *ov.n_min;
            o.reeval.rho_base = ov.rho_base.value_or(o.reeval.rho_base);
            o.reeval.gamma = ov.reeval_gamma.value_or(o.reeval.gamma);
            o.numerator = ov.numerator.value_or(o.numerator);
            o.direction = ov.reeval_direction.value_or(o.direction);
            return std::make_unique<RaCmaes>(problem, streams, o);
        }
        case StrategyKind::uh:
        {
            UhOptions o;
            o.lambda = lambda;
            o.config.theta = ov.theta.value_or(o.config.theta);
            o.config.alpha = ov.uh_alpha.value_or(o.config.alpha);
            o.config.reev_fraction = ov.reev_fraction.value_or(o.config.reev_fraction);
            return std::make_unique<UhCmaes>(problem, streams, o);
        }
        case StrategyKind::psa:
        {
            PsaOptions o;
            o.lambda_min = lambda;
            o.lambda_max = ov.psa_lambda_max.value_or(0);
            o.n_mc = ov.psa_n_mc.value_or(o.n_mc);
            o.step_size_correction = ov.psa_step_correction.value_or(o.step_size_correction);
            o.strict_coefficient = ov.psa_strict_coefficient.value_or(o.strict_coefficient);
            return std::make_unique<PsaCmaes>(problem, streams, o);
        }
        }
        throw InvalidArgument("unknown strategy kind");
    }

    RunRecord run_trial(const ExperimentConfig& config, int trial)
    {
        config.validate();
        const StreamFactory streams = StreamFactory(config.seed).child(static_cast<std::uint64_t>(trial));
        NoisyProblem problem(config.problem);
        auto strategy = make_strategy(config.strategy, problem, streams, config.overrides);
        const std::uint64_t budget = config.effective_budget();

        RunRecord record;
        record.trial = trial;
        record.seed = streams.seed();
        record.f0 = problem.eval_clean(strategy->params().mean());
        record.status = RunStatus::budget_exhausted;
        if (record.f0 <= config.target_f)
        {
            record.status = RunStatus::target_reached;
            return record;
        }

        while (problem.evaluations() < budget)
        {
            try
            {
                IterationLog row = strategy->iterate(problem);
                if (!std::isfinite(row.f_clean_at_mean))
                    throw NumericalDegeneracy("f at the mean is not finite");
                record.rows.push_back(std::move(row));
            }
            catch (const NumericalDegeneracy& e)
            {
                record.status = RunStatus::degeneracy;
                record.message = e.what();
                return record;
            }
            catch (const InvalidEvaluation& e)
            {
                record.status = RunStatus::degeneracy;
                record.message = e.what();
                return record;
            }
            if (record.rows.back().f_clean_at_mean <= config.target_f)
            {
                record.status = RunStatus::target_reached;
                return record;
            }
        }
        return record;
    }

    std::vector<RunRecord> run_experiment(const ExperimentConfig& config)
    {
        config.validate();
        std::vector<RunRecord> records(config.trials);
        std::vector<std::exception_ptr> errors(config.trials);
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int k = next++; k < config.trials; k = next++)
            {
                try
                {
                    records[k] = run_trial(config, k);
                }
                catch (...)
                {
                    errors[k] = std::current_exception();
                }
            }
        };
        const int threads = std::min(config.jobs, config.trials);
        if (threads <= 1)
            worker();
        else
        {
            std::vector<std::jthread> pool;
            for (int i = 0; i < threads; ++i)
                pool.emplace_back(worker);
        }
        for (const auto& e : errors)
            if (e)
                std::rethrow_exception(e);
        return records;
    }
}
