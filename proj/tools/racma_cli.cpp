#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "racma/ecdf.hpp"
#include "racma/errors.hpp"
#include "racma/harness.hpp"
#include "racma/record_io.hpp"
#include "racma/utility.hpp"

namespace fs = std::filesystem;
using namespace racma;

namespace
{
    struct CommonFlags
    {
        std::string config;
        std::string problem;
        std::string noise;
        double sigma_n = 0.0;
        double budget = 0.0;
        int trials = 20;
        std::uint64_t seed = 1;
        std::string out;
        int jobs = 1;
        double target = 1e-3;
    };

    std::string read_text(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw InvalidArgument("cannot open config " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path output_dir(const std::string& flag)
    {
        if (!flag.empty())
            return flag;
        if (const char* env = std::getenv("RACMA_OUT_DIR"); env && *env)
            return env;
        return "results";
    }

    std::vector<std::string> split_list(const std::string& s)
    {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty())
                out.push_back(item);
        return out;
    }

    int initial_lambda(const ExperimentConfig& config)
    {
        NoisyProblem problem(config.problem);
        return make_strategy(config.strategy, problem, StreamFactory(config.seed), config.overrides)->lambda();
    }

    void run_and_store(const ExperimentConfig& config, const fs::path& dir)
    {
        const auto records = run_experiment(config);
        write_experiment(dir, config, records, initial_lambda(config));
        for (const auto& r : records)
        {
            const double f = r.rows.empty() ? r.f0 : r.rows.back().f_clean_at_mean;
            const auto evals = r.rows.empty() ? 0 : r.rows.back().evals_cum;
            std::printf("%s %s trial %d: %s after %llu evaluations, f(m) = %.6g\n", std::string(strategy_name(config.strategy)).c_str(),
                        config.problem.str().c_str(), r.trial, std::string(status_name(r.status)).c_str(),
                        static_cast<unsigned long long>(evals), f);
        }
        std::printf("wrote %s\n", dir.string().c_str());
    }

    void add_common(CLI::App* app, CommonFlags& f)
    {
        app->add_option("--config", f.config, "JSON config file (flags take precedence)");
        app->add_option("--noise", f.noise, "none | mult-gauss | mult-uniform | add-gauss");
        app->add_option("--budget", f.budget, "noisy evaluations per trial (default 1e6 * d)");
        app->add_option("--trials", f.trials, "independent trials")->check(CLI::PositiveNumber);
        app->add_option("--seed", f.seed, "base seed");
        app->add_option("--out", f.out, "output directory (default $RACMA_OUT_DIR or ./results)");
        app->add_option("--jobs", f.jobs, "trials run in parallel")->check(CLI::PositiveNumber);
        app->add_option("--target", f.target, "stop once f at the mean reaches this value");
    }

    ExperimentConfig base_config(const CLI::App* app, const CommonFlags& f)
    {
        ExperimentConfig c;
        if (!f.config.empty())
            c = config_from_json(read_text(f.config));
        if (app->count("--problem"))
        {
            const NoiseModel keep = c.problem.noise;
            c.problem = ProblemKey::parse(f.problem);
            if (std::count(f.problem.begin(), f.problem.end(), ':') < 3)
                c.problem.noise = keep;
        }
        if (app->count("--budget"))
        {
            if (!(f.budget >= 0.0))
                throw InvalidArgument("--budget must be non-negative");
            c.budget = static_cast<std::uint64_t>(f.budget);
        }
        if (app->count("--trials"))
            c.trials = f.trials;
        if (app->count("--seed"))
            c.seed = f.seed;
        if (app->count("--jobs"))
            c.jobs = f.jobs;
        if (app->count("--target"))
            c.target_f = f.target;
        return c;
    }
}

int main(int argc, char** argv)
{
    CLI::App app{"Noisy black-box optimization with CMA-ES variants"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    std::string run_strategy = "ra";
    auto* run = app.add_subcommand("run", "run one experiment and store CSV records plus a JSON summary");
    run->add_option("--strategy", run_strategy, "cmaes | ra | uh | psa | lra");
    run->add_option("--problem", run_flags.problem, "function[:d[:noise:sigma_n]], e.g. sphere:10");
    run->add_option("--sigma-n", run_flags.sigma_n, "noise strength");
    add_common(run, run_flags);

    CommonFlags sweep_flags;
    std::string sweep_strategies = "cmaes,ra,uh,psa,lra";
    std::string sweep_problems = "sphere:10";
    std::string sweep_noises = "mult-gauss,mult-uniform,add-gauss";
    std::string sweep_sigmas;
    auto* sweep = app.add_subcommand("sweep", "strategies x problems x noise strengths");
    sweep->add_option("--strategy", sweep_strategies, "comma-separated strategies");
    sweep->add_option("--problem", sweep_problems, "comma-separated function:d keys");
    sweep->add_option("--sigma-n", sweep_sigmas, "comma-separated strengths (default: the grid of each noise kind)");
    add_common(sweep, sweep_flags);
    sweep->get_option("--noise")->description("comma-separated noise kinds");

    std::vector<std::string> ecdf_inputs;
    std::string ecdf_out;
    int ecdf_targets = 500;
    int ecdf_points = 101;
    auto* ecdf = app.add_subcommand("ecdf", "aggregate stored records into an ECDF curve");
    ecdf->add_option("inputs", ecdf_inputs, "experiment directories written by run")->required();
    ecdf->add_option("--out", ecdf_out, "curve CSV (default <first input>/ecdf.csv)");
    ecdf->add_option("--targets", ecdf_targets, "number of log-spaced targets")->check(CLI::Range(2, 100000));
    ecdf->add_option("--points", ecdf_points, "number of evaluation checkpoints")->check(CLI::PositiveNumber);

    LemmaCheckConfig lemma;
    std::string lemma_out;
    auto* lemma_cmd = app.add_subcommand("lemma-check", "Monte-Carlo and exact checks of the utility lemmas");
    lemma_cmd->add_option("--samples", lemma.samples, "Monte-Carlo draws per estimate")->check(CLI::Range(10000L, 1000000000L));
    lemma_cmd->add_option("--seed", lemma.seed, "seed");
    lemma_cmd->add_option("--out", lemma_out, "also write the report as CSV");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run)
        {
            ExperimentConfig c = base_config(run, run_flags);
            if (run->count("--strategy") || run_flags.config.empty())
                c.strategy = parse_strategy(run_strategy);
            if (run->count("--noise"))
                c.problem.noise.kind = parse_noise(run_flags.noise);
            if (run->count("--sigma-n"))
                c.problem.noise.sigma_n = run_flags.sigma_n;
            c.validate();
            run_and_store(c, output_dir(run->count("--out") ? run_flags.out : c.out));
        }
        else if (*sweep)
        {
            const ExperimentConfig base = base_config(sweep, sweep_flags);
            const fs::path root = output_dir(sweep->count("--out") ? sweep_flags.out : base.out);
            const auto noises = split_list(sweep->count("--noise") ? sweep_flags.noise : sweep_noises);
            for (const auto& s : split_list(sweep_strategies))
                for (const auto& p : split_list(sweep_problems))
                    for (const auto& n : noises)
                    {
                        const NoiseKind kind = parse_noise(n);
                        std::vector<double> sigmas;
                        if (!sweep_sigmas.empty())
                            for (const auto& v : split_list(sweep_sigmas))
                                sigmas.push_back(std::stod(v));
                        else if (kind != NoiseKind::none)
                            sigmas = noise_grid(kind);
                        else
                            sigmas = {0.0};
                        for (const double sigma : sigmas)
                        {
                            ExperimentConfig c = base;
                            c.strategy = parse_strategy(s);
                            c.problem = ProblemKey::parse(p);
                            c.problem.noise = {kind, sigma};
                            c.validate();
                            std::string leaf = c.problem.str();
                            std::replace(leaf.begin(), leaf.end(), ':', '_');
                            run_and_store(c, root / std::string(strategy_name(c.strategy)) / leaf);
                        }
                    }
        }
        else if (*ecdf)
        {
            std::vector<RunRecord> records;
            double f0 = 0.0;
            double budget = 0.0;
            int lambda = 0;
            for (const auto& dir : ecdf_inputs)
            {
                ExperimentSummary summary;
                auto part = read_experiment(dir, &summary);
                if (lambda == 0 || summary.lambda < lambda)
                    lambda = summary.lambda;
                f0 = std::max(f0, summary.f0);
                budget = std::max(budget, static_cast<double>(summary.budget));
                records.insert(records.end(), part.begin(), part.end());
            }
            const auto targets = generate_targets(f0, ecdf_targets);
            const auto checkpoints = generate_checkpoints(std::max(1, lambda), std::max(budget, static_cast<double>(lambda)), ecdf_points);
            const auto curve = compute_ecdf(records, targets, checkpoints);
            const fs::path path = ecdf_out.empty() ? fs::path(ecdf_inputs.front()) / "ecdf.csv" : fs::path(ecdf_out);
            std::ofstream out(path);
            write_ecdf_csv(out, curve);
            if (!out)
                throw Error("failed to write " + path.string());
            std::printf("wrote %s (%zu trials, final proportion %.4f)\n", path.string().c_str(), records.size(),
                        curve.proportion.back());
        }
        else if (*lemma_cmd)
        {
            const auto report = lemma_checks(lemma);
            std::ostringstream csv;
            csv << "check,lhs,rhs,margin,standard_error,status\n";
            bool all = true;
            for (const auto& r : report)
            {
                char line[512];
                std::snprintf(line, sizeof line, "\"%s\",%.10g,%.10g,%.10g,%.3g,%s\n", r.name.c_str(), r.lhs, r.rhs, r.margin(),
                              r.standard_error, r.passed ? "PASS" : "FAIL");
                csv << line;
                all = all && r.passed;
            }
            std::cout << csv.str();
            if (!lemma_out.empty())
            {
                std::ofstream out(lemma_out);
                out << csv.str();
            }
            return all ? 0 : 1;
        }
    }
    catch (const std::exception& e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
