#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "racma/gaussian.hpp"

namespace racma
{
    enum class FunctionId
    {
        sphere,
        ellipsoid,
        rosenbrock,
        ackley,
        schaffer,
        rastrigin,
        bohachevsky,
        griewank,
    };

    std::string_view function_name(FunctionId id);
    FunctionId parse_function(std::string_view name);
    const std::vector<FunctionId>& all_functions();

    struct BenchmarkFunction
    {
        FunctionId id = FunctionId::sphere;
        int d = 10;

        /// Throws InvalidArgument for d too small for the function.
        BenchmarkFunction(FunctionId id, int d);

        [[nodiscard]] double operator()(const Vector& x) const;
        [[nodiscard]] Vector optimum() const;
    };

    double eval_clean(const BenchmarkFunction& fn, const Vector& x);

    struct InitialDistribution
    {
        Vector m;
        double sigma = 1.0;
        Matrix C;
    };

    /// Starting mean, step-size and identity covariance of each benchmark.
    InitialDistribution initial_params(FunctionId id, int d);
    InitialDistribution initial_params(std::string_view name, int d);

    enum class NoiseKind
    {
        none,
        mult_gauss,
        mult_uniform,
        add_gauss,
    };

    std::string_view noise_name(NoiseKind kind);
    NoiseKind parse_noise(std::string_view name);

    struct NoiseModel
    {
        NoiseKind kind = NoiseKind::none;
        double sigma_n = 0.0;
    };

    /// Noise strengths swept per noise kind.
    const std::vector<double>& noise_grid(NoiseKind kind);

    /// "<function>:<d>:<noise>:<sigma_n>"; noise and sigma_n may be omitted.
    struct ProblemKey
    {
        FunctionId function = FunctionId::sphere;
        int d = 10;
        NoiseModel noise;

        static ProblemKey parse(std::string_view key);
        [[nodiscard]] std::string str() const;
    };

    /**
     * A clean objective f_x plus a noise model, counting every noisy call. Clean
     * evaluations never touch the counter: they are for logging only.
     */
    class NoisyProblem
    {
    public:
        using CleanFn = std::function<double(const Vector&)>;

        NoisyProblem(BenchmarkFunction fn, NoiseModel noise);
        explicit NoisyProblem(const ProblemKey& key);
        /// Arbitrary clean function, e.g. a constant for pure-noise experiments.
        NoisyProblem(std::string name, int d, CleanFn fn, NoiseModel noise, InitialDistribution initial);

        [[nodiscard]] double eval_clean(const Vector& x) const { return clean_(x); }
        double eval_noisy(const Vector& x, Rng& rng);

        [[nodiscard]] std::uint64_t evaluations() const { return eval_counter_; }
        [[nodiscard]] int dim() const { return d_; }
        [[nodiscard]] const NoiseModel& noise() const { return noise_; }
        [[nodiscard]] const InitialDistribution& initial() const { return initial_; }
        [[nodiscard]] const std::string& name() const { return name_; }

    private:
        std::string name_;
        int d_;
        CleanFn clean_;
        NoiseModel noise_;
        InitialDistribution initial_;
        std::uint64_t eval_counter_ = 0;
    };

    /// Applies the noise model to a clean value; the draw is the only use of `rng`.
    double apply_noise(const NoiseModel& noise, double clean, Rng& rng);
}

namespace racma
{
    /// lambda x n matrix of noisy values, drawn in (solution, reevaluation) order.
    Matrix evaluate_repeated(NoisyProblem& problem, const Matrix& solutions, int n, Rng& rng);
}
