#include "racma/problems.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "racma/errors.hpp"

namespace racma
{
    namespace
    {
        constexpr double pi = std::numbers::pi;
        constexpr double e = std::numbers::e;

        double sphere(const Vector& x)
        {
            return x.squaredNorm();
        }

        double ellipsoid(const Vector& x)
        {
            const auto d = x.size();
            double s = 0.0;
            for (Eigen::Index i = 0; i < d; ++i)
            {
                const double scale = d == 1 ? 1.0 : std::pow(1000.0, static_cast<double>(i) / static_cast<double>(d - 1));
                s += (scale * x[i]) * (scale * x[i]);
            }
            return s;
        }

        double rosenbrock(const Vector& x)
        {
            double s = 0.0;
            for (Eigen::Index i = 0; i + 1 < x.size(); ++i)
            {
                const double a = x[i + 1] - x[i] * x[i];
                s += 100.0 * a * a + (x[i] - 1.0) * (x[i] - 1.0);
            }
            return s;
        }

        double ackley(const Vector& x)
        {
            const double d = static_cast<double>(x.size());
            const double mean_sq = x.squaredNorm() / d;
            const double mean_cos = (2.0 * pi * x.array()).cos().sum() / d;
            return 20.0 - 20.0 * std::exp(-0.2 * std::sqrt(mean_sq)) + e - std::exp(mean_cos);
        }

        double schaffer(const Vector& x)
        {
            double s = 0.0;
            for (Eigen::Index i = 0; i + 1 < x.size(); ++i)
            {
                const double r = x[i] * x[i] + x[i + 1] * x[i + 1];
                const double inner = std::sin(50.0 * std::pow(r, 0.1));
                s += std::pow(r, 0.25) * (inner * inner + 1.0);
            }
            return s;
        }

        double rastrigin(const Vector& x)
        {
            double s = 10.0 * static_cast<double>(x.size());
            for (Eigen::Index i = 0; i < x.size(); ++i)
                s += x[i] * x[i] - 10.0 * std::cos(2.0 * pi * x[i]);
            return s;
        }

        double bohachevsky(const Vector& x)
        {
            double s = 0.0;
            for (Eigen::Index i = 0; i + 1 < x.size(); ++i)
                s += x[i] * x[i] + 2.0 * x[i + 1] * x[i + 1]
                    - 0.3 * std::cos(3.0 * pi * x[i]) - 0.4 * std::cos(4.0 * pi * x[i + 1]) + 0.7;
            return s;
        }

        double griewank(const Vector& x)
        {
            double prod = 1.0;
            for (Eigen::Index i = 0; i < x.size(); ++i)
                prod *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
            return x.squaredNorm() / 4000.0 - prod + 1.0;
        }

        struct FunctionInfo
        {
            FunctionId id;
            std::string_view name;
            double (*fn)(const Vector&);
            int min_dim;
            double m0;
            double sigma0;
        };

        constexpr FunctionInfo table[] = {
            {FunctionId::sphere, "sphere", sphere, 1, 3.0, 2.0},
            {FunctionId::ellipsoid, "ellipsoid", ellipsoid, 1, 3.0, 2.0},
            {FunctionId::rosenbrock, "rosenbrock", rosenbrock, 2, 0.0, 0.1},
            {FunctionId::ackley, "ackley", ackley, 1, 15.5, 14.5},
            {FunctionId::schaffer, "schaffer", schaffer, 2, 55.0, 45.0},
            {FunctionId::rastrigin, "rastrigin", rastrigin, 1, 3.0, 2.0},
            {FunctionId::bohachevsky, "bohachevsky", bohachevsky, 2, 8.0, 7.0},
            {FunctionId::griewank, "griewank", griewank, 1, 305.0, 295.0},
        };

        const FunctionInfo& info(FunctionId id)
        {
            for (const auto& f : table)
                if (f.id == id)
                    return f;
            throw InvalidArgument("unknown function id");
        }

        double parse_double(std::string_view s, std::string_view what)
        {
            try
            {
                std::size_t used = 0;
                const std::string str(s);
                const double v = std::stod(str, &used);
                if (used != str.size())
                    throw InvalidArgument("");
                return v;
            }
            catch (const std::exception&)
            {
                throw InvalidArgument("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
            }
        }
    }

    std::string_view function_name(FunctionId id)
    {
        return info(id).name;
    }

    FunctionId parse_function(std::string_view name)
    {
        std::string lower(name);
        for (auto& c : lower)
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        for (const auto& f : table)
            if (f.name == lower)
                return f.id;
        throw InvalidArgument("unknown benchmark function '" + std::string(name) + "'");
    }

    const std::vector<FunctionId>& all_functions()
    {
        static const std::vector<FunctionId> ids = [] {
            std::vector<FunctionId> v;
            for (const auto& f : table)
                v.push_back(f.id);
            return v;
        }();
        return ids;
    }

    BenchmarkFunction::BenchmarkFunction(FunctionId id_, int d_) : id(id_), d(d_)
    {
        if (d < info(id).min_dim)
            throw InvalidArgument(std::string(function_name(id)) + " needs d >= " + std::to_string(info(id).min_dim));
    }

    double BenchmarkFunction::operator()(const Vector& x) const
    {
        if (x.size() != d)
            throw InvalidArgument("benchmark evaluation: dimension mismatch");
        return info(id).fn(x);
    }

    Vector BenchmarkFunction::optimum() const
    {
        return id == FunctionId::rosenbrock ? Vector::Ones(d) : Vector::Zero(d);
    }

    double eval_clean(const BenchmarkFunction& fn, const Vector& x)
    {
        return fn(x);
    }

    InitialDistribution initial_params(FunctionId id, int d)
    {
        const auto& f = info(id);
        return {Vector::Constant(d, f.m0), f.sigma0, Matrix::Identity(d, d)};
    }

    InitialDistribution initial_params(std::string_view name, int d)
    {
        return initial_params(parse_function(name), d);
    }

    std::string_view noise_name(NoiseKind kind)
    {
        switch (kind)
        {
        case NoiseKind::none:
            return "none";
        case NoiseKind::mult_gauss:
            return "mult-gauss";
        case NoiseKind::mult_uniform:
            return "mult-uniform";
        case NoiseKind::add_gauss:
            return "add-gauss";
        }
        return "none";
    }

    NoiseKind parse_noise(std::string_view name)
    {
        std::string key(name);
        std::replace(key.begin(), key.end(), '_', '-');
        for (const auto k : {NoiseKind::none, NoiseKind::mult_gauss, NoiseKind::mult_uniform, NoiseKind::add_gauss})
            if (noise_name(k) == key)
                return k;
        throw InvalidArgument("unknown noise kind '" + std::string(name) + "'");
    }

    const std::vector<double>& noise_grid(NoiseKind kind)
    {
        static const std::vector<double> none{0.0};
        static const std::vector<double> mult_gauss{0.5, 1.0, 1.5, 2.0};
        static const std::vector<double> mult_uniform{0.5, 1.0, 2.0, 4.0};
        static const std::vector<double> add_gauss{1.0, 10.0, 100.0, 1000.0};
        switch (kind)
        {
        case NoiseKind::mult_gauss:
            return mult_gauss;
        case NoiseKind::mult_uniform:
            return mult_uniform;
        case NoiseKind::add_gauss:
            return add_gauss;
        default:
            return none;
        }
    }

    ProblemKey ProblemKey::parse(std::string_view key)
    {
        std::vector<std::string_view> parts;
        std::size_t start = 0;
        while (true)
        {
            const auto pos = key.find(':', start);
            parts.push_back(key.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
            if (pos == std::string_view::npos)
                break;
            start = pos + 1;
        }
        if (parts.empty() || parts.size() > 4 || parts.size() == 3)
            throw InvalidArgument("problem key must be <function>[:<d>[:<noise>:<sigma_n>]], got '" + std::string(key) + "'");

        ProblemKey k;
        k.function = parse_function(parts[0]);
        if (parts.size() >= 2)
        {
            int d = 0;
            const auto [ptr, ec] = std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), d);
            if (ec != std::errc() || ptr != parts[1].data() + parts[1].size() || d < 1)
                throw InvalidArgument("invalid dimension in problem key '" + std::string(key) + "'");
            k.d = d;
        }
        if (parts.size() == 4)
        {
            k.noise.kind = parse_noise(parts[2]);
            k.noise.sigma_n = parse_double(parts[3], "sigma_n");
            if (!(k.noise.sigma_n >= 0.0))
                throw InvalidArgument("sigma_n must be nonnegative");
        }
        return k;
    }

    std::string ProblemKey::str() const
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%g", noise.sigma_n);
        return std::string(function_name(function)) + ":" + std::to_string(d) + ":" + std::string(noise_name(noise.kind)) + ":" + buf;
    }

    NoisyProblem::NoisyProblem(BenchmarkFunction fn, NoiseModel noise)
        : name_(function_name(fn.id)), d_(fn.d), clean_([fn](const Vector& x) { return fn(x); }), noise_(noise),
          initial_(initial_params(fn.id, fn.d))
    {
        if (!(noise.sigma_n >= 0.0))
            throw InvalidArgument("sigma_n must be nonnegative");
    }

    NoisyProblem::NoisyProblem(const ProblemKey& key) : NoisyProblem(BenchmarkFunction(key.function, key.d), key.noise)
    {
    }

    NoisyProblem::NoisyProblem(std::string name, int d, CleanFn fn, NoiseModel noise, InitialDistribution initial)
        : name_(std::move(name)), d_(d), clean_(std::move(fn)), noise_(noise), initial_(std::move(initial))
    {
        if (d < 1 || initial_.m.size() != d)
            throw InvalidArgument("NoisyProblem: inconsistent dimension");
        if (!(noise.sigma_n >= 0.0))
            throw InvalidArgument("sigma_n must be nonnegative");
    }

    double apply_noise(const NoiseModel& noise, double clean, Rng& rng)
    {
        switch (noise.kind)
        {
        case NoiseKind::none:
            return clean;
        case NoiseKind::mult_gauss:
            return clean * (1.0 + noise.sigma_n * standard_normal(rng));
        case NoiseKind::mult_uniform:
            return clean * (1.0 + noise.sigma_n * std::uniform_real_distribution<double>(-1.0, 1.0)(rng));
        case NoiseKind::add_gauss:
            return clean + noise.sigma_n * standard_normal(rng);
        }
        return clean;
    }

    double NoisyProblem::eval_noisy(const Vector& x, Rng& rng)
    {
        ++eval_counter_;
        return apply_noise(noise_, clean_(x), rng);
    }
}

namespace racma
{
    Matrix evaluate_repeated(NoisyProblem& problem, const Matrix& solutions, int n, Rng& rng)
    {
        if (n < 1)
            throw InvalidArgument("evaluate_repeated: n must be >= 1");
        Matrix values(solutions.cols(), n);
        for (Eigen::Index i = 0; i < solutions.cols(); ++i)
        {
            const Vector x = solutions.col(i);
            for (int j = 0; j < n; ++j)
                values(i, j) = problem.eval_noisy(x, rng);
        }
        return values;
    }
}
