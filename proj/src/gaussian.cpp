#include "racma/gaussian.hpp"

#include <cmath>
#include <string>

#include "racma/errors.hpp"

namespace racma
{
    SymmetricRoots roots_from_spectrum(const Vector& eigenvalues, const Matrix& eigenvectors)
    {
        if (eigenvalues.size() == 0 || !eigenvalues.allFinite() || !eigenvectors.allFinite())
            throw NumericalDegeneracy("non-finite spectrum");

        const double largest = eigenvalues.maxCoeff();
        const double smallest = eigenvalues.minCoeff();
        if (!(smallest > 0.0))
            throw NumericalDegeneracy("matrix is not positive definite (smallest eigenvalue " + std::to_string(smallest) + ")");

        SymmetricRoots r;
        const double floor = eigenvalue_floor_ratio * largest;
        r.eigenvalues = eigenvalues;
        for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i)
        {
            if (r.eigenvalues[i] < floor)
            {
                r.eigenvalues[i] = floor;
                r.clamped = true;
            }
        }
        r.eigenvectors = eigenvectors;
        const Vector root = r.eigenvalues.cwiseSqrt();
        r.sqrt = eigenvectors * root.asDiagonal() * eigenvectors.transpose();
        r.inv_sqrt = eigenvectors * root.cwiseInverse().asDiagonal() * eigenvectors.transpose();
        r.sqrt = 0.5 * (r.sqrt + r.sqrt.transpose()).eval();
        r.inv_sqrt = 0.5 * (r.inv_sqrt + r.inv_sqrt.transpose()).eval();
        return r;
    }

    SymmetricRoots symmetric_roots(const Matrix& C)
    {
        if (C.rows() != C.cols() || C.rows() == 0)
            throw InvalidArgument("symmetric_roots: matrix must be square and non-empty");
        if (!C.allFinite())
            throw NumericalDegeneracy("matrix has non-finite entries");

        const Eigen::SelfAdjointEigenSolver<Matrix> solver(C);
        if (solver.info() != Eigen::Success)
            throw NumericalDegeneracy("eigendecomposition failed");
        return roots_from_spectrum(solver.eigenvalues(), solver.eigenvectors());
    }

    Matrix matrix_sqrt(const Matrix& C)
    {
        return symmetric_roots(C).sqrt;
    }

    GaussianParams::GaussianParams(Vector m, double sigma, Matrix C, SymmetricRoots roots)
        : m_(std::move(m)), sigma_(sigma), C_(std::move(C)), roots_(std::move(roots))
    {
    }

    GaussianParams GaussianParams::create(Vector m, double sigma, Matrix C)
    {
        if (C.rows() != m.size() || C.cols() != m.size())
            throw InvalidArgument("GaussianParams: covariance shape does not match mean");
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw NumericalDegeneracy("GaussianParams: step-size must be positive and finite");
        if (!m.allFinite())
            throw NumericalDegeneracy("GaussianParams: non-finite mean");

        Matrix sym = 0.5 * (C + C.transpose());
        auto roots = symmetric_roots(sym);
        if (roots.clamped)
            sym = roots.eigenvectors * roots.eigenvalues.asDiagonal() * roots.eigenvectors.transpose();
        return GaussianParams(std::move(m), sigma, std::move(sym), std::move(roots));
    }

    GaussianParams GaussianParams::isotropic(Vector m, double sigma)
    {
        const auto d = m.size();
        return create(std::move(m), sigma, Matrix::Identity(d, d));
    }

    GaussianParams GaussianParams::from_spectrum(Vector m, double sigma, const Vector& eigenvalues, const Matrix& eigenvectors)
    {
        if (eigenvectors.rows() != m.size() || eigenvalues.size() != m.size())
            throw InvalidArgument("GaussianParams: spectrum shape does not match mean");
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw NumericalDegeneracy("GaussianParams: step-size must be positive and finite");
        if (!m.allFinite())
            throw NumericalDegeneracy("GaussianParams: non-finite mean");

        auto roots = roots_from_spectrum(eigenvalues, eigenvectors);
        Matrix C = eigenvectors * roots.eigenvalues.asDiagonal() * eigenvectors.transpose();
        C = 0.5 * (C + C.transpose()).eval();
        return GaussianParams(std::move(m), sigma, std::move(C), std::move(roots));
    }

    GaussianParams GaussianParams::with_sigma(double sigma) const
    {
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw NumericalDegeneracy("GaussianParams: step-size must be positive and finite");
        return GaussianParams(m_, sigma, C_, roots_);
    }

    RecombinationWeights compute_weights(int lambda)
    {
        if (lambda < 2)
            throw InvalidArgument("compute_weights: lambda must be >= 2");

        const int mu = lambda / 2;
        const double base = std::log((lambda + 1) / 2.0);
        RecombinationWeights rw;
        rw.w.resize(mu);
        for (int i = 0; i < mu; ++i)
            rw.w[i] = base - std::log(i + 1.0);
        rw.w /= rw.w.sum();
        rw.mu_w = 1.0 / rw.w.squaredNorm();
        return rw;
    }

    SampledPopulation population_from_normals(const GaussianParams& params, Matrix z)
    {
        if (z.rows() != params.dim())
            throw InvalidArgument("population_from_normals: dimension mismatch");
        SampledPopulation pop;
        pop.y = params.sqrt_cov() * z;
        pop.x = (params.sigma() * pop.y).colwise() + params.mean();
        pop.z = std::move(z);
        return pop;
    }

    SampledPopulation sample_population(const GaussianParams& params, int lambda, Rng& rng)
    {
        if (lambda < 2)
            throw InvalidArgument("sample_population: lambda must be >= 2");
        Matrix z(params.dim(), lambda);
        for (int j = 0; j < lambda; ++j)
            for (int i = 0; i < params.dim(); ++i)
                z(i, j) = standard_normal(rng);
        return population_from_normals(params, std::move(z));
    }

    Vector vec_row_major(const Matrix& A)
    {
        Vector v(A.size());
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            for (Eigen::Index j = 0; j < A.cols(); ++j)
                v[k++] = A(i, j);
        return v;
    }

    Matrix unvec_row_major(const Vector& v, int d)
    {
        if (v.size() != static_cast<Eigen::Index>(d) * d)
            throw InvalidArgument("unvec_row_major: length is not d^2");
        Matrix A(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                A(i, j) = v[static_cast<Eigen::Index>(i) * d + j];
        return A;
    }

    Vector whiten_mean_direction(const GaussianParams& params, const Vector& delta_m)
    {
        if (delta_m.size() != params.dim())
            throw InvalidArgument("whiten_mean_direction: dimension mismatch");
        return params.inv_sqrt_cov() * delta_m / params.sigma();
    }

    Vector whiten_cov_direction(const GaussianParams& params, const Matrix& delta_Sigma)
    {
        if (delta_Sigma.rows() != params.dim() || delta_Sigma.cols() != params.dim())
            throw InvalidArgument("whiten_cov_direction: dimension mismatch");
        const Matrix inv_root = params.inv_sqrt_full_cov();
        return vec_row_major(inv_root * delta_Sigma * inv_root) / std::sqrt(2.0);
    }

    double expected_chi_norm(int d)
    {
        const double dd = d;
        return std::sqrt(dd) * (1.0 - 1.0 / (4.0 * dd) + 1.0 / (21.0 * dd * dd));
    }
}
