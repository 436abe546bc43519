#pragma once

#include <Eigen/Dense>

#include "racma/rng.hpp"

namespace racma
{
    using Vector = Eigen::VectorXd;
    using Matrix = Eigen::MatrixXd;

    /// Eigenvalues below this fraction of the largest one are lifted to it.
    inline constexpr double eigenvalue_floor_ratio = 1e-20;

    /// Symmetric square root and inverse square root from one eigendecomposition.
    struct SymmetricRoots
    {
        Vector eigenvalues;   // ascending, after clamping
        Matrix eigenvectors;  // columns
        Matrix sqrt;
        Matrix inv_sqrt;
        bool clamped = false;
    };

    /**
     * Eigendecomposition route to S = C^{1/2} and C^{-1/2}. Throws NumericalDegeneracy
     * when C is non-finite or has an eigenvalue <= 0. Positive eigenvalues below
     * eigenvalue_floor_ratio * max are clamped and reported through `clamped`.
     */
    SymmetricRoots symmetric_roots(const Matrix& C);

    /// Roots built from an already known spectrum (eigenvalues must be > 0).
    SymmetricRoots roots_from_spectrum(const Vector& eigenvalues, const Matrix& eigenvectors);

    Matrix matrix_sqrt(const Matrix& C);

    /**
     * The search distribution N(m, sigma^2 C). Always holds a symmetric positive
     * definite C together with its cached square root and inverse square root.
     */
    class GaussianParams
    {
    public:
        static GaussianParams create(Vector m, double sigma, Matrix C);
        static GaussianParams isotropic(Vector m, double sigma);
        /// C = V diag(eigenvalues) V^T, skipping a second decomposition.
        static GaussianParams from_spectrum(Vector m, double sigma, const Vector& eigenvalues, const Matrix& eigenvectors);

        [[nodiscard]] int dim() const { return static_cast<int>(m_.size()); }
        [[nodiscard]] const Vector& mean() const { return m_; }
        [[nodiscard]] double sigma() const { return sigma_; }
        [[nodiscard]] const Matrix& cov() const { return C_; }
        [[nodiscard]] const Matrix& sqrt_cov() const { return roots_.sqrt; }
        [[nodiscard]] const Matrix& inv_sqrt_cov() const { return roots_.inv_sqrt; }
        [[nodiscard]] const Vector& cov_eigenvalues() const { return roots_.eigenvalues; }
        [[nodiscard]] bool clamped() const { return roots_.clamped; }

        /// Sigma = sigma^2 C.
        [[nodiscard]] Matrix full_cov() const { return sigma_ * sigma_ * C_; }
        /// Sigma^{-1/2} = C^{-1/2} / sigma.
        [[nodiscard]] Matrix inv_sqrt_full_cov() const { return roots_.inv_sqrt / sigma_; }

        [[nodiscard]] GaussianParams with_sigma(double sigma) const;

    private:
        GaussianParams(Vector m, double sigma, Matrix C, SymmetricRoots roots);

        Vector m_;
        double sigma_;
        Matrix C_;
        SymmetricRoots roots_;
    };

    struct RecombinationWeights
    {
        Vector w;
        double mu_w = 1.0;

        [[nodiscard]] int mu() const { return static_cast<int>(w.size()); }
    };

    /// Positive log-rank weights over the mu = floor(lambda/2) best solutions.
    RecombinationWeights compute_weights(int lambda);

    /// Columns are individuals: z ~ N(0, I), y = sqrt(C) z, x = m + sigma y.
    struct SampledPopulation
    {
        Matrix z;
        Matrix y;
        Matrix x;

        [[nodiscard]] int size() const { return static_cast<int>(z.cols()); }
    };

    SampledPopulation sample_population(const GaussianParams& params, int lambda, Rng& rng);

    /// Deterministic part of sampling, for externally supplied standard normal draws.
    SampledPopulation population_from_normals(const GaussianParams& params, Matrix z);

    /// (A_11, ..., A_1d, A_21, ..., A_dd).
    Vector vec_row_major(const Matrix& A);
    Matrix unvec_row_major(const Vector& v, int d);

    /// Sigma^{-1/2} delta_m.
    Vector whiten_mean_direction(const GaussianParams& params, const Vector& delta_m);

    /// vec(Sigma^{-1/2} delta_Sigma Sigma^{-1/2}) / sqrt(2).
    Vector whiten_cov_direction(const GaussianParams& params, const Matrix& delta_Sigma);

    /// sqrt(d) (1 - 1/(4d) + 1/(21 d^2)).
    double expected_chi_norm(int d);
}
