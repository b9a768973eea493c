#ifndef STATEPREP_LINALG_HPP
#define STATEPREP_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>

#include <Eigen/Dense>

namespace stateprep
{

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

// sin(x)/x with the removable singularity filled in.
inline double sinc(double x)
{
    if (std::abs(x) < 1e-8) {
        return 1.0 - x * x / 6.0;
    }
    return std::sin(x) / x;
}

inline double hermiticity_error(const CMatrix &m)
{
    if (m.rows() != m.cols() || m.size() == 0) {
        return std::numeric_limits<double>::infinity();
    }
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// Eigenvalues of the Hermitian part, ascending.
inline RVector hermitian_eigenvalues(const CMatrix &m)
{
    const CMatrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

// Half the nuclear norm of the difference.
inline double trace_distance(const CMatrix &a, const CMatrix &b)
{
    return 0.5 * hermitian_eigenvalues(a - b).cwiseAbs().sum();
}

inline double max_abs_diff(const CMatrix &a, const CMatrix &b)
{
    return (a - b).cwiseAbs().maxCoeff();
}

// Largest singular value.
inline double spectral_norm(const CMatrix &m)
{
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
}

inline CVector complex_gaussian_vector(Eigen::Index n, std::mt19937_64 &rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        v(i) = cplx(re, im);
    }
    return v;
}

inline CMatrix complex_gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            m(i, j) = cplx(re, im);
        }
    }
    return m;
}

// Haar-distributed unitary via QR of a complex Ginibre matrix, with the
// phases of R's diagonal folded back into Q.
inline CMatrix random_unitary(Eigen::Index n, std::mt19937_64 &rng)
{
    const CMatrix z = complex_gaussian_matrix(n, n, rng);
    Eigen::HouseholderQR<CMatrix> qr(z);
    CMatrix q = qr.householderQ();
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j) {
        const double mag = std::abs(r(j, j));
        if (mag > 0.0) {
            q.col(j) *= r(j, j) / mag;
        }
    }
    return q;
}

// A^H A for an n x rank complex Gaussian A, hermitized.
inline CMatrix random_psd(Eigen::Index n, Eigen::Index rank, std::mt19937_64 &rng)
{
    const CMatrix a = complex_gaussian_matrix(rank, n, rng);
    CMatrix e = a.adjoint() * a;
    return 0.5 * (e + e.adjoint());
}

// Deterministic per-item stream derived from a base seed.
inline std::mt19937_64 split_rng(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream & 0xffffffffu),
                      static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

} // namespace stateprep

#endif // STATEPREP_LINALG_HPP
