#ifndef STATEPREP_MODES_HPP
#define STATEPREP_MODES_HPP

// Frequency grids, spectral amplitudes, polarization algebra and the density
// matrix utilities shared by every physics module.
//
// Units: c = 1 throughout, so frequencies are inverse lengths and times are
// lengths. Spectral sums are plain grid sums with no dk measure; every
// physical output is normalized afterwards.

#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace stateprep
{

// Uniform grid of strictly positive frequencies k_i = k_min + i dk.
class FrequencyGrid
{
public:
    FrequencyGrid(double k_min, double dk, int n) : k_min_(k_min), dk_(dk), n_(n)
    {
        if (!(dk > 0.0) || !std::isfinite(dk)) {
            throw ValidationError("FrequencyGrid: dk must be positive and finite");
        }
        if (n < 2) {
            throw ValidationError("FrequencyGrid: n must be at least 2");
        }
        if (!(k_min > 0.0) || !std::isfinite(k_min)) {
            throw ValidationError("FrequencyGrid: k_min must be positive (all frequencies > 0)");
        }
    }

    double k_min() const { return k_min_; }
    double k_max() const { return k_min_ + (n_ - 1) * dk_; }
    double dk() const { return dk_; }
    int size() const { return n_; }
    double operator[](int i) const { return k_min_ + i * dk_; }
    double span() const { return k_max() - k_min_; }

    bool contains(double k) const { return k >= k_min_ - 1e-12 * dk_ && k <= k_max() + 1e-12 * dk_; }

    // Index of the grid point nearest to k (clamped).
    int nearest_index(double k) const
    {
        const long idx = std::lround((k - k_min_) / dk_);
        return static_cast<int>(std::clamp<long>(idx, 0, n_ - 1));
    }

    bool on_grid(double k, double tol_fraction = 1e-6) const
    {
        return contains(k) && std::abs((*this)[nearest_index(k)] - k) <= tol_fraction * dk_;
    }

    friend bool operator==(const FrequencyGrid &a, const FrequencyGrid &b)
    {
        return a.n_ == b.n_ && std::abs(a.k_min_ - b.k_min_) <= 1e-12 * a.dk_ &&
               std::abs(a.dk_ - b.dk_) <= 1e-12 * a.dk_;
    }

    std::string describe() const
    {
        std::ostringstream out;
        out << "grid[k_min=" << k_min_ << ", dk=" << dk_ << ", n=" << n_ << "]";
        return out.str();
    }

private:
    double k_min_;
    double dk_;
    int n_;
};

// One complex amplitude per grid point.
struct SpectralVector
{
    FrequencyGrid grid;
    CVector values;

    SpectralVector(FrequencyGrid g, CVector v) : grid(g), values(std::move(v))
    {
        if (values.size() != grid.size()) {
            throw ValidationError("SpectralVector: value count does not match grid size");
        }
    }

    double norm() const { return values.norm(); }

    SpectralVector normalized() const
    {
        const double nrm = values.norm();
        if (!(nrm > 1e-300)) {
            throw PhysicsError("SpectralVector: cannot normalize a zero vector");
        }
        return SpectralVector(grid, values / nrm);
    }
};

// f(k_a, k_b) over grid_a x grid_b (rows follow grid_a).
struct JointSpectralAmplitude
{
    FrequencyGrid grid_a;
    FrequencyGrid grid_b;
    CMatrix values;

    JointSpectralAmplitude(FrequencyGrid a, FrequencyGrid b, CMatrix v)
        : grid_a(a), grid_b(b), values(std::move(v))
    {
        if (values.rows() != grid_a.size() || values.cols() != grid_b.size()) {
            throw ValidationError("JointSpectralAmplitude: matrix shape does not match grids");
        }
    }

    double norm() const { return values.norm(); }

    JointSpectralAmplitude normalized() const
    {
        const double nrm = values.norm();
        if (!(nrm > 1e-300)) {
            throw PhysicsError("JointSpectralAmplitude: cannot normalize a zero amplitude");
        }
        return JointSpectralAmplitude(grid_a, grid_b, values / nrm);
    }

    // Sum over the second variable of |f|^2, indexed by grid_a.
    RVector marginal_a() const { return values.cwiseAbs2().rowwise().sum(); }
    RVector marginal_b() const { return values.cwiseAbs2().colwise().sum().transpose(); }
};

// Two components in the {e_+, e_-} basis.
struct PolarizationVector
{
    cplx plus{1.0, 0.0};
    cplx minus{0.0, 0.0};

    static PolarizationVector e_plus() { return {cplx(1.0), cplx(0.0)}; }
    static PolarizationVector e_minus() { return {cplx(0.0), cplx(1.0)}; }

    // Linear polarization at angle a from e_+: cos(a) e_+ + sin(a) e_-.
    static PolarizationVector linear(double angle) { return {cplx(std::cos(angle)), cplx(std::sin(angle))}; }

    double norm() const { return std::sqrt(std::norm(plus) + std::norm(minus)); }

    PolarizationVector normalized() const
    {
        const double nrm = norm();
        if (!(nrm > 1e-300)) {
            throw NumericError("PolarizationVector: zero vector cannot be normalized");
        }
        return {plus / nrm, minus / nrm};
    }

    Eigen::Vector2cd as_vector() const { return Eigen::Vector2cd(plus, minus); }
};

// Conjugate-linear in the first argument; e1 . e2 for real vectors.
inline cplx polarization_dot(const PolarizationVector &e1, const PolarizationVector &e2)
{
    return std::conj(e1.plus) * e2.plus + std::conj(e1.minus) * e2.minus;
}

// Polarization left on the partner photon once a detector with analyzer e1
// fires on one member of  xi_+ |+>|-> + xi_- |->|+>:
//   sum_sigma e_sigma xi_{-sigma} d(e1, e_{-sigma}),  normalized.
// With xi_+ = -xi_- the result is orthogonal to e1.
inline PolarizationVector conditioned_polarization(const PolarizationVector &e1, cplx xi_plus, cplx xi_minus)
{
    if (std::abs(std::abs(xi_plus) - 1.0) > 1e-12 || std::abs(std::abs(xi_minus) - 1.0) > 1e-12) {
        throw ValidationError("conditioned_polarization: xi_+ and xi_- must be unit phases");
    }
    const PolarizationVector out{xi_minus * polarization_dot(e1, PolarizationVector::e_minus()),
                                 xi_plus * polarization_dot(e1, PolarizationVector::e_plus())};
    if (!(out.norm() > 1e-300)) {
        throw NumericError("conditioned_polarization: analyzer produced a zero polarization state");
    }
    return out.normalized();
}

// Hermitian, unit-trace, PSD matrix over a labelled mode basis.
struct DensityMatrix
{
    CMatrix values;
    std::string label;

    int basis_size() const { return static_cast<int>(values.rows()); }
    cplx trace() const { return values.trace(); }
};

struct DensityDiagnostics
{
    double hermiticity = 0.0;
    double trace_error = 0.0;
    double min_eigenvalue = 0.0;
    double purity = 0.0;

    bool valid(double tol = 1e-10) const
    {
        return hermiticity <= tol && trace_error <= tol && min_eigenvalue >= -tol;
    }
};

inline DensityDiagnostics diagnose(const DensityMatrix &rho)
{
    DensityDiagnostics d;
    d.hermiticity = hermiticity_error(rho.values);
    d.trace_error = std::abs(rho.values.trace() - cplx(1.0));
    if (rho.values.rows() == rho.values.cols() && rho.values.size() > 0) {
        d.min_eigenvalue = hermitian_eigenvalues(rho.values).minCoeff();
        d.purity = (rho.values * rho.values).trace().real();
    }
    return d;
}

inline void require_hermitian(const CMatrix &m, const char *what, double tol = 1e-10)
{
    if (m.rows() != m.cols()) {
        throw ValidationError(std::string(what) + ": matrix is not square");
    }
    const double err = hermiticity_error(m);
    if (err > tol * std::max(1.0, m.cwiseAbs().maxCoeff())) {
        std::ostringstream msg;
        msg << what << ": matrix is not Hermitian (max |M - M^H| = " << err << ")";
        throw ValidationError(msg.str());
    }
}

// Rescale to unit trace; hermitizes away rounding noise.
inline DensityMatrix normalize(const DensityMatrix &rho)
{
    if (rho.values.rows() != rho.values.cols() || rho.values.size() == 0) {
        throw ValidationError("normalize: density matrix must be square and non-empty");
    }
    const double tr = rho.values.trace().real();
    if (!(tr > 1e-300) || !std::isfinite(tr)) {
        throw PhysicsError("normalize: degenerate state (trace <= 0)");
    }
    CMatrix v = rho.values / tr;
    v = 0.5 * (v + v.adjoint()).eval();
    return DensityMatrix{std::move(v), rho.label};
}

inline DensityMatrix pure_density(const CVector &psi, std::string label)
{
    const double nrm = psi.norm();
    if (!(nrm > 1e-300)) {
        throw PhysicsError("pure_density: zero state vector");
    }
    const CVector u = psi / nrm;
    return DensityMatrix{u * u.adjoint(), std::move(label)};
}

// tr(rho^2).
inline double purity(const DensityMatrix &rho)
{
    require_hermitian(rho.values, "purity");
    // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
    return rho.values.squaredNorm();
}

// <chi|rho|chi> for a normalized chi.
inline double fidelity_with_pure(const DensityMatrix &rho, const CVector &chi)
{
    if (chi.size() != rho.values.rows()) {
        throw ValidationError("fidelity_with_pure: state dimension does not match density matrix");
    }
    const double nrm = chi.norm();
    if (std::abs(nrm - 1.0) > 1e-9) {
        throw ValidationError("fidelity_with_pure: reference state is not normalized");
    }
    return (chi.adjoint() * rho.values * chi)(0, 0).real();
}

inline double fidelity_with_pure(const DensityMatrix &rho, const SpectralVector &chi)
{
    return fidelity_with_pure(rho, chi.values);
}

// -sum w log2 w, with 0 log 0 = 0.
inline double shannon_bits(const std::vector<double> &weights)
{
    double total = 0.0;
    for (const double w : weights) {
        if (w < 0.0 || !std::isfinite(w)) {
            throw ValidationError("shannon_bits: weights must be non-negative");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ValidationError("shannon_bits: weights must sum to 1");
    }
    double bits = 0.0;
    for (const double w : weights) {
        if (w > 0.0) {
            bits -= w * std::log2(w);
        }
    }
    return bits;
}

// Normalized amplitude exp(-(k - center)^2 / (4 width^2)); |values|^2 then
// has standard deviation `width`.
inline SpectralVector gaussian_spectrum(const FrequencyGrid &grid, double center, double width,
                                        Warnings *warnings = nullptr)
{
    if (!grid.contains(center)) {
        throw DomainError("gaussian_spectrum: center lies outside the grid");
    }
    if (!(width > 0.0)) {
        throw DomainError("gaussian_spectrum: width must be positive");
    }
    if (width > 0.1 * center) {
        warn(warnings, "gaussian_spectrum: width is not small against center (quasimonochromatic assumption)");
    }
    CVector v(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        const double x = grid[i] - center;
        v(i) = std::exp(-x * x / (4.0 * width * width));
    }
    return SpectralVector(grid, v).normalized();
}

inline SpectralVector flat_spectrum(const FrequencyGrid &grid)
{
    return SpectralVector(grid, CVector::Ones(grid.size())).normalized();
}

// Standard deviation of a weight profile over the grid.
inline double rms_width(const FrequencyGrid &grid, const RVector &weights)
{
    const double total = weights.sum();
    if (!(total > 0.0)) {
        throw PhysicsError("rms_width: empty weight profile");
    }
    double mean = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        mean += weights(i) * grid[i];
    }
    mean /= total;
    double var = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        const double x = grid[i] - mean;
        var += weights(i) * x * x;
    }
    return std::sqrt(var / total);
}

// Two-dimensional Gaussian amplitude with correlation coefficient r between
// the two frequencies. The Schmidt number of the normalized state is
// 1/sqrt(1 - r^2) in the continuum.
inline JointSpectralAmplitude correlated_gaussian_jsa(const FrequencyGrid &grid_a, const FrequencyGrid &grid_b,
                                                      double center_a, double center_b, double width_a,
                                                      double width_b, double correlation)
{
    if (!(width_a > 0.0) || !(width_b > 0.0)) {
        throw DomainError("correlated_gaussian_jsa: widths must be positive");
    }
    if (!(std::abs(correlation) < 1.0)) {
        throw DomainError("correlated_gaussian_jsa: correlation must lie in (-1, 1)");
    }
    const double denom = 4.0 * (1.0 - correlation * correlation);
    CMatrix f(grid_a.size(), grid_b.size());
    for (int i = 0; i < grid_a.size(); ++i) {
        const double x = (grid_a[i] - center_a) / width_a;
        for (int j = 0; j < grid_b.size(); ++j) {
            const double y = (grid_b[j] - center_b) / width_b;
            f(i, j) = std::exp(-(x * x - 2.0 * correlation * x * y + y * y) / denom);
        }
    }
    return JointSpectralAmplitude(grid_a, grid_b, f).normalized();
}

inline JointSpectralAmplitude separable_jsa(const SpectralVector &a, const SpectralVector &b)
{
    return JointSpectralAmplitude(a.grid, b.grid, a.values * b.values.transpose()).normalized();
}

} // namespace stateprep

#endif // STATEPREP_MODES_HPP
