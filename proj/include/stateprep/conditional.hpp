#ifndef STATEPREP_CONDITIONAL_HPP
#define STATEPREP_CONDITIONAL_HPP

// State of the left-moving photon L after a gated trigger fires on its
// right-moving partner R. For the pair
//   sum_{kK} f(k,K) (xi_+ |k e_+>_R |K e_->_L + xi_- |k e_->_R |K e_+>_L)
// and a trigger with response p(k), analyzer e_1 and gate (T_1, T_m):
//   rho_L(K,K') ~ sum_{kk'} G(k,K) conj(G(k',K')) sinc((k - k') T_m / 2),
//   G(k,K) = p(k) f(k,K) e^{-ik tau_1},   tau_1 = T_1 - x_1,
// which is evaluated as G^T S conj(G) with S the real sinc matrix.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "detector.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "modes.hpp"
#include "parallel.hpp"

namespace stateprep
{

struct TwoPhotonState
{
    JointSpectralAmplitude jsa; // R grid x L grid
    cplx xi_plus{1.0, 0.0};
    cplx xi_minus{-1.0, 0.0};

    TwoPhotonState(JointSpectralAmplitude f, cplx xp = cplx(1.0), cplx xm = cplx(-1.0))
        : jsa(std::move(f)), xi_plus(xp), xi_minus(xm)
    {
        if (std::abs(jsa.norm() - 1.0) > 1e-12) {
            throw ValidationError("TwoPhotonState: joint spectral amplitude must be normalized");
        }
        if (std::abs(std::abs(xi_plus) - 1.0) > 1e-12 || std::abs(std::abs(xi_minus) - 1.0) > 1e-12) {
            throw ValidationError("TwoPhotonState: xi_+ and xi_- must be unit phases");
        }
    }

    const FrequencyGrid &grid_r() const { return jsa.grid_a; }
    const FrequencyGrid &grid_l() const { return jsa.grid_b; }
};

struct ConditionalResult
{
    DensityMatrix rho;
    PolarizationVector pol;
    ThetaInfo theta;
    double purity = 0.0;
    std::optional<SpectralVector> pure_state;
    Warnings warnings;
};

// Purity above which a conditional state is reported as a pure state vector.
inline constexpr double kPureReportThreshold = 0.999;

namespace detail
{

inline void require_trigger_grid(const TwoPhotonState &state, const DetectorResponse &trigger, const char *what)
{
    if (!(trigger.grid() == state.grid_r())) {
        throw ValidationError(std::string(what) + ": trigger grid differs from the R grid of the state");
    }
}

// G(k,K) = p(k) f(k,K) e^{-ik tau}.
inline CMatrix heralding_matrix(const CMatrix &f, const FrequencyGrid &grid, const CVector &p, double tau)
{
    CMatrix g(f.rows(), f.cols());
    for (int i = 0; i < grid.size(); ++i) {
        const cplx w = p(i) * std::exp(cplx(0.0, -grid[i] * tau));
        g.row(i) = w * f.row(i);
    }
    return g;
}

// Unnormalized G^T S conj(G), with S the sinc matrix over the rows of G.
inline CMatrix gated_density(const CMatrix &g, double spacing, double duration)
{
    const Eigen::MatrixXd s = sinc_matrix(static_cast<int>(g.rows()), spacing, duration);
    CMatrix rho = g.transpose() * (s.cast<cplx>() * g.conjugate());
    return 0.5 * (rho + rho.adjoint());
}

inline void require_detection(const CMatrix &g, const char *what)
{
    if (!(g.norm() > 1e-300)) {
        throw PhysicsError(std::string(what) + ": no detection (trigger response misses the amplitude support)");
    }
}

// Leading eigenvector with its largest component rotated to be real positive.
inline CVector dominant_state(const CMatrix &rho)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (rho + rho.adjoint()));
    CVector v = solver.eigenvectors().col(rho.rows() - 1);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    v *= std::conj(v(arg)) / std::abs(v(arg));
    return v;
}

} // namespace detail

// RMS width of the R marginal sum_K |f(k,K)|^2; the packet width entering theta.
inline double trigger_packet_width(const TwoPhotonState &state)
{
    return rms_width(state.grid_r(), state.jsa.marginal_a());
}

inline ConditionalResult conditional_density_matrix(const TwoPhotonState &state, const DetectorResponse &trigger,
                                                    const MeasurementWindow &window)
{
    detail::require_trigger_grid(state, trigger, "conditional_density_matrix");
    const double tau = trigger.retarded(window.center);
    const CMatrix g = detail::heralding_matrix(state.jsa.values, state.grid_r(), trigger.response.values, tau);
    detail::require_detection(g, "conditional_density_matrix");

    ConditionalResult out;
    const CMatrix raw = detail::gated_density(g, state.grid_r().dk(), window.duration);
    out.rho = normalize(DensityMatrix{raw, "L frequency " + state.grid_l().describe()});
    out.pol = conditioned_polarization(trigger.analyzer, state.xi_plus, state.xi_minus);
    out.theta = theta_parameter(trigger_packet_width(state), window);
    out.purity = purity(out.rho);
    if (out.purity >= kPureReportThreshold) {
        out.pure_state = SpectralVector(state.grid_l(), detail::dominant_state(out.rho.values));
    }
    if (out.theta.regime == Regime::Intermediate) {
        out.warnings.push_back("conditional_density_matrix: theta is neither short nor long; the state is partially mixed");
    }
    return out;
}

// Short-gate limit: chi(K) ~ sum_k p(k) f(k,K) e^{-ik tau_1}.
inline SpectralVector short_limit_state(const TwoPhotonState &state, const DetectorResponse &trigger,
                                        double trigger_time)
{
    detail::require_trigger_grid(state, trigger, "short_limit_state");
    const double tau = trigger.retarded(trigger_time);
    const CMatrix g = detail::heralding_matrix(state.jsa.values, state.grid_r(), trigger.response.values, tau);
    const CVector chi = g.colwise().sum().transpose();
    if (!(chi.norm() > 1e-300)) {
        throw PhysicsError("short_limit_state: no detection (conditional amplitude vanishes)");
    }
    return SpectralVector(state.grid_l(), chi).normalized();
}

// Long-gate limit: rho_L(K,K') ~ sum_k |p(k)|^2 f(k,K) conj(f(k,K')).
// The trigger time drops out.
inline DensityMatrix long_limit_density_matrix(const TwoPhotonState &state, const DetectorResponse &trigger)
{
    detail::require_trigger_grid(state, trigger, "long_limit_density_matrix");
    const RVector weight = trigger.response.values.cwiseAbs2();
    const CMatrix &f = state.jsa.values;
    const CMatrix raw = f.transpose() * (weight.cast<cplx>().asDiagonal() * f.conjugate());
    if (!(raw.trace().real() > 1e-300)) {
        throw PhysicsError("long_limit_density_matrix: no detection (zero trace)");
    }
    return normalize(DensityMatrix{raw, "L frequency " + state.grid_l().describe()});
}

struct SweepPoint
{
    double theta = 0.0;
    double duration = 0.0;
    double purity = 0.0;
};

// Purity of the conditional state as the gate grows, with T_m = theta / dk_R.
inline std::vector<SweepPoint> purity_sweep(const TwoPhotonState &state, const DetectorResponse &trigger,
                                            double window_center, const std::vector<double> &theta_values,
                                            unsigned threads = 1)
{
    for (std::size_t i = 0; i < theta_values.size(); ++i) {
        if (!(theta_values[i] > 0.0)) {
            throw ValidationError("purity_sweep: theta values must be positive");
        }
        if (i > 0 && !(theta_values[i] > theta_values[i - 1])) {
            throw ValidationError("purity_sweep: theta values must be sorted ascending");
        }
    }
    const double width = trigger_packet_width(state);
    std::vector<SweepPoint> out(theta_values.size());
    parallel_for(theta_values.size(), threads, [&](std::size_t i) {
        const double duration = theta_values[i] / width;
        const ConditionalResult r = conditional_density_matrix(state, trigger, MeasurementWindow(window_center, duration));
        out[i] = SweepPoint{theta_values[i], duration, r.purity};
    });
    return out;
}

// Frequency grid of R paired with grid_l through k = pump - K, listed
// ascending: k_i = pump - K_{n-1-i}.
inline FrequencyGrid epr_partner_grid(const FrequencyGrid &grid_l, double pump)
{
    const double k_min = pump - grid_l.k_max();
    if (!(k_min > 0.0)) {
        throw DomainError("epr_amplitude: pump - K must stay positive over the whole L grid");
    }
    return FrequencyGrid(k_min, grid_l.dk(), grid_l.size());
}

// f(k,K) = v(K) delta_{k + K, pump} on grids aligned so that the
// anti-diagonal is exact. Builds the R grid itself.
inline JointSpectralAmplitude epr_amplitude(const FrequencyGrid &grid_l, double pump, const SpectralVector &v)
{
    if (!(v.grid == grid_l)) {
        throw ValidationError("epr_amplitude: v must live on the L grid");
    }
    const FrequencyGrid grid_r = epr_partner_grid(grid_l, pump);
    const int n = grid_l.size();
    CMatrix f = CMatrix::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        f(n - 1 - j, j) = v.values(j);
    }
    return JointSpectralAmplitude(grid_r, grid_l, f).normalized();
}

// Same construction on a caller-supplied R grid, which must carry every
// partner frequency pump - K exactly.
inline JointSpectralAmplitude epr_amplitude(const FrequencyGrid &grid_r, const FrequencyGrid &grid_l, double pump,
                                            const SpectralVector &v)
{
    if (!(v.grid == grid_l)) {
        throw ValidationError("epr_amplitude: v must live on the L grid");
    }
    if (std::abs(grid_r.dk() - grid_l.dk()) > 1e-12 * grid_l.dk()) {
        throw DomainError("epr_amplitude: R and L grids must share the same spacing");
    }
    CMatrix f = CMatrix::Zero(grid_r.size(), grid_l.size());
    for (int j = 0; j < grid_l.size(); ++j) {
        const double partner = pump - grid_l[j];
        if (!grid_r.on_grid(partner, 0.5)) {
            throw DomainError("epr_amplitude: grid misalignment, pump - K is not on the R grid");
        }
        if (!grid_r.on_grid(partner, 1e-6)) {
            throw DomainError("epr_amplitude: grid misalignment, pump - K falls between R grid points");
        }
        f(grid_r.nearest_index(partner), j) = v.values(j);
    }
    return JointSpectralAmplitude(grid_r, grid_l, f).normalized();
}

} // namespace stateprep

#endif // STATEPREP_CONDITIONAL_HPP
