#ifndef STATEPREP_BEAMSPLITTER_HPP
#define STATEPREP_BEAMSPLITTER_HPP

// Heralded entanglement of an independent photon c with the partner b of a
// pair (a, b). b and c meet on a 50-50 beam splitter whose output ports feed
// detectors 1 and 2; a detection of a at detector 3 leaves b in
//   |Phi'> = sum_k gamma(k) |phi'; k>,
//   gamma(k) ~ sum_{k3} p(k3) e^{-i k3 tau_3} f(k3, k),
//   phi' = e_- d(e_3, e_+) + e_+ d(e_3, e_-),
// and the outgoing pair splits into one photon per port (chi_12) or both in
// port 1 or 2 (chi_11, chi_22).
//
// Port fields are Xi_m = (i E_mb + E_mc)/sqrt(2) for m = 1, 2, which gives
//   A_12 = (i/2)(<E_3 E_2c E_1b> + <E_3 E_2b E_1c>),
//   A_11 = (i/2) <E_3 E_1b E_1c>,   A_22 = (i/2) <E_3 E_2c E_2b>,
// and chi_12 ~ |Phi'>_1 |Phi>_2 + |Phi>_1 |Phi'>_2.
//
// Single-photon index within one port: 2 * (frequency index) + polarization,
// polarization 0 = e_+, 1 = e_-.

#include <array>
#include <cmath>
#include <string>
#include <utility>

#include <unsupported/Eigen/KroneckerProduct>

#include "conditional.hpp"
#include "detector.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "modes.hpp"

namespace stateprep
{

struct BeamSplitterScenario
{
    JointSpectralAmplitude jsa; // f(k3, k): a grid x b grid
    SpectralVector single;      // g(k) on the b (= c) grid
    PolarizationVector single_pol;
    DetectorResponse trigger; // detector 3 on photon a
    MeasurementWindow window;

    BeamSplitterScenario(JointSpectralAmplitude f, SpectralVector g, PolarizationVector phi, DetectorResponse det3,
                         MeasurementWindow w)
        : jsa(std::move(f)), single(std::move(g)), single_pol(phi), trigger(std::move(det3)), window(w)
    {
        if (std::abs(jsa.norm() - 1.0) > 1e-12) {
            throw ValidationError("BeamSplitterScenario: joint spectral amplitude must be normalized");
        }
        if (std::abs(single.norm() - 1.0) > 1e-12) {
            throw ValidationError("BeamSplitterScenario: single-photon spectrum must be normalized");
        }
        if (std::abs(single_pol.norm() - 1.0) > 1e-12) {
            throw ValidationError("BeamSplitterScenario: single-photon polarization must be normalized");
        }
        if (!(trigger.grid() == jsa.grid_a)) {
            throw ValidationError("BeamSplitterScenario: trigger grid differs from the a grid");
        }
        if (!(single.grid == jsa.grid_b)) {
            throw ValidationError("BeamSplitterScenario: b and c grids must be equal to interfere");
        }
    }

    const FrequencyGrid &grid_a() const { return jsa.grid_a; }
    const FrequencyGrid &grid() const { return jsa.grid_b; }
    double trigger_retarded_time() const { return trigger.retarded(window.center); }
};

// phi' = e_- d(e3, e_+) + e_+ d(e3, e_-), the polarization b carries once a
// is detected behind analyzer e3.
inline PolarizationVector primed_polarization(const PolarizationVector &e3)
{
    return PolarizationVector{polarization_dot(e3, PolarizationVector::e_minus()),
                              polarization_dot(e3, PolarizationVector::e_plus())};
}

namespace detail
{

inline CVector gamma_unnormalized(const BeamSplitterScenario &s)
{
    const CMatrix g = heralding_matrix(s.jsa.values, s.grid_a(), s.trigger.response.values, s.trigger_retarded_time());
    return g.colwise().sum().transpose();
}

// Spectrum (x) polarization in the 2n-dimensional single-port basis.
inline CVector photon_state(const CVector &spectrum, const PolarizationVector &pol)
{
    return Eigen::kroneckerProduct(spectrum, CVector(pol.as_vector())).eval();
}

} // namespace detail

// Heralded spectrum of b, normalized.
inline SpectralVector gamma_spectrum(const BeamSplitterScenario &s)
{
    const CVector gamma = detail::gamma_unnormalized(s);
    if (!(gamma.norm() > 1e-300)) {
        throw PhysicsError("gamma_spectrum: no detection (trigger response misses the amplitude support)");
    }
    return SpectralVector(s.grid(), gamma).normalized();
}

// |sum_k g(k) conj(gamma(k))|^2 with both normalized; 1 iff g = lambda gamma.
inline double pair_overlap(const BeamSplitterScenario &s)
{
    const SpectralVector gamma = gamma_spectrum(s);
    return std::norm(gamma.values.dot(s.single.values));
}

// Two photons, one index per photon; amplitude(i, j) is the coefficient of
// |i>_first |j>_second.
struct TwoModeState
{
    FrequencyGrid grid;
    CMatrix amplitude;

    // Partial trace over the second photon.
    CMatrix reduced_first() const { return amplitude * amplitude.adjoint(); }

    double reduced_purity() const
    {
        const CMatrix r = reduced_first();
        return r.squaredNorm();
    }

    // (1 + swap)/norm, the bosonic readout of two photons in one port.
    TwoModeState symmetrized() const
    {
        CMatrix sym = amplitude + amplitude.transpose();
        const double nrm = sym.norm();
        if (!(nrm > 1e-300)) {
            throw PhysicsError("TwoModeState: symmetrized state vanishes");
        }
        return TwoModeState{grid, sym / nrm};
    }

    // Label exchange: the first photon becomes the second.
    TwoModeState swapped() const { return TwoModeState{grid, amplitude.transpose()}; }
};

struct HeraldedPair
{
    TwoModeState chi12; // one photon per port
    TwoModeState chi11; // both in port 1, stored unsymmetrized
    TwoModeState chi22; // both in port 2, stored unsymmetrized
    std::array<double, 3> weights{}; // |A_12|^2 : |A_11|^2 : |A_22|^2, summing to 1
    SpectralVector gamma;
    PolarizationVector phi_prime;
    ThetaInfo theta;
    Warnings warnings;
};

// Width of the a-marginal of |p(k3) f(k3, k)|^2, the herald's packet width.
inline double herald_packet_width(const BeamSplitterScenario &s)
{
    const CMatrix g = detail::heralding_matrix(s.jsa.values, s.grid_a(), s.trigger.response.values, 0.0);
    return rms_width(s.grid_a(), g.cwiseAbs2().rowwise().sum());
}

// Short-trigger pure form of the outgoing pair. The weights are the norms of
// the three amplitude terms, which equal their detection probabilities
// integrated over long equal gates on broadband detectors summed over
// analyzer settings.
inline HeraldedPair heralded_pair_state(const BeamSplitterScenario &s)
{
    const SpectralVector gamma = gamma_spectrum(s);
    const PolarizationVector phi_prime = primed_polarization(s.trigger.analyzer);
    const CVector primed = detail::photon_state(gamma.values, phi_prime.normalized());
    const CVector plain = detail::photon_state(s.single.values, s.single_pol);

    const CMatrix cross = primed * plain.transpose() + plain * primed.transpose();
    const CMatrix same = plain * primed.transpose();
    const double n12 = 0.25 * cross.squaredNorm();
    const double n11 = 0.25 * same.squaredNorm();
    const double total = n12 + 2.0 * n11;

    HeraldedPair out{TwoModeState{s.grid(), cross / cross.norm()},
                     TwoModeState{s.grid(), same / same.norm()},
                     TwoModeState{s.grid(), same / same.norm()},
                     {n12 / total, n11 / total, n11 / total},
                     gamma,
                     phi_prime,
                     theta_parameter(herald_packet_width(s), s.window),
                     {}};
    if (out.theta.regime != Regime::Short) {
        out.warnings.push_back("heralded_pair_state: trigger is not short (theta > 0.1); the pure form is approximate");
    }
    return out;
}

// Mixed-state version for any trigger gate: the herald leaves b in
// rho_b (x) |phi'><phi'| and the pair state is L rho_b L^H with
// L v = v (x) Phi + Phi (x) v. Returns the density matrix over port-1 x
// port-2 indices; (2n)^2 x (2n)^2, so only small grids are accepted.
inline DensityMatrix heralded_pair_density(const BeamSplitterScenario &s, int max_grid = 16)
{
    if (s.grid().size() > max_grid) {
        throw ValidationError("heralded_pair_density: grid too large for an explicit two-photon density matrix");
    }
    const CMatrix g =
        detail::heralding_matrix(s.jsa.values, s.grid_a(), s.trigger.response.values, s.trigger_retarded_time());
    detail::require_detection(g, "heralded_pair_density");
    const CMatrix rho_freq = detail::gated_density(g, s.grid_a().dk(), s.window.duration);
    const Eigen::Vector2cd pp = primed_polarization(s.trigger.analyzer).normalized().as_vector();
    const CMatrix rho_b = Eigen::kroneckerProduct(rho_freq, CMatrix(pp * pp.adjoint())).eval();

    const CVector plain = detail::photon_state(s.single.values, s.single_pol);
    const Eigen::Index d = plain.size();
    CMatrix lift(d * d, d);
    const CMatrix identity = CMatrix::Identity(d, d);
    for (Eigen::Index v = 0; v < d; ++v) {
        lift.col(v) = Eigen::kroneckerProduct(identity.col(v), plain).eval() +
                      Eigen::kroneckerProduct(plain, identity.col(v)).eval();
    }
    const CMatrix raw = lift * rho_b * lift.adjoint();
    return normalize(DensityMatrix{raw, "port1 x port2 (frequency, polarization)"});
}

// Purity of heralded_pair_density without forming it:
//   tr((L rho L^H)^2) / tr(L rho L^H)^2 = tr(rho A rho A) / tr(rho A)^2,
//   A = L^H L = 2 (1 + |Phi><Phi|).
inline double heralded_pair_purity(const BeamSplitterScenario &s)
{
    const CMatrix g =
        detail::heralding_matrix(s.jsa.values, s.grid_a(), s.trigger.response.values, s.trigger_retarded_time());
    detail::require_detection(g, "heralded_pair_purity");
    const CMatrix rho_freq = detail::gated_density(g, s.grid_a().dk(), s.window.duration);
    const Eigen::Vector2cd pp = primed_polarization(s.trigger.analyzer).normalized().as_vector();
    const CMatrix rho_b = Eigen::kroneckerProduct(rho_freq, CMatrix(pp * pp.adjoint())).eval();
    const CVector plain = detail::photon_state(s.single.values, s.single_pol);
    const CMatrix a = 2.0 * (CMatrix::Identity(plain.size(), plain.size()) + plain * plain.adjoint());
    const CMatrix ra = rho_b * a;
    const double tr = ra.trace().real();
    return (ra * ra).trace().real() / (tr * tr);
}

struct TripleCorrelation
{
    double total = 0.0;
    double coincidence = 0.0; // |A_12|^2
    double port1 = 0.0;       // |A_11|^2
    double port2 = 0.0;       // |A_22|^2
};

// Point-time triple correlation |A_12|^2 + |A_11|^2 + |A_22|^2 for
// detections at t1 (port 1), t2 (port 2) and the trigger gate center.
inline TripleCorrelation triple_correlation(const BeamSplitterScenario &s, const DetectorResponse &det1,
                                            const DetectorResponse &det2, double t1, double t2)
{
    if (!(det1.grid() == s.grid()) || !(det2.grid() == s.grid())) {
        throw ValidationError("triple_correlation: output detectors must use the b/c grid");
    }
    const CVector gamma = detail::gamma_unnormalized(s);
    const PolarizationVector phi_prime = primed_polarization(s.trigger.analyzer);

    auto detect = [&](const DetectorResponse &det, double t, const CVector &spectrum, const PolarizationVector &pol) {
        const double tau = det.retarded(t);
        cplx amp(0.0);
        for (int k = 0; k < s.grid().size(); ++k) {
            amp += det.response.values(k) * std::exp(cplx(0.0, -s.grid()[k] * tau)) * spectrum(k);
        }
        return amp * polarization_dot(det.analyzer, pol);
    };

    const cplx b1 = detect(det1, t1, gamma, phi_prime);
    const cplx b2 = detect(det2, t2, gamma, phi_prime);
    const cplx c1 = detect(det1, t1, s.single.values, s.single_pol);
    const cplx c2 = detect(det2, t2, s.single.values, s.single_pol);

    const cplx half_i(0.0, 0.5);
    const cplx a12 = half_i * (b1 * c2 + c1 * b2);
    const cplx a11 = half_i * b1 * c1;
    const cplx a22 = half_i * b2 * c2;

    TripleCorrelation out;
    out.coincidence = std::norm(a12);
    out.port1 = std::norm(a11);
    out.port2 = std::norm(a22);
    out.total = out.coincidence + out.port1 + out.port2;
    return out;
}

} // namespace stateprep

#endif // STATEPREP_BEAMSPLITTER_HPP
