#ifndef STATEPREP_TELEPORT_HPP
#define STATEPREP_TELEPORT_HPP

// Teleportation of a single-photon state g(k_c) phi_c through the pair
//   sum f(k_a, k_b) (|k_a e_+>|k_b e_-> + |k_a e_->|k_b e_+>)
// with a gated Bell-state detector on (a, c) whose response is p_B(k_a, k_c).
//
// Alice's detector integrates over her gate, which couples only through the
// sum frequency s = k_a + k_c:
//   rho_B(k_b, k_b') ~ sum S(s - s') W(s, k_b) conj(W(s', k_b')),
//   W(s, k_b) = sum_{k_a + k_c = s} f(k_a,k_b) g(k_c) p_B(k_a,k_c) e^{-i s tau_B},
// so the a x c plane is binned by s before the one-dimensional sinc kernel
// is applied. Teleportation is accurate when g is an eigenvector of
//   M(k_b, k_c) = sum_{k_a} f(k_a, k_b) p_B(k_a, k_c) e^{-i(k_a + k_c) tau_B}.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "conditional.hpp"
#include "detector.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "modes.hpp"
#include "parallel.hpp"

namespace stateprep
{

enum class BellIndex : int
{
    PhiPlus = 1,  // (++ , --)
    PhiMinus = 2, // (++ , -(--))
    PsiPlus = 3,  // (+- , -+)
    PsiMinus = 4, // (+- , -(-+))
};

inline BellIndex bell_index(int value)
{
    if (value < 1 || value > 4) {
        throw ValidationError("BellIndex: value must be in {1, 2, 3, 4}");
    }
    return static_cast<BellIndex>(value);
}

// zeta^(B)_{sigma mu}, index 0 = e_+, 1 = e_-.
inline Eigen::Matrix2d bell_zeta(BellIndex b)
{
    Eigen::Matrix2d z = Eigen::Matrix2d::Zero();
    switch (b) {
    case BellIndex::PhiPlus:
        z(0, 0) = 1.0;
        z(1, 1) = 1.0;
        break;
    case BellIndex::PhiMinus:
        z(0, 0) = 1.0;
        z(1, 1) = -1.0;
        break;
    case BellIndex::PsiPlus:
        z(0, 1) = 1.0;
        z(1, 0) = 1.0;
        break;
    case BellIndex::PsiMinus:
        z(0, 1) = 1.0;
        z(1, 0) = -1.0;
        break;
    }
    return z;
}

inline constexpr std::array<BellIndex, 4> kBellIndices{BellIndex::PhiPlus, BellIndex::PhiMinus, BellIndex::PsiPlus,
                                                       BellIndex::PsiMinus};

// Polarization tensor T[a][b][c] (flattened 4a + 2b + c) of
// (|+-> + |-+>)_ab (x) phi_c.
inline Eigen::Matrix<cplx, 8, 1> teleport_polarization_tensor(const PolarizationVector &phi)
{
    const Eigen::Vector2cd p = phi.as_vector();
    Eigen::Matrix<cplx, 8, 1> t = Eigen::Matrix<cplx, 8, 1>::Zero();
    for (int c = 0; c < 2; ++c) {
        t(4 * 0 + 2 * 1 + c) = p(c); // |+>_a |->_b
        t(4 * 1 + 2 * 0 + c) = p(c); // |->_a |+>_b
    }
    return t;
}

// Bob's polarization phi^(B) for each Bell outcome, obtained by projecting
// the (a, c) pair of the tensor onto the normalized Bell state B. Unnormalized:
// sum_B |phi^(B)|^2 = 2 |phi|^2.
inline std::array<PolarizationVector, 4> bell_decompose(const PolarizationVector &input)
{
    if (std::abs(input.norm() - 1.0) > 1e-12) {
        throw ValidationError("bell_decompose: input polarization must be normalized");
    }
    const Eigen::Matrix<cplx, 8, 1> t = teleport_polarization_tensor(input);
    std::array<PolarizationVector, 4> out;
    for (std::size_t i = 0; i < kBellIndices.size(); ++i) {
        const Eigen::Matrix2d z = bell_zeta(kBellIndices[i]) / std::sqrt(2.0);
        Eigen::Vector2cd phi_b = Eigen::Vector2cd::Zero();
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                for (int c = 0; c < 2; ++c) {
                    phi_b(b) += z(a, c) * t(4 * a + 2 * b + c);
                }
            }
        }
        out[i] = PolarizationVector{phi_b(0), phi_b(1)};
    }
    return out;
}

// Inverse of bell_decompose: sum_B |B>_ac (x) phi^(B)_b as a flattened tensor.
inline Eigen::Matrix<cplx, 8, 1> bell_reconstruct(const std::array<PolarizationVector, 4> &parts)
{
    Eigen::Matrix<cplx, 8, 1> t = Eigen::Matrix<cplx, 8, 1>::Zero();
    for (std::size_t i = 0; i < kBellIndices.size(); ++i) {
        const Eigen::Matrix2d z = bell_zeta(kBellIndices[i]) / std::sqrt(2.0);
        const Eigen::Vector2cd phi_b = parts[i].as_vector();
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                for (int c = 0; c < 2; ++c) {
                    t(4 * a + 2 * b + c) += z(a, c) * phi_b(b);
                }
            }
        }
    }
    return t;
}

// Probability of each Bell outcome, |phi^(B)|^2 / sum.
inline std::array<double, 4> bell_outcome_probabilities(const PolarizationVector &input)
{
    const auto parts = bell_decompose(input);
    std::array<double, 4> w{};
    double total = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        w[i] = parts[i].norm() * parts[i].norm();
        total += w[i];
    }
    for (double &x : w) {
        x /= total;
    }
    return w;
}

struct BellDetectorResponse
{
    FrequencyGrid grid_a;
    FrequencyGrid grid_c;
    CMatrix response; // p_B(k_a, k_c)
    MeasurementWindow window;
    double position = 0.0;

    BellDetectorResponse(FrequencyGrid a, FrequencyGrid c, CMatrix p, MeasurementWindow w, double x = 0.0)
        : grid_a(a), grid_c(c), response(std::move(p)), window(w), position(x)
    {
        if (response.rows() != grid_a.size() || response.cols() != grid_c.size()) {
            throw ValidationError("BellDetectorResponse: response shape does not match grids");
        }
    }

    // tau_B = T_B - x_B.
    double retarded_time() const { return window.center - position; }
};

// p_B = p0 on the line k_a + k_c = k0 (an up-converter accepting exactly one
// sum frequency); k0 must fall on the sum lattice.
inline CMatrix bell_sum_delta_response(const FrequencyGrid &grid_a, const FrequencyGrid &grid_c, double k0,
                                       cplx p0 = cplx(1.0))
{
    if (std::abs(grid_a.dk() - grid_c.dk()) > 1e-12 * grid_a.dk()) {
        throw DomainError("bell_sum_delta_response: a and c grids must share the same spacing");
    }
    const double offset = (k0 - grid_a.k_min() - grid_c.k_min()) / grid_a.dk();
    if (std::abs(offset - std::round(offset)) > 1e-6) {
        throw DomainError("bell_sum_delta_response: k0 is not on the sum-frequency lattice");
    }
    const long target = std::lround(offset);
    CMatrix p = CMatrix::Zero(grid_a.size(), grid_c.size());
    for (int i = 0; i < grid_a.size(); ++i) {
        const long j = target - i;
        if (j >= 0 && j < grid_c.size()) {
            p(i, static_cast<int>(j)) = p0;
        }
    }
    if (p.norm() == 0.0) {
        throw DomainError("bell_sum_delta_response: k0 lies outside the reachable sum range");
    }
    return p;
}

// Gaussian acceptance exp(-(k_a + k_c - k0)^2 / (4 width^2)) in the sum frequency.
inline CMatrix bell_sum_gaussian_response(const FrequencyGrid &grid_a, const FrequencyGrid &grid_c, double k0,
                                          double width)
{
    if (!(width > 0.0)) {
        throw DomainError("bell_sum_gaussian_response: width must be positive");
    }
    CMatrix p(grid_a.size(), grid_c.size());
    for (int i = 0; i < grid_a.size(); ++i) {
        for (int j = 0; j < grid_c.size(); ++j) {
            const double x = grid_a[i] + grid_c[j] - k0;
            p(i, j) = std::exp(-x * x / (4.0 * width * width));
        }
    }
    return p;
}

struct TeleportScenario
{
    JointSpectralAmplitude jsa;  // f(k_a, k_b)
    SpectralVector input;        // g(k_c)
    PolarizationVector input_pol;
    BellIndex bell = BellIndex::PsiMinus;
    BellDetectorResponse detector;

    TeleportScenario(JointSpectralAmplitude f, SpectralVector g, PolarizationVector phi, BellIndex b,
                     BellDetectorResponse det)
        : jsa(std::move(f)), input(std::move(g)), input_pol(phi), bell(b), detector(std::move(det))
    {
        if (std::abs(jsa.norm() - 1.0) > 1e-12) {
            throw ValidationError("TeleportScenario: joint spectral amplitude must be normalized");
        }
        if (std::abs(input.norm() - 1.0) > 1e-12) {
            throw ValidationError("TeleportScenario: input spectrum must be normalized");
        }
        if (std::abs(input_pol.norm() - 1.0) > 1e-12) {
            throw ValidationError("TeleportScenario: input polarization must be normalized");
        }
        if (!(jsa.grid_a == detector.grid_a)) {
            throw ValidationError("TeleportScenario: detector a grid differs from the pair's a grid");
        }
        if (!(input.grid == detector.grid_c)) {
            throw ValidationError("TeleportScenario: detector c grid differs from the input grid");
        }
        if (std::abs(grid_a().dk() - grid_c().dk()) > 1e-12 * grid_a().dk()) {
            throw ValidationError("TeleportScenario: a and c grids must share the same spacing");
        }
    }

    const FrequencyGrid &grid_a() const { return jsa.grid_a; }
    const FrequencyGrid &grid_b() const { return jsa.grid_b; }
    const FrequencyGrid &grid_c() const { return input.grid; }

    TeleportScenario with_input(SpectralVector g) const
    {
        return TeleportScenario(jsa, std::move(g), input_pol, bell, detector);
    }
};

namespace detail
{

// Rows: sum-frequency bins s = i_a + i_c; columns: k_b.
inline CMatrix sum_binned_amplitude(const TeleportScenario &s, const CVector &g)
{
    const int na = s.grid_a().size();
    const int nc = s.grid_c().size();
    const CMatrix &f = s.jsa.values;
    const CMatrix &p = s.detector.response;
    CMatrix w = CMatrix::Zero(na + nc - 1, f.cols());
    for (int ia = 0; ia < na; ++ia) {
        for (int ic = 0; ic < nc; ++ic) {
            const cplx coef = g(ic) * p(ia, ic);
            if (coef != cplx(0.0)) {
                w.row(ia + ic) += coef * f.row(ia);
            }
        }
    }
    const double tau = s.detector.retarded_time();
    const double s0 = s.grid_a().k_min() + s.grid_c().k_min();
    for (Eigen::Index row = 0; row < w.rows(); ++row) {
        w.row(row) *= std::exp(cplx(0.0, -(s0 + row * s.grid_a().dk()) * tau));
    }
    return w;
}

inline CMatrix bob_density_unnormalized(const TeleportScenario &s, const CVector &g)
{
    const CMatrix w = sum_binned_amplitude(s, g);
    return gated_density(w, s.grid_a().dk(), s.detector.window.duration);
}

inline void require_matched_bc(const TeleportScenario &s, const char *what)
{
    if (!(s.grid_b() == s.grid_c())) {
        throw ValidationError(std::string(what) + ": Bob's grid b and the input grid c must match");
    }
}

} // namespace detail

// (dk_a + dk_c) T_m / 2 pi; accurate teleportation needs this << 1.
inline double width_condition_ratio(const TeleportScenario &s)
{
    const double dka = rms_width(s.grid_a(), s.jsa.marginal_a());
    const double dkc = rms_width(s.grid_c(), s.input.values.cwiseAbs2());
    return (dka + dkc) * s.detector.window.duration / (2.0 * kPi);
}

inline constexpr double kWidthConditionMax = 0.1;

// Frequency part of Bob's conditional state for the scenario's Bell outcome.
inline DensityMatrix bob_density_matrix(const TeleportScenario &s)
{
    const CMatrix raw = detail::bob_density_unnormalized(s, s.input.values);
    if (!(raw.trace().real() > 1e-300)) {
        throw PhysicsError("bob_density_matrix: no detection (Bell detector misses the amplitude support)");
    }
    return normalize(DensityMatrix{raw, "Bob frequency " + s.grid_b().describe()});
}

// Bob's polarization Lambda_B phi, normalized.
inline PolarizationVector bob_polarization(const TeleportScenario &s)
{
    const auto parts = bell_decompose(s.input_pol);
    return parts[static_cast<std::size_t>(static_cast<int>(s.bell) - 1)].normalized();
}

// Pure state Bob receives when the width condition holds:
//   chi(k_b) ~ sum_{k_a k_c} U_B(k_a, k_b, k_c) e^{-i(k_a + k_c) tau_B}.
inline SpectralVector bob_pure_state(const TeleportScenario &s, Warnings *warnings = nullptr)
{
    if (width_condition_ratio(s) > kWidthConditionMax) {
        warn(warnings, "bob_pure_state: width condition (dk_a + dk_c) T_m << 2 pi is violated");
    }
    const CMatrix w = detail::sum_binned_amplitude(s, s.input.values);
    const CVector chi = w.colwise().sum().transpose();
    if (!(chi.norm() > 1e-300)) {
        throw PhysicsError("bob_pure_state: no detection (Bob's amplitude vanishes)");
    }
    return SpectralVector(s.grid_b(), chi).normalized();
}

// M(k_b, k_c) = sum_{k_a} f(k_a, k_b) p_B(k_a, k_c) e^{-i(k_a + k_c) tau_B}.
inline CMatrix teleport_operator(const TeleportScenario &s)
{
    detail::require_matched_bc(s, "teleport_operator");
    const double tau = s.detector.retarded_time();
    CMatrix p = s.detector.response;
    for (int ia = 0; ia < s.grid_a().size(); ++ia) {
        for (int ic = 0; ic < s.grid_c().size(); ++ic) {
            p(ia, ic) *= std::exp(cplx(0.0, -(s.grid_a()[ia] + s.grid_c()[ic]) * tau));
        }
    }
    return s.jsa.values.transpose() * p;
}

// Overlap of Bob's full state, frequency (x) polarization, with the desired
// g(k_b) (x) Lambda_B phi. Phase-insensitive.
inline double teleportation_fidelity(const TeleportScenario &s)
{
    detail::require_matched_bc(s, "teleportation_fidelity");
    const DensityMatrix rho = bob_density_matrix(s);
    const Eigen::Vector2cd pol = bob_polarization(s).as_vector();
    const CMatrix total = Eigen::kroneckerProduct(rho.values, CMatrix(pol * pol.adjoint())).eval();
    const CVector desired = Eigen::kroneckerProduct(s.input.values, CVector(pol)).eval();
    return fidelity_with_pure(DensityMatrix{total, "Bob frequency x polarization"}, desired);
}

struct TeleportableState
{
    cplx eigenvalue;
    CVector vector;
    double residual = 0.0;  // |M g - lambda g|_2
    double condition = 1.0; // |<y|x>| / (|y| |x|) for left/right eigenvectors; 1 when M is normal
    double fidelity = 0.0;
};

// Eigenpairs of M sorted by |lambda| descending. `fidelity` is the
// short-gate teleportation fidelity |<g|Mg>|^2 / |Mg|^2 of each eigenvector.
inline std::vector<TeleportableState> solve_teleportable_states(const CMatrix &m, int count)
{
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw ValidationError("solve_teleportable_states: operator must be square and non-empty");
    }
    if (count < 1) {
        throw ValidationError("solve_teleportable_states: count must be at least 1");
    }
    Eigen::ComplexEigenSolver<CMatrix> solver(m, true);
    if (solver.info() != Eigen::Success) {
        throw NumericError("solve_teleportable_states: eigensolver did not converge");
    }
    const CVector values = solver.eigenvalues();
    const CMatrix vectors = solver.eigenvectors();
    const double mnorm = spectral_norm(m);

    Eigen::FullPivLU<CMatrix> lu(vectors);
    const bool invertible = lu.isInvertible();
    CMatrix left;
    if (invertible) {
        left = lu.inverse();
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        order[static_cast<std::size_t>(i)] = i;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return std::abs(values(a)) > std::abs(values(b)); });

    const int take = std::min<int>(count, static_cast<int>(values.size()));
    std::vector<TeleportableState> out;
    out.reserve(static_cast<std::size_t>(take));
    for (int r = 0; r < take; ++r) {
        const Eigen::Index i = order[static_cast<std::size_t>(r)];
        TeleportableState st;
        st.eigenvalue = values(i);
        st.vector = vectors.col(i).normalized();
        const CVector mg = m * st.vector;
        st.residual = (mg - st.eigenvalue * st.vector).norm();
        if (st.residual > 1e-8 * std::max(mnorm, 1e-300)) {
            std::ostringstream msg;
            msg << "solve_teleportable_states: eigenpair " << r << " residual " << st.residual
                << " exceeds 1e-8 |M|_2 = " << 1e-8 * mnorm << " (lambda = " << st.eigenvalue << ")";
            throw NumericError(msg.str());
        }
        if (invertible) {
            const CVector y = left.row(i).adjoint();
            const CVector x = vectors.col(i);
            st.condition = std::abs(y.dot(x)) / (y.norm() * x.norm());
        } else {
            st.condition = 0.0;
        }
        const double mg_norm = mg.norm();
        st.fidelity = mg_norm > 1e-300 ? std::norm(st.vector.dot(mg)) / (mg_norm * mg_norm) : 0.0;
        out.push_back(std::move(st));
    }
    return out;
}

// As above, with each eigenvector fed back as the input spectrum and the
// fidelity evaluated under the scenario's actual Bell-detector gate.
inline std::vector<TeleportableState> solve_teleportable_states(const TeleportScenario &s, int count)
{
    auto states = solve_teleportable_states(teleport_operator(s), count);
    for (auto &st : states) {
        try {
            st.fidelity = teleportation_fidelity(s.with_input(SpectralVector(s.grid_c(), st.vector)));
        } catch (const PhysicsError &) {
            st.fidelity = 0.0; // M g = 0: nothing reaches Bob
        }
    }
    return states;
}

enum class DephasingMode
{
    None,
    Global, // one random phase per realization, k-independent
    Full,   // independent uniform phase per k_c and realization
};

inline const char *to_string(DephasingMode m)
{
    switch (m) {
    case DephasingMode::None:
        return "none";
    case DephasingMode::Global:
        return "global";
    case DephasingMode::Full:
        return "full";
    }
    return "?";
}

struct DephasingResult
{
    DensityMatrix analytic;
    DensityMatrix monte_carlo;
};

inline constexpr std::size_t kMonteCarloBlock = 64;

// Bob's state averaged over realizations g_j(k) = e^{i Theta_j(k)} g(k).
// Unnormalized realizations are averaged before normalizing, so each
// realization is weighted by its detection probability.
inline DephasingResult dephased_bob_state(const TeleportScenario &s, DephasingMode mode, int samples,
                                          std::uint64_t seed, unsigned threads = 1)
{
    if (samples < 1) {
        throw ValidationError("dephased_bob_state: samples must be at least 1");
    }
    const std::string label = "Bob frequency " + s.grid_b().describe();
    const DensityMatrix coherent = bob_density_matrix(s);

    DephasingResult out;
    if (mode == DephasingMode::None || mode == DephasingMode::Global) {
        out.analytic = coherent;
    } else {
        // g(k_c) conj(g(k_c')) -> |g(k_c)|^2 delta: one incoherent term per k_c.
        const int na = s.grid_a().size();
        const int nc = s.grid_c().size();
        const double tau = s.detector.retarded_time();
        const Eigen::MatrixXd sa = sinc_matrix(na, s.grid_a().dk(), s.detector.window.duration);
        const CMatrix sac = sa.cast<cplx>();
        CMatrix raw = CMatrix::Zero(s.grid_b().size(), s.grid_b().size());
        for (int ic = 0; ic < nc; ++ic) {
            const double weight = std::norm(s.input.values(ic));
            if (weight == 0.0) {
                continue;
            }
            CMatrix h(na, s.grid_b().size());
            for (int ia = 0; ia < na; ++ia) {
                const cplx phase = std::exp(cplx(0.0, -(s.grid_a()[ia] + s.grid_c()[ic]) * tau));
                h.row(ia) = (s.detector.response(ia, ic) * phase) * s.jsa.values.row(ia);
            }
            raw += weight * (h.transpose() * (sac * h.conjugate()));
        }
        if (!(raw.trace().real() > 1e-300)) {
            throw PhysicsError("dephased_bob_state: no detection");
        }
        out.analytic = normalize(DensityMatrix{raw, label});
    }

    if (mode == DephasingMode::None) {
        out.monte_carlo = coherent;
        return out;
    }

    const std::size_t total = static_cast<std::size_t>(samples);
    const std::size_t blocks = (total + kMonteCarloBlock - 1) / kMonteCarloBlock;
    std::vector<CMatrix> block_sums(blocks);
    parallel_for(blocks, threads, [&](std::size_t b) {
        CMatrix acc = CMatrix::Zero(s.grid_b().size(), s.grid_b().size());
        const std::size_t end = std::min(total, (b + 1) * kMonteCarloBlock);
        std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
        for (std::size_t j = b * kMonteCarloBlock; j < end; ++j) {
            std::mt19937_64 rng = split_rng(seed, j);
            CVector g = s.input.values;
            if (mode == DephasingMode::Global) {
                g *= std::exp(cplx(0.0, angle(rng)));
            } else {
                for (Eigen::Index k = 0; k < g.size(); ++k) {
                    g(k) *= std::exp(cplx(0.0, angle(rng)));
                }
            }
            acc += detail::bob_density_unnormalized(s, g);
        }
        block_sums[b] = std::move(acc);
    });
    const CMatrix sum = pairwise_sum(block_sums, 0, blocks);
    if (!(sum.trace().real() > 1e-300)) {
        throw PhysicsError("dephased_bob_state: no detection");
    }
    out.monte_carlo = normalize(DensityMatrix{sum, label});
    return out;
}

} // namespace stateprep

#endif // STATEPREP_TELEPORT_HPP
