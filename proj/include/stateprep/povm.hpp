#ifndef STATEPREP_POVM_HPP
#define STATEPREP_POVM_HPP

// Instantaneous conditioning of a bipartite pure state sum_a c_a |phi_a>|psi_a>
// on a single POVM outcome E acting on the first factor:
//   rho_2[a,a'] = <phi_a|E|phi_a'> c_a conj(c_a') / N,
//   N = sum_a <phi_a|E|phi_a> |c_a|^2.
// rho_2 is pure exactly when E restricted to the support of c factors as
// f_a conj(f_a'), i.e. when |E_aa'|^2 = E_aa E_a'a' for every pair (Schwarz
// equality). factorization_defect measures the distance from that equality.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "modes.hpp"

namespace stateprep
{

struct BipartitePureState
{
    CVector coeffs;

    explicit BipartitePureState(CVector c) : coeffs(std::move(c))
    {
        if (coeffs.size() == 0 || std::abs(coeffs.norm() - 1.0) > 1e-12) {
            throw ValidationError("BipartitePureState: coefficients must be normalized");
        }
    }

    int dim() const { return static_cast<int>(coeffs.size()); }
};

struct PovmElement
{
    CMatrix matrix;

    explicit PovmElement(CMatrix e) : matrix(std::move(e))
    {
        require_hermitian(matrix, "PovmElement");
        if (hermitian_eigenvalues(matrix).minCoeff() < -1e-10) {
            throw ValidationError("PovmElement: operator is not positive semidefinite");
        }
    }

    int dim() const { return static_cast<int>(matrix.rows()); }
};

inline DensityMatrix condition_on_povm(const BipartitePureState &state, const PovmElement &e)
{
    if (state.dim() != e.dim()) {
        throw ValidationError("condition_on_povm: state and POVM dimensions differ");
    }
    const double n = (e.matrix.diagonal().real().array() * state.coeffs.cwiseAbs2().array()).sum();
    if (!(n > 0.0)) {
        throw PhysicsError("condition_on_povm: outcome has zero probability");
    }
    const auto dc = state.coeffs.asDiagonal();
    CMatrix rho = dc * e.matrix * state.coeffs.conjugate().asDiagonal();
    rho /= n;
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityMatrix{std::move(rho), "psi_a Schmidt basis"};
}

inline double factorization_defect(const PovmElement &e, const std::vector<int> &support)
{
    if (support.empty()) {
        throw ValidationError("factorization_defect: empty support");
    }
    double worst = 0.0;
    for (const int a : support) {
        for (const int b : support) {
            if (a < 0 || b < 0 || a >= e.dim() || b >= e.dim()) {
                throw ValidationError("factorization_defect: support index out of range");
            }
            const double eaa = e.matrix(a, a).real();
            const double ebb = e.matrix(b, b).real();
            const double gap = std::abs(std::norm(e.matrix(a, b)) - eaa * ebb) / (1.0 + eaa * ebb);
            worst = std::max(worst, gap);
        }
    }
    return worst;
}

// Indices a with |c_a| <= tol; rho_2 has vanishing row and column there for
// every E.
inline std::vector<int> annihilated_components(const BipartitePureState &state, double tol)
{
    if (tol < 0.0) {
        throw ValidationError("annihilated_components: tolerance must be non-negative");
    }
    std::vector<int> out;
    for (int a = 0; a < state.dim(); ++a) {
        if (std::abs(state.coeffs(a)) <= tol) {
            out.push_back(a);
        }
    }
    return out;
}

inline std::vector<int> support_of(const BipartitePureState &state, double tol = 0.0)
{
    std::vector<int> out;
    for (int a = 0; a < state.dim(); ++a) {
        if (std::abs(state.coeffs(a)) > tol) {
            out.push_back(a);
        }
    }
    return out;
}

enum class PovmFamily
{
    RankOne,    // |u><u| with Gaussian u
    Projective, // projector onto a random subspace of random rank
    Generic,    // full-rank A^H A
    Mixed,      // one of the three, chosen per trial
};

inline const char *to_string(PovmFamily f)
{
    switch (f) {
    case PovmFamily::RankOne:
        return "rank-1";
    case PovmFamily::Projective:
        return "projective";
    case PovmFamily::Generic:
        return "generic";
    case PovmFamily::Mixed:
        return "mixed";
    }
    return "?";
}

struct PovmTrial
{
    PovmFamily family = PovmFamily::Generic;
    int rank = 0;
    double purity = 0.0;
    double defect = 0.0;
    bool pure = false;
    bool factorizes = false;
    bool agrees() const { return pure == factorizes; }
};

struct IffReport
{
    int trials = 0;
    int dim = 0;
    int both_true = 0;  // pure and factorizing
    int both_false = 0; // mixed and non-factorizing
    int counterexamples = 0;
    int redraws = 0;
    // Smallest distance from the decision thresholds seen on each side.
    double worst_pure_margin = 0.0;  // min over pure trials of (1e-8 - defect)
    double worst_mixed_margin = 0.0; // min over mixed trials of (1 - 1e-8 - purity)
    int rank_one_trials = 0;
    int projective_trials = 0;
    int generic_trials = 0;
    std::vector<PovmTrial> details;

    bool passed() const { return counterexamples == 0 && both_true + both_false == trials; }
};

inline constexpr double kIffTolerance = 1e-8;

namespace detail
{

inline PovmFamily pick_family(PovmFamily requested, std::mt19937_64 &rng)
{
    if (requested != PovmFamily::Mixed) {
        return requested;
    }
    std::uniform_int_distribution<int> pick(0, 2);
    switch (pick(rng)) {
    case 0:
        return PovmFamily::RankOne;
    case 1:
        return PovmFamily::Projective;
    default:
        return PovmFamily::Generic;
    }
}

inline CMatrix draw_povm(PovmFamily family, int dim, std::mt19937_64 &rng, int &rank)
{
    switch (family) {
    case PovmFamily::RankOne: {
        rank = 1;
        return random_psd(dim, 1, rng);
    }
    case PovmFamily::Projective: {
        std::uniform_int_distribution<int> pick_rank(1, dim);
        rank = pick_rank(rng);
        const CMatrix u = random_unitary(dim, rng);
        const CMatrix q = u.leftCols(rank);
        CMatrix p = q * q.adjoint();
        return 0.5 * (p + p.adjoint());
    }
    case PovmFamily::Generic:
    case PovmFamily::Mixed:
        break;
    }
    rank = dim;
    return random_psd(dim, dim, rng);
}

} // namespace detail

// Executable form of the purity/factorization equivalence: for random states
// with full support and random POVM elements, purity = 1 must coincide with
// a vanishing factorization defect. Failures are counted, never thrown.
inline IffReport purity_iff_factorization_test(int trials, int dim, std::uint64_t seed,
                                               PovmFamily family = PovmFamily::Mixed, bool keep_details = false)
{
    if (dim < 2) {
        throw ValidationError("purity_iff_factorization_test: dim must be at least 2");
    }
    if (trials < 1) {
        throw ValidationError("purity_iff_factorization_test: trials must be at least 1");
    }
    IffReport report;
    report.trials = trials;
    report.dim = dim;
    report.worst_pure_margin = std::numeric_limits<double>::infinity();
    report.worst_mixed_margin = std::numeric_limits<double>::infinity();

    for (int t = 0; t < trials; ++t) {
        std::mt19937_64 rng = split_rng(seed, static_cast<std::uint64_t>(t));
        PovmTrial trial;
        trial.family = detail::pick_family(family, rng);
        for (;;) {
            CVector c = complex_gaussian_vector(dim, rng);
            c /= c.norm();
            const CMatrix e = detail::draw_povm(trial.family, dim, rng, trial.rank);
            const double n = (e.diagonal().real().array() * c.cwiseAbs2().array()).sum();
            if (c.cwiseAbs().minCoeff() < 1e-8 || n < 1e-12) {
                ++report.redraws;
                continue;
            }
            const BipartitePureState state(c);
            const PovmElement element(e);
            trial.purity = purity(condition_on_povm(state, element));
            trial.defect = factorization_defect(element, support_of(state));
            break;
        }
        trial.pure = trial.purity >= 1.0 - kIffTolerance;
        trial.factorizes = trial.defect <= kIffTolerance;

        switch (trial.family) {
        case PovmFamily::RankOne:
            ++report.rank_one_trials;
            break;
        case PovmFamily::Projective:
            ++report.projective_trials;
            break;
        default:
            ++report.generic_trials;
            break;
        }
        if (trial.pure && trial.factorizes) {
            ++report.both_true;
            report.worst_pure_margin = std::min(report.worst_pure_margin, kIffTolerance - trial.defect);
        } else if (!trial.pure && !trial.factorizes) {
            ++report.both_false;
            report.worst_mixed_margin = std::min(report.worst_mixed_margin, 1.0 - kIffTolerance - trial.purity);
        } else {
            ++report.counterexamples;
        }
        if (keep_details) {
            report.details.push_back(trial);
        }
    }
    return report;
}

} // namespace stateprep

#endif // STATEPREP_POVM_HPP
