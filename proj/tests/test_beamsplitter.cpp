#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "stateprep/beamsplitter.hpp"

using namespace stateprep;

namespace
{

const FrequencyGrid kA(8.0, 0.25, 17);
const FrequencyGrid kB(8.0, 0.25, 16);

// Separable pair so the herald leaves b in a known Gaussian at `gamma_center`.
BeamSplitterScenario disjoint_scenario(double gamma_center = 9.0, double single_center = 11.5,
                                       double tm = 1e-3)
{
    const JointSpectralAmplitude f =
        separable_jsa(gaussian_spectrum(kA, 10.0, 0.4), gaussian_spectrum(kB, gamma_center, 0.25));
    const DetectorResponse trig = flat_response(kA, PolarizationVector::e_minus());
    // phi' for analyzer e_- is e_+ = phi.
    return BeamSplitterScenario(f, gaussian_spectrum(kB, single_center, 0.25), PolarizationVector::e_plus(), trig,
                                MeasurementWindow(0.0, tm));
}

BeamSplitterScenario correlated_scenario(double theta, double r = -0.9)
{
    const FrequencyGrid g(8.0, 0.25, 12);
    const JointSpectralAmplitude f = correlated_gaussian_jsa(g, g, 9.4, 9.4, 0.4, 0.4, r);
    const DetectorResponse trig = narrow_filter_response(g, 9.4, 0.8, PolarizationVector::linear(0.3), 0.7);
    BeamSplitterScenario s(f, gaussian_spectrum(g, 9.6, 0.3), PolarizationVector::linear(1.1), trig,
                           MeasurementWindow(0.2, 1.0));
    s.window = MeasurementWindow(0.2, theta / herald_packet_width(s));
    return s;
}

CVector gamma_oracle(const BeamSplitterScenario &s)
{
    const double tau = s.trigger.retarded(s.window.center);
    CVector out = CVector::Zero(s.grid().size());
    for (int k3 = 0; k3 < s.grid_a().size(); ++k3) {
        for (int k = 0; k < s.grid().size(); ++k) {
            out(k) += s.trigger.response.values(k3) * std::exp(cplx(0.0, -s.grid_a()[k3] * tau)) *
                      s.jsa.values(k3, k);
        }
    }
    return out.normalized();
}

} // namespace

TEST(BeamSplitterScenario, Validation)
{
    const BeamSplitterScenario s = disjoint_scenario();
    EXPECT_THROW(BeamSplitterScenario(s.jsa, gaussian_spectrum(kA, 10.0, 0.3), s.single_pol, s.trigger, s.window),
                 ValidationError);
    EXPECT_THROW(BeamSplitterScenario(s.jsa, s.single, s.single_pol, flat_response(kB), s.window), ValidationError);
    EXPECT_THROW(BeamSplitterScenario(s.jsa, s.single, PolarizationVector{cplx(2.0), cplx(0.0)}, s.trigger, s.window),
                 ValidationError);
}

TEST(PrimedPolarization, Examples)
{
    const PolarizationVector p = primed_polarization(PolarizationVector::e_plus());
    EXPECT_EQ(p.plus, cplx(0.0));
    EXPECT_EQ(p.minus, cplx(1.0));
    const PolarizationVector q = primed_polarization(PolarizationVector::e_minus());
    EXPECT_EQ(q.plus, cplx(1.0));
    EXPECT_EQ(q.minus, cplx(0.0));
}

TEST(Gamma, MatchesDirectSum)
{
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 10; ++trial) {
        const JointSpectralAmplitude f(kA, kB, oracle::random_complex(17, 16, rng));
        const DetectorResponse trig(SpectralVector(kA, oracle::random_complex(17, rng)),
                                    PolarizationVector::e_plus(), oracle::uniform(rng, -2.0, 2.0));
        const BeamSplitterScenario s(f.normalized(), flat_spectrum(kB), PolarizationVector::e_plus(), trig,
                                     MeasurementWindow(oracle::uniform(rng, -2.0, 2.0), 0.01));
        EXPECT_LE((gamma_spectrum(s).values - gamma_oracle(s)).norm(), 1e-12);
    }
}

TEST(Gamma, DeltaTriggerSelectsRowAndIgnoresTime)
{
    std::mt19937_64 rng(2);
    const JointSpectralAmplitude f = JointSpectralAmplitude(kA, kB, oracle::random_complex(17, 16, rng)).normalized();
    const DetectorResponse trig = narrow_filter_response(kA, 9.0, 0.001);
    BeamSplitterScenario s(f, flat_spectrum(kB), PolarizationVector::e_plus(), trig, MeasurementWindow(0.0, 0.01));
    const CVector row = f.values.row(4).transpose().normalized();
    EXPECT_NEAR(std::abs(gamma_spectrum(s).values.dot(row)), 1.0, 1e-12);
    const Eigen::VectorXd mag = gamma_spectrum(s).values.cwiseAbs();
    s.window = MeasurementWindow(7.3, 0.01);
    EXPECT_LE((gamma_spectrum(s).values.cwiseAbs() - mag).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Gamma, EprWithFlatTriggerFollowsV)
{
    const SpectralVector v = gaussian_spectrum(kB, 9.5, 0.5);
    const JointSpectralAmplitude f = epr_amplitude(kB, 19.0, v);
    const BeamSplitterScenario s(f, v, PolarizationVector::e_plus(), flat_response(f.grid_a),
                                 MeasurementWindow(1.0, 0.01));
    EXPECT_LE((gamma_spectrum(s).values.cwiseAbs() - v.values.cwiseAbs()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gamma, NoDetection)
{
    CMatrix f = CMatrix::Zero(17, 16);
    f(0, 0) = 1.0;
    const DetectorResponse trig = narrow_filter_response(kA, 9.0, 0.001);
    const BeamSplitterScenario s(JointSpectralAmplitude(kA, kB, f), flat_spectrum(kB), PolarizationVector::e_plus(),
                                 trig, MeasurementWindow(0.0, 1.0));
    EXPECT_THROW(gamma_spectrum(s), PhysicsError);
    EXPECT_THROW(heralded_pair_purity(s), PhysicsError);
}

TEST(PairOverlap, Examples)
{
    BeamSplitterScenario s = disjoint_scenario();
    const SpectralVector gamma = gamma_spectrum(s);
    s.single = gamma;
    EXPECT_NEAR(pair_overlap(s), 1.0, 1e-12);
    s.single = SpectralVector(kB, std::exp(cplx(0.0, kPi / 3.0)) * gamma.values);
    EXPECT_NEAR(pair_overlap(s), 1.0, 1e-12);
    // Offset by one FWHM, with the direct sum as oracle.
    const double fwhm = 2.0 * std::sqrt(2.0 * std::log(2.0)) * 0.25;
    s.single = gaussian_spectrum(kB, 9.0 + fwhm, 0.25);
    cplx direct(0.0);
    for (int k = 0; k < kB.size(); ++k) {
        direct += s.single.values(k) * std::conj(gamma.values(k));
    }
    EXPECT_NEAR(pair_overlap(s), std::norm(direct), 1e-14);
    EXPECT_GT(pair_overlap(s), 0.0);
    EXPECT_LT(pair_overlap(s), 1.0);
}

TEST(PairOverlap, PhaseInvariantProperty)
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        BeamSplitterScenario s = disjoint_scenario(oracle::uniform(rng, 9.0, 11.0), 10.0);
        const CVector g = oracle::random_complex(16, rng).normalized();
        s.single = SpectralVector(kB, g);
        const double base = pair_overlap(s);
        EXPECT_GE(base, 0.0);
        EXPECT_LE(base, 1.0 + 1e-12);
        s.single = SpectralVector(kB, std::exp(cplx(0.0, oracle::uniform(rng, 0.0, 6.0))) * g);
        EXPECT_NEAR(pair_overlap(s), base, 1e-12);
    }
}

TEST(HeraldedPair, DisjointSpectraGiveMaximalEntanglement)
{
    const BeamSplitterScenario s = disjoint_scenario();
    const HeraldedPair p = heralded_pair_state(s);
    EXPECT_TRUE(p.warnings.empty());
    EXPECT_NEAR(p.chi12.reduced_purity(), 0.5, 1e-9);
    EXPECT_NEAR(oracle::schmidt_purity(p.chi12.amplitude), 0.5, 1e-9);
    double sum = 0.0;
    for (const double w : p.weights) {
        EXPECT_GE(w, 0.0);
        EXPECT_LE(w, 1.0);
        sum += w;
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
    EXPECT_NEAR(p.weights[0], 0.5, 1e-9);
    EXPECT_NEAR(p.weights[1], 0.25, 1e-9);
    EXPECT_NEAR(p.weights[2], 0.25, 1e-9);
}

TEST(HeraldedPair, MatchesExplicitConstruction)
{
    const BeamSplitterScenario s = correlated_scenario(0.01);
    const HeraldedPair p = heralded_pair_state(s);
    const CVector gamma = gamma_oracle(s);
    const Eigen::Vector2cd pp = primed_polarization(s.trigger.analyzer).normalized().as_vector();
    const Eigen::Vector2cd pl = s.single_pol.as_vector();
    const int n = s.grid().size();
    CMatrix expected(2 * n, 2 * n);
    CMatrix same(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
        for (int a = 0; a < 2; ++a) {
            for (int kp = 0; kp < n; ++kp) {
                for (int b = 0; b < 2; ++b) {
                    const cplx primed_first = gamma(k) * pp(a) * s.single.values(kp) * pl(b);
                    const cplx plain_first = s.single.values(k) * pl(a) * gamma(kp) * pp(b);
                    expected(2 * k + a, 2 * kp + b) = primed_first + plain_first;
                    same(2 * k + a, 2 * kp + b) = plain_first;
                }
            }
        }
    }
    EXPECT_NEAR(std::abs((p.chi12.amplitude.conjugate().cwiseProduct(expected)).sum()), expected.norm(), 1e-10);
    EXPECT_NEAR(std::abs((p.chi11.amplitude.conjugate().cwiseProduct(same)).sum()), same.norm(), 1e-10);
    // Weights follow (1/4)|cross|^2 : (1/4)|same|^2 : (1/4)|same|^2.
    const double n12 = expected.squaredNorm();
    const double n11 = same.squaredNorm();
    EXPECT_NEAR(p.weights[0], n12 / (n12 + 2.0 * n11), 1e-12);
}

TEST(HeraldedPair, SymmetricCaseIsExchangeSymmetric)
{
    BeamSplitterScenario s = disjoint_scenario(10.0, 10.0);
    s.single = gamma_spectrum(s);
    const HeraldedPair p = heralded_pair_state(s);
    EXPECT_LE(max_abs_diff(p.chi12.amplitude, p.chi12.swapped().amplitude), 1e-15);
    EXPECT_NEAR(p.chi12.reduced_purity(), 1.0, 1e-12);
    const TwoModeState sym = p.chi11.symmetrized();
    EXPECT_LE(max_abs_diff(sym.amplitude, sym.swapped().amplitude), 1e-15);
    EXPECT_NEAR(sym.amplitude.norm(), 1.0, 1e-14);
}

TEST(HeraldedPair, ExchangeOfLabelsAndInputs)
{
    // Swapping ports together with (g, phi) <-> (gamma, phi') leaves chi12 fixed.
    const BeamSplitterScenario s = correlated_scenario(0.01);
    const HeraldedPair p = heralded_pair_state(s);
    const CVector primed = Eigen::kroneckerProduct(p.gamma.values, CVector(p.phi_prime.normalized().as_vector())).eval();
    const CVector plain = Eigen::kroneckerProduct(s.single.values, CVector(s.single_pol.as_vector())).eval();
    const CMatrix swapped_inputs = plain * primed.transpose() + primed * plain.transpose();
    EXPECT_LE(max_abs_diff(p.chi12.swapped().amplitude, swapped_inputs / swapped_inputs.norm()), 1e-14);
}

TEST(HeraldedPair, LongTriggerWarns)
{
    const HeraldedPair p = heralded_pair_state(correlated_scenario(20.0));
    EXPECT_EQ(p.theta.regime, Regime::Long);
    EXPECT_EQ(p.warnings.size(), 1u);
}

TEST(HeraldedPairDensity, PurityIdentityAndMixing)
{
    for (const double theta : {0.001, 1.0, 20.0}) {
        const BeamSplitterScenario s = correlated_scenario(theta);
        const DensityMatrix rho = heralded_pair_density(s);
        EXPECT_TRUE(diagnose(rho).valid(1e-9));
        EXPECT_NEAR(heralded_pair_purity(s), purity(rho), 1e-10) << "theta " << theta;
    }
    EXPECT_GE(heralded_pair_purity(correlated_scenario(0.001)), 1.0 - 1e-5);
    EXPECT_LT(heralded_pair_purity(correlated_scenario(20.0)), 1.0 - 1e-3);
    EXPECT_THROW(heralded_pair_density(correlated_scenario(1.0), 8), ValidationError);
}

TEST(HeraldedPairDensity, ShortGateIsChi12Projector)
{
    const BeamSplitterScenario s = correlated_scenario(1e-4);
    const CVector v = Eigen::Map<const CVector>(heralded_pair_state(s).chi12.amplitude.transpose().eval().data(),
                                                576);
    // Row-major flattening: index (i, j) -> i * 24 + j.
    const DensityMatrix rho = heralded_pair_density(s);
    EXPECT_GE(fidelity_with_pure(rho, v), 1.0 - 1e-6);
}

TEST(HeraldedPairDensity, DeltaTriggerIsPureAtAnyWindow)
{
    const FrequencyGrid g(8.0, 0.25, 12);
    const JointSpectralAmplitude f = correlated_gaussian_jsa(g, g, 9.4, 9.4, 0.4, 0.4, -0.9);
    const DetectorResponse trig = narrow_filter_response(g, 9.5, 0.001, PolarizationVector::linear(0.3));
    for (const double tm : {1e-3, 1.0, 1e3}) {
        const BeamSplitterScenario s(f, gaussian_spectrum(g, 9.6, 0.3), PolarizationVector::e_minus(), trig,
                                     MeasurementWindow(0.0, tm));
        EXPECT_NEAR(heralded_pair_purity(s), 1.0, 1e-10);
    }
}

TEST(TripleCorrelation, PartsAndOracle)
{
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        BeamSplitterScenario s = disjoint_scenario(oracle::uniform(rng, 9.0, 11.0), oracle::uniform(rng, 9.0, 11.0));
        const CVector e1 = oracle::random_complex(2, rng).normalized();
        const CVector e2 = oracle::random_complex(2, rng).normalized();
        const DetectorResponse d1(SpectralVector(kB, oracle::random_complex(16, rng)), PolarizationVector{e1(0), e1(1)},
                                  0.3);
        const DetectorResponse d2(SpectralVector(kB, oracle::random_complex(16, rng)), PolarizationVector{e2(0), e2(1)},
                                  -0.2);
        const double t1 = oracle::uniform(rng, -3.0, 3.0);
        const double t2 = oracle::uniform(rng, -3.0, 3.0);
        const TripleCorrelation c = triple_correlation(s, d1, d2, t1, t2);
        EXPECT_GE(c.coincidence, 0.0);
        EXPECT_GE(c.port1, 0.0);
        EXPECT_GE(c.port2, 0.0);
        EXPECT_EQ(c.total, c.coincidence + c.port1 + c.port2);

        // Oracle: unnormalized gamma by direct sum, then the field amplitudes.
        const double tau3 = s.trigger.retarded(s.window.center);
        CVector gamma = CVector::Zero(16);
        for (int k3 = 0; k3 < 17; ++k3) {
            gamma += s.trigger.response.values(k3) * std::exp(cplx(0.0, -kA[k3] * tau3)) *
                     s.jsa.values.row(k3).transpose();
        }
        const Eigen::Vector2cd pp = primed_polarization(s.trigger.analyzer).as_vector();
        auto field = [&](const DetectorResponse &d, double t, const CVector &spec, const Eigen::Vector2cd &pol) {
            cplx amp(0.0);
            for (int k = 0; k < 16; ++k) {
                amp += d.response.values(k) * spec(k) * std::exp(cplx(0.0, -kB[k] * (t - d.position)));
            }
            return amp * d.analyzer.as_vector().dot(pol);
        };
        const Eigen::Vector2cd pl = s.single_pol.as_vector();
        const cplx b1 = field(d1, t1, gamma, pp);
        const cplx b2 = field(d2, t2, gamma, pp);
        const cplx c1 = field(d1, t1, s.single.values, pl);
        const cplx c2 = field(d2, t2, s.single.values, pl);
        const double scale = std::max(1.0, c.total);
        EXPECT_NEAR(c.coincidence, 0.25 * std::norm(b1 * c2 + c1 * b2), 1e-12 * scale);
        EXPECT_NEAR(c.port1, 0.25 * std::norm(b1 * c1), 1e-12 * scale);
        EXPECT_NEAR(c.port2, 0.25 * std::norm(b2 * c2), 1e-12 * scale);
    }
}

TEST(TripleCorrelation, MatchedBeatsOrthogonalMismatch)
{
    BeamSplitterScenario matched = disjoint_scenario(10.0, 10.0);
    matched.single = gamma_spectrum(matched);
    // Detectors at 45 degrees see both polarizations.
    const DetectorResponse d = flat_response(kB, PolarizationVector::linear(kPi / 4.0));
    BeamSplitterScenario mismatch = matched;
    mismatch.single_pol = PolarizationVector::e_minus(); // phi' = e_+
    const double m = triple_correlation(matched, d, d, 0.5, 0.5).coincidence;
    const double o = triple_correlation(mismatch, d, d, 0.5, 0.5).coincidence;
    EXPECT_GT(m, o);
}

TEST(TripleCorrelation, OrthogonalAnalyzerKillsPortOne)
{
    const BeamSplitterScenario s = disjoint_scenario(); // phi = phi' = e_+
    const DetectorResponse blind = flat_response(kB, PolarizationVector::e_minus());
    const DetectorResponse open = flat_response(kB, PolarizationVector::e_plus());
    const TripleCorrelation c = triple_correlation(s, blind, open, 0.0, 0.0);
    EXPECT_EQ(c.coincidence, 0.0);
    EXPECT_EQ(c.port1, 0.0);
    EXPECT_THROW(triple_correlation(s, flat_response(kA), open, 0.0, 0.0), ValidationError);
}
