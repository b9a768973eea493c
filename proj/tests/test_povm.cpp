#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "stateprep/povm.hpp"

using namespace stateprep;

namespace
{

CVector unit_random(int n, std::mt19937_64 &rng)
{
    const CVector v = oracle::random_complex(n, rng);
    return v / v.norm();
}

// A^H A with A of shape rank x n.
CMatrix random_psd_oracle(int n, int rank, std::mt19937_64 &rng)
{
    const CMatrix a = oracle::random_complex(rank, n, rng);
    CMatrix e = a.adjoint() * a;
    return 0.5 * (e + e.adjoint());
}

} // namespace

TEST(Povm, ConstructorValidation)
{
    EXPECT_THROW(BipartitePureState(CVector::Ones(3)), ValidationError);
    CMatrix bad(2, 2);
    bad << 1.0, cplx(0.0, 1.0), cplx(0.0, 1.0), 1.0;
    EXPECT_THROW(PovmElement{bad}, ValidationError);
    EXPECT_THROW(PovmElement(CMatrix(-CMatrix::Identity(2, 2))), ValidationError);
    EXPECT_NO_THROW(PovmElement(CMatrix(3.0 * CMatrix::Identity(2, 2))));
}

TEST(Povm, IdentityGivesSchmidtDephasedState)
{
    std::mt19937_64 rng(1);
    const CVector c = unit_random(5, rng);
    const DensityMatrix rho = condition_on_povm(BipartitePureState(c), PovmElement(CMatrix::Identity(5, 5)));
    const CMatrix expected = c.cwiseAbs2().cast<cplx>().asDiagonal();
    EXPECT_LE(max_abs_diff(rho.values, expected), 1e-14);
}

TEST(Povm, ProjectiveFilterProjects)
{
    std::mt19937_64 rng(2);
    const CVector c = unit_random(4, rng);
    for (int r = 0; r < 4; ++r) {
        CMatrix e = CMatrix::Zero(4, 4);
        e(r, r) = 1.0;
        const DensityMatrix rho = condition_on_povm(BipartitePureState(c), PovmElement(e));
        CMatrix expected = CMatrix::Zero(4, 4);
        expected(r, r) = 1.0;
        EXPECT_LE(max_abs_diff(rho.values, expected), 1e-14);
    }
}

TEST(Povm, RankOneIsPureAndFactorizes)
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = oracle::uniform_int(rng, 2, 8);
        const CVector u = oracle::random_complex(n, rng);
        const PovmElement e(CMatrix(u * u.adjoint()));
        const BipartitePureState s(unit_random(n, rng));
        EXPECT_NEAR(purity(condition_on_povm(s, e)), 1.0, 1e-10);
        EXPECT_LE(factorization_defect(e, support_of(s)), 1e-12);
    }
}

TEST(Povm, MatchesPartialTraceOfTransposedElement)
{
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = oracle::uniform_int(rng, 2, 6);
        const CVector c = unit_random(n, rng);
        const CMatrix e = random_psd_oracle(n, oracle::uniform_int(rng, 1, n), rng);
        const DensityMatrix rho = condition_on_povm(BipartitePureState(c), PovmElement(e));
        const CMatrix expected = oracle::povm_partial_trace(c, e.transpose());
        EXPECT_LE(max_abs_diff(rho.values, expected), 1e-12) << "trial " << trial;
        // Physical partial trace with E itself has the same spectrum.
        const CMatrix direct = oracle::povm_partial_trace(c, e);
        EXPECT_NEAR(purity(rho), (direct * direct).trace().real(), 1e-12);
    }
}

TEST(Povm, ZeroProbabilityOutcome)
{
    CVector c(2);
    c << 1.0, 0.0;
    CMatrix e = CMatrix::Zero(2, 2);
    e(1, 1) = 1.0;
    EXPECT_THROW(condition_on_povm(BipartitePureState(c), PovmElement(e)), PhysicsError);
    EXPECT_THROW(condition_on_povm(BipartitePureState(c), PovmElement(CMatrix::Identity(3, 3))), ValidationError);
}

TEST(FactorizationDefect, Examples)
{
    // |0 - 1| / (1 + 1)
    EXPECT_DOUBLE_EQ(factorization_defect(PovmElement(CMatrix::Identity(2, 2)), {0, 1}), 0.5);
    EXPECT_THROW(factorization_defect(PovmElement(CMatrix::Identity(2, 2)), {}), ValidationError);
    EXPECT_THROW(factorization_defect(PovmElement(CMatrix::Identity(2, 2)), {0, 2}), ValidationError);
    // Single-point support.
    CVector c(2);
    c << 1.0, 0.0;
    CMatrix e = CMatrix::Zero(2, 2);
    e(0, 0) = 1.0;
    const BipartitePureState s(c);
    EXPECT_EQ(support_of(s), std::vector<int>{0});
    EXPECT_NEAR(purity(condition_on_povm(s, PovmElement(e))), 1.0, 1e-15);
    EXPECT_EQ(factorization_defect(PovmElement(e), support_of(s)), 0.0);
}

TEST(FactorizationDefect, RankTwoIsMixedWithPositiveDefect)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = oracle::uniform_int(rng, 2, 6);
        const PovmElement e(random_psd_oracle(n, 2, rng));
        const BipartitePureState s(unit_random(n, rng));
        const double defect = factorization_defect(e, support_of(s));
        const double p = purity(condition_on_povm(s, e));
        EXPECT_GT(defect, 1e-8) << "trial " << trial;
        EXPECT_LT(p, 1.0 - 1e-6) << "trial " << trial;
    }
}

TEST(FactorizationDefect, OffSupportBehaviourIsIrrelevant)
{
    // Rank-1 on the support {0, 1}, arbitrary on index 2.
    CVector u(3);
    u << cplx(1.0, 0.5), cplx(-0.3, 0.2), 0.0;
    CMatrix e = u * u.adjoint();
    e(2, 2) = 4.0;
    CVector c(3);
    c << 0.8, 0.6, 0.0;
    const BipartitePureState s(c);
    const PovmElement el(e);
    EXPECT_LE(factorization_defect(el, support_of(s)), 1e-15);
    EXPECT_NEAR(purity(condition_on_povm(s, el)), 1.0, 1e-12);
    EXPECT_GT(factorization_defect(el, {0, 1, 2}), 0.1);
}

TEST(AnnihilatedComponents, Examples)
{
    CVector c(2);
    c << 1.0, 0.0;
    EXPECT_EQ(annihilated_components(BipartitePureState(c), 0.0), std::vector<int>{1});
    std::mt19937_64 rng(6);
    EXPECT_TRUE(annihilated_components(BipartitePureState(unit_random(4, rng)), 1e-12).empty());
    EXPECT_THROW(annihilated_components(BipartitePureState(c), -1.0), ValidationError);

    CVector d(3);
    d << 0.8, 0.6, 0.0;
    const BipartitePureState s(d);
    EXPECT_EQ(annihilated_components(s, 0.0), std::vector<int>{2});
    for (int trial = 0; trial < 20; ++trial) {
        const DensityMatrix rho = condition_on_povm(s, PovmElement(random_psd_oracle(3, 3, rng)));
        EXPECT_EQ(rho.values.col(2).norm(), 0.0);
        EXPECT_EQ(rho.values.row(2).norm(), 0.0);
    }
}

TEST(PovmProperties, ConditionedStateIsValidDensity)
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = oracle::uniform_int(rng, 2, 8);
        CVector c = unit_random(n, rng);
        // Some components vanish, with small ones kept near tol.
        const double tol = 1e-9;
        for (int a = 0; a < n; ++a) {
            if (oracle::uniform(rng, 0.0, 1.0) < 0.25) {
                c(a) = oracle::uniform(rng, 0.0, 1.0) < 0.5 ? cplx(0.0) : cplx(0.5 * tol);
            }
        }
        if (c.norm() == 0.0) {
            c(0) = 1.0;
        }
        c /= c.norm();
        const BipartitePureState s(c);
        const PovmElement e(random_psd_oracle(n, oracle::uniform_int(rng, 1, n), rng));
        const DensityMatrix rho = condition_on_povm(s, e);
        EXPECT_TRUE(diagnose(rho).valid()) << "trial " << trial;
        for (const int a : annihilated_components(s, tol)) {
            EXPECT_LE(rho.values.col(a).norm(), 10.0 * tol);
            EXPECT_LE(rho.values.row(a).norm(), 10.0 * tol);
        }
    }
}

TEST(PovmProperties, PurityIffFactorizationBothDirections)
{
    // Independent draws with the test's own generators.
    std::mt19937_64 rng(8);
    int pure_hits = 0;
    int mixed_hits = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int n = oracle::uniform_int(rng, 2, 6);
        const int rank = oracle::uniform_int(rng, 1, n);
        const PovmElement e(random_psd_oracle(n, rank, rng));
        const BipartitePureState s(unit_random(n, rng));
        const bool pure = purity(condition_on_povm(s, e)) >= 1.0 - 1e-8;
        const bool factors = factorization_defect(e, support_of(s)) <= 1e-8;
        EXPECT_EQ(pure, factors) << "trial " << trial;
        (pure ? pure_hits : mixed_hits) += 1;
    }
    EXPECT_GT(pure_hits, 0);
    EXPECT_GT(mixed_hits, 0);
}

TEST(IffTest, FamiliesBehaveAsExpected)
{
    const IffReport one = purity_iff_factorization_test(1000, 4, 11, PovmFamily::RankOne);
    EXPECT_EQ(one.both_true, 1000);
    EXPECT_TRUE(one.passed());
    const IffReport gen = purity_iff_factorization_test(1000, 4, 12, PovmFamily::Generic);
    EXPECT_EQ(gen.both_false, 1000);
    EXPECT_TRUE(gen.passed());
    const IffReport mixed = purity_iff_factorization_test(600, 3, 13, PovmFamily::Mixed, true);
    EXPECT_TRUE(mixed.passed());
    EXPECT_EQ(mixed.rank_one_trials + mixed.projective_trials + mixed.generic_trials, 600);
    EXPECT_GT(mixed.rank_one_trials, 0);
    EXPECT_GT(mixed.projective_trials, 0);
    EXPECT_GT(mixed.generic_trials, 0);
    EXPECT_EQ(mixed.details.size(), 600u);
    EXPECT_GT(mixed.worst_pure_margin, 0.0);
    EXPECT_GT(mixed.worst_mixed_margin, 0.0);
}

TEST(IffTest, DeterministicForSeed)
{
    const IffReport a = purity_iff_factorization_test(200, 4, 99, PovmFamily::Mixed, true);
    const IffReport b = purity_iff_factorization_test(200, 4, 99, PovmFamily::Mixed, true);
    ASSERT_EQ(a.details.size(), b.details.size());
    for (std::size_t i = 0; i < a.details.size(); ++i) {
        EXPECT_EQ(a.details[i].purity, b.details[i].purity);
        EXPECT_EQ(a.details[i].defect, b.details[i].defect);
    }
}

TEST(IffTest, Validation)
{
    EXPECT_THROW(purity_iff_factorization_test(10, 1, 0), ValidationError);
    EXPECT_THROW(purity_iff_factorization_test(0, 3, 0), ValidationError);
    EXPECT_STREQ(to_string(PovmFamily::RankOne), "rank-1");
    EXPECT_STREQ(to_string(PovmFamily::Mixed), "mixed");
}
