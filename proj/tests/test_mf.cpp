#include "kd/mf.hpp"

#include <gtest/gtest.h>

using namespace kd;

namespace {

MatrixFactorization from_catalogue(const std::string& name, int n = 0, int m = 0) {
    return extract_mf(mf_resolution(name, {n, m}));
}

Poly var(const Algebra& ring, const std::string& name, Q c = Q(1)) { return ring.poly(ring.unit(ring.index(name)), c); }

} // namespace

TEST(MatrixFactorization, AdditivePointSatisfiesBothIdentities) {
    auto mf = from_catalogue("bga.skyscraper");
    ASSERT_EQ(mf.even.size(), 2u);
    ASSERT_EQ(mf.odd.size(), 2u);
    auto id = check_identity(mf);
    EXPECT_TRUE(id.ab);
    EXPECT_TRUE(id.ba);
    Poly xy = mf.ring.mul(var(mf.ring, "x"), var(mf.ring, "y"));
    EXPECT_EQ(mf.potential, xy);
    Q half = Q(1) / Q(2);
    // rows e0, e2; columns f1, f2
    EXPECT_EQ(mf.A[0][0], var(mf.ring, "x", half));
    EXPECT_EQ(mf.A[0][1], var(mf.ring, "y", half));
    EXPECT_EQ(mf.A[1][0], var(mf.ring, "x"));
    EXPECT_EQ(mf.A[1][1], var(mf.ring, "y", Q(-1)));
    EXPECT_EQ(mf.B[0][0], var(mf.ring, "y"));
    EXPECT_EQ(mf.B[0][1], var(mf.ring, "y", half));
    EXPECT_EQ(mf.B[1][0], var(mf.ring, "x"));
    EXPECT_EQ(mf.B[1][1], var(mf.ring, "x", -half));
    EXPECT_FALSE(is_contractible(mf, 2));
}

TEST(MatrixFactorization, HalvedNullhomotopyGivesHalfCurvature) {
    auto p = bga_skyscraper_resolution();
    Q half = Q(1) / Q(2);
    int delta = p.algebra.index("delta");
    for (auto& [src, img] : p.act[delta])
        for (auto& t : img)
            for (auto& [mono, c] : t.coef) c *= half;
    auto mf = extract_mf(p);
    EXPECT_FALSE(check_identity(mf).ok());
    mf.potential = mf.ring.mul(var(mf.ring, "x", half), var(mf.ring, "y"));
    EXPECT_TRUE(check_identity(mf).ok());
}

TEST(MatrixFactorization, CharacterContractibleExactlyAwayFromZero) {
    for (int n : {-2, -1, 0, 1, 2, 3}) {
        auto mf = from_catalogue("bgm.character", n);
        EXPECT_TRUE(check_identity(mf).ok()) << n;
        EXPECT_EQ(mf.potential, var(mf.ring, "x", Q(n))) << n;
        EXPECT_EQ(is_contractible(mf, 3), n != 0) << n;
    }
}

TEST(MatrixFactorization, LoopFactorizationIsContractible) {
    auto mf = from_catalogue("bgm.infinitesimal_loop", 0, 0);
    EXPECT_TRUE(check_identity(mf).ok());
    EXPECT_TRUE(is_contractible(mf, 1));
    EXPECT_TRUE(is_contractible(from_catalogue("zero"), 0));
}

TEST(MatrixFactorization, AxesDifferByShift) {
    auto xaxis = from_catalogue("bga.omega");
    auto yaxis = extract_mf(bga_axis_resolution(false));
    EXPECT_TRUE(check_identity(xaxis).ok());
    EXPECT_TRUE(check_identity(yaxis).ok());
    EXPECT_EQ(xaxis.A[0][0], var(xaxis.ring, "y"));
    EXPECT_EQ(xaxis.B[0][0], var(xaxis.ring, "x"));
    EXPECT_TRUE(isomorphic_by_constants(shift_mf(xaxis), yaxis));
    EXPECT_FALSE(isomorphic_by_constants(xaxis, yaxis));
    EXPECT_FALSE(is_contractible(xaxis, 2));
}

TEST(MatrixFactorization, ShiftTwiceIsIdentityUpToIsomorphism) {
    auto mf = from_catalogue("bga.skyscraper");
    EXPECT_TRUE(isomorphic_by_constants(shift_mf(shift_mf(mf)), mf));
    EXPECT_TRUE(check_identity(shift_mf(mf)).ok());
}

TEST(MatrixFactorization, RejectsNonResolutions) {
    EXPECT_THROW(mf_resolution("bgm.omega_formal", {}), NotAResolution);
    auto p = bgm_skyscraper_presentation(1);
    p.free_vars.clear();
    p.act[0][0] = {{p.algebra.poly(p.algebra.one()), 1}};
    EXPECT_ANY_THROW(extract_mf(p));
}
