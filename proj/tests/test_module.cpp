#include "kd/module.hpp"

#include <gtest/gtest.h>

using namespace kd;

namespace {

const Window kBox{-4, 4, -6, 6, 0};

/// Free k[x]-resolution of the weight-n point: d(e1) = x e0, delta(e0) = n e1.
ModulePresentation resolution(int n, int delta_coef) {
    ModulePresentation p;
    p.name = "resolution";
    p.algebra = make_bgm_block(n);
    p.gens = {{"e0", {0, 0, 0}}, {"e1", {-1, -1, 0}}};
    p.free_vars = {0};
    Poly x = p.algebra.gen_poly(0);
    p.diff[1] = {{x, 0}};
    p.act[1][0] = {{p.algebra.poly(p.algebra.one(), Q(delta_coef)), 1}};
    return p;
}

} // namespace

TEST(Module, ResolutionIsAValidDgModule) {
    for (int n : {0, 1, 2, -3}) {
        auto m = realize(resolution(n, n), kBox);
        auto rep = validate_equivariant(m);
        for (auto& c : rep.checks) EXPECT_TRUE(c.ok) << "n=" << n << " " << c.name;
    }
}

TEST(Module, WrongCurvatureIsDetected) {
    auto m = realize(resolution(2, 3), kBox);
    auto rep = validate_equivariant(m);
    EXPECT_FALSE(rep.ok());
    ASSERT_NE(rep.find("curvature [d,delta]"), nullptr);
    EXPECT_FALSE(rep.find("curvature [d,delta]")->ok);
    EXPECT_TRUE(rep.find("d^2=0")->ok);
}

TEST(Module, ResolutionCohomologyIsThePoint) {
    auto m = realize(resolution(1, 1), kBox);
    auto rep = cohomology(m.complex());
    for (auto& [g, e] : rep.pieces) EXPECT_EQ(e.dim, (g == Trigrade{0, 0, 0}) ? 1 : 0) << to_string(g);
}

TEST(Module, InhomogeneousDeclarationNamesBothGrades) {
    auto p = resolution(1, 1);
    p.diff[1] = {{p.algebra.poly(p.algebra.one()), 0}};  // d(e1) = e0 skips the x
    try {
        check_presentation(p);
        FAIL() << "expected a homogeneity error";
    } catch (const InvalidModule& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("(0,-1,0)"), std::string::npos) << msg;
        EXPECT_NE(msg.find("(0,0,0)"), std::string::npos) << msg;
    }
}

TEST(Module, FreeGeneratorCannotCarryAnAction) {
    auto p = resolution(1, 1);
    p.act[0][0] = {{p.algebra.poly(p.algebra.one()), 1}};
    EXPECT_THROW(check_presentation(p), InvalidModule);
}

TEST(Module, ExplicitBuilderTruncatesToWindow) {
    ExplicitModuleBuilder b("tower", make_bgm_block(0), Window{-2, 2, -2, 3, 0});
    for (int j = 0; j <= 10; ++j) b.add("x^-" + std::to_string(j), {0, j, 0});
    for (int j = 1; j <= 10; ++j) b.set("x", "x^-" + std::to_string(j), "x^-" + std::to_string(j - 1), Q(1));
    auto m = b.build();
    EXPECT_EQ(m.space->total_dim(), 4);
    EXPECT_TRUE(validate_equivariant(m).ok());
    auto x3 = apply_op(m.op("x"), element_key({0, 3, 0}, 0));
    ASSERT_EQ(x3.size(), 1u);
    EXPECT_EQ(x3[0].key, element_key({0, 2, 0}, 0));
}

TEST(Module, ExplicitBuilderRejectsMisgradedOperator) {
    ExplicitModuleBuilder b("bad", make_bgm_block(0), Window{-2, 2, -2, 2, 0});
    b.add("a", {0, 0, 0});
    b.add("b", {0, 0, 0});
    b.set("x", "a", "b", Q(1));
    EXPECT_THROW(b.build(), InvalidModule);
}

TEST(Shear, ComposesAdditively) {
    auto m = realize(resolution(2, 2), kBox);
    for (int a : {-2, 0, 1}) for (int b : {-1, 3}) {
        EXPECT_TRUE(same_module(shear(shear(m, a), b), shear(m, a + b))) << a << " " << b;
    }
    EXPECT_TRUE(same_module(tate_unshear(tate_shear(m)), m));
    // the Tate shear moves weight k to degree 2k: the dual parameter t at (0,1) lands at (2,1)
    EXPECT_EQ(shear_grade({0, 1, 0}, -2), (Trigrade{2, 1, 0}));
}
