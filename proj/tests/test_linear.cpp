#include "kd/linear.hpp"

#include <gtest/gtest.h>

using namespace kd;

namespace {

/// The zero section realized deep enough in z for every kappa piece on `w`.
OpModule deep_zero_section(const LinearBundle& e, const Window& w) {
    return zero_section_module(e, w.widened(0, 0, w.wt_max));
}

std::map<Trigrade, int> certified_dims(const CohomologyReport& r) {
    std::map<Trigrade, int> out;
    for (auto& [g, e] : r.pieces)
        if (e.certified && e.dim) out[g] = e.dim;
    return out;
}

const LinearBundle& bundle(const std::string& name) {
    static auto all = standard_bundles();
    for (auto& b : all)
        if (b.name == name) return b;
    throw std::invalid_argument(name);
}

} // namespace

TEST(LinearBundle, DoubleDualReturnsOriginal) {
    for (auto& e : standard_bundles()) {
        auto dd = koszul_dual(koszul_dual(e));
        EXPECT_TRUE(dd == e) << e.name;
        auto d = koszul_dual(e);
        EXPECT_EQ(d.r0, e.r1);
        EXPECT_EQ(d.r1, e.r0);
        EXPECT_EQ(sheared_dual(e).shift, d.shift + 2);
    }
}

TEST(LinearBundle, RejectsInhomogeneousRows) {
    LinearBundle b;
    b.over_line = true;
    b.r0 = 2;
    b.r1 = 1;
    b.phi = {{{Q(1), 0}, {Q(1), 1}}};
    EXPECT_THROW(b.check(), std::invalid_argument);
    b.over_line = false;
    b.phi = {{{Q(1), 0}, {Q(1), 1}}};
    EXPECT_THROW(b.check(), std::invalid_argument);
}

TEST(LinearKoszul, ResolutionAugmentationIsAcyclic) {
    Window w{-7, 3, -5, 0, 4};
    for (auto& e : standard_bundles()) {
        auto rep = cohomology(koszul_augmentation_cone(e, w));
        EXPECT_TRUE(rep.acyclic_on_certified()) << e.name;
        EXPECT_GT(rep.certified_count(), 0) << e.name;
    }
}

TEST(LinearKoszul, DualOfZeroSectionIsDualFunctions) {
    Window w{-3, 9, 0, 5, 4};
    for (auto& e : standard_bundles()) {
        auto z = deep_zero_section(e, w);
        ASSERT_TRUE(validate_equivariant(z).ok()) << e.name;
        auto kz = linear_kappa(e, z, w);
        EXPECT_TRUE(validate_equivariant(kz.module).ok()) << e.name;
        auto oracle = algebra_complex(dual_space_algebra(e), w);
        for (int d = w.deg_min; d <= w.deg_max; ++d)
            for (int wt = w.wt_min; wt <= w.wt_max; ++wt)
                for (int a = 0; a <= w.aux_max; ++a) {
                    Trigrade g{d, wt, a};
                    EXPECT_EQ(kz.module.space->dim(g), oracle.complex.space->dim(g)) << e.name << " " << to_string(g);
                }
        auto lhs = cohomology(kz.module.complex());
        auto rhs = cohomology(oracle.complex);
        EXPECT_EQ(certified_dims(lhs), certified_dims(rhs)) << e.name;
    }
}

TEST(LinearKoszul, DualFunctionsHandComputed) {
    Window w{-3, 9, 0, 5, 3};
    // k[v] (x) Lambda(u) with d u = -v: only the constants survive
    auto pt = certified_dims(cohomology(linear_kappa(bundle("pt.r11"), deep_zero_section(bundle("pt.r11"), w), w).module.complex()));
    EXPECT_EQ(pt, (std::map<Trigrade, int>{{{0, 0, 0}, 1}}));
    // single even fibre coordinate: exterior algebra on u, cohomology 1 + u
    auto r10 = certified_dims(cohomology(linear_kappa(bundle("pt.r10"), deep_zero_section(bundle("pt.r10"), w), w).module.complex()));
    EXPECT_EQ(r10, (std::map<Trigrade, int>{{{0, 0, 0}, 1}, {{1, 1, 0}, 1}}));
    // single odd coordinate: polynomial ring on v at (2,1,0)
    auto r01 = certified_dims(cohomology(linear_kappa(bundle("pt.r01"), deep_zero_section(bundle("pt.r01"), w), w).module.complex()));
    EXPECT_EQ(r01, (std::map<Trigrade, int>{{{0, 0, 0}, 1}, {{2, 1, 0}, 1}, {{4, 2, 0}, 1}, {{6, 3, 0}, 1}, {{8, 4, 0}, 1}}));
    // over the line with phi = z: k[z, v]/(z v) in non-negative aux
    auto ln = certified_dims(cohomology(linear_kappa(bundle("line.r11"), deep_zero_section(bundle("line.r11"), w), w).module.complex()));
    EXPECT_EQ(ln, (std::map<Trigrade, int>{{{0, 0, 0}, 1}, {{0, 0, 1}, 1}, {{0, 0, 2}, 1}, {{0, 0, 3}, 1}}));
}

TEST(LinearKoszul, ZeroGoesToZero) {
    Window w{-3, 3, -2, 2, 2};
    for (auto& e : standard_bundles()) {
        auto zero = ExplicitModuleBuilder("zero", total_space_algebra(e), w).build();
        auto k = linear_kappa(e, zero, w);
        EXPECT_EQ(k.module.space->total_dim(), 0) << e.name;
    }
}

TEST(LinearKoszul, TruncatedModulesAreValid) {
    std::mt19937 rng(11);
    for (auto& e : standard_bundles())
        for (int i = 0; i < 3; ++i) {
            auto m = random_truncated_module(e, rng, i);
            EXPECT_TRUE(validate_equivariant(m).ok()) << m.name;
            EXPECT_GT(m.space->total_dim(), 0);
        }
}

TEST(LinearKoszul, RoundTripConesAcyclicOnRandomModules) {
    std::mt19937 rng(2024);
    for (auto& e : standard_bundles())
        for (int i = 0; i < 10; ++i) {
            auto m = random_truncated_module(e, rng, i);
            Window t = m.region.box.widened(1, 0, 0);
            KeyedModule km = linear_kappa(e, m, linear_kappa_window(e, m, t));
            KeyedModule kkm = linear_kappa_inverse(e, km.module, t);
            EXPECT_TRUE(validate_equivariant(km.module).ok()) << m.name;
            EXPECT_TRUE(validate_equivariant(kkm.module).ok()) << m.name;
            auto rep = cohomology(linear_unit_cone(e, m, t));
            EXPECT_TRUE(rep.acyclic_on_certified()) << m.name;
            EXPECT_GT(rep.certified_count(), 0) << m.name;
        }
}

TEST(LinearKoszul, BrokenUnitIsDetected) {
    // dropping the y-tower from the unit leaves a non-acyclic cone
    auto e = bundle("pt.r10");
    auto m = truncated_module(e, {{{3}, 1, {0, 0, 0}}}, "k[y]/y^3");
    Window t = m.region.box.widened(1, 0, 0);
    KeyedModule km = linear_kappa(e, m, linear_kappa_window(e, m, t));
    KeyedModule kkm = linear_kappa_inverse(e, km.module, t);
    GradedMap f = linear_unit_map(e, m, km, kkm);
    GradedMap zero{f.source, f.target, f.shift, {}};
    GradedComplex src = m.complex();
    src.region = Region{t, 0};
    auto rep = cohomology(cone(src, kkm.module.complex(), zero));
    EXPECT_FALSE(rep.acyclic_on_certified());
}
