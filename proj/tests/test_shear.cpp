#include "kd/linear.hpp"

#include <gtest/gtest.h>

using namespace kd;

namespace {

/// Twenty random finite modules over the standard bundles, from a fixed seed.
std::vector<OpModule> random_modules() {
    std::mt19937 rng(97);
    auto bundles = standard_bundles();
    std::vector<OpModule> out;
    for (int i = 0; i < 20; ++i) out.push_back(random_truncated_module(bundles[i % bundles.size()], rng, i));
    return out;
}

/// Independent index oracle: every piece of the original reappears at the sheared index.
bool transported(const OpModule& m, const OpModule& s, int n) {
    if (m.space->pieces().size() != s.space->pieces().size()) return false;
    for (auto& [g, p] : m.space->pieces()) {
        Trigrade h{g.deg - n * g.wt, g.wt, g.aux};
        const Piece* q = s.space->piece(h);
        if (!q || q->dim != p.dim) return false;
        const SparseMatrix* a = m.d.block(g);
        const SparseMatrix* b = s.d.block(h);
        if ((a == nullptr) != (b == nullptr) || (a && !(*a == *b))) return false;
    }
    return true;
}

} // namespace

TEST(ShearProperty, ComposesOnRandomModules) {
    auto mods = random_modules();
    ASSERT_EQ(mods.size(), 20u);
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> pick(-3, 3);
    for (auto& m : mods) {
        int a = pick(rng), b = pick(rng);
        EXPECT_TRUE(same_module(shear(shear(m, a), b), shear(m, a + b))) << m.name << " " << a << " " << b;
        EXPECT_TRUE(same_module(shear(m, 0), m)) << m.name;
        EXPECT_TRUE(transported(m, shear(m, a), a)) << m.name << " " << a;
    }
}

TEST(ShearProperty, TateShearInvertsOnRandomModules) {
    for (auto& m : random_modules()) {
        EXPECT_TRUE(same_module(tate_unshear(tate_shear(m)), m)) << m.name;
        EXPECT_TRUE(same_module(tate_shear(tate_unshear(m)), m)) << m.name;
        EXPECT_TRUE(transported(m, tate_shear(m), -2)) << m.name;
    }
}

TEST(ShearProperty, CohomologyTransportsAlongIndexMap) {
    for (auto& m : random_modules()) {
        auto before = cohomology(m.complex());
        auto after = cohomology(tate_shear(m).complex());
        int total_before = 0, total_after = 0;
        for (auto& [g, e] : before.pieces) total_before += e.dim;
        for (auto& [g, e] : after.pieces) total_after += e.dim;
        EXPECT_EQ(total_before, total_after) << m.name;
        for (auto& [g, e] : before.pieces) {
            auto it = after.pieces.find(shear_grade(g, -2));
            ASSERT_NE(it, after.pieces.end()) << m.name;
            EXPECT_EQ(it->second.dim, e.dim) << m.name << " " << to_string(g);
        }
    }
}

TEST(ShearProperty, OperatorShiftsFollowTheIndexMap) {
    for (auto& m : random_modules()) {
        auto s = tate_shear(m);
        EXPECT_EQ(s.d.shift, kDiffShift) << m.name;
        for (auto& gen : m.algebra.generators())
            EXPECT_EQ(s.op(gen.name).shift, shear_grade(gen.grade, -2)) << m.name << " " << gen.name;
    }
}

TEST(ShearProperty, TateShearOfDualParameter) {
    EXPECT_EQ(shear_grade({0, 1, 0}, -2), (Trigrade{2, 1, 0}));
    EXPECT_EQ(shear_grade({0, 1, 0}, 2), (Trigrade{-2, 1, 0}));
    EXPECT_EQ(shear_grade(shear_grade({3, -2, 1}, 5), -5), (Trigrade{3, -2, 1}));
}
