#include "kd/algebra.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace kd;

namespace {

Monomial mono(const Algebra& a, std::initializer_list<std::pair<const char*, int>> powers) {
    Monomial m = a.one();
    for (auto& [n, e] : powers) m[a.index(n)] = e;
    return m;
}

std::vector<int> word(const Algebra& a, std::initializer_list<const char*> names) {
    std::vector<int> w;
    for (auto n : names) w.push_back(a.index(n));
    return w;
}

/// Independent enumeration: all exponent vectors with entries up to a bound, filtered by grade.
std::set<Monomial> brute_piece(const Algebra& a, const Trigrade& g, int bound) {
    std::set<Monomial> out;
    Monomial cur = a.one();
    std::function<void(int)> rec = [&](int i) {
        if (i == a.size()) {
            if (a.grade(cur) == g) out.insert(cur);
            return;
        }
        int top = a.gen(i).odd() ? 1 : bound;
        for (int e = 0; e <= top; ++e) {
            cur[i] = e;
            rec(i + 1);
        }
        cur[i] = 0;
    };
    rec(0);
    return out;
}

std::vector<Algebra> families() {
    return {make_mixed_de_rham(1), make_mixed_de_rham(2), make_rees_weyl(1), make_rees_weyl(2),
            make_bgm_block(0),     make_bgm_block(3),     make_bgm_dual(3),  make_bga_block(),
            make_bga_dual()};
}

} // namespace

TEST(NormalForm, ReesWeylCommutator) {
    auto d = make_rees_weyl(1);
    Poly got = d.normal_form(word(d, {"xi", "x"}));
    Poly want;
    add_to(want, mono(d, {{"x", 1}, {"xi", 1}}), Q(1));
    add_to(want, mono(d, {{"t", 1}}), Q(1));
    EXPECT_EQ(got, want) << d.format(got);
}

TEST(NormalForm, MixedDeRhamDeltaPastSquare) {
    auto o = make_mixed_de_rham(1);
    Poly got = o.normal_form(word(o, {"delta", "x", "x"}));
    Poly want;
    add_to(want, mono(o, {{"x", 2}, {"delta", 1}}), Q(1));
    add_to(want, mono(o, {{"x", 1}, {"dx", 1}}), Q(2));
    EXPECT_EQ(got, want) << o.format(got);
}

TEST(NormalForm, OddGeneratorsAnticommute) {
    auto o = make_mixed_de_rham(2);
    Poly sum = o.normal_form(word(o, {"dx1", "dx2"}));
    add_to(sum, o.normal_form(word(o, {"dx2", "dx1"})));
    EXPECT_TRUE(sum.empty());
    EXPECT_TRUE(o.normal_form(word(o, {"delta", "delta"})).empty());
}

TEST(NormalForm, IsIdempotentAndRejectsUnknown) {
    auto d = make_rees_weyl(2);
    Poly p = d.normal_form(word(d, {"xi2", "x2", "xi1", "x1", "x2"}));
    Poly again;
    for (auto& [m, c] : p) add_to(again, d.normal_form(d.word(m), c));
    EXPECT_EQ(p, again);
    EXPECT_THROW(d.index("y"), UnknownGenerator);
}

TEST(GradedPiece, ReesWeylWeightOne) {
    auto d = make_rees_weyl(1);
    auto piece = graded_piece(d, {0, 1, 0});
    std::set<Monomial> got(piece.begin(), piece.end());
    std::set<Monomial> want{mono(d, {{"x", 1}, {"xi", 1}}), mono(d, {{"t", 1}})};
    EXPECT_EQ(got, want);
}

TEST(GradedPiece, MatchesBruteForceEnumeration) {
    for (auto& a : {make_mixed_de_rham(1), make_mixed_de_rham(2), make_rees_weyl(1), make_rees_weyl(2)})
        for (int w = -3; w <= 3; ++w)
            for (int aux = 0; aux <= 4; ++aux)
                for (int d = -2; d <= 3; ++d) {
                    Trigrade g{d, w, aux};
                    auto piece = graded_piece(a, g);
                    std::set<Monomial> got(piece.begin(), piece.end());
                    EXPECT_EQ(got.size(), piece.size());
                    EXPECT_EQ(got, brute_piece(a, g, 8)) << to_string(a.kind()) << " " << to_string(g);
                }
}

TEST(GradedPiece, NegativeAuxIsEmptyAndInfinitePiecesAreRefused) {
    EXPECT_TRUE(graded_piece(make_rees_weyl(1), {0, 0, -1}).empty());
    EXPECT_THROW(graded_piece(make_bga_block(), {0, 0, 0}), InfinitePiece);
}

TEST(Presentations, ConfluenceOnAllTriples) {
    for (auto& a : families()) {
        auto r = check_confluence(a);
        EXPECT_TRUE(r.ok) << to_string(a.kind()) << ": " << (r.failures.empty() ? "" : r.failures.front());
        EXPECT_EQ(r.checked, a.size() * a.size() * a.size());
    }
}

TEST(Presentations, LeibnizOnAllPairs) {
    for (auto& a : families()) {
        auto r = check_leibniz(a);
        EXPECT_TRUE(r.ok) << to_string(a.kind()) << ": " << (r.failures.empty() ? "" : r.failures.front());
    }
}

TEST(Presentations, DifferentialSquaresToZero) {
    for (auto& a : families()) EXPECT_TRUE(check_d_squared(a).ok) << to_string(a.kind());
}

TEST(Presentations, RulesAndDifferentialsAreHomogeneous) {
    for (auto& a : families()) EXPECT_TRUE(check_homogeneity(a).ok) << to_string(a.kind());
}

TEST(Presentations, BrokenRuleIsCaught) {
    auto d = make_rees_weyl(1);
    Poly corr;
    add_to(corr, d.unit(d.index("x")), Q(1));  // xi x = x xi + x is not homogeneous
    d.set_rule(d.index("xi"), d.index("x"), 1, corr);
    EXPECT_FALSE(check_homogeneity(d).ok);
}

TEST(Presentations, BlockDifferentials) {
    auto b = make_bgm_block(2);
    Poly dd = b.d(b.gen_poly(b.index("delta")));
    Poly want;
    add_to(want, b.unit(b.index("x")), Q(2));
    EXPECT_EQ(dd, want);
    auto ba = make_bga_block();
    EXPECT_EQ(ba.format(ba.differential(ba.index("delta"))), "x*y");
    EXPECT_EQ(make_bgm_dual(2).format(make_bgm_dual(2).differential(0)), "2*t");
}

TEST(AssociatedGraded, NeedsReesParameter) {
    EXPECT_THROW(associated_graded(make_mixed_de_rham(1)), std::invalid_argument);
}

TEST(Catalogue, BuildsByName) {
    auto a = build_catalogue_algebra("mixed_de_rham", 1);
    ASSERT_EQ(a.size(), 3);
    EXPECT_EQ(a.gen(0).name, "x");
    EXPECT_EQ(a.gen(1).name, "dx");
    EXPECT_EQ(a.gen(2).name, "delta");
    auto s = build_catalogue_algebra("sym", 1);
    EXPECT_EQ(s.size(), 1);
    EXPECT_EQ(graded_piece(build_catalogue_algebra("rees_weyl", 1), {0, 0, 3}).size(), 1u);
    EXPECT_THROW(build_catalogue_algebra("rees_weyl", 0), std::invalid_argument);
    EXPECT_THROW(build_catalogue_algebra("lie", 1), std::invalid_argument);
}

TEST(AssociatedGraded, IsCommutativeAndIdempotent) {
    for (int n : {1, 2}) {
        auto g = associated_graded(make_rees_weyl(n));
        EXPECT_FALSE(g.has("t"));
        // pairwise commutators on sampled monomials up to aux 6 vanish
        std::vector<Monomial> sample;
        for (int w = 0; w <= 2; ++w)
            for (int a = 0; a <= 6; ++a)
                for (auto& m : enumerate_monomials(g, {0, w, a - w})) sample.push_back(m);
        for (std::size_t i = 0; i < sample.size(); i += 3)
            for (std::size_t j = 0; j < sample.size(); j += 5)
                EXPECT_EQ(g.mul(sample[i], sample[j]), g.mul(sample[j], sample[i]));
        auto gg = associated_graded(g);
        EXPECT_EQ(gg.size(), g.size());
        for (int i = 0; i < g.size(); ++i)
            for (int j = 0; j < g.size(); ++j)
                EXPECT_EQ(gg.mul(gg.unit(i), gg.unit(j)), g.mul(g.unit(i), g.unit(j)));
    }
}
