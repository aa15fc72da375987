#include "kd/scheme.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace kd;

namespace {

const Window kSmall{-5, 5, -4, 4, 5};

void expect_acyclic(const GradedComplex& c, const std::string& what) {
    auto rep = cohomology(c);
    EXPECT_GT(rep.certified_count(), 0) << what;
    for (auto& g : rep.nonzero_certified()) ADD_FAILURE() << what << " has cohomology at " << to_string(g);
}

/// Dense oracle for the deformed de Rham complex on the line, written from the Weyl rule
/// xi x^a = x^a xi + a x^{a-1} t with no shared code: basis (S, e, a, b, c) for dx^S delta^e x^a xi^b t^c.
std::map<int, int> line_de_rham_oracle(int wt, int aux) {
    struct B {
        int s, e, a, b, c;
    };
    std::map<int, std::vector<B>> deg;
    for (int s = 0; s <= 1; ++s)
        for (int e = 0; e <= 1; ++e) {
            int wp = wt + s + e, ap = aux - s;  // remaining weight and aux for x^a xi^b t^c
            for (int b = 0; b <= wp; ++b) {
                int c = wp - b, a = ap + b;
                if (a >= 0 && c >= 0) deg[s + e].push_back({s, e, a, b, c});
            }
        }
    auto find = [&](int d, const B& x) -> int {
        auto& v = deg[d];
        for (int i = 0; i < (int)v.size(); ++i)
            if (v[i].s == x.s && v[i].e == x.e && v[i].a == x.a && v[i].b == x.b && v[i].c == x.c) return i;
        return -1;
    };
    std::map<int, int> ranks;
    for (int d = 0; d <= 1; ++d) {
        auto& src = deg[d];
        auto& tgt = deg[d + 1];
        std::vector<std::vector<Q>> m(tgt.size(), std::vector<Q>(src.size(), Q(0)));
        for (int j = 0; j < (int)src.size(); ++j) {
            B x = src[j];
            Q outer = (x.s + x.e) % 2 ? Q(-1) : Q(1);
            // w delta (x) t P: only when e = 0; form dx^s delta
            if (x.e == 0) {
                int i = find(d + 1, {x.s, 1, x.a, x.b, x.c + 1});
                if (i >= 0) m[i][j] += outer;
            }
            // - w dx (x) xi P: only when s = 0; dx moves past nothing to its left, delta to its right: delta dx = -dx delta
            if (x.s == 0) {
                Q sg = x.e ? Q(-1) : Q(1);
                int i = find(d + 1, {1, x.e, x.a, x.b + 1, x.c});
                if (i >= 0) m[i][j] += -outer * sg;
                if (x.a > 0) {
                    int i2 = find(d + 1, {1, x.e, x.a - 1, x.b, x.c + 1});
                    if (i2 >= 0) m[i2][j] += -outer * sg * Q(x.a);
                }
            }
        }
        ranks[d] = detail::dense_rank(m, (int)src.size());
    }
    std::map<int, int> h;
    for (int d = 0; d <= 2; ++d) {
        int v = (int)deg[d].size() - (ranks.count(d) ? ranks[d] : 0) - (ranks.count(d - 1) ? ranks[d - 1] : 0);
        if (v) h[d] = v;
    }
    return h;
}

} // namespace

TEST(Spencer, AugmentationConeIsAcyclic) {
    for (int n : {0, 1, 2}) {
        auto a = augmentation_cone(LemmaComplex::spencer, n, kSmall);
        expect_acyclic(a.cone, "spencer n=" + std::to_string(n));
    }
}

TEST(DeformedKoszul, AugmentationConeIsAcyclic) {
    for (int n : {0, 1, 2}) {
        auto a = augmentation_cone(LemmaComplex::deformed_koszul, n, kSmall);
        expect_acyclic(a.cone, "deformed koszul n=" + std::to_string(n));
    }
}

TEST(DeformedDeRham, ProjectionConeIsAcyclic) {
    for (int n : {0, 1, 2}) {
        auto a = augmentation_cone(LemmaComplex::deformed_de_rham, n, kSmall);
        expect_acyclic(a.cone, "deformed de Rham n=" + std::to_string(n));
    }
}

TEST(DeformedDeRham, LineCohomologyMatchesDenseOracle) {
    AffineSpace s(1);
    Window w{-3, 5, -4, 4, 6};
    auto dr = deformed_de_rham_complex(s, w);
    auto rep = cohomology(dr.complex);
    for (int wt = -4; wt <= 4; ++wt)
        for (int a = 0; a <= 6; ++a) {
            auto want = line_de_rham_oracle(wt, a);
            for (int d = -2; d <= 4; ++d) {
                int expect = want.count(d) ? want[d] : 0;
                EXPECT_EQ(rep.dim({d, wt, a}), expect) << "at " << to_string(Trigrade{d, wt, a});
            }
        }
    // the surviving classes sit on the top form, one per monomial x^a
    EXPECT_EQ(rep.dim(Trigrade{2, -2, 1 + 3}), 1);
}

TEST(DeformedKoszul, SpencerAndKoszulDifferentialsSquareToZero) {
    for (int n : {1, 2}) {
        AffineSpace s(n);
        EXPECT_FALSE(d_squared_failure(spencer_complex(s, kSmall).complex));
        EXPECT_FALSE(d_squared_failure(deformed_koszul_complex(s, kSmall).complex));
        EXPECT_FALSE(d_squared_failure(deformed_de_rham_complex(s, kSmall).complex));
    }
}

TEST(DeformedKoszul, PiecesAreFinitePerWindow) {
    AffineSpace s(1);
    auto k = deformed_koszul_complex(s, kSmall);
    // weight 0: only g*_{0,0} omega with omega free of forms, one per x-power
    for (int a = 0; a <= 5; ++a) EXPECT_EQ(k.complex.space->dim({0, 0, a}), 1);
    // positive weights are empty: every generator and form has weight <= 0
    for (auto& [g, p] : k.complex.space->pieces()) EXPECT_LE(g.wt, 0);
}

TEST(RelativeSpencer, PlaneOverLineIsExact) {
    Window w{-3, 5, -5, 5, 6};
    auto c = relative_spencer(2, 1, w);
    expect_acyclic(c.complex, "relative spencer A2->A1");
}

TEST(RelativeSpencer, DegenerateCases) {
    Window w{-3, 5, -3, 3, 4};
    expect_acyclic(relative_spencer(1, 0, w).complex, "A1->A0");
    expect_acyclic(relative_spencer(1, 1, w).complex, "A1->A1");
    expect_acyclic(relative_spencer(2, 0, w).complex, "A2->A0");
    EXPECT_THROW(relative_spencer(1, 2, w), std::invalid_argument);
}

TEST(RelativeSpencer, QuotientRuleMatchesNormalForm) {
    // x^3 xi^2 == (-1)^2 * 3*2 x t^2 modulo xi on the right
    AffineSpace s(1);
    Monomial p = s.operators.one();
    p[s.x(0)] = 3;
    p[s.xi(0)] = 2;
    auto cls = detail::relative_quotient_class(s, 0, p);
    ASSERT_EQ(cls.size(), 1u);
    EXPECT_EQ(cls[0].coef, Q(6));
    EXPECT_EQ(cls[0].key, (Key{1, 0, 2}));
    // the class map kills the right ideal: xi * P projects to zero for every monomial P
    for (auto& m : enumerate_monomials(s.operators, {0, 2, 3})) {
        Combination sum;
        std::map<Key, Q> acc;
        for (auto& [pm, pc] : s.operators.left_mult(s.xi(0), m))
            for (auto& t : detail::relative_quotient_class(s, 0, pm)) acc[t.key] += pc * t.coef;
        for (auto& [k, c] : acc) EXPECT_TRUE(c.is_zero()) << s.operators.format(m);
    }
}

TEST(HodgeTruncation, EndomorphismsMatchTruncatedDeRham) {
    for (int n : {0, 1, 2}) {
        Window w{-2, n + 2, -6, 6, 8};
        auto c = canonical_endomorphisms(n, w);
        auto rep = cohomology(c.complex);
        for (int wt = -6; wt <= 6; ++wt)
            for (int a = 0; a <= 8; ++a) {
                auto want = oracle::truncated_de_rham(n, std::max(-wt, 0), a);
                for (int d = -1; d <= n + 1; ++d) {
                    int expect = want.count(d) ? want[d] : 0;
                    EXPECT_EQ(rep.dim({d, wt, a}), expect) << "n=" << n << " at " << to_string(Trigrade{d, wt, a});
                }
            }
    }
}

TEST(HodgeTruncation, LineProfile) {
    auto rep = cohomology(canonical_endomorphisms(1, Window{-2, 3, -4, 4, 5}).complex);
    for (int wt = 0; wt <= 4; ++wt) EXPECT_EQ(rep.dim({0, wt, 0}), 1);
    for (int a = 1; a <= 5; ++a) EXPECT_EQ(rep.dim({1, -1, a}), 1);
    for (auto& [g, e] : rep.pieces) {
        if (g.wt <= -2) {
            EXPECT_EQ(e.dim, 0);
        }
    }
}
