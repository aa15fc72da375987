#pragma once

#include "kd/algebra.hpp"
#include "kd/keyed.hpp"

#include <string>
#include <vector>

namespace kd {

/**
 * @brief The two sides for affine n-space: the coconnective mixed de Rham algebra and the
 * Rees algebra of differential operators, plus the complexes that connect them.
 */
struct AffineSpace {
    int n;
    Algebra forms;      // x_i, dx_i, delta
    Algebra operators;  // x_i, xi_i, t

    explicit AffineSpace(int dim) : n(dim), forms(make_mixed_de_rham(dim)), operators(make_rees_weyl(dim)) {}

    int x(int i) const { return i; }
    int dx(int i) const { return n + i; }
    int delta() const { return 2 * n; }
    int xi(int i) const { return n + i; }
    int t() const { return 2 * n; }
};

namespace detail {

inline Key join(const Monomial& m, std::initializer_list<int> extra) {
    Key k(m.begin(), m.end());
    k.insert(k.end(), extra);
    return k;
}
inline Key join(const Monomial& a, const Monomial& b) {
    Key k(a.begin(), a.end());
    k.insert(k.end(), b.begin(), b.end());
    return k;
}
inline Monomial slice(const Key& k, int from, int len) { return Monomial(k.begin() + from, k.begin() + from + len); }

inline int popcount(unsigned m) { return __builtin_popcount(m); }

/// True when only the first n (position) variables of the Rees monomial are nonzero.
inline bool pure_position(const AffineSpace& s, const Monomial& p) {
    for (int i = s.n; i < s.operators.size(); ++i)
        if (p[i] != 0) return false;
    return true;
}

} // namespace detail

/** k[x_1..x_n] with x_i in (0,0,1) and zero differential; keyed by exponent vectors of the Rees algebra. */
inline KeyedComplex structure_sheaf(const AffineSpace& s, const Window& w, const Trigrade& offset = {0, 0, 0}) {
    KeyedSpec spec;
    spec.region = Region{w, 0};
    spec.complete = false;
    spec.basis = [&s, offset](const Trigrade& g) -> std::vector<Key> {
        Trigrade rel = g - offset;
        if (rel.deg != 0 || rel.wt != 0 || rel.aux < 0) return {};
        std::vector<Key> out;
        for (auto& m : enumerate_monomials(s.operators, rel)) out.push_back(m);
        return out;
    };
    spec.diff = [](const Key&, const Trigrade&) { return Combination{}; };
    spec.label = [&s](const Key& k) { return s.operators.format(Monomial(k)); };
    return build_keyed(spec);
}

// ---------------------------------------------------------------------------------------------
// Spencer complex: left Rees-module Koszul complex on (t, xi_1, ..., xi_n) acting from the right.
// Exterior generator e_0 pairs with t and sits at (-1,1,0); e_i pairs with xi_i at (-1,1,-1).

inline Trigrade spencer_generator_grade(unsigned mask) {
    int k = detail::popcount(mask);
    int spatial = detail::popcount(mask & ~1u);
    return {-k, k, -spatial};
}

inline KeyedComplex spencer_complex(const AffineSpace& s, const Window& w) {
    const int nd = s.operators.size();
    KeyedSpec spec;
    spec.region = Region{w, 0};
    spec.basis = [&s](const Trigrade& g) {
        std::vector<Key> out;
        for (unsigned mask = 0; mask < (1u << (s.n + 1)); ++mask) {
            Trigrade rest = g - spencer_generator_grade(mask);
            if (rest.deg != 0) continue;
            for (auto& p : enumerate_monomials(s.operators, rest)) out.push_back(detail::join(p, {int(mask)}));
        }
        return out;
    };
    spec.diff = [&s, nd](const Key& k, const Trigrade&) {
        Monomial p = detail::slice(k, 0, nd);
        unsigned mask = static_cast<unsigned>(k[nd]);
        Combination out;
        int before = 0;
        for (int j = 0; j <= s.n; ++j) {
            if (!(mask & (1u << j))) continue;
            Q sgn = detail::sign(before++);
            int q = j == 0 ? s.t() : s.xi(j - 1);
            for (auto& [m, c] : s.operators.right_mult(p, q))
                out.push_back({detail::join(m, {int(mask & ~(1u << j))}), sgn * c});
        }
        return out;
    };
    spec.label = [&s, nd](const Key& k) {
        std::string e;
        for (int j = 0; j <= s.n; ++j)
            if (k[nd] & (1 << j)) e += "e" + std::to_string(j);
        return s.operators.format(detail::slice(k, 0, nd)) + (e.empty() ? "" : "*" + e);
    };
    return build_keyed(spec);
}

/** P e_empty -> the pure-position part of P (operators act on k[x] with t and xi acting by zero). */
inline GradedMap spencer_augmentation(const AffineSpace& s, const KeyedComplex& spencer, const KeyedComplex& target) {
    const int nd = s.operators.size();
    return build_keyed_map(spencer, target, [&s, nd](const Key& k, const Trigrade&) {
        Monomial p = detail::slice(k, 0, nd);
        if (k[nd] != 0 || !detail::pure_position(s, p)) return Combination{};
        return Combination{{Key(p.begin(), p.end()), Q(1)}};
    });
}

// ---------------------------------------------------------------------------------------------
// Deformed Koszul complex: right module over the mixed de Rham algebra, semifree on the duals
// g*_{beta,c} of the Rees monomials xi^beta t^c, at (0, -|beta|-c, |beta|), with
// d(g*_{beta,c}) = g*_{beta,c-1} delta - sum_i g*_{beta-e_i,c} dx_i.

namespace detail {
inline void for_each_exponent(int n, int total, const std::function<void(const std::vector<int>&)>& f) {
    std::vector<int> e(n, 0);
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == n - 1) {
            e[i] = left;
            f(e);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            e[i] = v;
            rec(i + 1, left - v);
        }
    };
    if (n == 0) {
        if (total == 0) f(e);
        return;
    }
    rec(0, total);
}
} // namespace detail

inline KeyedComplex deformed_koszul_complex(const AffineSpace& s, const Window& w) {
    const int n = s.n, nf = s.forms.size();
    KeyedSpec spec;
    spec.region = Region{w, 0};
    spec.basis = [&s, n](const Trigrade& g) {
        std::vector<Key> out;
        for (int b = 0; b <= g.aux && b <= -g.wt; ++b)
            detail::for_each_exponent(n, b, [&](const std::vector<int>& beta) {
                for (int c = 0; b + c <= -g.wt; ++c) {
                    Trigrade rest = g - Trigrade{0, -b - c, b};
                    for (auto& om : enumerate_monomials(s.forms, rest)) {
                        Key k(beta.begin(), beta.end());
                        k.push_back(c);
                        k.insert(k.end(), om.begin(), om.end());
                        out.push_back(std::move(k));
                    }
                }
            });
        return out;
    };
    spec.diff = [&s, n, nf](const Key& k, const Trigrade&) {
        Monomial om = detail::slice(k, n + 1, nf);
        Combination out;
        auto emit = [&](Key head, int gen, const Q& coef) {
            for (auto& [m, c] : s.forms.left_mult(gen, om)) {
                Key r = head;
                r.insert(r.end(), m.begin(), m.end());
                out.push_back({std::move(r), coef * c});
            }
        };
        Key head(k.begin(), k.begin() + n + 1);
        if (head[n] >= 1) {
            Key h = head;
            h[n] -= 1;
            emit(h, s.delta(), Q(1));
        }
        for (int i = 0; i < n; ++i)
            if (head[i] >= 1) {
                Key h = head;
                h[i] -= 1;
                emit(h, s.dx(i), Q(-1));
            }
        return out;
    };
    spec.label = [&s, n, nf](const Key& k) {
        std::string g = "g*(";
        for (int i = 0; i <= n; ++i) g += (i ? "," : "") + std::to_string(k[i]);
        return g + ")*" + s.forms.format(detail::slice(k, n + 1, nf));
    };
    return build_keyed(spec);
}

/** g*_{0,0} omega -> the form-free part of omega. */
inline GradedMap deformed_koszul_augmentation(const AffineSpace& s, const KeyedComplex& koszul,
                                              const KeyedComplex& target) {
    const int n = s.n, nf = s.forms.size(), nd = s.operators.size();
    return build_keyed_map(koszul, target, [n, nf, nd](const Key& k, const Trigrade&) {
        for (int i = 0; i <= n; ++i)
            if (k[i] != 0) return Combination{};
        Monomial om = detail::slice(k, n + 1, nf);
        for (int i = n; i < nf; ++i)
            if (om[i] != 0) return Combination{};
        Key p(nd, 0);
        for (int i = 0; i < n; ++i) p[i] = om[i];
        return Combination{{p, Q(1)}};
    });
}

// ---------------------------------------------------------------------------------------------
// Deformed de Rham complex: right Rees-free on the exterior forms dx^S delta^e, with
// d(w (x) P) = (-1)^{|w|} (w delta (x) tP - sum_i w dx_i (x) xi_i P).

inline KeyedComplex deformed_de_rham_complex(const AffineSpace& s, const Window& w) {
    const int nf = s.forms.size(), nd = s.operators.size();
    std::vector<Monomial> exterior;
    for (unsigned mask = 0; mask < (1u << (s.n + 1)); ++mask) {
        Monomial om = s.forms.one();
        for (int i = 0; i <= s.n; ++i)
            if (mask & (1u << i)) om[s.n + i] = 1;
        exterior.push_back(om);
    }
    KeyedSpec spec;
    spec.region = Region{w, 0};
    spec.basis = [&s, exterior](const Trigrade& g) {
        std::vector<Key> out;
        for (auto& om : exterior) {
            Trigrade rest = g - s.forms.grade(om);
            if (rest.deg != 0) continue;
            for (auto& p : enumerate_monomials(s.operators, rest)) out.push_back(detail::join(om, p));
        }
        return out;
    };
    spec.diff = [&s, nf, nd](const Key& k, const Trigrade&) {
        Monomial om = detail::slice(k, 0, nf), p = detail::slice(k, nf, nd);
        Q outer = detail::sign(s.forms.grade(om).deg);
        Combination out;
        auto emit = [&](int form_gen, int op_gen, const Q& coef) {
            for (auto& [fm, fc] : s.forms.right_mult(om, form_gen))
                for (auto& [pm, pc] : s.operators.left_mult(op_gen, p))
                    out.push_back({detail::join(fm, pm), outer * coef * fc * pc});
        };
        emit(s.delta(), s.t(), Q(1));
        for (int i = 0; i < s.n; ++i) emit(s.dx(i), s.xi(i), Q(-1));
        return out;
    };
    spec.label = [&s, nf, nd](const Key& k) {
        return s.forms.format(detail::slice(k, 0, nf)) + "(x)" + s.operators.format(detail::slice(k, nf, nd));
    };
    return build_keyed(spec);
}

/** Top form dx_1..dx_n delta times k[x]: the canonical module placed where the top row of the complex lives. */
inline Trigrade top_form_grade(const AffineSpace& s) { return {s.n + 1, -s.n - 1, s.n}; }

inline KeyedComplex canonical_target(const AffineSpace& s, const Window& w) {
    return structure_sheaf(s, w, top_form_grade(s));
}

/** Top-row projection: dx^[n] delta (x) P -> pure-position part of P. */
inline GradedMap deformed_de_rham_projection(const AffineSpace& s, const KeyedComplex& dr, const KeyedComplex& target) {
    const int nf = s.forms.size(), nd = s.operators.size();
    return build_keyed_map(dr, target, [&s, nf, nd](const Key& k, const Trigrade&) {
        Monomial om = detail::slice(k, 0, nf), p = detail::slice(k, nf, nd);
        for (int i = s.n; i < nf; ++i)
            if (om[i] != 1) return Combination{};
        if (!detail::pure_position(s, p)) return Combination{};
        return Combination{{Key(p.begin(), p.end()), Q(1)}};
    });
}

// ---------------------------------------------------------------------------------------------
// The three augmentation cones of the acyclicity lemma.

enum class LemmaComplex { spencer, deformed_koszul, deformed_de_rham };

inline std::string to_string(LemmaComplex c) {
    switch (c) {
    case LemmaComplex::spencer: return "spencer";
    case LemmaComplex::deformed_koszul: return "deformed-koszul";
    case LemmaComplex::deformed_de_rham: return "deformed-de-rham";
    }
    return "?";
}

struct AugmentationCone {
    KeyedComplex source;
    KeyedComplex target;
    GradedMap map;
    GradedComplex cone;
};

inline AugmentationCone augmentation_cone(LemmaComplex which, int n, const Window& w) {
    AffineSpace s(n);
    AugmentationCone out;
    switch (which) {
    case LemmaComplex::spencer:
        out.source = spencer_complex(s, w);
        out.target = structure_sheaf(s, w);
        out.map = spencer_augmentation(s, out.source, out.target);
        break;
    case LemmaComplex::deformed_koszul:
        out.source = deformed_koszul_complex(s, w);
        out.target = structure_sheaf(s, w);
        out.map = deformed_koszul_augmentation(s, out.source, out.target);
        break;
    case LemmaComplex::deformed_de_rham:
        out.source = deformed_de_rham_complex(s, w);
        out.target = canonical_target(s, w);
        out.map = deformed_de_rham_projection(s, out.source, out.target);
        break;
    }
    out.cone = cone(out.source.complex, out.target.complex, out.map);
    return out;
}

// ---------------------------------------------------------------------------------------------
// Relative Spencer sequence for the coordinate projection A^n -> A^m: relative forms in
// dx_{m+1..n} tensor operators on A^n, d(w (x) P) = sum_i w dx_i (x) xi_i P, closed by the
// quotient of the operators by the right ideal generated by the relative xi_i.

namespace detail {
/// Class of a Rees monomial modulo the relative xi's: x^a xi^b == (-1)^b (a)_b x^{a-b} t^b per variable.
inline Combination relative_quotient_class(const AffineSpace& s, int m, const Monomial& p) {
    Monomial r = p;
    Q coef(1);
    for (int i = m; i < s.n; ++i) {
        int a = r[s.x(i)], b = r[s.xi(i)];
        if (b > a) return {};
        for (int j = 0; j < b; ++j) coef *= Q(-(a - j));
        r[s.x(i)] = a - b;
        r[s.xi(i)] = 0;
        r[s.t()] += b;
    }
    return {{Key(r.begin(), r.end()), coef}};
}
} // namespace detail

inline KeyedComplex relative_spencer(int n, int m, const Window& w) {
    if (m < 0 || m > n) throw std::invalid_argument("relative Spencer needs 0 <= m <= n");
    auto s = std::make_shared<AffineSpace>(n);
    const int r = n - m, nd = s->operators.size();
    const Trigrade form{1, -1, 1};
    KeyedSpec spec;
    spec.region = Region{w, 0};
    spec.basis = [s, r, m, nd, form](const Trigrade& g) {
        std::vector<Key> out;
        if (g.deg == r + 1) {
            Trigrade rest = g - Trigrade{r + 1, -r, r};
            for (auto& p : enumerate_monomials(s->operators, rest)) {
                bool reduced = true;
                for (int i = m; i < s->n; ++i) reduced = reduced && p[s->xi(i)] == 0;
                if (reduced) out.push_back(detail::join(p, {-1}));
            }
            return out;
        }
        for (unsigned mask = 0; mask < (1u << r); ++mask) {
            Trigrade rest = g - form * detail::popcount(mask);
            if (rest.deg != 0) continue;
            for (auto& p : enumerate_monomials(s->operators, rest)) out.push_back(detail::join(p, {int(mask)}));
        }
        (void)nd;
        return out;
    };
    spec.diff = [s, r, m, nd](const Key& k, const Trigrade&) {
        Combination out;
        int mask = k[nd];
        if (mask < 0) return out;
        Monomial p = detail::slice(k, 0, nd);
        if (mask == (1 << r) - 1) {
            for (auto& term : detail::relative_quotient_class(*s, m, p)) {
                Key key = term.key;
                key.push_back(-1);
                out.push_back({key, term.coef});
            }
            return out;
        }
        for (int j = 0; j < r; ++j) {
            if (mask & (1 << j)) continue;
            // w dx_j: move dx_j past the higher relative forms already present
            int after = detail::popcount(static_cast<unsigned>(mask) >> (j + 1));
            Q sgn = detail::sign(after);
            for (auto& [pm, pc] : s->operators.left_mult(s->xi(m + j), p))
                out.push_back({detail::join(pm, {mask | (1 << j)}), sgn * pc});
        }
        return out;
    };
    spec.label = [s, nd](const Key& k) {
        return s->operators.format(detail::slice(k, 0, nd)) + (k[nd] < 0 ? "[quot]" : "@" + std::to_string(k[nd]));
    };
    return build_keyed(spec);
}

// ---------------------------------------------------------------------------------------------
// Filtered endomorphisms of the twisted canonical module on A^n. Resolving it by the Koszul
// complex of the right xi-action gives, in weight w, the complex with C^p spanned by
// x^alpha e_S (|S| = p, present when w + p >= 0) at (p, w, |alpha| + p) and differential
// x^alpha e_S -> sum_{i not in S} -alpha_i x^{alpha - e_i} e_i ^ e_S.

inline KeyedComplex canonical_endomorphisms(int n, const Window& w) {
    AffineSpace s(n);
    auto positions = std::make_shared<Algebra>(s.operators);
    KeyedSpec spec;
    spec.region = Region{w, 0};
    spec.basis = [positions, n](const Trigrade& g) {
        std::vector<Key> out;
        int p = g.deg;
        if (p < 0 || p > n || g.wt + p < 0) return out;
        int a = g.aux - p;
        if (a < 0) return out;
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            if (detail::popcount(mask) != p) continue;
            for (auto& m : enumerate_monomials(*positions, {0, 0, a})) {
                Key k(m.begin(), m.begin() + n);
                k.push_back(int(mask));
                out.push_back(k);
            }
        }
        return out;
    };
    spec.diff = [n](const Key& k, const Trigrade&) {
        Combination out;
        unsigned mask = static_cast<unsigned>(k[n]);
        for (int i = 0; i < n; ++i) {
            if ((mask & (1u << i)) || k[i] == 0) continue;
            Key r = k;
            r[i] -= 1;
            r[n] = int(mask | (1u << i));
            int before = detail::popcount(mask & ((1u << i) - 1));
            out.push_back({r, Q(-k[i]) * detail::sign(before)});
        }
        return out;
    };
    return build_keyed(spec);
}

} // namespace kd
