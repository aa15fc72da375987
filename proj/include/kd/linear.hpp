#pragma once

#include "kd/bg.hpp"

#include <numeric>
#include <random>

namespace kd {

/**
 * @brief Derived vector bundle over the point or the affine line: sections E0 -> E1 in
 * degrees [shift, shift + 1], free of ranks r0 and r1, with connecting matrix entries
 * coef * z^power.
 *
 * Functions on the total space are k[z][y_j] (x) Lambda(eta_l) with y_j at (0,-1,0),
 * eta_l at (-1,-1,e_l) and d(eta_l) = sum_j phi_lj y_j, where e_l is the z-degree of row l.
 * The dual side is k[z][v_l] (x) Lambda(u_j) with u_j at (1,1,0), v_l at (2,1,-e_l) and
 * d(u_j) = -sum_l phi_lj v_l.
 */
struct LinearBundle {
    struct Entry {
        Q coef;
        int power = 0;
    };
    std::string name;
    bool over_line = false;
    int r0 = 0, r1 = 0;
    int shift = 0;
    std::vector<std::vector<Entry>> phi;  // r1 rows, r0 columns

    /// z-degree of row l; throws if the row mixes degrees.
    int row_power(int l) const {
        std::optional<int> p;
        for (auto& e : phi.at(l)) {
            if (e.coef.is_zero()) continue;
            if (p && *p != e.power) throw std::invalid_argument("row " + std::to_string(l) + " of the connecting matrix is not homogeneous in z");
            p = e.power;
        }
        return p.value_or(0);
    }

    void check() const {
        if (r0 < 0 || r1 < 0) throw std::invalid_argument("ranks must be non-negative");
        if (static_cast<int>(phi.size()) != r1) throw std::invalid_argument("connecting matrix needs r1 rows");
        for (auto& row : phi) {
            if (static_cast<int>(row.size()) != r0) throw std::invalid_argument("connecting matrix needs r0 columns");
            for (auto& e : row) {
                if (e.power < 0) throw std::invalid_argument("negative power of z");
                if (!over_line && e.power > 0 && !e.coef.is_zero())
                    throw std::invalid_argument("the point has no coordinate z");
            }
        }
        for (int l = 0; l < r1; ++l) row_power(l);
    }

    bool operator==(const LinearBundle& o) const {
        if (over_line != o.over_line || r0 != o.r0 || r1 != o.r1 || shift != o.shift) return false;
        for (int l = 0; l < r1; ++l)
            for (int j = 0; j < r0; ++j)
                if (phi[l][j].coef != o.phi[l][j].coef || (!phi[l][j].coef.is_zero() && phi[l][j].power != o.phi[l][j].power))
                    return false;
        return true;
    }
};

/** Koszul dual bundle E*[1]: dual sections shifted by one, so ranks swap and the matrix transposes. */
inline LinearBundle koszul_dual(const LinearBundle& e) {
    LinearBundle d;
    d.name = e.name + "^dual";
    d.over_line = e.over_line;
    d.r0 = e.r1;
    d.r1 = e.r0;
    d.shift = -e.shift - 2;
    d.phi.assign(d.r1, std::vector<LinearBundle::Entry>(d.r0));
    for (int l = 0; l < e.r1; ++l)
        for (int j = 0; j < e.r0; ++j) d.phi[j][l] = e.phi[l][j];
    return d;
}

/** Sheared Koszul dual E*[-1]: same matrix as the Koszul dual, sections two degrees higher. */
inline LinearBundle sheared_dual(const LinearBundle& e) {
    LinearBundle d = koszul_dual(e);
    d.name = e.name + "^!";
    d.shift += 2;
    return d;
}

// ---------------------------------------------------------------------------------------------
// Algebras of functions

namespace linear_detail {
inline std::string y(int j) { return "y" + std::to_string(j); }
inline std::string eta(int l) { return "eta" + std::to_string(l); }
inline std::string u(int j) { return "u" + std::to_string(j); }
inline std::string v(int l) { return "v" + std::to_string(l); }
inline std::string ytil(int j) { return "s" + std::to_string(j); }
inline std::string etatil(int l) { return "r" + std::to_string(l); }

inline Poly phi_times(const Algebra& a, const LinearBundle& e, int l, int j, const Monomial& base) {
    const auto& en = e.phi[l][j];
    if (en.coef.is_zero()) return {};
    Monomial m = base;
    if (en.power) m[a.index("z")] += en.power;
    return a.poly(m, en.coef);
}
} // namespace linear_detail

/** Functions on the total space: k[z][y] (x) Lambda(eta), d eta_l = sum_j phi_lj y_j. */
inline Algebra total_space_algebra(const LinearBundle& e) {
    using namespace linear_detail;
    e.check();
    std::vector<Generator> g;
    if (e.over_line) g.push_back({"z", {0, 0, 1}, 0});
    for (int j = 0; j < e.r0; ++j) g.push_back({y(j), {0, -1, 0}, 0});
    for (int l = 0; l < e.r1; ++l) g.push_back({eta(l), {-1, -1, e.row_power(l)}, 1});
    Algebra a = make_sym(g);
    a.set_label("O(" + e.name + ")");
    for (int l = 0; l < e.r1; ++l) {
        Poly dp;
        for (int j = 0; j < e.r0; ++j) {
            Monomial m = a.unit(a.index(y(j)));
            add_to(dp, phi_times(a, e, l, j, m));
        }
        a.set_differential(a.index(eta(l)), dp);
    }
    return a;
}

/** Functions on the Koszul dual: k[z][v] (x) Lambda(u), d u_j = -sum_l phi_lj v_l. */
inline Algebra dual_space_algebra(const LinearBundle& e) {
    using namespace linear_detail;
    e.check();
    std::vector<Generator> g;
    // v before z, so that words act with z first and never pass through negative aux
    for (int l = 0; l < e.r1; ++l) g.push_back({v(l), {2, 1, -e.row_power(l)}, 0});
    if (e.over_line) g.push_back({"z", {0, 0, 1}, 1});
    for (int j = 0; j < e.r0; ++j) g.push_back({u(j), {1, 1, 0}, 2});
    Algebra a = make_sym(g);
    a.set_label("O(" + e.name + " dual)");
    for (int j = 0; j < e.r0; ++j) {
        Poly dp;
        for (int l = 0; l < e.r1; ++l) add_to(dp, phi_times(a, e, l, j, a.unit(a.index(v(l)))), Q(-1));
        a.set_differential(a.index(u(j)), dp);
    }
    return a;
}

/**
 * Koszul resolution of the zero section: O_E (x) Sym(s_j, r_l) with s_j at (-1,-1,0) odd,
 * r_l at (-2,-1,e_l) even, d s_j = y_j and d r_l = eta_l - sum_j phi_lj s_j.
 */
inline Algebra koszul_resolution_algebra(const LinearBundle& e) {
    using namespace linear_detail;
    Algebra base = total_space_algebra(e);
    std::vector<Generator> g = base.generators();
    for (int j = 0; j < e.r0; ++j) g.push_back({ytil(j), {-1, -1, 0}, 1});
    for (int l = 0; l < e.r1; ++l) g.push_back({etatil(l), {-2, -1, e.row_power(l)}, 2});
    Algebra a = make_sym(g);
    a.set_label("K(" + e.name + ")");
    for (int l = 0; l < e.r1; ++l) {
        Poly dp;
        for (int j = 0; j < e.r0; ++j) add_to(dp, phi_times(a, e, l, j, a.unit(a.index(y(j)))));
        a.set_differential(a.index(eta(l)), dp);
    }
    for (int j = 0; j < e.r0; ++j) a.set_differential(a.index(ytil(j)), a.gen_poly(a.index(y(j))));
    for (int l = 0; l < e.r1; ++l) {
        Poly dp = a.gen_poly(a.index(eta(l)));
        for (int j = 0; j < e.r0; ++j) add_to(dp, phi_times(a, e, l, j, a.unit(a.index(ytil(j)))), Q(-1));
        a.set_differential(a.index(etatil(l)), dp);
    }
    return a;
}

/** A commutative dg-algebra as a complex of its normal monomials, keyed by exponent vector. */
inline KeyedComplex algebra_complex(const Algebra& a, const Window& w) {
    auto ap = std::make_shared<Algebra>(a);
    KeyedSpec spec;
    spec.region = Region{w, 0};
    spec.basis = [ap](const Trigrade& g) {
        std::vector<Key> out;
        for (auto& m : enumerate_monomials(*ap, g)) out.push_back(Key(m.begin(), m.end()));
        return out;
    };
    spec.diff = [ap](const Key& k, const Trigrade&) {
        Combination out;
        for (auto& [m, c] : ap->d(Monomial(k.begin(), k.end()))) out.push_back({Key(m.begin(), m.end()), c});
        return out;
    };
    spec.label = [ap](const Key& k) { return ap->format(Monomial(k.begin(), k.end())); };
    return build_keyed(spec);
}

/** Augmentation of the Koszul resolution onto functions on the base, and its cone. */
inline GradedComplex koszul_augmentation_cone(const LinearBundle& e, const Window& w) {
    Algebra k = koszul_resolution_algebra(e);
    Algebra base = e.over_line ? make_sym({{"z", {0, 0, 1}, 0}}) : make_sym({});
    KeyedComplex kc = algebra_complex(k, w.widened(1, 0, 0));
    KeyedComplex bc = algebra_complex(base, w.widened(1, 0, 0));
    bool line = e.over_line;
    GradedMap aug = build_keyed_map(kc, bc, [line](const Key& key, const Trigrade&) {
        for (std::size_t i = line ? 1 : 0; i < key.size(); ++i)
            if (key[i]) return Combination{};
        return Combination{{line ? Key{key[0]} : Key{}, Q(1)}};
    });
    GradedComplex src = kc.complex;
    src.region = Region{w, 0};
    return cone(src, bc.complex, aug);
}

// ---------------------------------------------------------------------------------------------
// Modules over the total space

/** The zero section z_* O as a module over functions on E: k[z] with y and eta acting by zero. */
inline OpModule zero_section_module(const LinearBundle& e, const Window& w) {
    Algebra a = total_space_algebra(e);
    ExplicitModuleBuilder b("z_*O(" + e.name + ")", a, w);
    int top = e.over_line ? w.aux_max : 0;
    for (int i = 0; i <= top; ++i) b.add("z^" + std::to_string(i), {0, 0, i});
    for (int i = 0; i < top; ++i) b.set("z", "z^" + std::to_string(i), "z^" + std::to_string(i + 1), Q(1));
    return b.build();
}

/** Parameters of one summand O_X/(z^b)[y]/(y^a) (x) Lambda(eta), generated at `at`. */
struct TruncatedSummand {
    std::vector<int> y_bounds;  // y_j^{a_j} = 0
    int z_bound = 1;            // z^b = 0 (ignored over the point)
    Trigrade at;
};

/**
 * Finite dg-module over O_E: a direct sum of truncated quotients of O_E. Each quotient is
 * by powers of d-closed generators, so the differential descends.
 */
inline OpModule truncated_module(const LinearBundle& e, const std::vector<TruncatedSummand>& parts, const std::string& name) {
    Algebra a = total_space_algebra(e);
    const int zi = e.over_line ? a.index("z") : -1;
    std::vector<int> yi, ei;
    for (int j = 0; j < e.r0; ++j) yi.push_back(a.index(linear_detail::y(j)));
    for (int l = 0; l < e.r1; ++l) ei.push_back(a.index(linear_detail::eta(l)));
    struct Elem {
        int part;
        Monomial m;
    };
    std::vector<Elem> elems;
    Window box{0, 0, 0, 0, 0};
    bool first = true;
    auto inside = [&](int part, const Monomial& m) {
        const auto& p = parts[part];
        if (zi >= 0 && m[zi] >= std::max(1, p.z_bound)) return false;
        for (int j = 0; j < e.r0; ++j)
            if (m[yi[j]] >= p.y_bounds.at(j)) return false;
        return true;
    };
    auto label = [&](int part, const Monomial& m) { return "[" + std::to_string(part) + "]" + a.format(m); };
    for (int part = 0; part < static_cast<int>(parts.size()); ++part) {
        if (static_cast<int>(parts[part].y_bounds.size()) != e.r0) throw std::invalid_argument("one y bound per fibre coordinate");
        Monomial m = a.one();
        std::function<void(int)> rec = [&](int i) {
            if (i == a.size()) {
                if (!inside(part, m)) return;
                elems.push_back({part, m});
                Trigrade g = parts[part].at + a.grade(m);
                if (first) box = Window{g.deg, g.deg, g.wt, g.wt, std::max(0, g.aux)};
                box.deg_min = std::min(box.deg_min, g.deg);
                box.deg_max = std::max(box.deg_max, g.deg);
                box.wt_min = std::min(box.wt_min, g.wt);
                box.wt_max = std::max(box.wt_max, g.wt);
                box.aux_max = std::max(box.aux_max, g.aux);
                first = false;
                return;
            }
            int cap = a.gen(i).odd() ? 1 : (i == zi ? parts[part].z_bound - 1 : parts[part].y_bounds[std::find(yi.begin(), yi.end(), i) - yi.begin()] - 1);
            for (int x = 0; x <= cap; ++x) {
                m[i] = x;
                rec(i + 1);
            }
            m[i] = 0;
        };
        rec(0);
    }
    ExplicitModuleBuilder b(name, a, box.widened(1, 1, 0));
    for (auto& el : elems) b.add(label(el.part, el.m), parts[el.part].at + a.grade(el.m));
    auto emit = [&](const std::string& op, const Elem& el, const Poly& img) {
        for (auto& [m, c] : img)
            if (inside(el.part, m)) b.set(op, label(el.part, el.m), label(el.part, m), c);
    };
    for (auto& el : elems) {
        // the summand generator is d-closed and sits to the right, so d(m e) = d(m) e
        emit("d", el, a.d(el.m));
        for (int g = 0; g < a.size(); ++g) emit(a.gen(g).name, el, a.mul(a.gen_poly(g), a.poly(el.m)));
    }
    return b.build();
}

/** Random finite test module: one or two truncated summands at random shifts. */
inline OpModule random_truncated_module(const LinearBundle& e, std::mt19937& rng, int index) {
    std::uniform_int_distribution<int> bound(1, 3), zb(1, 3), deg(-2, 2), wt(-1, 1), parts(1, 2);
    std::vector<TruncatedSummand> ps;
    int n = parts(rng);
    for (int i = 0; i < n; ++i) {
        TruncatedSummand s;
        for (int j = 0; j < e.r0; ++j) s.y_bounds.push_back(bound(rng));
        s.z_bound = zb(rng);
        s.at = {deg(rng), wt(rng), 0};
        ps.push_back(s);
    }
    return truncated_module(e, ps, "random" + std::to_string(index) + "(" + e.name + ")");
}

// ---------------------------------------------------------------------------------------------
// kappa: M (x) Lambda(u) (x) k[v] with twisting cochain sum y_j (x) u_j + eta_l (x) v_l

namespace linear_detail {

inline int popcount(unsigned x) { return __builtin_popcount(x); }
/// Number of set bits strictly below position j.
inline int below(unsigned mask, int j) { return popcount(mask & ((1u << j) - 1)); }
inline Q parity_sign(int n) { return (n % 2) ? Q(-1) : Q(1); }

/// Applies z^p to a module element.
inline Combination z_power(const OpModule& m, const Combination& c, int p) {
    Combination cur = c;
    for (int i = 0; i < p && !cur.empty(); ++i) {
        std::map<Key, Q> acc;
        for (auto& t : cur)
            for (auto& s : apply_op(m.op("z"), t.key)) acc[s.key] += t.coef * s.coef;
        cur.clear();
        for (auto& [k, v] : acc)
            if (!v.is_zero()) cur.push_back({k, v});
    }
    return cur;
}

inline Combination scaled(const Combination& c, const Q& s) {
    Combination out;
    for (auto& t : c) out.push_back({t.key, t.coef * s});
    return out;
}

} // namespace linear_detail

/// Grade of the kappa element (m at g, u^mask, v^p).
inline Trigrade linear_kappa_grade(const LinearBundle& e, const Trigrade& g, unsigned mask, const std::vector<int>& p) {
    Trigrade r = g;
    r.deg += linear_detail::popcount(mask);
    r.wt += linear_detail::popcount(mask);
    for (int l = 0; l < e.r1; ++l) r = r + Trigrade{2, 1, -e.row_power(l)} * p[l];
    return r;
}

/**
 * kappa(M) for a module over the total space, materialized on `target`. Keys are
 * (M element key, u mask, v exponents). The result is a module over the dual algebra.
 */
inline KeyedModule linear_kappa(const LinearBundle& e, const OpModule& m, const Window& target) {
    using namespace linear_detail;
    e.check();
    std::map<Trigrade, std::vector<Key>> basis;
    for (auto& [g, pc] : m.space->pieces()) {
        if (pc.dim == 0) continue;
        for (unsigned mask = 0; mask < (1u << e.r0); ++mask) {
            std::vector<int> p(e.r1, 0);
            std::function<void(int)> rec = [&](int l) {
                if (l == e.r1) {
                    Trigrade kg = linear_kappa_grade(e, g, mask, p);
                    if (!target.contains(kg)) return;
                    for (int i = 0; i < pc.dim; ++i) {
                        Key k = element_key(g, i);
                        k.push_back(static_cast<int>(mask));
                        k.insert(k.end(), p.begin(), p.end());
                        basis[kg].push_back(k);
                    }
                    return;
                }
                for (p[l] = 0; g.wt + popcount(mask) + std::accumulate(p.begin(), p.begin() + l + 1, 0) <= target.wt_max; ++p[l])
                    rec(l + 1);
                p[l] = 0;
            };
            rec(0);
        }
    }
    auto mp = std::make_shared<OpModule>(m);
    auto ep = std::make_shared<LinearBundle>(e);
    KeyedSpec spec;
    spec.region = Region{target, 0};
    spec.basis = [basis](const Trigrade& g) {
        auto it = basis.find(g);
        return it == basis.end() ? std::vector<Key>{} : it->second;
    };
    spec.diff = [mp, ep](const Key& key, const Trigrade&) {
        const OpModule& M = *mp;
        const LinearBundle& E = *ep;
        Key mk = detail::head(key, 4);
        unsigned mask = static_cast<unsigned>(key[4]);
        std::vector<int> p(key.begin() + 5, key.end());
        Q msign = parity_sign(mk[0]);
        Combination out;
        auto lift = [&](const Combination& c, unsigned nm, const std::vector<int>& np, const Q& s) {
            for (auto& t : c) {
                Key k = t.key;
                k.push_back(static_cast<int>(nm));
                k.insert(k.end(), np.begin(), np.end());
                out.push_back({k, t.coef * s});
            }
        };
        Combination self{{mk, Q(1)}};
        lift(apply_op(M.d, mk), mask, p, Q(1));
        // internal differential of the dual algebra: d u_j = -sum_l phi_lj v_l
        for (int j = 0; j < E.r0; ++j) {
            if (!(mask & (1u << j))) continue;
            Q pos = parity_sign(below(mask, j));
            for (int l = 0; l < E.r1; ++l) {
                const auto& en = E.phi[l][j];
                if (en.coef.is_zero()) continue;
                auto np = p;
                ++np[l];
                lift(z_power(M, self, en.power), mask & ~(1u << j), np, -msign * pos * en.coef);
            }
        }
        // twisting terms
        for (int j = 0; j < E.r0; ++j) {
            if (mask & (1u << j)) continue;
            lift(apply_op(M.op(y(j)), mk), mask | (1u << j), p, msign * parity_sign(below(mask, j)));
        }
        for (int l = 0; l < E.r1; ++l) {
            auto np = p;
            ++np[l];
            lift(apply_op(M.op(eta(l)), mk), mask, np, Q(1));
        }
        return out;
    };
    spec.label = [mp, ep](const Key& key) {
        const Piece* pc = mp->space->piece(key_grade(key));
        std::string s = pc && !pc->labels.empty() ? pc->labels[key[3]] : "m" + std::to_string(key[3]);
        for (int j = 0; j < ep->r0; ++j)
            if (key[4] & (1 << j)) s += "*" + u(j);
        for (int l = 0; l < ep->r1; ++l)
            if (key[5 + l]) s += "*" + v(l) + "^" + std::to_string(key[5 + l]);
        return s;
    };
    KeyedComplex kc = build_keyed(spec);
    Algebra dual = dual_space_algebra(e);
    std::map<std::string, GradedMap> ops;
    // dual generators act from the left: b . (m (x) c) = (-1)^{|b||m|} m (x) b c
    for (int j = 0; j < e.r0; ++j)
        ops[u(j)] = build_keyed_operator(kc, dual.gen(dual.index(u(j))).grade, [j](const Key& key, const Trigrade&) {
            unsigned mask = static_cast<unsigned>(key[4]);
            if (mask & (1u << j)) return Combination{};
            Key r = key;
            r[4] = static_cast<int>(mask | (1u << j));
            return Combination{{r, parity_sign(key[0]) * parity_sign(below(mask, j))}};
        });
    for (int l = 0; l < e.r1; ++l)
        ops[v(l)] = build_keyed_operator(kc, dual.gen(dual.index(v(l))).grade, [l](const Key& key, const Trigrade&) {
            Key r = key;
            ++r[5 + l];
            return Combination{{r, Q(1)}};
        });
    if (e.over_line)
        ops["z"] = build_keyed_operator(kc, {0, 0, 1}, [mp](const Key& key, const Trigrade&) {
            Combination out;
            for (auto& t : apply_op(mp->op("z"), detail::head(key, 4))) {
                Key k = t.key;
                k.insert(k.end(), key.begin() + 4, key.end());
                out.push_back({k, t.coef});
            }
            return out;
        });
    return {detail::finish("kappa(" + m.name + ")", dual, kc, ops), kc};
}

// ---------------------------------------------------------------------------------------------
// kappa inverse: N (x) O_E^dual, torsion model

/// Grade of (n at g, dual of y^q eta^mask).
inline Trigrade linear_kappa_inverse_grade(const LinearBundle& e, const Trigrade& g, const std::vector<int>& q, unsigned mask) {
    Trigrade r = g;
    for (int j = 0; j < e.r0; ++j) r.wt += q[j];
    for (int l = 0; l < e.r1; ++l)
        if (mask & (1u << l)) r = r + Trigrade{1, 1, -e.row_power(l)};
    return r;
}

/**
 * kappa^{-1}(N) for a module over the dual algebra. Keys are (N element key, y exponents,
 * eta mask) for the dual basis element of y^q eta^mask. Contraction by y_j lowers q_j,
 * contraction by eta_l removes l from the mask. The twisting term pairs u_j with -y_j, and y_j
 * acts by minus the contraction, which is what makes [d, eta_l] = sum_j phi_lj y_j hold.
 */
inline KeyedModule linear_kappa_inverse(const LinearBundle& e, const OpModule& n, const Window& target) {
    using namespace linear_detail;
    e.check();
    std::map<Trigrade, std::vector<Key>> basis;
    for (auto& [g, pc] : n.space->pieces()) {
        if (pc.dim == 0) continue;
        for (unsigned mask = 0; mask < (1u << e.r1); ++mask) {
            std::vector<int> q(e.r0, 0);
            std::function<void(int)> rec = [&](int j) {
                if (j == e.r0) {
                    Trigrade kg = linear_kappa_inverse_grade(e, g, q, mask);
                    if (!target.contains(kg)) return;
                    for (int i = 0; i < pc.dim; ++i) {
                        Key k = element_key(g, i);
                        k.insert(k.end(), q.begin(), q.end());
                        k.push_back(static_cast<int>(mask));
                        basis[kg].push_back(k);
                    }
                    return;
                }
                for (q[j] = 0; g.wt + popcount(mask) + std::accumulate(q.begin(), q.begin() + j + 1, 0) <= target.wt_max; ++q[j])
                    rec(j + 1);
                q[j] = 0;
            };
            rec(0);
        }
    }
    auto np = std::make_shared<OpModule>(n);
    auto ep = std::make_shared<LinearBundle>(e);
    KeyedSpec spec;
    spec.region = Region{target, 0};
    spec.basis = [basis](const Trigrade& g) {
        auto it = basis.find(g);
        return it == basis.end() ? std::vector<Key>{} : it->second;
    };
    spec.diff = [np, ep](const Key& key, const Trigrade&) {
        const OpModule& N = *np;
        const LinearBundle& E = *ep;
        Key nk = detail::head(key, 4);
        std::vector<int> q(key.begin() + 4, key.begin() + 4 + E.r0);
        unsigned mask = static_cast<unsigned>(key[4 + E.r0]);
        Q nsign = parity_sign(nk[0]);
        Combination out;
        auto lift = [&](const Combination& c, const std::vector<int>& nq, unsigned nm, const Q& s) {
            for (auto& t : c) {
                Key k = t.key;
                k.insert(k.end(), nq.begin(), nq.end());
                k.push_back(static_cast<int>(nm));
                out.push_back({k, t.coef * s});
            }
        };
        Combination self{{nk, Q(1)}};
        lift(apply_op(N.d, nk), q, mask, Q(1));
        // transpose of d(eta_l) = sum_j phi_lj y_j on the dual basis
        for (int l = 0; l < E.r1; ++l) {
            if (mask & (1u << l)) continue;
            Q pos = parity_sign(below(mask, l));
            for (int j = 0; j < E.r0; ++j) {
                const auto& en = E.phi[l][j];
                if (en.coef.is_zero() || q[j] == 0) continue;
                auto nq = q;
                --nq[j];
                lift(z_power(N, self, en.power), nq, mask | (1u << l), -nsign * pos * en.coef);
            }
        }
        // twisting terms: u_j with contraction by y_j, v_l with contraction by eta_l
        for (int j = 0; j < E.r0; ++j) {
            if (q[j] == 0) continue;
            auto nq = q;
            --nq[j];
            lift(apply_op(N.op(u(j)), nk), nq, mask, Q(-1));
        }
        for (int l = 0; l < E.r1; ++l) {
            if (!(mask & (1u << l))) continue;
            lift(apply_op(N.op(v(l)), nk), q, mask & ~(1u << l), nsign * parity_sign(below(mask, l)));
        }
        return out;
    };
    spec.label = [np, ep](const Key& key) {
        const Piece* pc = np->space->piece(key_grade(key));
        std::string s = pc && !pc->labels.empty() ? pc->labels[key[3]] : "n" + std::to_string(key[3]);
        for (int j = 0; j < ep->r0; ++j)
            if (key[4 + j]) s += "*" + y(j) + "^-" + std::to_string(key[4 + j]);
        for (int l = 0; l < ep->r1; ++l)
            if (key[4 + ep->r0] & (1 << l)) s += "*" + eta(l) + "'";
        return s;
    };
    KeyedComplex kc = build_keyed(spec);
    Algebra tot = total_space_algebra(e);
    std::map<std::string, GradedMap> ops;
    const int r0 = e.r0;
    for (int j = 0; j < e.r0; ++j)
        ops[y(j)] = build_keyed_operator(kc, tot.gen(tot.index(y(j))).grade, [j](const Key& key, const Trigrade&) {
            if (key[4 + j] == 0) return Combination{};
            Key r = key;
            --r[4 + j];
            return Combination{{r, Q(-1)}};
        });
    for (int l = 0; l < e.r1; ++l)
        ops[eta(l)] = build_keyed_operator(kc, tot.gen(tot.index(eta(l))).grade, [l, r0](const Key& key, const Trigrade&) {
            unsigned mask = static_cast<unsigned>(key[4 + r0]);
            if (!(mask & (1u << l))) return Combination{};
            Key r = key;
            r[4 + r0] = static_cast<int>(mask & ~(1u << l));
            return Combination{{r, parity_sign(key[0]) * parity_sign(below(mask, l))}};
        });
    if (e.over_line)
        ops["z"] = build_keyed_operator(kc, {0, 0, 1}, [np](const Key& key, const Trigrade&) {
            Combination out;
            for (auto& t : apply_op(np->op("z"), detail::head(key, 4))) {
                Key k = t.key;
                k.insert(k.end(), key.begin() + 4, key.end());
                out.push_back({k, t.coef});
            }
            return out;
        });
    return {detail::finish("kappa^-1(" + n.name + ")", tot, kc, ops), kc};
}

// ---------------------------------------------------------------------------------------------
// Round trip

/**
 * Unit M -> kappa^{-1}(kappa(M)), m -> sum over monomials a = y^q eta^mask of
 * sign(a, m) (a m (x) 1) (x) a^dual. Finite because y and eta act nilpotently on M.
 */
inline GradedMap linear_unit_map(const LinearBundle& e, const OpModule& m, const KeyedModule& km, const KeyedModule& kkm) {
    using namespace linear_detail;
    GradedMap f{m.space, kkm.module.space, {0, 0, 0}, {}};
    const int cap = 64;
    for (auto& [g, p] : m.space->pieces()) {
        if (!kkm.module.region.contains(g) || p.dim == 0) continue;
        int rows = kkm.module.space->dim(g);
        std::vector<SparseMatrix::Entry> trip;
        for (int i = 0; i < p.dim; ++i) {
            // walk monomials y^q eta^mask applied to m, eta first then y powers
            for (unsigned mask = 0; mask < (1u << e.r1); ++mask) {
                Combination base{{element_key(g, i), Q(1)}};
                // apply eta_l for l in mask, highest index first so the product reads eta_{l1} eta_{l2} ...
                for (int l = e.r1 - 1; l >= 0 && !base.empty(); --l)
                    if (mask & (1u << l)) {
                        std::map<Key, Q> acc;
                        for (auto& t : base)
                            for (auto& s : apply_op(m.op(eta(l)), t.key)) acc[s.key] += t.coef * s.coef;
                        base.clear();
                        for (auto& [k, v] : acc)
                            if (!v.is_zero()) base.push_back({k, v});
                    }
                std::vector<int> q(e.r0, 0);
                std::function<void(int, const Combination&)> rec = [&](int j, const Combination& cur) {
                    if (cur.empty()) return;
                    if (j == e.r0) {
                        for (auto& t : cur) {
                            Trigrade mg = key_grade(t.key);
                            Key kkey = t.key;
                            kkey.push_back(0);
                            for (int l = 0; l < e.r1; ++l) kkey.push_back(0);
                            auto el = detail::element_of(km.keyed, mg, kkey);
                            if (!el) continue;
                            Key full = *el;
                            full.insert(full.end(), q.begin(), q.end());
                            full.push_back(static_cast<int>(mask));
                            int row = kkm.keyed.find(g, full);
                            if (row < 0) continue;
                            trip.push_back({row, i, t.coef * parity_sign(popcount(mask) * g.deg)});
                        }
                        return;
                    }
                    Combination c = cur;
                    for (q[j] = 0; !c.empty(); ++q[j]) {
                        if (q[j] > cap) throw NotNilpotent("y does not act nilpotently on " + m.name);
                        rec(j + 1, c);
                        std::map<Key, Q> acc;
                        for (auto& t : c)
                            for (auto& s : apply_op(m.op(y(j)), t.key)) acc[s.key] += t.coef * s.coef;
                        c.clear();
                        for (auto& [k, v] : acc)
                            if (!v.is_zero()) c.push_back({k, v});
                    }
                    q[j] = 0;
                };
                rec(0, base);
            }
        }
        if (rows > 0) f.set_block(g, SparseMatrix::from_triplets(rows, p.dim, std::move(trip)));
    }
    return f;
}

/** Window kappa(M) must cover so that kappa^{-1} of it is complete on `target`. */
inline Window linear_kappa_window(const LinearBundle& e, const OpModule& m, const Window& target) {
    int emax = 0;
    for (int l = 0; l < e.r1; ++l) emax = std::max(emax, e.row_power(l));
    const Window& mb = m.region.box;
    return Window{target.deg_min - e.r1 - 1, target.deg_max + 1, std::min(mb.wt_min, target.wt_min), target.wt_max,
                  target.aux_max + emax * e.r1};
}

/** Cone of the unit on `target`; acyclic on certified pieces when the round trip holds. */
inline GradedComplex linear_unit_cone(const LinearBundle& e, const OpModule& m, const Window& target) {
    KeyedModule km = linear_kappa(e, m, linear_kappa_window(e, m, target));
    KeyedModule kkm = linear_kappa_inverse(e, km.module, target);
    GradedComplex src = m.complex();
    src.region = Region{target, 0};
    return cone(src, kkm.module.complex(), linear_unit_map(e, m, km, kkm));
}

/** Catalogue of the bundles used by the acceptance suite. */
inline std::vector<LinearBundle> standard_bundles() {
    using E = LinearBundle::Entry;
    std::vector<LinearBundle> out;
    auto make = [&](std::string name, bool line, int r0, int r1, std::vector<std::vector<E>> phi) {
        LinearBundle b;
        b.name = std::move(name);
        b.over_line = line;
        b.r0 = r0;
        b.r1 = r1;
        b.phi = std::move(phi);
        b.check();
        out.push_back(b);
    };
    for (bool line : {false, true}) {
        std::string base = line ? "line" : "pt";
        int p = line ? 1 : 0;
        make(base + ".r10", line, 1, 0, {});
        make(base + ".r01", line, 0, 1, {{}});
        make(base + ".r11", line, 1, 1, {{E{Q(1), p}}});
        make(base + ".r21", line, 2, 1, {{E{Q(1), p}, E{Q(-2), p}}});
    }
    return out;
}

} // namespace kd
