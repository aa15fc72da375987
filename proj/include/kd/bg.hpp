#pragma once

#include "kd/module.hpp"

#include <cmath>

namespace kd {

/**
 * @brief Koszul duality for the block algebras of BG_m and BG_a.
 *
 * Mixed side: k[x, delta] with d(delta) = n x (multiplicative group, block n) or k[x, y, delta]
 * with d(delta) = x y (additive group). Filtered D-module side: k[t, h_x] with d(h_x) = n t, or
 * k[y, h_x, t] with d(h_x) = y t. The evaluation operator alpha is n * Id, or the action of y.
 *
 * kappa(M) = M (x) k[t] (x) Lambda(h), Tate-sheared, with differential
 *   (m, t^k)     -> (dm, t^k) + (delta m, t^{k+1}) + (x m, t^k h)
 *   (m, t^k h)   -> -(alpha m, t^{k+1}) - (dm, t^k h) - (delta m, t^{k+1} h)
 * and kappa^{-1}(N) = N (x) k[x]^dual (x) Lambda(delta)^dual, unsheared, with
 *   (n, x^-j)         -> (dn, x^-j) + (h n, x^-(j-1)) + (alpha n, x^-(j-1) delta*)
 *   (n, x^-j delta*)  -> -(t n, x^-j) - (dn, x^-j delta*) - (h n, x^-(j-1) delta*)
 */
enum class GroupKind { multiplicative, additive };

struct BlockInfo {
    GroupKind group;
    int n = 0;
};

inline BlockInfo block_info(const Algebra& a) {
    switch (a.kind()) {
    case AlgebraKind::bgm_block:
    case AlgebraKind::bgm_dual: return {GroupKind::multiplicative, a.param()};
    case AlgebraKind::bga_block:
    case AlgebraKind::bga_dual: return {GroupKind::additive, 0};
    default: throw std::invalid_argument("duality for classifying stacks needs a block algebra, got " + to_string(a.kind()));
    }
}

inline bool is_mixed_side(const Algebra& a) {
    return a.kind() == AlgebraKind::bgm_block || a.kind() == AlgebraKind::bga_block;
}
inline bool is_dual_side(const Algebra& a) {
    return a.kind() == AlgebraKind::bgm_dual || a.kind() == AlgebraKind::bga_dual;
}
inline Algebra dual_block(const BlockInfo& b) {
    return b.group == GroupKind::multiplicative ? make_bgm_dual(b.n) : make_bga_dual();
}
inline Algebra mixed_block(const BlockInfo& b) {
    return b.group == GroupKind::multiplicative ? make_bgm_block(b.n) : make_bga_block();
}

/** A module whose basis elements carry the keys they were assembled from. */
struct KeyedModule {
    OpModule module;
    KeyedComplex keyed;
};

namespace detail {

inline Key cat(Key k, std::initializer_list<int> tail) {
    k.insert(k.end(), tail);
    return k;
}
inline Key head(const Key& k, int n) { return Key(k.begin(), k.begin() + n); }

/// alpha applied to an element of a module: n * m, or y m.
inline Combination apply_alpha(const OpModule& m, const BlockInfo& b, const Key& k) {
    if (b.group == GroupKind::multiplicative) {
        if (b.n == 0) return {};
        return {{k, Q(b.n)}};
    }
    return apply_op(m.op("y"), k);
}

/// Lifts terms of the inner module into outer keys with extra suffix indices and a sign.
inline void push_lifted(Combination& out, const Combination& inner, std::initializer_list<int> tail, const Q& s) {
    for (auto& t : inner) out.push_back({cat(t.key, tail), t.coef * s});
}

inline OpModule finish(const std::string& name, const Algebra& alg, const KeyedComplex& kc,
                       const std::map<std::string, GradedMap>& ops) {
    OpModule m;
    m.name = name;
    m.algebra = alg;
    m.space = kc.complex.space;
    m.region = kc.complex.region;
    m.d = kc.complex.d;
    m.ops = ops;
    return m;
}

/// Element key (grade, index) of a keyed basis element.
inline std::optional<Key> element_of(const KeyedComplex& kc, const Trigrade& g, const Key& k) {
    int i = kc.find(g, k);
    if (i < 0) return std::nullopt;
    return element_key(g, i);
}

} // namespace detail

// ---------------------------------------------------------------------------------------------
// Windows needed on the input side so that every piece of the output window is complete

/** Input window for kappa when M lives in degrees [deg_lo, deg_hi]. */
inline Window kappa_input_window(const Window& target, int deg_lo, int deg_hi) {
    int wlo = static_cast<int>(std::floor((deg_lo - target.deg_max - 4) / 2.0)) - 1;
    return Window{deg_lo, deg_hi, std::min(wlo, target.wt_max), target.wt_max + 2, target.aux_max};
}

/** Input window for kappa^{-1} when N has no weight below wt_lo. */
inline Window kappa_inverse_input_window(const Window& target, int wt_lo) {
    int wt_hi = target.wt_max + 2;
    return Window{target.deg_min - 3 - 2 * wt_hi, target.deg_max + 3 - 2 * wt_lo, wt_lo, wt_hi, target.aux_max};
}

// ---------------------------------------------------------------------------------------------
// kappa

/// Grade of the kappa element (m at g, t^k, h^e).
inline Trigrade kappa_grade(const Trigrade& g, int k, int e) { return {g.deg - 2 * g.wt - e, g.wt + k + e, g.aux}; }

/** kappa of a mixed-side module, materialized on `target`. Keys: (M element key, k, e). */
inline KeyedModule kappa(const OpModule& m, const Window& target) {
    BlockInfo b = block_info(m.algebra);
    if (!is_mixed_side(m.algebra)) throw std::invalid_argument("kappa expects a module over the mixed-side block");
    std::map<Trigrade, std::vector<Key>> basis;
    for (auto& [g, p] : m.space->pieces())
        for (int e = 0; e <= 1; ++e)
            for (int k = 0; g.wt + k + e <= target.wt_max; ++k) {
                Trigrade kg = kappa_grade(g, k, e);
                if (!target.contains(kg)) continue;
                for (int i = 0; i < p.dim; ++i) basis[kg].push_back(detail::cat(element_key(g, i), {k, e}));
            }
    auto mp = std::make_shared<OpModule>(m);
    KeyedSpec spec;
    spec.region = Region{target, 0};
    spec.basis = [basis](const Trigrade& g) {
        auto it = basis.find(g);
        return it == basis.end() ? std::vector<Key>{} : it->second;
    };
    spec.diff = [mp, b](const Key& key, const Trigrade&) {
        Key mk = detail::head(key, 4);
        int k = key[4], e = key[5];
        Combination out;
        const OpModule& M = *mp;
        if (e == 0) {
            detail::push_lifted(out, apply_op(M.d, mk), {k, 0}, Q(1));
            detail::push_lifted(out, apply_op(M.op("delta"), mk), {k + 1, 0}, Q(1));
            detail::push_lifted(out, apply_op(M.op("x"), mk), {k, 1}, Q(1));
        } else {
            detail::push_lifted(out, detail::apply_alpha(M, b, mk), {k + 1, 0}, Q(-1));
            detail::push_lifted(out, apply_op(M.d, mk), {k, 1}, Q(-1));
            detail::push_lifted(out, apply_op(M.op("delta"), mk), {k + 1, 1}, Q(-1));
        }
        return out;
    };
    spec.label = [mp](const Key& key) {
        const Piece* p = mp->space->piece(key_grade(key));
        std::string base = p && !p->labels.empty() ? p->labels[key[3]] : "m" + std::to_string(key[3]);
        std::string s = base;
        if (key[4] > 0) s += "*t^" + std::to_string(key[4]);
        if (key[5]) s += "*h";
        return s;
    };
    KeyedComplex kc = build_keyed(spec);
    Algebra dual = dual_block(b);
    std::map<std::string, GradedMap> ops;
    ops["t"] = build_keyed_operator(kc, dual.gen(dual.index("t")).grade, [](const Key& key, const Trigrade&) {
        Key r = key;
        r[4] += 1;
        return Combination{{r, Q(1)}};
    });
    ops["h_x"] = build_keyed_operator(kc, dual.gen(dual.index("h_x")).grade, [](const Key& key, const Trigrade&) {
        if (key[5] == 1) return Combination{};
        Key r = key;
        r[5] = 1;
        return Combination{{r, Q(-1)}};
    });
    if (b.group == GroupKind::additive)
        ops["y"] = build_keyed_operator(kc, {0, 0, 0}, [mp](const Key& key, const Trigrade&) {
            Combination out;
            detail::push_lifted(out, apply_op(mp->op("y"), detail::head(key, 4)), {key[4], key[5]}, Q(1));
            return out;
        });
    return {detail::finish("kappa(" + m.name + ")", dual, kc, ops), kc};
}

// ---------------------------------------------------------------------------------------------
// kappa inverse

inline Trigrade kappa_inverse_grade(const Trigrade& g, int j, int e) {
    return {g.deg + 2 * g.wt + e, g.wt + j + e, g.aux};
}

/** kappa^{-1} of a D-side module, materialized on `target`. Keys: (N element key, j, e). */
inline KeyedModule kappa_inverse(const OpModule& n, const Window& target) {
    BlockInfo b = block_info(n.algebra);
    if (!is_dual_side(n.algebra)) throw std::invalid_argument("kappa inverse expects a module over the dual block");
    std::map<Trigrade, std::vector<Key>> basis;
    for (auto& [g, p] : n.space->pieces())
        for (int e = 0; e <= 1; ++e)
            for (int j = 0; g.wt + j + e <= target.wt_max; ++j) {
                Trigrade kg = kappa_inverse_grade(g, j, e);
                if (!target.contains(kg)) continue;
                for (int i = 0; i < p.dim; ++i) basis[kg].push_back(detail::cat(element_key(g, i), {j, e}));
            }
    auto np = std::make_shared<OpModule>(n);
    KeyedSpec spec;
    spec.region = Region{target, 0};
    spec.basis = [basis](const Trigrade& g) {
        auto it = basis.find(g);
        return it == basis.end() ? std::vector<Key>{} : it->second;
    };
    spec.diff = [np, b](const Key& key, const Trigrade&) {
        Key nk = detail::head(key, 4);
        int j = key[4], e = key[5];
        const OpModule& N = *np;
        Combination out;
        if (e == 0) {
            detail::push_lifted(out, apply_op(N.d, nk), {j, 0}, Q(1));
            if (j > 0) {
                detail::push_lifted(out, apply_op(N.op("h_x"), nk), {j - 1, 0}, Q(1));
                detail::push_lifted(out, detail::apply_alpha(N, b, nk), {j - 1, 1}, Q(1));
            }
        } else {
            detail::push_lifted(out, apply_op(N.op("t"), nk), {j, 0}, Q(-1));
            detail::push_lifted(out, apply_op(N.d, nk), {j, 1}, Q(-1));
            if (j > 0) detail::push_lifted(out, apply_op(N.op("h_x"), nk), {j - 1, 1}, Q(-1));
        }
        return out;
    };
    spec.label = [np](const Key& key) {
        const Piece* p = np->space->piece(key_grade(key));
        std::string s = p && !p->labels.empty() ? p->labels[key[3]] : "n" + std::to_string(key[3]);
        if (key[4] > 0) s += "*x^-" + std::to_string(key[4]);
        if (key[5]) s += "*delta'";
        return s;
    };
    KeyedComplex kc = build_keyed(spec);
    Algebra mixed = mixed_block(b);
    std::map<std::string, GradedMap> ops;
    ops["x"] = build_keyed_operator(kc, mixed.gen(mixed.index("x")).grade, [](const Key& key, const Trigrade&) {
        if (key[4] == 0) return Combination{};
        Key r = key;
        r[4] -= 1;
        return Combination{{r, Q(1)}};
    });
    ops["delta"] = build_keyed_operator(kc, mixed.gen(mixed.index("delta")).grade, [](const Key& key, const Trigrade&) {
        if (key[5] == 0) return Combination{};
        Key r = key;
        r[5] = 0;
        return Combination{{r, Q(1)}};
    });
    if (b.group == GroupKind::additive)
        ops["y"] = build_keyed_operator(kc, {0, 0, 0}, [np](const Key& key, const Trigrade&) {
            Combination out;
            detail::push_lifted(out, apply_op(np->op("y"), detail::head(key, 4)), {key[4], key[5]}, Q(1));
            return out;
        });
    return {detail::finish("kappa^-1(" + n.name + ")", mixed, kc, ops), kc};
}

// ---------------------------------------------------------------------------------------------
// Unit of the adjunction and functoriality

struct NotNilpotent : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/**
 * Unit M -> kappa^{-1}(kappa(M)), m -> sum_j (x^j m, x^-j) + (x^j delta m, x^-j delta*).
 * The sum is finite only when x acts nilpotently on the realized module; a power of x that
 * survives past the input window is reported as NotNilpotent.
 */
inline GradedMap unit_map(const OpModule& m, const KeyedModule& km, const KeyedModule& kkm) {
    GradedMap f{m.space, kkm.module.space, {0, 0, 0}, {}};
    const GradedMap& x = m.op("x");
    const GradedMap& delta = m.op("delta");
    auto lift = [&](const Combination& c, int j, int e, Q s, Combination& out) {
        for (auto& t : c) {
            Trigrade mg = key_grade(t.key);
            Trigrade ng = kappa_grade(mg, 0, 0);
            auto nk = detail::element_of(km.keyed, ng, detail::cat(t.key, {0, 0}));
            if (!nk) continue;  // outside the kappa window; the target piece is not certified either
            out.push_back({detail::cat(*nk, {j, e}), t.coef * s});
        }
    };
    for (auto& [g, p] : m.space->pieces()) {
        if (!kkm.module.region.contains(g)) continue;
        std::vector<SparseMatrix::Entry> trip;
        int rows = kkm.module.space->dim(g);
        for (int i = 0; i < p.dim; ++i) {
            Combination img;
            Combination cur{{element_key(g, i), Q(1)}};
            Combination cur_delta = apply_op(delta, element_key(g, i));
            for (int j = 0; !cur.empty() || !cur_delta.empty(); ++j) {
                if (j > 4 * (m.region.box.wt_max - m.region.box.wt_min + 2))
                    throw NotNilpotent("x does not act nilpotently on " + m.name);
                lift(cur, j, 0, Q(1), img);
                lift(cur_delta, j, 1, Q(1), img);
                auto step = [&](const Combination& c) {
                    std::map<Key, Q> acc;
                    for (auto& t : c)
                        for (auto& s : apply_op(x, t.key)) acc[s.key] += t.coef * s.coef;
                    Combination r;
                    for (auto& [k, v] : acc)
                        if (!v.is_zero()) r.push_back({k, v});
                    return r;
                };
                cur = step(cur);
                cur_delta = step(cur_delta);
            }
            for (auto& t : img) {
                int row = kkm.keyed.find(g, t.key);
                if (row < 0) continue;
                trip.push_back({row, i, t.coef});
            }
        }
        if (rows > 0) f.set_block(g, SparseMatrix::from_triplets(rows, p.dim, std::move(trip)));
    }
    return f;
}

/** Cone of the unit; acyclic on certified pieces when the duality round trip holds. */
inline GradedComplex unit_cone(const OpModule& m, const Window& target, int m_wt_lo) {
    Window nwin = kappa_inverse_input_window(target, m_wt_lo);
    KeyedModule km = kappa(m, nwin);
    KeyedModule kkm = kappa_inverse(km.module, target);
    GradedComplex src = m.complex();
    src.region = Region{target, 0};
    return cone(src, kkm.module.complex(), unit_map(m, km, kkm));
}

/** kappa(f) for a degree-preserving module map f: M1 -> M2, as a map kappa(M1) -> kappa(M2). */
inline GradedMap kappa_map(const KeyedModule& k1, const KeyedModule& k2, const GradedMap& f) {
    return build_keyed_map(k1.keyed, k2.keyed, [&f](const Key& key, const Trigrade&) {
        Combination out;
        detail::push_lifted(out, apply_op(f, detail::head(key, 4)), {key[4], key[5]}, Q(1));
        return out;
    });
}

// ---------------------------------------------------------------------------------------------
// Specializations t = 1 (un) and t = 0 (gr)

/**
 * un(kappa(M)): setting t = 1 collapses the t-towers, leaving M (x) Lambda(h) in degree
 * d - 2w - e. Weight is forgotten (recorded as 0). Degrees are certified when no element
 * beyond the realized weights of M can reach them.
 */
inline GradedComplex un_kappa(const OpModule& m) {
    BlockInfo b = block_info(m.algebra);
    const Window& mw = m.region.box;
    Window box{mw.deg_max - 2 * mw.wt_max - 1, mw.deg_min - 2 * mw.wt_min, 0, 0, mw.aux_max};
    if (box.deg_min > box.deg_max) throw std::invalid_argument("un: module window too narrow in weight");
    std::map<Trigrade, std::vector<Key>> basis;
    for (auto& [g, p] : m.space->pieces())
        for (int e = 0; e <= 1; ++e) {
            Trigrade ug{g.deg - 2 * g.wt - e, 0, g.aux};
            if (!box.contains(ug)) continue;
            for (int i = 0; i < p.dim; ++i) basis[ug].push_back(detail::cat(element_key(g, i), {e}));
        }
    auto mp = std::make_shared<OpModule>(m);
    KeyedSpec spec;
    spec.region = Region{box, 0};
    spec.basis = [basis](const Trigrade& g) {
        auto it = basis.find(g);
        return it == basis.end() ? std::vector<Key>{} : it->second;
    };
    spec.diff = [mp, b](const Key& key, const Trigrade&) {
        Key mk = detail::head(key, 4);
        Combination out;
        const OpModule& M = *mp;
        if (key[4] == 0) {
            detail::push_lifted(out, apply_op(M.d, mk), {0}, Q(1));
            detail::push_lifted(out, apply_op(M.op("delta"), mk), {0}, Q(1));
            detail::push_lifted(out, apply_op(M.op("x"), mk), {1}, Q(1));
        } else {
            detail::push_lifted(out, detail::apply_alpha(M, b, mk), {0}, Q(-1));
            detail::push_lifted(out, apply_op(M.d, mk), {1}, Q(-1));
            detail::push_lifted(out, apply_op(M.op("delta"), mk), {1}, Q(-1));
        }
        return out;
    };
    return build_keyed(spec).complex;
}

/** un of a D-side module that is free over k[t] on finitely many generators: substitute t = 1. */
inline GradedComplex un_presentation(const ModulePresentation& p) {
    if (!is_dual_side(p.algebra)) throw std::invalid_argument("un expects a D-side presentation");
    int ti = p.algebra.index("t");
    for (int v : p.free_vars)
        if (v != ti) throw std::invalid_argument("un needs a module free over k[t] only");
    check_presentation(p);
    int dlo = 0, dhi = 0, amax = 0;
    for (auto& g : p.gens) {
        dlo = std::min(dlo, g.grade.deg);
        dhi = std::max(dhi, g.grade.deg);
        amax = std::max(amax, g.grade.aux);
    }
    auto space = std::make_shared<GradedSpace>();
    std::map<Trigrade, std::vector<int>> at;
    for (int i = 0; i < static_cast<int>(p.gens.size()); ++i) at[{p.gens[i].grade.deg, 0, p.gens[i].grade.aux}].push_back(i);
    std::map<int, std::pair<Trigrade, int>> pos;
    for (auto& [g, v] : at) {
        std::vector<std::string> labels;
        for (std::size_t k = 0; k < v.size(); ++k) {
            pos[v[k]] = {g, static_cast<int>(k)};
            labels.push_back(p.gens[v[k]].name);
        }
        space->set(g, Piece{static_cast<int>(v.size()), labels});
    }
    std::map<Trigrade, std::vector<SparseMatrix::Entry>> trip;
    for (auto& [src, img] : p.diff) {
        auto [gs, cs] = pos.at(src);
        for (auto& t : img) {
            Q c(0);
            for (auto& [mono, v] : t.coef) c += v;  // every monomial is a power of t
            if (!c.is_zero()) trip[gs].push_back({pos.at(t.gen).second, cs, c});
        }
    }
    GradedMap d{space, space, kDiffShift, {}};
    for (auto& [g, t] : trip) d.set_block(g, SparseMatrix::from_triplets(space->dim(g + kDiffShift), space->dim(g), t));
    return GradedComplex{space, d, Region{Window{dlo - 1, dhi + 1, 0, 0, amax}, 0}, true};
}

/** Shifts every piece of a complex by a fixed trigrade offset (weight twists). */
inline GradedComplex regrade(const GradedComplex& c, const Trigrade& offset) {
    auto space = std::make_shared<GradedSpace>();
    for (auto& [g, p] : c.space->pieces()) space->set(g + offset, p);
    GradedMap d{space, space, kDiffShift, {}};
    for (auto& [g, b] : c.d.blocks) d.blocks[g + offset] = b;
    Window w = c.region.box;
    w.wt_min += offset.wt;
    w.wt_max += offset.wt;
    w.deg_min += offset.deg + c.region.shear * offset.wt;
    w.deg_max += offset.deg + c.region.shear * offset.wt;
    return GradedComplex{space, d, Region{w, c.region.shear}, c.complete};
}

/** gr(N) = N / t N in the derived sense: the cone of t : N<-1> -> N. */
inline GradedComplex gr(const OpModule& n) {
    const GradedMap& t = n.op("t");
    GradedComplex src = regrade(n.complex(), t.shift);
    GradedMap f{src.space, n.space, {0, 0, 0}, {}};
    for (auto& [g, b] : t.blocks) f.blocks[g + t.shift] = b;
    return cone(src, n.complex(), f);
}

// ---------------------------------------------------------------------------------------------
// k[t]-tower diagnostics on cohomology

struct TowerProfile {
    std::map<Trigrade, int> generators;  // dim H_g / t H_{g - |t|}
    std::map<Trigrade, int> torsion;     // dim ker(t : H_g -> H_{g + |t|})
    int total_generators() const {
        int s = 0;
        for (auto& [g, v] : generators) s += v;
        return s;
    }
    int total_torsion() const {
        int s = 0;
        for (auto& [g, v] : torsion) s += v;
        return s;
    }
};

namespace detail {
inline std::vector<std::vector<Q>> columns(const SparseMatrix* m, int rows, int cols) {
    std::vector<std::vector<Q>> out(cols, std::vector<Q>(rows, Q(0)));
    if (m)
        for (auto& e : m->entries()) out[e.col][e.row] = e.val;
    return out;
}
inline int span_rank(const std::vector<std::vector<Q>>& vecs, int len) {
    if (vecs.empty() || len == 0) return 0;
    // vectors as rows
    return dense_rank(vecs, len);
}
inline std::vector<std::vector<Q>> apply_to(const SparseMatrix* m, int rows, const std::vector<std::vector<Q>>& vs) {
    std::vector<std::vector<Q>> out;
    for (auto& v : vs) {
        std::vector<Q> r(rows, Q(0));
        if (m)
            for (auto& e : m->entries()) r[e.row] += e.val * v[e.col];
        out.push_back(std::move(r));
    }
    return out;
}
} // namespace detail

/**
 * Minimal k[t]-generators and t-torsion of the cohomology of a D-side module, per piece.
 * Pieces whose t-neighbours leave the region are skipped (they are not certified).
 */
inline TowerProfile tower_profile(const OpModule& n) {
    TowerProfile out;
    const GradedMap& t = n.op("t");
    auto cycles = [&](const Trigrade& g) {
        int dim = n.space->dim(g);
        const SparseMatrix* d = n.d.block(g);
        if (!d) {
            std::vector<std::vector<Q>> id;
            for (int i = 0; i < dim; ++i) {
                std::vector<Q> v(dim, Q(0));
                v[i] = 1;
                id.push_back(v);
            }
            return id;
        }
        return kernel_basis(*d);
    };
    auto boundaries = [&](const Trigrade& g) {
        Trigrade prev = g - kDiffShift;
        return detail::columns(n.d.block(prev), n.space->dim(g), n.space->dim(prev));
    };
    for (auto& [g, p] : n.space->pieces()) {
        if (!n.region.certified(g)) continue;
        auto z = cycles(g);
        auto bnd = boundaries(g);
        int rb = detail::span_rank(bnd, p.dim);
        int hdim = static_cast<int>(z.size()) - rb;
        if (hdim == 0) continue;
        Trigrade below = g - t.shift;
        if (n.region.certified(below)) {
            auto zb = cycles(below);
            auto tz = detail::apply_to(t.block(below), p.dim, zb);
            auto all = bnd;
            all.insert(all.end(), tz.begin(), tz.end());
            int gens = hdim - (detail::span_rank(all, p.dim) - rb);
            if (gens) out.generators[g] = gens;
        }
        Trigrade above = g + t.shift;
        if (n.region.certified(above)) {
            int da = n.space->dim(above);
            auto ba = boundaries(above);
            int rba = detail::span_rank(ba, da);
            auto tz = detail::apply_to(t.block(g), da, z);
            auto all = ba;
            all.insert(all.end(), tz.begin(), tz.end());
            int image = detail::span_rank(all, da) - rba;  // dim t(H_g) in H_above
            if (hdim - image) out.torsion[g] = hdim - image;
        }
    }
    return out;
}

} // namespace kd
