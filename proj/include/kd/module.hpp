#pragma once

#include "kd/algebra.hpp"
#include "kd/keyed.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace kd {

/// Polynomial coefficient (in the acting algebra) times a module generator.
struct ModuleTerm {
    Poly coef;
    int gen;
};
using ModuleVector = std::vector<ModuleTerm>;

struct ModuleGenerator {
    std::string name;
    Trigrade grade;
};

/**
 * @brief Module presentation over a graded-commutative block algebra.
 *
 * The even generators listed in free_vars act freely (the module is free over their polynomial
 * ring on the declared generators); every other algebra generator acts through the declared
 * images of the module generators, extended linearly over the free part. With no free
 * variables this is simply a finite-dimensional module given by matrices.
 */
struct ModulePresentation {
    std::string name;
    Algebra algebra;
    std::vector<ModuleGenerator> gens;
    std::vector<int> free_vars;
    std::map<int, std::map<int, ModuleVector>> act;  // algebra generator -> module generator -> image
    std::map<int, ModuleVector> diff;

    int gen_index(const std::string& n) const {
        for (int i = 0; i < static_cast<int>(gens.size()); ++i)
            if (gens[i].name == n) return i;
        throw std::invalid_argument("unknown module generator '" + n + "'");
    }
    bool is_free(int alg_gen) const {
        return std::find(free_vars.begin(), free_vars.end(), alg_gen) != free_vars.end();
    }
    /// Trigrade of a module term, or nullopt for a zero/inhomogeneous coefficient.
    std::optional<Trigrade> term_grade(const ModuleTerm& t) const {
        auto g = algebra.homogeneous_grade(t.coef);
        if (!g) return std::nullopt;
        return *g + gens.at(t.gen).grade;
    }
};

/** @brief Materialized module: pieces in a region, differential and one operator per algebra generator. */
struct OpModule {
    std::string name;
    Algebra algebra;
    SpacePtr space;
    Region region;
    GradedMap d;
    std::map<std::string, GradedMap> ops;

    GradedComplex complex() const { return GradedComplex{space, d, region, false}; }
    const GradedMap& op(const std::string& n) const {
        auto it = ops.find(n);
        if (it == ops.end()) throw std::invalid_argument("module has no operator '" + n + "'");
        return it->second;
    }
    bool has_op(const std::string& n) const { return ops.count(n) != 0; }
};

/// Basis key of a materialized module element: (deg, wt, aux, index within the piece).
inline Key element_key(const Trigrade& g, int idx) { return {g.deg, g.wt, g.aux, idx}; }
inline Trigrade key_grade(const Key& k) { return {k[0], k[1], k[2]}; }

/** Column `col` of the block of m at g, as (row, coefficient) pairs in the piece g + shift. */
inline std::vector<std::pair<int, Q>> apply_column(const GradedMap& m, const Trigrade& g, int col) {
    std::vector<std::pair<int, Q>> out;
    const SparseMatrix* b = m.block(g);
    if (!b) return out;
    for (const auto& e : b->entries())
        if (e.col == col) out.push_back({e.row, e.val});
    return out;
}

/** Image of one module element under an operator, as element keys. */
inline Combination apply_op(const GradedMap& m, const Key& k) {
    Trigrade g = key_grade(k);
    Combination out;
    for (auto& [r, c] : apply_column(m, g, k[3])) out.push_back({element_key(g + m.shift, r), c});
    return out;
}

inline GradedMap scale_map(const GradedMap& m, const Q& s) {
    GradedMap out{m.source, m.target, m.shift, {}};
    for (const auto& [g, b] : m.blocks) out.set_block(g, b.scaled(s));
    return out;
}

inline GradedMap add_maps(const GradedMap& a, const GradedMap& b) { return subtract(a, scale_map(b, Q(-1))); }

inline GradedMap zero_map(const SpacePtr& s, const Trigrade& shift) { return GradedMap{s, s, shift, {}}; }

/** Operator of a polynomial in the algebra generators: each monomial acts as its generator word, rightmost first. */
inline GradedMap polynomial_action(const OpModule& m, const Poly& p, const Trigrade& shift) {
    GradedMap total = zero_map(m.space, shift);
    for (const auto& [mono, c] : p) {
        GradedMap cur = identity_map(m.space);
        auto word = m.algebra.word(mono);
        for (auto it = word.rbegin(); it != word.rend(); ++it) cur = compose(m.op(m.algebra.gen(*it).name), cur);
        total = add_maps(total, scale_map(cur, c));
    }
    return total;
}

// ---------------------------------------------------------------------------------------------
// Realization of presentations

namespace detail {
/// Monomials in the free variables only, of the given trigrade.
inline std::vector<Monomial> free_monomials(const ModulePresentation& p, const Trigrade& g) {
    std::vector<Monomial> out;
    if (p.free_vars.empty()) {
        if (g == Trigrade{0, 0, 0}) out.push_back(p.algebra.one());
        return out;
    }
    std::vector<Generator> gens;
    for (int v : p.free_vars) gens.push_back(p.algebra.gen(v));
    Algebra sub = make_sym(gens);
    for (auto& m : enumerate_monomials(sub, g)) {
        Monomial full = p.algebra.one();
        for (std::size_t i = 0; i < p.free_vars.size(); ++i) full[p.free_vars[i]] = m[i];
        out.push_back(full);
    }
    return out;
}

inline Key presentation_key(const Monomial& m, int gen) {
    Key k(m.begin(), m.end());
    k.push_back(gen);
    return k;
}
} // namespace detail

struct InvalidModule : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/** Checks generator names, declared images and homogeneity. Throws InvalidModule naming the offending trigrades. */
inline void check_presentation(const ModulePresentation& p) {
    std::set<std::string> names;
    for (auto& g : p.gens)
        if (!names.insert(g.name).second) throw InvalidModule("duplicate module generator '" + g.name + "'");
    for (int v : p.free_vars)
        if (p.algebra.gen(v).odd()) throw InvalidModule("odd generator cannot act freely");
    auto check = [&](const ModuleVector& img, const Trigrade& want, const std::string& what) {
        for (auto& t : img) {
            if (t.gen < 0 || t.gen >= static_cast<int>(p.gens.size())) throw InvalidModule(what + ": bad generator");
            for (auto& [mono, c] : t.coef) {
                for (int i = 0; i < p.algebra.size(); ++i)
                    if (mono[i] != 0 && !p.is_free(i))
                        throw InvalidModule(what + ": coefficient uses non-free generator '" + p.algebra.gen(i).name +
                                            "'");
                Trigrade got = p.algebra.grade(mono) + p.gens[t.gen].grade;
                if (!(got == want))
                    throw InvalidModule(what + " is not homogeneous: expected " + to_string(want) + ", term has " +
                                        to_string(got));
            }
        }
    };
    for (auto& [gi, imgs] : p.act) {
        if (p.is_free(gi)) throw InvalidModule("free generator '" + p.algebra.gen(gi).name + "' cannot have an action");
        for (auto& [mi, img] : imgs)
            check(img, p.gens.at(mi).grade + p.algebra.gen(gi).grade,
                  "action of " + p.algebra.gen(gi).name + " on " + p.gens.at(mi).name);
    }
    for (auto& [mi, img] : p.diff) check(img, p.gens.at(mi).grade + kDiffShift, "differential of " + p.gens.at(mi).name);
}

/** Expands a presentation against the free monomials on a window. Maps leaving the window are truncated. */
inline OpModule realize(const ModulePresentation& p, const Window& w) {
    check_presentation(p);
    auto p_ptr = std::make_shared<ModulePresentation>(p);
    KeyedSpec spec;
    spec.region = Region{w, 0};
    spec.basis = [p_ptr](const Trigrade& g) {
        std::vector<Key> out;
        for (int i = 0; i < static_cast<int>(p_ptr->gens.size()); ++i)
            for (auto& m : detail::free_monomials(*p_ptr, g - p_ptr->gens[i].grade))
                out.push_back(detail::presentation_key(m, i));
        return out;
    };
    const int na = p.algebra.size();
    // image of (monomial, gen) under a declared generator-level map, multiplied through by the monomial
    auto extend = [p_ptr, na](const Key& k, const ModuleVector& img) {
        Monomial m(k.begin(), k.begin() + na);
        Combination out;
        for (auto& t : img)
            for (auto& [cm, c] : t.coef) {
                Monomial prod = m;
                for (int i = 0; i < na; ++i) prod[i] += cm[i];
                out.push_back({detail::presentation_key(prod, t.gen), c});
            }
        return out;
    };
    spec.diff = [p_ptr, extend, na](const Key& k, const Trigrade&) {
        auto it = p_ptr->diff.find(k[na]);
        if (it == p_ptr->diff.end()) return Combination{};
        return extend(k, it->second);
    };
    spec.label = [p_ptr, na](const Key& k) {
        Monomial m(k.begin(), k.begin() + na);
        std::string c = p_ptr->algebra.format(m);
        return (c == "1" ? "" : c + "*") + p_ptr->gens[k[na]].name;
    };
    KeyedComplex kc = build_keyed(spec);
    OpModule out;
    out.name = p.name;
    out.algebra = p.algebra;
    out.space = kc.complex.space;
    out.region = kc.complex.region;
    out.d = kc.complex.d;
    auto restrict_to_window = [&kc](Combination c, const Trigrade& at) {
        Combination kept;
        for (auto& t : c)
            if (kc.find(at, t.key) >= 0) kept.push_back(t);
        return kept;
    };
    for (int gi = 0; gi < na; ++gi) {
        const Generator& ag = p.algebra.gen(gi);
        std::function<Combination(const Key&, const Trigrade&)> image;
        if (p.is_free(gi)) {
            image = [gi, na, &restrict_to_window, &ag](const Key& k, const Trigrade& g) {
                Key r = k;
                r[gi] += 1;
                (void)na;
                return restrict_to_window({{r, Q(1)}}, g + ag.grade);
            };
        } else {
            image = [p_ptr, gi, na, extend, &restrict_to_window, &ag](const Key& k, const Trigrade& g) {
                auto it = p_ptr->act.find(gi);
                if (it == p_ptr->act.end()) return Combination{};
                auto jt = it->second.find(k[na]);
                if (jt == it->second.end()) return Combination{};
                // odd generators pass even free monomials without sign
                return restrict_to_window(extend(k, jt->second), g + ag.grade);
            };
        }
        out.ops[ag.name] = build_keyed_operator(kc, ag.grade, image);
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Explicit modules built directly from basis elements

/**
 * @brief Builder for modules given element by element (possibly infinite families truncated to a window).
 * Elements are named, placed at a trigrade, and operators are listed as sparse images.
 */
class ExplicitModuleBuilder {
public:
    ExplicitModuleBuilder(std::string name, Algebra a, Window w) : name_(std::move(name)), alg_(std::move(a)), w_(w) {}

    /// Adds an element if it lies in the window; returns false otherwise.
    bool add(const std::string& label, const Trigrade& g) {
        if (!w_.contains(g)) return false;
        auto& v = elems_[g];
        index_[label] = {g, static_cast<int>(v.size())};
        v.push_back(label);
        return true;
    }
    bool has(const std::string& label) const { return index_.count(label) != 0; }
    /// op(src) += coef * tgt; silently dropped when either element is outside the window.
    void set(const std::string& op, const std::string& src, const std::string& tgt, const Q& coef) {
        if (!has(src) || !has(tgt) || coef.is_zero()) return;
        entries_[op].push_back({src, tgt, coef});
    }

    OpModule build() const {
        auto space = std::make_shared<GradedSpace>();
        for (auto& [g, labels] : elems_) space->set(g, Piece{static_cast<int>(labels.size()), labels});
        OpModule m;
        m.name = name_;
        m.algebra = alg_;
        m.space = space;
        m.region = Region{w_, 0};
        auto make = [&](const std::string& op, const Trigrade& shift) {
            std::map<Trigrade, std::vector<SparseMatrix::Entry>> trip;
            auto it = entries_.find(op);
            if (it != entries_.end())
                for (auto& e : it->second) {
                    auto [gs, cs] = index_.at(e.src);
                    auto [gt, ct] = index_.at(e.tgt);
                    if (!(gt == gs + shift))
                        throw InvalidModule("operator " + op + " maps " + e.src + " " + to_string(gs) + " to " + e.tgt +
                                            " " + to_string(gt) + ", expected shift " + to_string(shift));
                    trip[gs].push_back({ct, cs, e.coef});
                }
            GradedMap out{space, space, shift, {}};
            for (auto& [g, t] : trip) out.set_block(g, SparseMatrix::from_triplets(space->dim(g + shift), space->dim(g), t));
            return out;
        };
        m.d = make("d", kDiffShift);
        for (auto& gen : alg_.generators()) m.ops[gen.name] = make(gen.name, gen.grade);
        return m;
    }

private:
    struct E {
        std::string src, tgt;
        Q coef;
    };
    std::string name_;
    Algebra alg_;
    Window w_;
    std::map<Trigrade, std::vector<std::string>> elems_;
    std::map<std::string, std::pair<Trigrade, int>> index_;
    std::map<std::string, std::vector<E>> entries_;
};

// ---------------------------------------------------------------------------------------------
// Validation of the dg-module (equivariance) relations

struct ModuleCheck {
    std::string name;
    bool ok = true;
    std::vector<Trigrade> failures;
};

struct ValidationReport {
    std::vector<ModuleCheck> checks;
    bool ok() const {
        return std::all_of(checks.begin(), checks.end(), [](const ModuleCheck& c) { return c.ok; });
    }
    const ModuleCheck* find(const std::string& n) const {
        for (auto& c : checks)
            if (c.name == n) return &c;
        return nullptr;
    }
};

namespace detail {
/// Compares two maps on source pieces whose every listed intermediate/target lies inside the region.
inline ModuleCheck compare_interior(const std::string& name, const OpModule& m, const GradedMap& a, const GradedMap& b,
                                    const std::vector<std::vector<Trigrade>>& paths) {
    ModuleCheck c{name, true, {}};
    for (const auto& [g, p] : m.space->pieces()) {
        bool interior = true;
        for (auto& path : paths) {
            Trigrade cur = g;
            for (auto& s : path) {
                cur = cur + s;
                interior = interior && m.region.contains(cur);
            }
        }
        if (!interior) continue;
        const SparseMatrix* x = a.block(g);
        const SparseMatrix* y = b.block(g);
        SparseMatrix zx(m.space->dim(g + a.shift), p.dim);
        if (!((x ? *x : zx) == (y ? *y : zx))) {
            c.ok = false;
            c.failures.push_back(g);
        }
    }
    return c;
}
} // namespace detail

/**
 * Checks d^2 = 0, the graded Leibniz rule for each generator ([d, g] = action of d(g), the
 * curvature relation for the mixed operator), the presentation's commutation rules, and
 * that odd generators square to zero. Only pieces whose intermediate results stay inside the
 * materialized region are compared; truncation edges are skipped rather than reported.
 */
inline ValidationReport validate_equivariant(const OpModule& m) {
    ValidationReport rep;
    const Algebra& a = m.algebra;
    GradedMap zero = zero_map(m.space, {2, 0, 0});
    rep.checks.push_back(detail::compare_interior("d^2=0", m, compose(m.d, m.d), zero, {{kDiffShift, kDiffShift}}));
    for (int i = 0; i < a.size(); ++i) {
        const Generator& g = a.gen(i);
        const GradedMap& op = m.op(g.name);
        Trigrade sh = g.grade + kDiffShift;
        GradedMap lhs = subtract(compose(m.d, op), scale_map(compose(op, m.d), g.odd() ? Q(-1) : Q(1)));
        GradedMap rhs = polynomial_action(m, a.differential(i), sh);
        std::string label = a.differential(i).empty() ? "chain map " + g.name : "curvature [d," + g.name + "]";
        std::vector<std::vector<Trigrade>> paths{{g.grade, kDiffShift}, {kDiffShift, g.grade}};
        // the right-hand side walks through every letter of each monomial of d(g)
        for (const auto& [mono, c] : a.differential(i)) {
            auto word = a.word(mono);
            std::vector<Trigrade> path;
            for (auto it = word.rbegin(); it != word.rend(); ++it) path.push_back(a.gen(*it).grade);
            paths.push_back(path);
        }
        rep.checks.push_back(detail::compare_interior(label, m, lhs, rhs, paths));
        if (g.odd())
            rep.checks.push_back(detail::compare_interior(g.name + "^2=0", m, compose(op, op),
                                                          zero_map(m.space, g.grade * 2), {{g.grade, g.grade}}));
    }
    for (int i = 0; i < a.size(); ++i)
        for (int j = 0; j < i; ++j) {
            auto rl = a.rule(i, j);
            const GradedMap& oi = m.op(a.gen(i).name);
            const GradedMap& oj = m.op(a.gen(j).name);
            Trigrade sh = a.gen(i).grade + a.gen(j).grade;
            GradedMap lhs = compose(oi, oj);
            GradedMap rhs = add_maps(scale_map(compose(oj, oi), Q(rl.sign)), polynomial_action(m, rl.correction, sh));
            rep.checks.push_back(detail::compare_interior("relation " + a.gen(i).name + "*" + a.gen(j).name, m, lhs,
                                                          rhs, {{a.gen(j).grade, a.gen(i).grade},
                                                                {a.gen(i).grade, a.gen(j).grade}}));
        }
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Shearing

/** Regrades every piece (d, w, a) -> (d - n w, w, a); matrices are unchanged. */
inline OpModule shear(const OpModule& m, int n) {
    GradedComplex c = shear(m.complex(), n);
    OpModule out;
    out.name = m.name;
    out.algebra = m.algebra;
    out.space = c.space;
    out.region = c.region;
    out.d = c.d;
    for (auto& [name, op] : m.ops) out.ops[name] = shear(op, n, c.space, c.space);
    return out;
}

/// Tate shearing: weight k moves to degree 2k.
inline OpModule tate_shear(const OpModule& m) { return shear(m, -2); }
inline OpModule tate_unshear(const OpModule& m) { return shear(m, 2); }
inline Trigrade shear_grade(const Trigrade& g, int n) { return {g.deg - n * g.wt, g.wt, g.aux}; }

/** Index-level equality of two modules: same pieces, same differential and operator blocks. */
inline bool same_module(const OpModule& a, const OpModule& b) {
    if (a.space->pieces().size() != b.space->pieces().size()) return false;
    for (auto& [g, p] : a.space->pieces())
        if (b.space->dim(g) != p.dim) return false;
    auto same_map = [](const GradedMap& x, const GradedMap& y) {
        if (!(x.shift == y.shift) || x.blocks.size() != y.blocks.size()) return false;
        for (auto& [g, m] : x.blocks) {
            const SparseMatrix* o = y.block(g);
            if (!o || !(*o == m)) return false;
        }
        return true;
    };
    if (!same_map(a.d, b.d) || a.ops.size() != b.ops.size()) return false;
    for (auto& [n, op] : a.ops)
        if (!b.has_op(n) || !same_map(op, b.op(n))) return false;
    return true;
}

} // namespace kd
