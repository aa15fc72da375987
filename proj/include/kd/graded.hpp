#pragma once

#include "kd/grade.hpp"
#include "kd/parallel.hpp"
#include "kd/sparse.hpp"

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace kd {

/**
 * @brief Materialized region: a window box viewed through an accumulated shear.
 *
 * A trigrade p lives in the region when (p.deg + shear*p.wt, p.wt, p.aux) lies in the box.
 * Shearing never changes which pieces were computed, only where they sit.
 */
struct Region {
    Window box;
    int shear = 0;

    bool operator==(const Region&) const = default;

    Trigrade to_box(const Trigrade& p) const { return {p.deg + shear * p.wt, p.wt, p.aux}; }
    bool contains(const Trigrade& p) const { return box.contains(to_box(p)); }
    bool certified(const Trigrade& p) const { return box.certified(to_box(p)); }

    std::vector<Trigrade> trigrades() const {
        std::vector<Trigrade> out;
        for (int w = box.wt_min; w <= box.wt_max; ++w)
            for (int a = 0; a <= box.aux_max; ++a)
                for (int d = box.deg_min; d <= box.deg_max; ++d) out.push_back({d - shear * w, w, a});
        return out;
    }
};

struct Piece {
    int dim = 0;
    std::vector<std::string> labels;  // empty, or one label per basis vector
};

/** @brief Finite-dimensional rational pieces indexed by trigrade; zero pieces are not stored. */
class GradedSpace {
public:
    void set(const Trigrade& g, Piece p) {
        if (!p.labels.empty() && static_cast<int>(p.labels.size()) != p.dim)
            throw std::invalid_argument("label count differs from piece dimension at " + to_string(g));
        if (p.dim < 0) throw std::invalid_argument("negative dimension");
        if (p.dim == 0) pieces_.erase(g);
        else pieces_[g] = std::move(p);
    }
    void set_dim(const Trigrade& g, int dim) { set(g, Piece{dim, {}}); }
    int dim(const Trigrade& g) const {
        auto it = pieces_.find(g);
        return it == pieces_.end() ? 0 : it->second.dim;
    }
    const Piece* piece(const Trigrade& g) const {
        auto it = pieces_.find(g);
        return it == pieces_.end() ? nullptr : &it->second;
    }
    const std::map<Trigrade, Piece>& pieces() const { return pieces_; }
    long total_dim() const {
        long s = 0;
        for (const auto& [g, p] : pieces_) s += p.dim;
        return s;
    }
    bool empty() const { return pieces_.empty(); }

private:
    std::map<Trigrade, Piece> pieces_;
};

using SpacePtr = std::shared_ptr<const GradedSpace>;

/** @brief Homogeneous linear map: one sparse block per source trigrade, absent means zero. */
struct GradedMap {
    SpacePtr source;
    SpacePtr target;
    Trigrade shift;
    std::map<Trigrade, SparseMatrix> blocks;

    const SparseMatrix* block(const Trigrade& g) const {
        auto it = blocks.find(g);
        return it == blocks.end() ? nullptr : &it->second;
    }

    void set_block(const Trigrade& g, SparseMatrix m) {
        if (m.is_zero()) blocks.erase(g);
        else blocks[g] = std::move(m);
    }

    void validate() const {
        for (const auto& [g, m] : blocks) {
            if (m.cols() != source->dim(g) || m.rows() != target->dim(g + shift))
                throw std::invalid_argument("block at " + to_string(g) + " has shape " + std::to_string(m.rows()) +
                                            "x" + std::to_string(m.cols()) + ", pieces need " +
                                            std::to_string(target->dim(g + shift)) + "x" +
                                            std::to_string(source->dim(g)));
        }
    }
};

inline GradedMap identity_map(const SpacePtr& s) {
    GradedMap m{s, s, {0, 0, 0}, {}};
    for (const auto& [g, p] : s->pieces()) m.blocks[g] = SparseMatrix::identity(p.dim);
    return m;
}

/** f after g. Shared trigrades must agree in dimension. */
inline GradedMap compose(const GradedMap& f, const GradedMap& g) {
    GradedMap out{g.source, f.target, g.shift + f.shift, {}};
    for (const auto& [s, mg] : g.blocks) {
        Trigrade mid = s + g.shift;
        if (g.target->dim(mid) != f.source->dim(mid))
            throw std::invalid_argument("compose: dimension mismatch at " + to_string(mid));
        const SparseMatrix* mf = f.block(mid);
        if (!mf) continue;
        out.set_block(s, (*mf) * mg);
    }
    return out;
}

/** Blockwise difference a - b (same source, target and shift). */
inline GradedMap subtract(const GradedMap& a, const GradedMap& b) {
    if (!(a.shift == b.shift)) throw std::invalid_argument("subtract: shifts differ");
    GradedMap out = a;
    for (const auto& [s, mb] : b.blocks) {
        auto it = out.blocks.find(s);
        if (it == out.blocks.end()) out.set_block(s, mb.scaled(Q(-1)));
        else out.set_block(s, it->second - mb);
    }
    return out;
}

inline bool is_zero_map(const GradedMap& m) {
    for (const auto& [s, b] : m.blocks)
        if (!b.is_zero()) return false;
    return true;
}

/** @brief Trigraded complex with a (+1,0,0) differential, materialized on a region. */
struct GradedComplex {
    SpacePtr space;
    GradedMap d;
    Region region;
    /// True when every nonzero piece of the underlying (untruncated) object lies in the region.
    bool complete = false;

    void validate() const {
        if (!(d.shift == kDiffShift)) throw std::invalid_argument("differential must have shift (+1,0,0)");
        d.validate();
    }
};

inline GradedComplex zero_complex(const Window& w) {
    auto s = std::make_shared<GradedSpace>();
    return GradedComplex{s, GradedMap{s, s, kDiffShift, {}}, Region{w, 0}, true};
}

/** First trigrade where d∘d is nonzero, or nullopt. */
inline std::optional<Trigrade> d_squared_failure(const GradedComplex& c) {
    for (const auto& [g, m] : c.d.blocks) {
        const SparseMatrix* next = c.d.block(g + kDiffShift);
        if (next && !((*next) * m).is_zero()) return g;
    }
    return std::nullopt;
}

struct MalformedComplex : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** @brief Cohomology dimension per trigrade plus whether that number is a certificate. */
struct CohomologyReport {
    struct Entry {
        int dim = 0;
        int chain_dim = 0;
        bool certified = false;
    };
    std::map<Trigrade, Entry> pieces;  // every chain-nonzero trigrade of the query window

    int dim(const Trigrade& g) const {
        auto it = pieces.find(g);
        return it == pieces.end() ? 0 : it->second.dim;
    }
    /// Certified pieces with nonzero cohomology.
    std::vector<Trigrade> nonzero_certified() const {
        std::vector<Trigrade> out;
        for (const auto& [g, e] : pieces)
            if (e.certified && e.dim != 0) out.push_back(g);
        return out;
    }
    bool acyclic_on_certified() const { return nonzero_certified().empty(); }
    int certified_count() const {
        int n = 0;
        for (const auto& [g, e] : pieces) n += e.certified ? 1 : 0;
        return n;
    }
};

inline std::map<Trigrade, int> block_ranks(const GradedMap& m) {
    std::vector<const std::pair<const Trigrade, SparseMatrix>*> items;
    for (const auto& kv : m.blocks) items.push_back(&kv);
    std::vector<int> ranks(items.size());
    parallel_for(items.size(), [&](std::size_t i) { ranks[i] = rank(items[i]->second); });
    std::map<Trigrade, int> out;
    for (std::size_t i = 0; i < items.size(); ++i) out[items[i]->first] = ranks[i];
    return out;
}

/**
 * dim ker - rank(incoming) per trigrade of the query window. A piece is certified when both
 * degree neighbours lie in the query window and in the materialized region.
 */
inline CohomologyReport cohomology(const GradedComplex& c, const Window& w) {
    w.validate();
    if (w.deg_max - w.deg_min < 2)
        throw std::invalid_argument("window too small to certify any interior piece (needs three degrees)");
    if (auto bad = d_squared_failure(c))
        throw MalformedComplex("d^2 != 0 at " + to_string(*bad));
    auto ranks = block_ranks(c.d);
    CohomologyReport rep;
    for (const auto& [g, p] : c.space->pieces()) {
        if (!w.contains(g)) continue;
        int out_rank = ranks.count(g) ? ranks[g] : 0;
        Trigrade prev = g - kDiffShift;
        int in_rank = ranks.count(prev) ? ranks[prev] : 0;
        CohomologyReport::Entry e;
        e.chain_dim = p.dim;
        e.dim = p.dim - out_rank - in_rank;
        e.certified = w.certified(g) && c.region.certified(g);
        rep.pieces[g] = e;
    }
    return rep;
}

/** Cohomology over the complex's own materialized region (works for sheared regions too). */
inline CohomologyReport cohomology(const GradedComplex& c) {
    if (c.region.box.deg_max - c.region.box.deg_min < 2)
        throw std::invalid_argument("window too small to certify any interior piece (needs three degrees)");
    if (auto bad = d_squared_failure(c)) throw MalformedComplex("d^2 != 0 at " + to_string(*bad));
    auto ranks = block_ranks(c.d);
    CohomologyReport rep;
    for (const auto& [g, p] : c.space->pieces()) {
        if (!c.region.contains(g)) continue;
        int out_rank = ranks.count(g) ? ranks[g] : 0;
        Trigrade prev = g - kDiffShift;
        int in_rank = ranks.count(prev) ? ranks[prev] : 0;
        rep.pieces[g] = {p.dim - out_rank - in_rank, p.dim, c.region.certified(g)};
    }
    return rep;
}

struct NotAChainMap : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** First trigrade (inside both regions' certified parts) where f d1 != d2 f. */
inline std::optional<Trigrade> chain_map_failure(const GradedComplex& a, const GradedComplex& b, const GradedMap& f) {
    GradedMap lhs = compose(f, a.d);
    GradedMap rhs = compose(b.d, f);
    GradedMap diff = subtract(lhs, rhs);
    for (const auto& [g, m] : diff.blocks) {
        if (m.is_zero()) continue;
        // Only demand commutation where every piece involved was materialized.
        if (a.region.contains(g) && a.region.contains(g + kDiffShift) && b.region.contains(g) &&
            b.region.contains(g + kDiffShift))
            return g;
    }
    return std::nullopt;
}

namespace detail {
inline std::vector<std::string> concat_labels(const Piece* a, const std::string& pa, const Piece* b,
                                              const std::string& pb) {
    std::vector<std::string> out;
    bool named = (a && !a->labels.empty()) || (b && !b->labels.empty());
    if (!named) return out;
    auto add = [&](const Piece* p, const std::string& prefix) {
        if (!p) return;
        for (int i = 0; i < p->dim; ++i)
            out.push_back(prefix + (p->labels.empty() ? std::to_string(i) : p->labels[i]));
    };
    add(a, pa);
    add(b, pb);
    return out;
}

inline Window intersect(const Window& a, const Window& b) {
    return {std::max(a.deg_min, b.deg_min), std::min(a.deg_max, b.deg_max), std::max(a.wt_min, b.wt_min),
            std::min(a.wt_max, b.wt_max), std::min(a.aux_max, b.aux_max)};
}
} // namespace detail

/**
 * Mapping cone of a degree-preserving chain map f: A -> B. The piece at degree n is
 * A^{n+1} (+) B^n and the differential is [[dA, 0], [f, -dB]].
 */
inline GradedComplex cone(const GradedComplex& a, const GradedComplex& b, const GradedMap& f) {
    if (!(f.shift == Trigrade{0, 0, 0})) throw std::invalid_argument("cone: map must preserve trigrade");
    if (a.region.shear != b.region.shear) throw std::invalid_argument("cone: complexes sheared differently");
    if (auto bad = chain_map_failure(a, b, f)) throw NotAChainMap("map does not commute with d at " + to_string(*bad));
    Window wa = a.region.box, wb = b.region.box;
    Window box = detail::intersect(Window{wa.deg_min - 1, wa.deg_max - 1, wa.wt_min, wa.wt_max, wa.aux_max}, wb);
    Region region{box, a.region.shear};
    auto space = std::make_shared<GradedSpace>();
    std::map<Trigrade, int> offset;  // dimension of the A-part at each cone trigrade
    auto collect = [&](const Trigrade& g) {
        if (!region.contains(g) || space->piece(g)) return;
        Trigrade ga = g + kDiffShift;
        const Piece* pa = a.space->piece(ga);
        const Piece* pb = b.space->piece(g);
        int da = pa ? pa->dim : 0, db = pb ? pb->dim : 0;
        if (da + db == 0) return;
        offset[g] = da;
        space->set(g, Piece{da + db, detail::concat_labels(pa, "s.", pb, "")});
    };
    for (const auto& [g, p] : a.space->pieces()) collect(g - kDiffShift);
    for (const auto& [g, p] : b.space->pieces()) collect(g);
    GradedMap d{space, space, kDiffShift, {}};
    for (const auto& [g, p] : space->pieces()) {
        Trigrade h = g + kDiffShift;
        if (!space->piece(h)) continue;
        int oa_src = offset[g], oa_tgt = offset[h];
        std::vector<SparseMatrix::Entry> t;
        Trigrade ga = g + kDiffShift;
        if (const SparseMatrix* m = a.d.block(ga))
            for (const auto& e : m->entries()) t.push_back({e.row, e.col, e.val});
        if (const SparseMatrix* m = f.block(ga))
            for (const auto& e : m->entries()) t.push_back({oa_tgt + e.row, e.col, e.val});
        if (const SparseMatrix* m = b.d.block(g))
            for (const auto& e : m->entries()) t.push_back({oa_tgt + e.row, oa_src + e.col, -e.val});
        d.set_block(g, SparseMatrix::from_triplets(space->dim(h), p.dim, std::move(t)));
    }
    GradedComplex out{space, d, region, a.complete && b.complete};
    out.validate();
    return out;
}

/** Regrading (d, w, a) -> (d - n*w, w, a); matrices are untouched. */
inline GradedComplex shear(const GradedComplex& c, int n) {
    auto move = [n](const Trigrade& g) { return Trigrade{g.deg - n * g.wt, g.wt, g.aux}; };
    auto space = std::make_shared<GradedSpace>();
    for (const auto& [g, p] : c.space->pieces()) space->set(move(g), p);
    GradedMap d{space, space, kDiffShift, {}};
    for (const auto& [g, m] : c.d.blocks) d.blocks[move(g)] = m;
    return GradedComplex{space, d, Region{c.region.box, c.region.shear + n}, c.complete};
}

inline GradedMap shear(const GradedMap& m, int n, SpacePtr source, SpacePtr target) {
    GradedMap out{std::move(source), std::move(target),
                  Trigrade{m.shift.deg - n * m.shift.wt, m.shift.wt, m.shift.aux}, {}};
    for (const auto& [g, b] : m.blocks) out.blocks[Trigrade{g.deg - n * g.wt, g.wt, g.aux}] = b;
    return out;
}

namespace detail {
/// Koszul sign (-1)^{k}.
inline Q sign(long k) { return (k % 2 == 0) ? Q(1) : Q(-1); }
inline int mod2(int k) { return ((k % 2) + 2) % 2; }
} // namespace detail

/**
 * Total tensor product. Exact only when one factor is complete and its partner holds every
 * piece the sum needs; otherwise WindowOverflow is raised instead of guessing.
 */
inline GradedComplex tensor(const GradedComplex& c1, const GradedComplex& c2, const Window& out) {
    if (!c1.complete && !c2.complete)
        throw WindowOverflow("tensor: neither factor is known to be finite; cannot certify truncation");
    const GradedComplex& fin = c1.complete ? c1 : c2;
    const GradedComplex& other = c1.complete ? c2 : c1;
    auto space = std::make_shared<GradedSpace>();
    // basis of each output piece: list of (g1, g2) pairs in deterministic order
    std::map<Trigrade, std::vector<std::pair<Trigrade, Trigrade>>> parts;
    for (const auto& [g1, p1] : c1.space->pieces())
        for (const auto& [g2, p2] : c2.space->pieces()) {
            Trigrade g = g1 + g2;
            if (out.contains(g)) parts[g].push_back({g1, g2});
        }
    // every output piece must see all of the finite factor's pieces paired with materialized partners
    if (!other.complete) {
        for (int wt = out.wt_min; wt <= out.wt_max; ++wt)
            for (int a = 0; a <= out.aux_max; ++a)
                for (int dg = out.deg_min; dg <= out.deg_max; ++dg) {
                    Trigrade g{dg, wt, a};
                    for (const auto& [gf, pf] : fin.space->pieces())
                        if (!other.region.contains(g - gf))
                            throw WindowOverflow("tensor: piece " + to_string(g) + " needs " + to_string(g - gf) +
                                                 " outside the materialized region");
                }
    }
    std::map<Trigrade, std::map<std::pair<Trigrade, Trigrade>, int>> offsets;
    for (auto& [g, list] : parts) {
        int off = 0;
        std::vector<std::string> labels;
        for (auto& pr : list) {
            offsets[g][pr] = off;
            const Piece* a = c1.space->piece(pr.first);
            const Piece* b = c2.space->piece(pr.second);
            for (int i = 0; i < a->dim; ++i)
                for (int j = 0; j < b->dim; ++j)
                    labels.push_back((a->labels.empty() ? std::to_string(i) : a->labels[i]) + "⊗" +
                                     (b->labels.empty() ? std::to_string(j) : b->labels[j]));
            off += a->dim * b->dim;
        }
        space->set(g, Piece{off, std::move(labels)});
    }
    GradedMap d{space, space, kDiffShift, {}};
    for (auto& [g, list] : parts) {
        Trigrade h = g + kDiffShift;
        if (!space->piece(h)) continue;
        std::vector<SparseMatrix::Entry> t;
        for (auto& pr : list) {
            int src_off = offsets[g][pr];
            const Piece* a = c1.space->piece(pr.first);
            const Piece* b = c2.space->piece(pr.second);
            int db = b->dim;
            // d1 (x) 1
            if (const SparseMatrix* m = c1.d.block(pr.first)) {
                auto key = std::make_pair(pr.first + kDiffShift, pr.second);
                auto it = offsets[h].find(key);
                if (it != offsets[h].end())
                    for (const auto& e : m->entries())
                        for (int j = 0; j < db; ++j)
                            t.push_back({it->second + e.row * db + j, src_off + e.col * db + j, e.val});
            }
            // (-1)^{|a|} 1 (x) d2
            if (const SparseMatrix* m = c2.d.block(pr.second)) {
                auto key = std::make_pair(pr.first, pr.second + kDiffShift);
                auto it = offsets[h].find(key);
                int db2 = c2.space->dim(pr.second + kDiffShift);
                Q s = detail::sign(pr.first.deg);
                if (it != offsets[h].end())
                    for (int i = 0; i < a->dim; ++i)
                        for (const auto& e : m->entries())
                            t.push_back({it->second + i * db2 + e.row, src_off + i * db + e.col, s * e.val});
            }
        }
        d.set_block(g, SparseMatrix::from_triplets(space->dim(h), space->dim(g), std::move(t)));
    }
    GradedComplex res{space, d, Region{out, 0}, c1.complete && c2.complete};
    res.validate();
    return res;
}

/**
 * Hom complex: piece p is the product over q of Hom(C1_q, C2_{q+p}); (Df) = d2 f - (-1)^{|f|} f d1.
 * Needs the source complete and the target materialized wherever it is paired.
 */
inline GradedComplex hom_complex(const GradedComplex& c1, const GradedComplex& c2, const Window& out) {
    if (!c1.complete) throw WindowOverflow("hom_complex: source must be finite");
    for (int wt = out.wt_min; wt <= out.wt_max; ++wt)
        for (int a = 0; a <= out.aux_max; ++a)
            for (int dg = out.deg_min; dg <= out.deg_max; ++dg)
                for (const auto& [q, pq] : c1.space->pieces()) {
                    Trigrade tgt = q + Trigrade{dg, wt, a};
                    if (!c2.region.contains(tgt) && tgt.aux >= 0)
                        throw WindowOverflow("hom_complex: target piece " + to_string(tgt) + " not materialized");
                }
    auto space = std::make_shared<GradedSpace>();
    std::map<Trigrade, std::map<Trigrade, int>> offsets;  // p -> (q -> offset); block is dim2 x dim1 row-major
    for (int wt = out.wt_min; wt <= out.wt_max; ++wt)
        for (int a = 0; a <= out.aux_max; ++a)
            for (int dg = out.deg_min; dg <= out.deg_max; ++dg) {
                Trigrade p{dg, wt, a};
                int off = 0;
                for (const auto& [q, pq] : c1.space->pieces()) {
                    int d2 = c2.space->dim(q + p);
                    if (d2 == 0) continue;
                    offsets[p][q] = off;
                    off += d2 * pq.dim;
                }
                if (off) space->set_dim(p, off);
            }
    GradedMap d{space, space, kDiffShift, {}};
    for (auto& [p, qs] : offsets) {
        Trigrade h = p + kDiffShift;
        if (!space->piece(h)) continue;
        std::vector<SparseMatrix::Entry> t;
        Q sgn = -detail::sign(p.deg);
        for (auto& [q, off] : qs) {
            int n1 = c1.space->dim(q), n2 = c2.space->dim(q + p);
            // d2 f : component q of target
            if (const SparseMatrix* m = c2.d.block(q + p)) {
                auto it = offsets[h].find(q);
                if (it != offsets[h].end())
                    for (const auto& e : m->entries())
                        for (int j = 0; j < n1; ++j)
                            t.push_back({it->second + e.row * n1 + j, off + e.col * n1 + j, e.val});
            }
            // -(-1)^{|f|} f d1 : lands in component q' with q = q' + (1,0,0)
            Trigrade qp = q - kDiffShift;
            if (const SparseMatrix* m = c1.d.block(qp)) {
                auto it = offsets[h].find(qp);
                int n1p = c1.space->dim(qp);
                if (it != offsets[h].end())
                    for (int i = 0; i < n2; ++i)
                        for (const auto& e : m->entries())
                            t.push_back({it->second + i * n1p + e.col, off + i * n1 + e.row, sgn * e.val});
            }
        }
        d.set_block(p, SparseMatrix::from_triplets(space->dim(h), space->dim(p), std::move(t)));
    }
    GradedComplex res{space, d, Region{out, 0}, false};
    res.validate();
    return res;
}

} // namespace kd
