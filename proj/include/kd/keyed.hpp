#pragma once

#include "kd/graded.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace kd {

/// Basis element of a constructed complex: an opaque integer tuple chosen by the builder.
using Key = std::vector<int>;

struct Term {
    Key key;
    Q coef;
};
using Combination = std::vector<Term>;

/**
 * @brief A complex together with the keyed basis it was assembled from, so that chain maps
 * between constructed complexes can be written on basis keys instead of raw indices.
 */
struct KeyedComplex {
    GradedComplex complex;
    std::map<Trigrade, std::vector<Key>> basis;
    std::map<Trigrade, std::map<Key, int>> index;

    int find(const Trigrade& g, const Key& k) const {
        auto it = index.find(g);
        if (it == index.end()) return -1;
        auto jt = it->second.find(k);
        return jt == it->second.end() ? -1 : jt->second;
    }
    const std::vector<Key>& keys(const Trigrade& g) const {
        static const std::vector<Key> none;
        auto it = basis.find(g);
        return it == basis.end() ? none : it->second;
    }
};

struct KeyedSpec {
    Region region;
    /// Basis keys of one trigrade (only called for trigrades inside the region).
    std::function<std::vector<Key>(const Trigrade&)> basis;
    /// Differential of a basis element; every term must live one degree up.
    std::function<Combination(const Key&, const Trigrade&)> diff;
    std::function<std::string(const Key&)> label;
    bool complete = false;
};

namespace detail {
/// Sparse block from a keyed image function; terms landing outside the known target keys are errors.
inline SparseMatrix keyed_block(const std::vector<Key>& src, const std::map<Key, int>& tgt_index, int tgt_dim,
                                const std::function<Combination(const Key&)>& image, const Trigrade& where) {
    std::vector<SparseMatrix::Entry> t;
    for (int c = 0; c < static_cast<int>(src.size()); ++c)
        for (auto& term : image(src[c])) {
            if (term.coef.is_zero()) continue;
            auto it = tgt_index.find(term.key);
            if (it == tgt_index.end())
                throw std::logic_error("constructed map leaves the target basis at " + to_string(where));
            t.push_back({it->second, c, term.coef});
        }
    return SparseMatrix::from_triplets(tgt_dim, static_cast<int>(src.size()), std::move(t));
}
} // namespace detail

/** Materializes a keyed description on its region. Blocks are built in parallel per trigrade. */
inline KeyedComplex build_keyed(const KeyedSpec& spec) {
    KeyedComplex out;
    auto grades = spec.region.trigrades();
    std::vector<std::vector<Key>> bases(grades.size());
    parallel_for(grades.size(), [&](std::size_t i) { bases[i] = spec.basis(grades[i]); });
    auto space = std::make_shared<GradedSpace>();
    for (std::size_t i = 0; i < grades.size(); ++i) {
        if (bases[i].empty()) continue;
        const Trigrade& g = grades[i];
        auto& idx = out.index[g];
        std::vector<std::string> labels;
        for (int k = 0; k < static_cast<int>(bases[i].size()); ++k) {
            if (!idx.emplace(bases[i][k], k).second) throw std::logic_error("duplicate basis key at " + to_string(g));
            if (spec.label) labels.push_back(spec.label(bases[i][k]));
        }
        space->set(g, Piece{static_cast<int>(bases[i].size()), std::move(labels)});
        out.basis[g] = std::move(bases[i]);
    }
    std::vector<Trigrade> sources;
    for (const auto& [g, b] : out.basis)
        if (out.basis.count(g + kDiffShift)) sources.push_back(g);
    std::vector<SparseMatrix> blocks(sources.size());
    parallel_for(sources.size(), [&](std::size_t i) {
        const Trigrade& g = sources[i];
        Trigrade h = g + kDiffShift;
        blocks[i] = detail::keyed_block(out.basis.at(g), out.index.at(h), static_cast<int>(out.basis.at(h).size()),
                                        [&](const Key& k) { return spec.diff(k, g); }, g);
    });
    GradedMap d{space, space, kDiffShift, {}};
    for (std::size_t i = 0; i < sources.size(); ++i) d.set_block(sources[i], std::move(blocks[i]));
    out.complex = GradedComplex{space, std::move(d), spec.region, spec.complete};
    out.complex.validate();
    return out;
}

/**
 * Degree-preserving map between keyed complexes given on basis keys. Source pieces whose
 * target piece was not materialized are skipped; everything else must resolve exactly.
 */
inline GradedMap build_keyed_map(const KeyedComplex& src, const KeyedComplex& tgt,
                                 const std::function<Combination(const Key&, const Trigrade&)>& image) {
    GradedMap f{src.complex.space, tgt.complex.space, {0, 0, 0}, {}};
    std::vector<Trigrade> gs;
    for (const auto& [g, b] : src.basis)
        if (tgt.complex.region.contains(g)) gs.push_back(g);
    std::vector<SparseMatrix> blocks(gs.size());
    parallel_for(gs.size(), [&](std::size_t i) {
        const Trigrade& g = gs[i];
        static const std::map<Key, int> empty;
        auto it = tgt.index.find(g);
        const auto& tidx = it == tgt.index.end() ? empty : it->second;
        blocks[i] = detail::keyed_block(src.basis.at(g), tidx, static_cast<int>(tidx.size()),
                                        [&](const Key& k) { return image(k, g); }, g);
    });
    for (std::size_t i = 0; i < gs.size(); ++i) f.set_block(gs[i], std::move(blocks[i]));
    return f;
}

/** Keyed endomorphism of arbitrary shift (module operators such as x, t or h). */
inline GradedMap build_keyed_operator(const KeyedComplex& c, const Trigrade& shift,
                                      const std::function<Combination(const Key&, const Trigrade&)>& image) {
    GradedMap f{c.complex.space, c.complex.space, shift, {}};
    for (const auto& [g, keys] : c.basis) {
        Trigrade h = g + shift;
        auto it = c.index.find(h);
        if (it == c.index.end()) {
            // The image must vanish or leave the region; anything else is a construction bug.
            if (c.complex.region.contains(h))
                for (const auto& k : keys)
                    for (const auto& term : image(k, g))
                        if (!term.coef.is_zero())
                            throw std::logic_error("operator image outside basis at " + to_string(h));
            continue;
        }
        f.set_block(g, detail::keyed_block(keys, it->second, static_cast<int>(it->second.size()),
                                           [&](const Key& k) { return image(k, g); }, g));
    }
    return f;
}

} // namespace kd
