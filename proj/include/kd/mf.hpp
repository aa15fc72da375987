#pragma once

#include "kd/catalogue.hpp"

#include <random>

namespace kd {

using PolyMatrix = std::vector<std::vector<Poly>>;

/**
 * @brief 2-periodic pair A : odd -> even, B : even -> odd over a commutative polynomial ring
 * with A B = w Id and B A = w Id.
 */
struct MatrixFactorization {
    Algebra ring;
    Poly potential;
    PolyMatrix A;  // rows: even generators, cols: odd generators
    PolyMatrix B;  // rows: odd generators, cols: even generators
    std::vector<std::string> even, odd;
    std::vector<Trigrade> even_grades, odd_grades;
};

namespace mf_detail {

inline PolyMatrix zeros(std::size_t r, std::size_t c) { return PolyMatrix(r, std::vector<Poly>(c)); }

inline PolyMatrix mul(const Algebra& ring, const PolyMatrix& a, const PolyMatrix& b, std::size_t inner) {
    std::size_t rows = a.size(), cols = b.empty() ? 0 : b[0].size();
    PolyMatrix out = zeros(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            for (std::size_t k = 0; k < inner; ++k)
                if (!a[i][k].empty() && !b[k][j].empty()) add_to(out[i][j], ring.mul(a[i][k], b[k][j]));
    return out;
}

inline bool is_scalar(const PolyMatrix& m, const Poly& w) {
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m[i].size(); ++j)
            if (m[i][j] != (i == j ? w : Poly{})) return false;
    return true;
}

} // namespace mf_detail

struct MfIdentity {
    bool ab = false, ba = false;
    bool ok() const { return ab && ba; }
};

/** Exact check of A B = w Id and B A = w Id as polynomial identities. */
inline MfIdentity check_identity(const MatrixFactorization& mf) {
    MfIdentity r;
    r.ab = mf_detail::is_scalar(mf_detail::mul(mf.ring, mf.A, mf.B, mf.odd.size()), mf.potential);
    r.ba = mf_detail::is_scalar(mf_detail::mul(mf.ring, mf.B, mf.A, mf.even.size()), mf.potential);
    return r;
}

struct NotAResolution : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/**
 * Folds a finite free curved resolution into a matrix factorization: generators are split by
 * parity of their degree and both d and the mixed operator delta contribute to A and B, so
 * that (d + delta)^2 = d(delta) becomes the potential.
 */
inline MatrixFactorization extract_mf(const ModulePresentation& p) {
    check_presentation(p);
    if (!p.algebra.has("delta")) throw NotAResolution("extraction needs a mixed-side block with delta");
    int di = p.algebra.index("delta");
    for (int i = 0; i < p.algebra.size(); ++i)
        if (i != di && !p.is_free(i) && p.act.count(i) && !p.act.at(i).empty())
            throw NotAResolution("generator '" + p.algebra.gen(i).name + "' must act freely in a free resolution");
    std::vector<Generator> vars;
    for (int v : p.free_vars) vars.push_back(p.algebra.gen(v));
    MatrixFactorization mf;
    mf.ring = make_sym(vars);
    auto to_ring = [&](const Poly& q) {
        Poly out;
        for (auto& [m, c] : q) {
            Monomial r = mf.ring.one();
            for (std::size_t k = 0; k < p.free_vars.size(); ++k) r[k] = m[p.free_vars[k]];
            for (int i = 0; i < p.algebra.size(); ++i)
                if (m[i] && !p.is_free(i)) throw NotAResolution("potential involves a non-free generator");
            add_to(out, r, c);
        }
        return out;
    };
    mf.potential = to_ring(p.algebra.differential(di));
    std::vector<int> pos(p.gens.size());
    for (std::size_t g = 0; g < p.gens.size(); ++g) {
        bool odd = p.gens[g].grade.odd();
        auto& names = odd ? mf.odd : mf.even;
        auto& grades = odd ? mf.odd_grades : mf.even_grades;
        pos[g] = static_cast<int>(names.size());
        names.push_back(p.gens[g].name);
        grades.push_back(p.gens[g].grade);
    }
    mf.A = mf_detail::zeros(mf.even.size(), mf.odd.size());
    mf.B = mf_detail::zeros(mf.odd.size(), mf.even.size());
    auto place = [&](int src, const ModuleVector& img) {
        bool src_odd = p.gens[src].grade.odd();
        for (auto& t : img) {
            if (p.gens[t.gen].grade.odd() == src_odd) throw NotAResolution("map preserves parity");
            Poly c = to_ring(t.coef);
            if (src_odd) add_to(mf.A[pos[t.gen]][pos[src]], c);
            else add_to(mf.B[pos[t.gen]][pos[src]], c);
        }
    };
    for (auto& [src, img] : p.diff) place(src, img);
    if (p.act.count(di))
        for (auto& [src, img] : p.act.at(di)) place(src, img);
    return mf;
}

/** Shift [1]: parities swap and both maps change sign. */
inline MatrixFactorization shift_mf(const MatrixFactorization& mf) {
    MatrixFactorization out = mf;
    std::swap(out.even, out.odd);
    std::swap(out.even_grades, out.odd_grades);
    out.A = mf.B;
    out.B = mf.A;
    for (auto* m : {&out.A, &out.B})
        for (auto& row : *m)
            for (auto& e : row)
                for (auto& [k, c] : e) c = -c;
    return out;
}

namespace mf_detail {

/// Monomials of the ring of total polynomial degree at most `deg` (every variable counts 1).
inline std::vector<Monomial> monomials_up_to(const Algebra& ring, int deg) {
    std::vector<Monomial> out;
    Monomial m = ring.one();
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == ring.size()) {
            out.push_back(m);
            return;
        }
        for (int e = 0; e <= left; ++e) {
            m[i] = e;
            rec(i + 1, left - e);
        }
        m[i] = 0;
    };
    rec(0, deg);
    return out;
}

} // namespace mf_detail

/**
 * Searches for a contracting homotopy H = (H0 : even -> odd, H1 : odd -> even) with
 * A H0 + H1 B = Id and B H1 + H0 A = Id, entries of polynomial degree at most max_degree.
 * Existence makes the factorization isomorphic to zero; absence up to the bound is reported
 * as not contractible within that bound.
 */
inline bool is_contractible(const MatrixFactorization& mf, int max_degree = 2) {
    const std::size_t ne = mf.even.size(), no = mf.odd.size();
    if (ne == 0 && no == 0) return true;
    auto mons = mf_detail::monomials_up_to(mf.ring, max_degree);
    const int nm = static_cast<int>(mons.size());
    // variable layout: H0[i][j] (no x ne), then H1[i][j] (ne x no), each with nm coefficients
    auto var_h0 = [&](std::size_t i, std::size_t j, int k) { return static_cast<int>((i * ne + j) * nm + k); };
    const int off = static_cast<int>(no * ne * nm);
    auto var_h1 = [&](std::size_t i, std::size_t j, int k) { return off + static_cast<int>((i * no + j) * nm + k); };
    const int nvars = off + static_cast<int>(ne * no * nm);
    std::map<std::pair<std::string, Monomial>, int> row_of;
    std::vector<SparseMatrix::Entry> trip;
    std::vector<Q> rhs;
    auto row = [&](const std::string& tag, const Monomial& m) {
        auto key = std::make_pair(tag, m);
        auto it = row_of.find(key);
        if (it != row_of.end()) return it->second;
        int r = static_cast<int>(rhs.size());
        row_of[key] = r;
        rhs.push_back(Q(0));
        return r;
    };
    auto tag = [](const char* which, std::size_t i, std::size_t j) {
        return std::string(which) + std::to_string(i) + "," + std::to_string(j);
    };
    // A H0 + H1 B = Id on even
    for (std::size_t i = 0; i < ne; ++i)
        for (std::size_t j = 0; j < ne; ++j) {
            std::string tg = tag("e", i, j);
            if (i == j) rhs[row(tg, mf.ring.one())] += Q(1);
            for (std::size_t k = 0; k < no; ++k) {
                for (auto& [am, ac] : mf.A[i][k])
                    for (int v = 0; v < nm; ++v)
                        for (auto& [pm, pc] : mf.ring.mul(mf.ring.poly(am, ac), mf.ring.poly(mons[v])))
                            trip.push_back({row(tg, pm), var_h0(k, j, v), pc});
                for (auto& [bm, bc] : mf.B[k][j])
                    for (int v = 0; v < nm; ++v)
                        for (auto& [pm, pc] : mf.ring.mul(mf.ring.poly(mons[v]), mf.ring.poly(bm, bc)))
                            trip.push_back({row(tg, pm), var_h1(i, k, v), pc});
            }
        }
    // B H1 + H0 A = Id on odd
    for (std::size_t i = 0; i < no; ++i)
        for (std::size_t j = 0; j < no; ++j) {
            std::string tg = tag("o", i, j);
            if (i == j) rhs[row(tg, mf.ring.one())] += Q(1);
            for (std::size_t k = 0; k < ne; ++k) {
                for (auto& [bm, bc] : mf.B[i][k])
                    for (int v = 0; v < nm; ++v)
                        for (auto& [pm, pc] : mf.ring.mul(mf.ring.poly(bm, bc), mf.ring.poly(mons[v])))
                            trip.push_back({row(tg, pm), var_h1(k, j, v), pc});
                for (auto& [am, ac] : mf.A[k][j])
                    for (int v = 0; v < nm; ++v)
                        for (auto& [pm, pc] : mf.ring.mul(mf.ring.poly(mons[v]), mf.ring.poly(am, ac)))
                            trip.push_back({row(tg, pm), var_h0(i, k, v), pc});
            }
        }
    auto m = SparseMatrix::from_triplets(static_cast<int>(rhs.size()), nvars, std::move(trip));
    return solve(m, rhs).has_value();
}

/**
 * Isomorphism by constant invertible matrices P (even) and Q (odd) with A' Q = P A and
 * B' P = Q B. A generic member of the solution space is tested for invertibility.
 */
inline bool isomorphic_by_constants(const MatrixFactorization& a, const MatrixFactorization& b, unsigned seed = 7) {
    const std::size_t ne = a.even.size(), no = a.odd.size();
    if (b.even.size() != ne || b.odd.size() != no) return false;
    const int nvars = static_cast<int>(ne * ne + no * no);
    auto vp = [&](std::size_t i, std::size_t j) { return static_cast<int>(i * ne + j); };
    auto vq = [&](std::size_t i, std::size_t j) { return static_cast<int>(ne * ne + i * no + j); };
    std::map<std::pair<std::string, Monomial>, int> row_of;
    std::vector<SparseMatrix::Entry> trip;
    auto row = [&](const std::string& t, const Monomial& m) {
        auto key = std::make_pair(t, m);
        auto it = row_of.find(key);
        if (it != row_of.end()) return it->second;
        int r = static_cast<int>(row_of.size());
        row_of[key] = r;
        return r;
    };
    // (A' Q - P A)[i][j], i even, j odd
    for (std::size_t i = 0; i < ne; ++i)
        for (std::size_t j = 0; j < no; ++j) {
            std::string t = "A" + std::to_string(i) + "," + std::to_string(j);
            for (std::size_t k = 0; k < no; ++k)
                for (auto& [m, c] : b.A[i][k]) trip.push_back({row(t, m), vq(k, j), c});
            for (std::size_t k = 0; k < ne; ++k)
                for (auto& [m, c] : a.A[k][j]) trip.push_back({row(t, m), vp(i, k), -c});
        }
    for (std::size_t i = 0; i < no; ++i)
        for (std::size_t j = 0; j < ne; ++j) {
            std::string t = "B" + std::to_string(i) + "," + std::to_string(j);
            for (std::size_t k = 0; k < ne; ++k)
                for (auto& [m, c] : b.B[i][k]) trip.push_back({row(t, m), vp(k, j), c});
            for (std::size_t k = 0; k < no; ++k)
                for (auto& [m, c] : a.B[k][j]) trip.push_back({row(t, m), vq(i, k), -c});
        }
    auto sys = SparseMatrix::from_triplets(static_cast<int>(row_of.size()), nvars, std::move(trip));
    auto kern = kernel_basis(sys);
    if (kern.empty()) return false;
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> coef(-9, 9);
    std::vector<Q> sol(nvars, Q(0));
    for (auto& v : kern) {
        Q c(coef(rng));
        for (int i = 0; i < nvars; ++i) sol[i] += c * v[i];
    }
    auto invertible = [&](std::size_t n, auto at) {
        std::vector<std::vector<Q>> m(n, std::vector<Q>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m[i][j] = sol[at(i, j)];
        return detail::dense_rank(m, static_cast<int>(n)) == static_cast<int>(n);
    };
    return invertible(ne, vp) && invertible(no, vq);
}

// ---------------------------------------------------------------------------------------------
// Curved resolutions of the catalogue objects

/**
 * Koszul resolution of the origin over k[x, y], e2 -> (f1, f2) -> e0 with the halved maps,
 * and delta the nullhomotopy of x y. The dashed maps carry the factor 1 (not 1/2) so that
 * [d, delta] is exactly x y.
 */
inline ModulePresentation bga_skyscraper_resolution() {
    ModulePresentation p;
    p.name = "bga.skyscraper";
    p.algebra = make_bga_block();
    const Algebra& a = p.algebra;
    int x = a.index("x"), y = a.index("y"), delta = a.index("delta");
    p.free_vars = {x, y};
    p.gens = {{"e0", {0, 0, 0}}, {"f1", {-1, -1, 0}}, {"f2", {-1, 0, 0}}, {"e2", {-2, -1, 0}}};
    auto px = [&](Q c) { return a.poly(a.unit(x), c); };
    auto py = [&](Q c) { return a.poly(a.unit(y), c); };
    Q half = Q(1) / Q(2);
    p.diff[1] = {{px(half), 0}};
    p.diff[2] = {{py(half), 0}};
    p.diff[3] = {{py(half), 1}, {px(-half), 2}};
    p.act[delta][0] = {{py(Q(1)), 1}, {px(Q(1)), 2}};
    p.act[delta][1] = {{px(Q(1)), 3}};
    p.act[delta][2] = {{py(Q(-1)), 3}};
    return p;
}

/** The formal x-axis: k[x, y] --y--> k[x, y], delta = x. */
inline ModulePresentation bga_axis_resolution(bool x_axis) {
    ModulePresentation p;
    p.name = x_axis ? "bga.omega" : "bga.y_axis";
    p.algebra = make_bga_block();
    const Algebra& a = p.algebra;
    int x = a.index("x"), y = a.index("y"), delta = a.index("delta");
    p.free_vars = {x, y};
    // the cut variable sits in the differential, the other one is the nullhomotopy
    int cut = x_axis ? y : x, other = x_axis ? x : y;
    p.gens = {{"e0", {0, 0, 0}}, {"e1", a.gen(cut).grade + Trigrade{-1, 0, 0}}};
    p.diff[1] = {{a.gen_poly(cut), 0}};
    p.act[delta][0] = {{a.gen_poly(other), 1}};
    return p;
}

/** Curved resolution used for MF extraction of a catalogue entry. */
inline ModulePresentation mf_resolution(const std::string& name, const CatalogueParams& params) {
    if (name == "bgm.character" || name == "bgm.skyscraper") return bgm_skyscraper_presentation(params.n);
    if (name == "bga.skyscraper") return bga_skyscraper_resolution();
    if (name == "bga.omega") return bga_axis_resolution(true);
    if (name == "bgm.infinitesimal_loop" && params.m == 0) {
        // k[x] --0--> k[x] with delta = 1
        ModulePresentation p;
        p.name = name;
        p.algebra = make_bgm_block(0);
        p.free_vars = {0};
        p.gens = {{"e0", {0, 0, 0}}, {"e1", {-1, -1, 0}}};
        p.act[1][0] = {{p.algebra.poly(p.algebra.one()), 1}};
        return p;
    }
    if (name == "zero") {
        ModulePresentation p;
        p.name = name;
        p.algebra = make_bgm_block(0);
        p.free_vars = {0};
        return p;
    }
    throw NotAResolution("no finite free curved resolution recorded for '" + name + "'");
}

inline std::string format_matrix(const Algebra& ring, const PolyMatrix& m) {
    std::string s = "[";
    for (std::size_t i = 0; i < m.size(); ++i) {
        s += i ? "; " : "";
        for (std::size_t j = 0; j < m[i].size(); ++j) s += (j ? ", " : "") + (m[i][j].empty() ? std::string("0") : ring.format(m[i][j]));
    }
    return s + "]";
}

} // namespace kd
