#pragma once

#include "kd/bg.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

namespace kd {

/** @brief Named object of the classifying-stack examples, buildable on any window. */
struct CatalogueEntry {
    std::string name;        // e.g. "bgm.infinitesimal"
    std::string side;        // "omega" (mixed side) or "dmod"
    std::string summary;
    bool needs_n = false;    // block index
    bool needs_m = false;    // neighbourhood order
    int deg_lo = 0, deg_hi = 0;  // degree range of the module
    int wt_lo = 0;               // lowest weight (kappa-side towers start here)
    bool x_nilpotent = true;     // unit of the duality is a finite sum
    bool finite = true;          // finitely many basis elements overall
    std::string dual;            // catalogue name of the expected dual, if any
};

struct CatalogueParams {
    int n = 0;
    int m = 0;
};

namespace catalogue_detail {

inline std::string neg_power(int j) { return j == 0 ? "1" : "x^-" + std::to_string(j); }

/// x^{-j}, j = 0..top (or up to the window when top < 0), optionally tensored with k[delta].
inline OpModule x_tower(const std::string& name, const Algebra& a, const Window& w, int top, bool with_delta,
                        bool with_y) {
    ExplicitModuleBuilder b(name, a, w);
    int last = top >= 0 ? top : w.wt_max + 1;
    for (int j = 0; j <= last; ++j) {
        b.add(neg_power(j), {0, j, 0});
        if (with_delta) b.add(neg_power(j) + "*delta", {-1, j - 1, 0});
    }
    for (int j = 1; j <= last; ++j) {
        b.set("x", neg_power(j), neg_power(j - 1), Q(1));
        if (with_delta) b.set("x", neg_power(j) + "*delta", neg_power(j - 1) + "*delta", Q(1));
    }
    if (with_delta)
        for (int j = 0; j <= last; ++j) b.set("delta", neg_power(j), neg_power(j) + "*delta", Q(1));
    (void)with_y;  // y acts by zero on these objects
    return b.build();
}

inline OpModule point(const std::string& name, const Algebra& a, const Window& w) {
    ExplicitModuleBuilder b(name, a, w);
    b.add("1", {0, 0, 0});
    return b.build();
}

} // namespace catalogue_detail

/** Free k[x]-resolution of the weight-n point, with delta as the nullhomotopy n. */
inline ModulePresentation bgm_skyscraper_presentation(int n) {
    ModulePresentation p;
    p.name = "bgm.skyscraper";
    p.algebra = make_bgm_block(n);
    p.gens = {{"e0", {0, 0, 0}}, {"e1", {-1, -1, 0}}};
    p.free_vars = {0};
    p.diff[1] = {{p.algebra.gen_poly(0), 0}};
    if (n != 0) p.act[1][0] = {{p.algebra.poly(p.algebra.one(), Q(n)), 1}};
    return p;
}

/** k[t, h_x]-free module of rank one, d(h_x e) = n t e, viewed as a k[t]-module on e and h_x e. */
inline ModulePresentation bgm_free_dual_presentation(int n) {
    ModulePresentation p;
    p.name = "bgm.free_dual";
    p.algebra = make_bgm_dual(n);
    int h = p.algebra.index("h_x"), t = p.algebra.index("t");
    p.gens = {{"e", {0, 0, 0}}, {"f", {-1, 1, 0}}};
    p.free_vars = {t};
    p.act[h][0] = {{p.algebra.poly(p.algebra.one()), 1}};
    if (n != 0) p.diff[1] = {{p.algebra.poly(p.algebra.unit(t), Q(n)), 0}};
    return p;
}

/** k[t] with h_x (and y) acting by zero. */
inline ModulePresentation dual_tower_presentation(bool additive) {
    ModulePresentation p;
    p.name = additive ? "bga.tower" : "bgm.tower";
    p.algebra = additive ? make_bga_dual() : make_bgm_dual(0);
    p.gens = {{"e", {0, 0, 0}}};
    p.free_vars = {p.algebra.index("t")};
    return p;
}

/** Sym(g[1]) (x) k[t] on the additive side: e and h_x e, y acting by zero. */
inline ModulePresentation bga_free_dual_presentation() {
    ModulePresentation p;
    p.name = "bga.free_dual";
    p.algebra = make_bga_dual();
    p.gens = {{"e", {0, 0, 0}}, {"f", {-1, 1, 0}}};
    p.free_vars = {p.algebra.index("t")};
    p.act[p.algebra.index("h_x")][0] = {{p.algebra.poly(p.algebra.one()), 1}};
    return p;
}

inline const std::vector<CatalogueEntry>& catalogue() {
    static const std::vector<CatalogueEntry> entries = {
        {"bgm.character", "omega", "weight-n character k(n) of G_m, x and delta acting by zero", true, false, 0, 0, 0,
         true, true, "bgm.free_dual"},
        {"bgm.skyscraper", "omega", "free k[x]-resolution of k(n) with nullhomotopy n", true, false, -1, 0, -1000,
         false, false, "bgm.free_dual"},
        {"bgm.infinitesimal", "omega", "k[x]x^-m / k[x]x, the m-th infinitesimal neighbourhood", false, true, 0, 0, 0,
         true, true, ""},
        {"bgm.omega_formal", "omega", "k[x,x^-1] / k[x]x, dualizing sheaf of the formal neighbourhood", false, false, 0,
         0, 0, true, false, "bgm.tower"},
        {"bgm.infinitesimal_loop", "omega", "k[x,delta]x^-m / k[x]x, delta acting freely", false, true, -1, 0, -1, true,
         true, ""},
        {"bgm.omega_loop", "omega", "k[x,x^-1,delta] / x, delta acting freely", false, false, -1, 0, -1, true, false,
         ""},
        {"bga.skyscraper", "omega", "skyscraper at the origin of the (x,y)-plane", false, false, 0, 0, 0, true, true,
         "bga.free_dual"},
        {"bga.omega", "omega", "x^-j tower with y acting by zero, dualizing sheaf of the formal x-axis", false, false, 0,
         0, 0, true, false, "bga.tower"},
        {"bgm.free_dual", "dmod", "k[t,h_x] free of rank one with d(h_x) = n t", true, false, -1, 0, 0, true, false,
         "bgm.character"},
        {"bgm.tower", "dmod", "k[t], h_x acting by zero", false, false, 0, 0, 0, true, false, "bgm.omega_formal"},
        {"bga.free_dual", "dmod", "Sym(g[1]) (x) k[t], y acting by zero", false, false, -1, 0, 0, true, false,
         "bga.skyscraper"},
        {"bga.tower", "dmod", "k[t], y and h_x acting by zero", false, false, 0, 0, 0, true, false, "bga.omega"},
        {"zero", "omega", "zero module over the trivial G_m block", false, false, 0, 0, 0, true, true, ""},
    };
    return entries;
}

inline const CatalogueEntry& catalogue_entry(const std::string& name) {
    for (auto& e : catalogue())
        if (e.name == name) return e;
    throw std::invalid_argument("unknown catalogue entry '" + name + "'");
}

/** Presentation of an entry when it has a finite one (used for serialization and realization). */
inline std::optional<ModulePresentation> catalogue_presentation(const std::string& name, const CatalogueParams& p) {
    if (name == "bgm.skyscraper") return bgm_skyscraper_presentation(p.n);
    if (name == "bgm.free_dual") return bgm_free_dual_presentation(p.n);
    if (name == "bgm.tower") return dual_tower_presentation(false);
    if (name == "bga.tower") return dual_tower_presentation(true);
    if (name == "bga.free_dual") return bga_free_dual_presentation();
    return std::nullopt;
}

/** Builds an entry on a window (infinite objects are truncated to it). */
inline OpModule build_entry(const std::string& name, const CatalogueParams& p, const Window& w) {
    using namespace catalogue_detail;
    const CatalogueEntry& e = catalogue_entry(name);
    if (e.needs_m && p.m < 0) throw std::invalid_argument(name + " needs m >= 0");
    if (auto pres = catalogue_presentation(name, p)) {
        OpModule m = realize(*pres, w);
        m.name = name;
        return m;
    }
    if (name == "bgm.character") return point(name, make_bgm_block(p.n), w);
    if (name == "bgm.infinitesimal") return x_tower(name, make_bgm_block(0), w, p.m, false, false);
    if (name == "bgm.omega_formal") return x_tower(name, make_bgm_block(0), w, -1, false, false);
    if (name == "bgm.infinitesimal_loop") return x_tower(name, make_bgm_block(0), w, p.m, true, false);
    if (name == "bgm.omega_loop") return x_tower(name, make_bgm_block(0), w, -1, true, false);
    if (name == "bga.skyscraper") return point(name, make_bga_block(), w);
    if (name == "bga.omega") return x_tower(name, make_bga_block(), w, -1, false, true);
    if (name == "zero") return ExplicitModuleBuilder(name, make_bgm_block(0), w).build();
    throw std::invalid_argument("no builder for '" + name + "'");
}

// ---------------------------------------------------------------------------------------------
// Oracle fixtures and table verification

#ifndef KD_DEFAULT_FIXTURES
#define KD_DEFAULT_FIXTURES "tests/fixtures"
#endif

/** Fixture directory: explicit flag, then the KD_FIXTURES environment variable, then the build default. */
inline std::string fixture_dir(const std::string& flag = "") {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("KD_FIXTURES"); env && *env) return env;
    return KD_DEFAULT_FIXTURES;
}

/** @brief Expected cohomology profile produced by the standalone oracle. */
struct Fixture {
    std::string entry;
    std::string direction;  // "kappa" or "kappa_inverse"
    Window window;
    std::map<Trigrade, int> pieces;  // certified nonzero cohomology
    std::map<int, int> un;           // t = 1 specialization, by degree
};

inline std::string fixture_file(const std::string& name, const CatalogueParams& p) {
    return name + "_n" + std::to_string(p.n) + "_m" + std::to_string(p.m) + ".txt";
}

inline std::optional<Fixture> load_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    Fixture f;
    std::string line;
    auto field = [](const std::string& tok, const std::string& key) {
        if (tok.rfind(key + "=", 0) != 0) throw std::runtime_error("fixture: expected " + key + "= in '" + tok + "'");
        return std::stoi(tok.substr(key.size() + 1));
    };
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (head == "entry") std::getline(ls >> std::ws, f.entry);
        else if (head == "direction") ls >> f.direction;
        else if (head == "window") {
            std::string w;
            ls >> w;
            f.window = parse_window(w);
        } else if (head == "piece") {
            std::string d, w, a, dim;
            ls >> d >> w >> a >> dim;
            f.pieces[{field(d, "d"), field(w, "w"), field(a, "a")}] = field(dim, "dim");
        } else if (head == "un") {
            std::string d, dim;
            ls >> d >> dim;
            f.un[field(d, "d")] = field(dim, "dim");
        } else {
            throw std::runtime_error("fixture " + path + ": unknown line '" + line + "'");
        }
    }
    return f;
}

struct CheckLine {
    std::string label;
    bool ok = true;
    std::string detail;
};

/** @brief Outcome of verifying one catalogue row. */
struct Certificate {
    std::string entry;
    std::vector<CheckLine> lines;
    CohomologyReport profile;  // cohomology of the dual image on the fixture window
    bool ok() const {
        return std::all_of(lines.begin(), lines.end(), [](const CheckLine& l) { return l.ok; });
    }
    void add(std::string label, bool ok, std::string detail = "") {
        lines.push_back({std::move(label), ok, std::move(detail)});
    }
};

inline std::map<Trigrade, int> certified_nonzero(const CohomologyReport& r, const Window& w) {
    std::map<Trigrade, int> out;
    for (auto& [g, e] : r.pieces)
        if (e.certified && e.dim && w.certified(g)) out[g] = e.dim;
    return out;
}

inline std::map<int, int> by_degree(const std::map<Trigrade, int>& m) {
    std::map<int, int> out;
    for (auto& [g, v] : m) out[g.deg] += v;
    return out;
}

namespace catalogue_detail {

inline std::string describe(const std::map<Trigrade, int>& a) {
    std::string s;
    int shown = 0;
    for (auto& [g, v] : a) {
        if (shown++ == 6) return s + " ...";
        s += (s.empty() ? "" : " ") + to_string(g) + ":" + std::to_string(v);
    }
    return s.empty() ? "none" : s;
}

/// First difference between two profiles on a window, or empty.
inline std::string diff_profiles(const std::map<Trigrade, int>& got, const std::map<Trigrade, int>& want) {
    std::set<Trigrade> keys;
    for (auto& [g, v] : got) keys.insert(g);
    for (auto& [g, v] : want) keys.insert(g);
    for (auto& g : keys) {
        int a = got.count(g) ? got.at(g) : 0, b = want.count(g) ? want.at(g) : 0;
        if (a != b) return "at " + to_string(g) + " got " + std::to_string(a) + ", expected " + std::to_string(b);
    }
    return "";
}

/// Koszul complex of M over k[x] alone: the graded shadow of kappa with delta and t forgotten.
inline GradedComplex koszul_shadow(const OpModule& m, const Window& target) {
    OpModule flat = m;
    flat.ops["delta"] = zero_map(m.space, m.op("delta").shift);
    if (flat.has_op("y")) flat.ops["y"] = zero_map(m.space, {0, 0, 0});
    if (block_info(m.algebra).group == GroupKind::multiplicative) flat.algebra = make_bgm_block(0);
    // only t^0 survives in the shadow: keep the kappa pieces and quotient by t via the cone
    return gr(kappa(flat, target).module);
}

} // namespace catalogue_detail

/**
 * Verifies one catalogue row: equivariance of the object, the dual image against the oracle
 * profile, the un and gr specializations, k[t]-towers, and the return trip through the
 * inverse functor.
 */
inline Certificate verify_table_row(const std::string& name, const CatalogueParams& params,
                                    const std::string& fixtures = fixture_dir()) {
    using namespace catalogue_detail;
    const CatalogueEntry& entry = catalogue_entry(name);
    Certificate cert;
    cert.entry = name;
    auto fx = load_fixture((std::filesystem::path(fixtures) / fixture_file(name, params)).string());
    Window win = fx ? fx->window : Window{-9, 3, -2, 6, 0};
    if (!fx) cert.add("oracle fixture " + fixture_file(name, params), false, "missing in " + fixtures);

    if (entry.side == "omega") {
        Window mwin = kappa_input_window(win, entry.deg_lo, entry.deg_hi);
        OpModule m = build_entry(name, params, mwin);
        auto val = validate_equivariant(m);
        std::string bad;
        for (auto& c : val.checks)
            if (!c.ok) bad += (bad.empty() ? "" : ", ") + c.name;
        cert.add("equivariant structure", val.ok(), bad);

        KeyedModule km = kappa(m, win);
        cert.profile = cohomology(km.module.complex());
        auto got = certified_nonzero(cert.profile, win);
        if (fx) {
            std::string dif = diff_profiles(got, fx->pieces);
            cert.add("kappa profile matches oracle (" + std::to_string(fx->pieces.size()) + " pieces)", dif.empty(), dif);
        }
        auto val_dual = validate_equivariant(km.module);
        cert.add("kappa image is a dg-module over the dual block", val_dual.ok());

        // un column
        auto un = by_degree(certified_nonzero(cohomology(un_kappa(m)), Window{win.deg_min, win.deg_max, 0, 0, win.aux_max}));
        if (fx) {
            std::string dif;
            for (int d = win.deg_min + 1; d < win.deg_max; ++d) {
                int a = un.count(d) ? un[d] : 0, b = fx->un.count(d) ? fx->un.at(d) : 0;
                if (a != b && dif.empty()) dif = "degree " + std::to_string(d) + ": " + std::to_string(a) + " vs " + std::to_string(b);
            }
            cert.add("un matches the colimit along t", dif.empty(), dif);
        }
        int total = 0;
        std::string degs;
        for (auto& [d, v] : un) {
            total += v;
            degs += (degs.empty() ? "" : ",") + std::to_string(d);
        }
        if (total == 0) cert.add("un-specialization acyclic", true);
        else cert.add("un-specialization has total dimension " + std::to_string(total) + " in degrees {" + degs + "}", true);

        // gr column: t = 0 agrees with the Koszul shadow of M over k[x]
        auto grh = certified_nonzero(cohomology(gr(km.module)), win);
        auto shadow = certified_nonzero(cohomology(koszul_shadow(m, win)), win);
        std::string gdif = diff_profiles(grh, shadow);
        cert.add("gr agrees with the linear Koszul shadow", gdif.empty(), gdif);

        // towers
        TowerProfile tp = tower_profile(km.module);
        std::string tdeg;
        for (auto& [d, v] : by_degree(tp.generators)) tdeg += (tdeg.empty() ? "" : ",") + std::to_string(d) + (v > 1 ? "x" + std::to_string(v) : "");
        cert.add("k[t]-tower generators in degrees {" + tdeg + "}, torsion " + std::to_string(tp.total_torsion()), true);

        // return trip
        if (entry.x_nilpotent) {
            Window target{-3, 3, win.wt_min, std::min(win.wt_max, 4), win.aux_max};
            Window nwin = kappa_inverse_input_window(target, entry.wt_lo);
            Window big = kappa_input_window(nwin, entry.deg_lo, entry.deg_hi);
            big.wt_min = std::min(big.wt_min, target.wt_min - 1);
            big.deg_min = std::min(big.deg_min, target.deg_min - 1);
            big.deg_max = std::max(big.deg_max, target.deg_max + 1);
            auto rep = cohomology(unit_cone(build_entry(name, params, big), target, entry.wt_lo));
            cert.add("unit M -> kappa^-1 kappa M is a quasi-isomorphism (" + std::to_string(rep.certified_count()) +
                         " pieces)",
                     rep.acyclic_on_certified() && rep.certified_count() > 0,
                     rep.acyclic_on_certified() ? "" : "cohomology at " + to_string(rep.nonzero_certified().front()));
        } else if (name == "bgm.skyscraper") {
            Window pw = mwin.widened(2, 0, 0);
            OpModule res = build_entry(name, params, pw);
            OpModule pt = build_entry("bgm.character", params, pw);
            GradedMap f{res.space, pt.space, {0, 0, 0}, {}};
            f.set_block({0, 0, 0}, SparseMatrix::from_triplets(1, res.space->dim({0, 0, 0}), {{0, 0, Q(1)}}));
            KeyedModule k1 = kappa(res, win), k2 = kappa(pt, win);
            auto rep = cohomology(cone(k1.module.complex(), k2.module.complex(), kappa_map(k1, k2, f)));
            cert.add("kappa of the augmentation to k(n) is a quasi-isomorphism", rep.acyclic_on_certified());
        }

        // the expected dual object
        if (!entry.dual.empty()) {
            CatalogueParams dp = params;
            if (entry.dual == "bgm.tower" || entry.dual.rfind("bga.", 0) == 0) dp.n = 0;
            OpModule n = build_entry(entry.dual, dp, Window{win.deg_min - 2, win.deg_max + 2, win.wt_min, win.wt_max, win.aux_max});
            auto nh = certified_nonzero(cohomology(n.complex()), win);
            std::string dif = diff_profiles(got, nh);
            cert.add("kappa image has the cohomology of " + entry.dual, dif.empty(), dif);
        }
    } else {
        Window nwin = kappa_inverse_input_window(win, entry.wt_lo);
        OpModule n = build_entry(name, params, nwin);
        auto val = validate_equivariant(n);
        cert.add("equivariant structure", val.ok());
        KeyedModule kn = kappa_inverse(n, win);
        cert.profile = cohomology(kn.module.complex());
        auto got = certified_nonzero(cert.profile, win);
        if (fx) {
            std::string dif = diff_profiles(got, fx->pieces);
            cert.add("kappa^-1 profile matches oracle (" + std::to_string(fx->pieces.size()) + " pieces)", dif.empty(), dif);
        }
        cert.add("kappa^-1 image is a dg-module over the mixed block", validate_equivariant(kn.module).ok());
        if (auto pres = catalogue_presentation(name, params)) {
            int total = 0;
            for (auto& [g, e] : cohomology(un_presentation(*pres)).pieces) total += e.dim;
            cert.add(total == 0 ? "un-specialization acyclic" : "un-specialization has total dimension " + std::to_string(total), true);
        }
        if (!entry.dual.empty()) {
            CatalogueParams dp = params;
            const CatalogueEntry& de = catalogue_entry(entry.dual);
            OpModule m = build_entry(entry.dual, dp, Window{win.deg_min - 2, win.deg_max + 2, std::min(win.wt_min, de.wt_lo), win.wt_max + 2, win.aux_max});
            auto mh = certified_nonzero(cohomology(m.complex()), win);
            std::string dif = diff_profiles(got, mh);
            cert.add("kappa^-1 image has the cohomology of " + entry.dual, dif.empty(), dif);
        }
    }
    return cert;
}

} // namespace kd
