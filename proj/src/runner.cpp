#include "kd/cli.hpp"

#include "kd/bg.hpp"
#include "kd/mf.hpp"
#include "kd/scheme.hpp"

#include <filesystem>
#include <iomanip>
#include <sstream>

namespace kd::cli {

namespace {

/// Resolved input: a materializable module plus what is known about its extent.
struct Source {
    std::optional<ModulePresentation> pres;
    std::optional<CatalogueRef> ref;
    std::string name;
    bool mixed = true;
    int deg_lo = 0, deg_hi = 0, wt_lo = 0;
    bool x_nilpotent = true;
    Algebra algebra;

    OpModule build(const Window& w) const {
        if (ref) return build_entry(ref->name, ref->params, w);
        OpModule m = realize(*pres, w);
        m.name = name;
        return m;
    }
};

void check_window_size(const Window& w) {
    long pieces = long(w.deg_max - w.deg_min + 1) * long(w.wt_max - w.wt_min + 1) * long(w.aux_max + 1);
    if (pieces > kMaxWindowPieces)
        throw WindowOverflow("window " + to_string(w) + " has " + std::to_string(pieces) + " trigrades, limit " +
                             std::to_string(kMaxWindowPieces));
}

/// Degree and weight extent of a presentation, from its generators and free variables.
void extent_from_presentation(Source& s) {
    const ModulePresentation& p = *s.pres;
    if (p.gens.empty()) return;
    s.deg_lo = s.deg_hi = p.gens.front().grade.deg;
    s.wt_lo = p.gens.front().grade.wt;
    for (auto& g : p.gens) {
        s.deg_lo = std::min(s.deg_lo, g.grade.deg);
        s.deg_hi = std::max(s.deg_hi, g.grade.deg);
        s.wt_lo = std::min(s.wt_lo, g.grade.wt);
    }
    for (int v : p.free_vars) {
        const Trigrade& g = p.algebra.gen(v).grade;
        if (g.deg != 0)
            throw WindowOverflow("free variable " + p.algebra.gen(v).name + " has nonzero degree; the module is unbounded in degree");
        if (g.wt < 0) s.wt_lo = -1000;
        if (v == (p.algebra.has("x") ? p.algebra.index("x") : -1)) s.x_nilpotent = false;
    }
}

Source resolve(const std::string& input, const InputFile* file, const JobSpec& job) {
    Source s;
    std::optional<CatalogueRef> ref;
    std::optional<ModulePresentation> pres;
    if (file) {
        ref = file->reference;
        pres = file->module;
    } else {
        CatalogueRef r{input, {}};
        catalogue_entry(input);  // throws for unknown names
        ref = r;
    }
    if (ref) {
        const CatalogueEntry& e = catalogue_entry(ref->name);
        if (!file) {
            ref->params.n = job.n.value_or(0);
            ref->params.m = job.m.value_or(0);
        }
        if (e.needs_m && ref->params.m < 0) throw std::invalid_argument(e.name + " needs m >= 0");
        s.ref = ref;
        s.name = e.name;
        s.mixed = e.side == "omega";
        s.deg_lo = e.deg_lo;
        s.deg_hi = e.deg_hi;
        s.wt_lo = e.wt_lo;
        s.x_nilpotent = e.x_nilpotent;
        s.pres = catalogue_presentation(ref->name, ref->params);
        s.algebra = s.pres ? s.pres->algebra : build_entry(ref->name, ref->params, Window{0, 0, 0, 0, 0}).algebra;
        return s;
    }
    if (!pres) throw std::invalid_argument("input declares no module");
    s.pres = pres;
    s.name = pres->name;
    s.algebra = pres->algebra;
    s.mixed = !is_dual_side(pres->algebra);
    extent_from_presentation(s);
    return s;
}

// ---------------------------------------------------------------------------------------------
// Reports

struct Report {
    Format format;
    std::ostringstream text;
    bool failed = false;

    void line(const std::string& s) { text << s << "\n"; }
    void comment(const std::string& s) {
        if (format == Format::text) line(s);
    }
    void check(const std::string& label, bool ok, const std::string& detail = "") {
        failed = failed || !ok;
        if (format == Format::machine)
            line(std::string("check status=") + (ok ? "pass" : "fail") + " name=\"" + label + "\"" +
                 (detail.empty() ? "" : " detail=\"" + detail + "\""));
        else
            line(std::string(ok ? "PASS  " : "FAIL  ") + label + (detail.empty() ? "" : "  [" + detail + "]"));
    }
};

/**
 * Piece listing of a cohomology computation restricted to `w`. Certified pieces are listed when
 * nonzero, or always when `all` is set; boundary pieces are always listed since their value is
 * not a verified cohomology dimension.
 */
void pieces(Report& r, const CohomologyReport& rep, const Window& w, bool all) {
    struct Row {
        Trigrade g;
        int dim;
        bool cert;
    };
    std::vector<Row> rows;
    for (auto& [g, e] : rep.pieces) {
        if (!w.contains(g)) continue;
        bool cert = e.certified && w.certified(g);
        if (cert && e.dim == 0 && !all) continue;
        if (!cert && e.chain_dim == 0) continue;
        rows.push_back({g, e.dim, cert});
    }
    if (r.format == Format::machine) {
        for (auto& row : rows)
            r.line("piece d=" + std::to_string(row.g.deg) + " w=" + std::to_string(row.g.wt) + " a=" +
                   std::to_string(row.g.aux) + " dim=" + std::to_string(row.dim) +
                   " status=" + (row.cert ? "certified" : "boundary"));
        return;
    }
    std::ostringstream os;
    os << std::setw(5) << "d" << std::setw(5) << "w" << std::setw(5) << "a" << std::setw(7) << "dim" << "  status\n";
    int boundary = 0;
    for (auto& row : rows) {
        boundary += row.cert ? 0 : 1;
        os << std::setw(5) << row.g.deg << std::setw(5) << row.g.wt << std::setw(5) << row.g.aux << std::setw(7) << row.dim
           << "  " << (row.cert ? "certified" : "boundary") << "\n";
    }
    r.text << os.str();
    if (rows.empty()) r.line("(no pieces)");
    else if (boundary) r.line(std::to_string(boundary) + " boundary piece(s): dimensions not certified by this window");
}

Window default_or(const std::optional<Window>& w) { return w.value_or(Window{}); }

/// Input window needed so that shearing by n fills every piece of `target`.
Window shear_input_window(const Window& target, int n) {
    int reach = std::abs(n) * std::max(std::abs(target.wt_min), std::abs(target.wt_max));
    return Window{target.deg_min - reach, target.deg_max + reach, target.wt_min, target.wt_max, target.aux_max};
}

// ---------------------------------------------------------------------------------------------
// Commands

void cmd_catalogue_list(Report& r) {
    for (auto& e : catalogue()) {
        if (r.format == Format::machine) {
            r.line("entry name=" + e.name + " side=" + e.side + " n=" + (e.needs_n ? "yes" : "no") +
                   " m=" + (e.needs_m ? "yes" : "no") + " finite=" + (catalogue_presentation(e.name, {}) ? "yes" : "no"));
        } else {
            std::string params = e.needs_n ? (e.needs_m ? " (n, m)" : " (n)") : (e.needs_m ? " (m)" : "");
            std::ostringstream os;
            os << std::left << std::setw(28) << e.name + params << std::setw(7) << e.side << e.summary;
            r.line(os.str());
        }
    }
}

void cmd_cohomology(Report& r, const Source& s, const Window& w) {
    OpModule m = s.build(w);
    r.comment("# cohomology of " + s.name + " on " + to_string(w));
    pieces(r, cohomology(m.complex()), w, false);
}

KeyedModule dualize(const Source& s, const Window& w) {
    if (s.mixed) return kappa(s.build(kappa_input_window(w, s.deg_lo, s.deg_hi)), w);
    return kappa_inverse(s.build(kappa_inverse_input_window(w, s.wt_lo)), w);
}

void cmd_dualize(Report& r, const Source& s, const Window& w) {
    KeyedModule k = dualize(s, w);
    r.comment(std::string("# ") + (s.mixed ? "kappa" : "kappa^-1") + " of " + s.name + " on " + to_string(w));
    pieces(r, cohomology(k.module.complex()), w, false);
}

void cmd_shear(Report& r, const Source& s, const Window& w, int n) {
    OpModule m = shear(s.build(shear_input_window(w, n)), n);
    r.comment("# " + s.name + " sheared by " + std::to_string(n) + " on " + to_string(w));
    pieces(r, cohomology(m.complex()), w, false);
}

void cmd_gr(Report& r, const Source& s, const Window& w) {
    if (s.mixed) {
        KeyedModule k = dualize(s, w.widened(0, 1, 0));
        r.comment("# gr of kappa(" + s.name + ") on " + to_string(w));
        pieces(r, cohomology(gr(k.module)), w, false);
    } else {
        r.comment("# gr of " + s.name + " on " + to_string(w));
        pieces(r, cohomology(gr(s.build(w.widened(0, 1, 0)))), w, false);
    }
}

void cmd_un(Report& r, const Source& s, const Window& w) {
    GradedComplex c;
    if (s.mixed) {
        c = un_kappa(s.build(kappa_input_window(w, s.deg_lo, s.deg_hi)));
        r.comment("# un of kappa(" + s.name + "), weights forgotten");
    } else {
        if (!s.pres) throw std::invalid_argument("un needs a finitely presented D-side module");
        c = un_presentation(*s.pres);
        r.comment("# un of " + s.name + ", weights forgotten");
    }
    Window uw{w.deg_min, w.deg_max, 0, 0, w.aux_max};
    pieces(r, cohomology(c), uw, false);
}

void acyclic_check(Report& r, const std::string& label, const GradedComplex& c, const Window& w) {
    CohomologyReport rep = cohomology(c);
    int certified = 0;
    std::string first_bad;
    for (auto& [g, e] : rep.pieces)
        if (e.certified && w.certified(g)) {
            ++certified;
            if (e.dim && first_bad.empty()) first_bad = "cohomology " + std::to_string(e.dim) + " at " + to_string(g);
        }
    pieces(r, rep, w, r.format == Format::machine);
    r.check(label + " acyclic on " + std::to_string(certified) + " certified pieces", first_bad.empty() && certified > 0,
            certified == 0 ? "no certified pieces in window" : first_bad);
}

void cmd_verify_acyclicity(Report& r, const JobSpec& job, const Source* s, const Window& w) {
    if (s) {
        acyclic_check(r, s->name, s->build(w).complex(), w);
        return;
    }
    int n = job.n.value_or(1);
    if (job.relative) {
        acyclic_check(r, "relative Spencer sequence A^" + std::to_string(n) + " -> A^" + std::to_string(*job.relative),
                      relative_spencer(n, *job.relative, w).complex, w);
        return;
    }
    std::vector<std::string> which = job.lemmas;
    if (which.empty()) which = {"spencer", "koszul", "de-rham"};
    for (auto& l : which) {
        LemmaComplex c = l == "spencer" ? LemmaComplex::spencer
                         : l == "koszul" ? LemmaComplex::deformed_koszul
                                         : LemmaComplex::deformed_de_rham;
        r.comment("# cone of the " + to_string(c) + " augmentation, n=" + std::to_string(n) + ", " + to_string(w));
        acyclic_check(r, to_string(c) + " cone, n=" + std::to_string(n), augmentation_cone(c, n, w).cone, w);
    }
}

void cmd_verify_table(Report& r, const JobSpec& job, const std::string& name) {
    CatalogueParams p{job.n.value_or(0), job.m.value_or(0)};
    Certificate cert = verify_table_row(name, p, fixture_dir(job.fixtures));
    r.comment("# table row " + name + " n=" + std::to_string(p.n) + " m=" + std::to_string(p.m));
    for (auto& l : cert.lines) r.check(l.label, l.ok, l.detail);
}

void cmd_verify_roundtrip(Report& r, const Source& s, const Window& w) {
    if (!s.mixed) throw std::invalid_argument("round trip is verified through the unit on a mixed-side module; dualize first");
    if (!s.x_nilpotent) throw std::invalid_argument(s.name + " is not x-nilpotent: the unit M -> kappa^-1 kappa M is not defined");
    Window target = w;
    Window nwin = kappa_inverse_input_window(target, s.wt_lo);
    Window big = kappa_input_window(nwin, s.deg_lo, s.deg_hi);
    big.wt_min = std::min(big.wt_min, target.wt_min - 1);
    big.deg_min = std::min(big.deg_min, target.deg_min - 1);
    big.deg_max = std::max(big.deg_max, target.deg_max + 1);
    check_window_size(big);
    r.comment("# cone of M -> kappa^-1 kappa M for " + s.name + " on " + to_string(target));
    acyclic_check(r, "unit cone of " + s.name, unit_cone(s.build(big), target, s.wt_lo), target);
}

void cmd_mf_extract(Report& r, const JobSpec& job, const Source* s, const std::string& name) {
    ModulePresentation p;
    if (s && s->pres && !s->ref) p = *s->pres;
    else p = mf_resolution(s ? s->name : name, CatalogueParams{job.n.value_or(0), job.m.value_or(0)});
    MatrixFactorization mf = extract_mf(p);
    auto id = check_identity(mf);
    std::string pot = mf.potential.empty() ? "0" : mf.ring.format(mf.potential);
    if (r.format == Format::machine) {
        r.line("potential " + pot);
        r.line("even " + std::to_string(mf.even.size()) + " odd " + std::to_string(mf.odd.size()));
        r.line("A " + format_matrix(mf.ring, mf.A));
        r.line("B " + format_matrix(mf.ring, mf.B));
    } else {
        r.line("potential w = " + pot);
        std::string ev, od;
        for (auto& e : mf.even) ev += (ev.empty() ? "" : ", ") + e;
        for (auto& o : mf.odd) od += (od.empty() ? "" : ", ") + o;
        r.line("even part: " + ev);
        r.line("odd part:  " + od);
        r.line("A (odd -> even):\n" + format_matrix(mf.ring, mf.A));
        r.line("B (even -> odd):\n" + format_matrix(mf.ring, mf.B));
    }
    r.check("A*B = w*Id", id.ab);
    r.check("B*A = w*Id", id.ba);
}

bool needs_source(const std::string& cmd) {
    return cmd == "cohomology" || cmd == "dualize" || cmd == "shear" || cmd == "gr" || cmd == "un" ||
           cmd == "verify-roundtrip";
}

} // namespace

const std::vector<std::string>& commands() {
    static const std::vector<std::string> c = {"cohomology",        "dualize",      "shear",          "gr",
                                               "un",                "verify-acyclicity", "verify-table", "verify-roundtrip",
                                               "mf-extract",        "catalogue-list"};
    return c;
}

RunResult run(const JobSpec& spec) {
    RunResult res;
    JobSpec job = spec;
    Report r{job.format, {}, false};
    try {
        set_jobs(job.jobs);
        std::optional<InputFile> file;
        bool is_catalogue = false;
        if (!job.input.empty()) {
            is_catalogue = std::any_of(catalogue().begin(), catalogue().end(), [&](auto& e) { return e.name == job.input; });
            if (!is_catalogue) {
                if (!std::filesystem::exists(job.input))
                    throw std::invalid_argument("'" + job.input + "' is neither a catalogue entry nor a readable file");
                file = parse_input_file(job.input);
                auto take_int = [&](const char* key, std::optional<int>& slot) {
                    if (auto v = file->job.get(key); v && !slot) {
                        try {
                            slot = std::stoi(*v);
                        } catch (const std::exception&) {
                            throw std::invalid_argument(std::string("[job] ") + key + " is not an integer");
                        }
                    }
                };
                if (auto c = file->job.get("command"); c && job.command.empty()) job.command = *c;
                if (auto w = file->job.get("window"); w && !job.window) job.window = parse_window(*w);
                take_int("n", job.n);
                take_int("m", job.m);
                take_int("shift", job.shift);
            }
        }
        if (job.command.empty()) throw std::invalid_argument("no command given");
        if (std::find(commands().begin(), commands().end(), job.command) == commands().end())
            throw std::invalid_argument("unknown command '" + job.command + "'");
        Window w = default_or(job.window);
        w.validate();
        check_window_size(w);

        std::optional<Source> src;
        if (!job.input.empty() && job.command != "verify-table" && job.command != "catalogue-list")
            src = resolve(job.input, file ? &*file : nullptr, job);
        if (needs_source(job.command) && !src) throw std::invalid_argument(job.command + " needs an input");

        const std::string& c = job.command;
        if (c == "catalogue-list") cmd_catalogue_list(r);
        else if (c == "cohomology") cmd_cohomology(r, *src, w);
        else if (c == "dualize") cmd_dualize(r, *src, w);
        else if (c == "shear") cmd_shear(r, *src, w, job.shift.value_or(1));
        else if (c == "gr") cmd_gr(r, *src, w);
        else if (c == "un") cmd_un(r, *src, w);
        else if (c == "verify-acyclicity") cmd_verify_acyclicity(r, job, src ? &*src : nullptr, w);
        else if (c == "verify-table") {
            if (job.input.empty()) throw std::invalid_argument("verify-table needs a catalogue entry");
            catalogue_entry(job.input);
            cmd_verify_table(r, job, job.input);
        } else if (c == "verify-roundtrip") cmd_verify_roundtrip(r, *src, w);
        else if (c == "mf-extract") {
            if (job.input.empty()) throw std::invalid_argument("mf-extract needs an input");
            cmd_mf_extract(r, job, src ? &*src : nullptr, job.input);
        }
        if (r.format == Format::text && (c.rfind("verify", 0) == 0 || c == "mf-extract"))
            r.line(r.failed ? "result: FAIL" : "result: pass");
        res.exit_code = r.failed ? verification_failed : ok;
    } catch (const WindowOverflow& e) {
        res.exit_code = window_overflow;
        res.err = std::string("window overflow: ") + e.what();
    } catch (const NotNilpotent& e) {
        res.exit_code = window_overflow;
        res.err = std::string("window overflow: ") + e.what();
    } catch (const NotAChainMap& e) {
        res.exit_code = verification_failed;
        res.err = std::string("verification failed: ") + e.what();
    } catch (const ParseError& e) {
        res.exit_code = input_invalid;
        res.err = std::string("parse error: ") + e.what();
    } catch (const std::invalid_argument& e) {
        res.exit_code = input_invalid;
        res.err = std::string("invalid input: ") + e.what();
    } catch (const std::exception& e) {
        res.exit_code = input_invalid;
        res.err = std::string("error: ") + e.what();
    }
    res.out = r.text.str();
    return res;
}

} // namespace kd::cli
