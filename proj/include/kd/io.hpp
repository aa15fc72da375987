#pragma once

#include "kd/catalogue.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace kd {

/** @brief Input error with a 1-based source position. */
struct ParseError : std::invalid_argument {
    int line, column;
    ParseError(int l, int c, const std::string& msg)
        : std::invalid_argument("line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + msg), line(l), column(c) {}
};

/** Reference to a catalogue entry, for objects without a finite presentation. */
struct CatalogueRef {
    std::string name;
    CatalogueParams params;
    bool operator==(const CatalogueRef& o) const {
        return name == o.name && params.n == o.params.n && params.m == o.params.m;
    }
};

/** Keys of the [job] section. Unset fields fall back to command-line flags or defaults. */
struct JobSection {
    std::map<std::string, std::string> values;
    std::optional<std::string> get(const std::string& k) const {
        auto it = values.find(k);
        if (it == values.end()) return std::nullopt;
        return it->second;
    }
};

/** @brief Parsed input file: a module given explicitly or by catalogue reference. */
struct InputFile {
    std::optional<ModulePresentation> module;
    std::optional<CatalogueRef> reference;
    JobSection job;
};

namespace io_detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Column (1-based) of `needle` inside the raw line, or of the first non-blank.
inline int column_of(const std::string& raw, const std::string& needle) {
    auto p = needle.empty() ? std::string::npos : raw.find(needle);
    if (p == std::string::npos) p = raw.find_first_not_of(" \t");
    return static_cast<int>(p == std::string::npos ? 0 : p) + 1;
}

inline bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '\''; }

inline Q parse_rational(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Q(std::stoll(s));
    long long den = std::stoll(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Q(std::stoll(s.substr(0, slash))) / Q(den);
}

/**
 * Linear combination of products: `2*x*e0 - 1/2*y^2*e1 + e2`. Each term is a coefficient and a
 * list of (name, power) factors in the order written. Offsets are 0-based into `text`.
 */
struct RawTerm {
    Q coef{1};
    std::vector<std::pair<std::string, int>> factors;
    int offset = 0;
};

inline std::vector<RawTerm> parse_terms(const std::string& text, const std::function<void(int, const std::string&)>& fail) {
    std::vector<RawTerm> out;
    std::size_t i = 0;
    auto skip = [&] {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    };
    skip();
    if (i == text.size()) fail(static_cast<int>(i), "empty expression");
    bool first = true;
    while (i < text.size()) {
        RawTerm t;
        t.offset = static_cast<int>(i);
        Q sign(1);
        if (text[i] == '+' || text[i] == '-') {
            sign = text[i] == '-' ? Q(-1) : Q(1);
            ++i;
            skip();
        } else if (!first) {
            if (is_name_char(text[i])) fail(static_cast<int>(i), "expected '+' or '-'");
            fail(static_cast<int>(i), std::string("unexpected character '") + text[i] + "'");
        }
        first = false;
        bool need_factor = true;
        while (need_factor) {
            skip();
            if (i >= text.size()) fail(static_cast<int>(i), "expected a factor");
            std::size_t start = i;
            if (std::isdigit(static_cast<unsigned char>(text[i]))) {
                while (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '/')) ++i;
                try {
                    t.coef *= parse_rational(text.substr(start, i - start));
                } catch (const std::exception& e) {
                    fail(static_cast<int>(start), std::string("bad coefficient: ") + e.what());
                }
            } else if (is_name_char(text[i])) {
                while (i < text.size() && is_name_char(text[i])) ++i;
                std::string name = text.substr(start, i - start);
                int power = 1;
                if (i < text.size() && text[i] == '^') {
                    ++i;
                    std::size_t ps = i;
                    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
                    if (ps == i) fail(static_cast<int>(ps), "expected an exponent after '^'");
                    power = std::stoi(text.substr(ps, i - ps));
                }
                t.factors.push_back({name, power});
            } else {
                fail(static_cast<int>(i), std::string("unexpected character '") + text[i] + "'");
            }
            skip();
            if (i < text.size() && text[i] == '*') {
                ++i;
            } else {
                need_factor = false;
            }
        }
        t.coef *= sign;
        out.push_back(t);
        skip();
    }
    return out;
}

inline int parse_int_field(const std::string& tok, const std::string& key, const std::function<void(const std::string&)>& fail) {
    if (tok.rfind(key + "=", 0) != 0) fail("expected " + key + "=<int>, got '" + tok + "'");
    try {
        std::size_t used = 0;
        int v = std::stoi(tok.substr(key.size() + 1), &used);
        if (used != tok.size() - key.size() - 1) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        fail("expected an integer in '" + tok + "'");
    }
    return 0;
}

/// The operator written as `mix:` on this algebra: delta on the mixed side, h_x on the D-side.
inline std::string mixed_operator(const Algebra& a) {
    if (a.has("delta")) return "delta";
    if (a.has("h_x")) return "h_x";
    return "";
}

inline std::string format_grade_fields(const Trigrade& g) {
    return "d=" + std::to_string(g.deg) + " w=" + std::to_string(g.wt) + " a=" + std::to_string(g.aux);
}

inline std::string format_coef(const Q& c) {
    std::ostringstream os;
    os << c;
    return os.str();
}

} // namespace io_detail

/**
 * Parses the line-oriented input format. Sections: [algebra] (kind/n, or kind = custom with
 * gen and diff lines), [module] (name, free, gen, act, diff, mix, or a `use` line) and [job]
 * (free-form key = value). Errors carry line and column.
 */
inline InputFile parse_input(const std::string& text) {
    using namespace io_detail;
    InputFile out;
    std::string section;
    std::optional<Algebra> alg;
    std::string alg_kind;
    int alg_n = 0;
    bool alg_n_set = false;
    std::vector<Generator> custom_gens;
    std::vector<std::tuple<int, std::string, std::string, std::string>> custom_diffs;  // line, raw, gen, rhs
    ModulePresentation pres;
    bool module_seen = false;
    std::vector<std::string> free_names;
    int free_line = 0;
    struct Pending {
        int line;
        std::string raw, op, gen, rhs;
        std::size_t rhs_pos;
    };
    std::vector<Pending> pending;

    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    auto finish_algebra = [&](int at_line) {
        if (alg) return;
        if (alg_kind.empty()) throw ParseError(at_line, 1, "module declared before [algebra] kind");
        if (alg_kind == "custom") {
            std::set<std::string> seen;
            for (auto& g : custom_gens)
                if (!seen.insert(g.name).second) throw ParseError(at_line, 1, "duplicate algebra generator '" + g.name + "'");
            Algebra a = make_sym(custom_gens, AlgebraKind::custom);
            for (auto& [ln, r, gname, rhs] : custom_diffs) {
                auto fail = [&, ln = ln, r = r](int off, const std::string& m) {
                    throw ParseError(ln, static_cast<int>(r.find("->")) + 3 + off, m);
                };
                if (!a.has(gname)) throw ParseError(ln, column_of(r, gname), "unknown generator '" + gname + "'");
                int gi = a.index(gname);
                Poly p;
                for (auto& t : parse_terms(rhs, fail)) {
                    Monomial m = a.one();
                    Poly cur = a.poly(m, t.coef);
                    for (auto& [f, k] : t.factors) {
                        if (!a.has(f)) throw ParseError(ln, column_of(r, f), "unknown generator '" + f + "'");
                        for (int e = 0; e < k; ++e) cur = a.mul(cur, a.gen_poly(a.index(f)));
                    }
                    for (auto& [mm, c] : cur) {
                        Trigrade want = a.gen(gi).grade + kDiffShift;
                        if (!(a.grade(mm) == want))
                            throw ParseError(ln, column_of(r, "->"),
                                             "differential of " + gname + " is not homogeneous: left side " + to_string(want) +
                                                 ", right side term " + a.format(mm) + " has " + to_string(a.grade(mm)));
                    }
                    add_to(p, cur);
                }
                a.set_differential(gi, p);
            }
            alg = a;
        } else {
            try {
                alg = build_catalogue_algebra(alg_kind, alg_n_set ? alg_n : 0);
            } catch (const std::exception& e) {
                throw ParseError(at_line, 1, e.what());
            }
        }
        pres.algebra = *alg;
    };

    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(lineno, column_of(raw, "["), "unterminated section header");
            std::string s = line.substr(1, line.size() - 2);
            if (s != "algebra" && s != "module" && s != "job")
                throw ParseError(lineno, column_of(raw, "[") + 1, "unknown section '" + s + "'");
            section = s;
            continue;
        }
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (head == "use") {
            std::string name;
            ls >> name;
            if (name.empty()) throw ParseError(lineno, column_of(raw, "use") + 4, "expected a catalogue entry after 'use'");
            try {
                catalogue_entry(name);
            } catch (const std::exception& e) {
                throw ParseError(lineno, column_of(raw, name), e.what());
            }
            CatalogueRef ref{name, {}};
            std::string tok;
            while (ls >> tok) {
                auto fail = [&](const std::string& m) { throw ParseError(lineno, column_of(raw, tok), m); };
                if (tok.rfind("n=", 0) == 0) ref.params.n = parse_int_field(tok, "n", fail);
                else if (tok.rfind("m=", 0) == 0) ref.params.m = parse_int_field(tok, "m", fail);
                else fail("unknown parameter '" + tok + "' (expected n= or m=)");
            }
            if (auto p = catalogue_presentation(ref.name, ref.params)) {
                out.module = *p;
                out.module->name = ref.name;
            }
            out.reference = ref;
            continue;
        }
        if (section.empty()) throw ParseError(lineno, column_of(raw, head), "content before any section header");

        auto eq = line.find('=');
        bool is_decl = head == "gen" || head == "act" || head == "diff:" || head == "mix:" || head.rfind("diff", 0) == 0 ||
                       head.rfind("mix", 0) == 0;
        if (!is_decl && eq != std::string::npos) {
            std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
            if (section == "job") {
                out.job.values[key] = val;
            } else if (section == "algebra") {
                if (key == "kind") alg_kind = val;
                else if (key == "n") {
                    try {
                        alg_n = std::stoi(val);
                        alg_n_set = true;
                    } catch (const std::exception&) {
                        throw ParseError(lineno, column_of(raw, val), "expected an integer for n");
                    }
                } else throw ParseError(lineno, column_of(raw, key), "unknown algebra key '" + key + "'");
            } else {
                if (key == "name") pres.name = val;
                else if (key == "free") {
                    free_line = lineno;
                    std::stringstream fs(val);
                    std::string f;
                    while (std::getline(fs, f, ',')) {
                        f = trim(f);
                        if (!f.empty()) free_names.push_back(f);
                    }
                } else throw ParseError(lineno, column_of(raw, key), "unknown module key '" + key + "'");
                module_seen = true;
            }
            continue;
        }
        if (section == "job") throw ParseError(lineno, column_of(raw, head), "expected key = value in [job]");

        if (head == "gen") {
            std::string name, d, w, a, extra;
            ls >> name >> d >> w >> a;
            if (name.empty()) throw ParseError(lineno, column_of(raw, "gen") + 4, "expected a generator name");
            auto fail = [&](const std::string& m) { throw ParseError(lineno, column_of(raw, name) + static_cast<int>(name.size()) + 1, m); };
            Trigrade g{parse_int_field(d, "d", fail), parse_int_field(w, "w", fail), parse_int_field(a, "a", fail)};
            if (ls >> extra) throw ParseError(lineno, column_of(raw, extra), "unexpected '" + extra + "'");
            if (section == "algebra") {
                if (alg_kind != "custom") throw ParseError(lineno, column_of(raw, "gen"), "gen lines in [algebra] need kind = custom");
                custom_gens.push_back({name, g, static_cast<int>(custom_gens.size())});
            } else {
                for (auto& e : pres.gens)
                    if (e.name == name) throw ParseError(lineno, column_of(raw, name), "duplicate generator '" + name + "'");
                pres.gens.push_back({name, g});
                module_seen = true;
            }
            continue;
        }
        // act <op>: <gen> -> <rhs> | diff: <gen> -> <rhs> | mix: <gen> -> <rhs>
        auto colon = line.find(':');
        auto arrow = line.find("->");
        if (colon == std::string::npos || arrow == std::string::npos || arrow < colon)
            throw ParseError(lineno, column_of(raw, head), "expected '<kind>: <gen> -> <expression>'");
        std::string lhs_head = trim(line.substr(0, colon));
        std::string gen = trim(line.substr(colon + 1, arrow - colon - 1));
        std::string rhs = line.substr(arrow + 2);
        std::string op;
        if (lhs_head == "diff") op = "d";
        else if (lhs_head == "mix") op = "mix";
        else if (lhs_head.rfind("act ", 0) == 0) op = trim(lhs_head.substr(4));
        else throw ParseError(lineno, column_of(raw, head), "unknown declaration '" + lhs_head + "'");
        if (section == "algebra") {
            if (op != "d") throw ParseError(lineno, column_of(raw, head), "only diff lines are allowed in [algebra]");
            if (alg_kind != "custom") throw ParseError(lineno, column_of(raw, head), "diff lines in [algebra] need kind = custom");
            custom_diffs.emplace_back(lineno, raw, gen, rhs);
            continue;
        }
        module_seen = true;
        pending.push_back({lineno, raw, op, gen, rhs, raw.find("->") + 2});
    }

    if (!module_seen) {
        if (!out.module && !out.reference && !alg_kind.empty()) throw ParseError(lineno + 1, 1, "no [module] section");
        return out;
    }
    if (out.reference) throw ParseError(1, 1, "a file either uses a catalogue entry or declares a module, not both");
    finish_algebra(lineno);
    const Algebra& a = *alg;
    for (auto& f : free_names) {
        if (!a.has(f)) throw ParseError(free_line, 1, "unknown free variable '" + f + "'");
        pres.free_vars.push_back(a.index(f));
    }
    if (pres.name.empty()) pres.name = "module";
    for (auto& p : pending) {
        auto fail = [&](int off, const std::string& m) { throw ParseError(p.line, static_cast<int>(p.rhs_pos) + 1 + off, m); };
        int src;
        try {
            src = pres.gen_index(p.gen);
        } catch (const std::exception&) {
            throw ParseError(p.line, column_of(p.raw, p.gen), "unknown module generator '" + p.gen + "'");
        }
        std::string opname = p.op;
        if (opname == "mix") {
            opname = mixed_operator(a);
            if (opname.empty()) throw ParseError(p.line, column_of(p.raw, "mix"), "this algebra has no mixed operator");
        }
        int op_index = -1;
        if (opname != "d") {
            if (!a.has(opname)) throw ParseError(p.line, column_of(p.raw, opname), "unknown algebra generator '" + opname + "'");
            op_index = a.index(opname);
        }
        ModuleVector vec;
        for (auto& t : parse_terms(p.rhs, fail)) {
            Poly coef = a.poly(a.one(), t.coef);
            int target = -1;
            for (auto& [f, k] : t.factors) {
                if (a.has(f)) {
                    if (target >= 0) fail(t.offset, "algebra factors must precede the module generator");
                    for (int e = 0; e < k; ++e) coef = a.mul(coef, a.gen_poly(a.index(f)));
                } else {
                    if (target >= 0) fail(t.offset, "a term has two module generators");
                    if (k != 1) fail(t.offset, "a module generator cannot carry a power");
                    try {
                        target = pres.gen_index(f);
                    } catch (const std::exception&) {
                        throw ParseError(p.line, column_of(p.raw, f), "unknown name '" + f + "'");
                    }
                }
            }
            if (target < 0) fail(t.offset, "term has no module generator");
            vec.push_back({coef, target});
        }
        auto& slot = op_index < 0 ? pres.diff[src] : pres.act[op_index][src];
        if (!slot.empty()) throw ParseError(p.line, column_of(p.raw, p.gen), "image of '" + p.gen + "' declared twice");
        // check this declaration on its own so the error points at its line
        ModulePresentation single = pres;
        single.diff.clear();
        single.act.clear();
        (op_index < 0 ? single.diff[src] : single.act[op_index][src]) = vec;
        try {
            check_presentation(single);
        } catch (const InvalidModule& e) {
            throw ParseError(p.line, static_cast<int>(p.rhs_pos) + 1, e.what());
        }
        slot = vec;
    }
    try {
        check_presentation(pres);
    } catch (const InvalidModule& e) {
        throw ParseError(lineno, 1, e.what());
    }
    out.module = pres;
    return out;
}

inline InputFile parse_input_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, 0, "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_input(ss.str());
}

inline bool same_generators(const Algebra& a, const Algebra& b) {
    if (a.size() != b.size()) return false;
    for (int i = 0; i < a.size(); ++i)
        if (a.gen(i).name != b.gen(i).name || !(a.gen(i).grade == b.gen(i).grade) || a.differential(i) != b.differential(i))
            return false;
    return true;
}

/** Algebra section that rebuilds `a`: a catalogue family line, or a custom listing. */
inline std::string serialize_algebra(const Algebra& a) {
    using namespace io_detail;
    std::ostringstream os;
    os << "[algebra]\n";
    switch (a.kind()) {
    case AlgebraKind::bgm_block:
    case AlgebraKind::bgm_dual:
    case AlgebraKind::mixed_de_rham:
    case AlgebraKind::rees_weyl:
        os << "kind = " << to_string(a.kind()) << "\nn = " << a.param() << "\n";
        break;
    case AlgebraKind::bga_block:
    case AlgebraKind::bga_dual: os << "kind = " << to_string(a.kind()) << "\n"; break;
    case AlgebraKind::sym:
    case AlgebraKind::exterior:
        if (a.size() > 0 && same_generators(a, build_catalogue_algebra(to_string(a.kind()), a.size()))) {
            os << "kind = " << to_string(a.kind()) << "\nn = " << a.size() << "\n";
            break;
        }
        [[fallthrough]];
    default:
        os << "kind = custom\n";
        for (auto& g : a.generators()) os << "gen " << g.name << " " << format_grade_fields(g.grade) << "\n";
        for (int i = 0; i < a.size(); ++i)
            if (!a.differential(i).empty()) os << "diff: " << a.gen(i).name << " -> " << a.format(a.differential(i)) << "\n";
    }
    return os.str();
}

/** Module vector in the input syntax: coefficient, algebra word, then the module generator. */
inline std::string format_vector(const ModulePresentation& p, const ModuleVector& v) {
    using namespace io_detail;
    std::string s;
    for (auto& t : v)
        for (auto& [m, c] : t.coef) {
            Q mag = c < 0 ? Q(-c) : c;
            s += s.empty() ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + ");
            if (mag != 1) s += format_coef(mag) + "*";
            for (int i = 0; i < p.algebra.size(); ++i)
                if (m[i]) s += p.algebra.gen(i).name + (m[i] > 1 ? "^" + std::to_string(m[i]) : "") + "*";
            s += p.gens.at(t.gen).name;
        }
    return s;
}

inline std::string serialize(const ModulePresentation& p) {
    using namespace io_detail;
    std::ostringstream os;
    os << serialize_algebra(p.algebra) << "[module]\nname = " << p.name << "\n";
    if (!p.free_vars.empty()) {
        os << "free = ";
        for (std::size_t i = 0; i < p.free_vars.size(); ++i) os << (i ? ", " : "") << p.algebra.gen(p.free_vars[i]).name;
        os << "\n";
    }
    for (auto& g : p.gens) os << "gen " << g.name << " " << format_grade_fields(g.grade) << "\n";
    for (auto& [src, v] : p.diff)
        if (!v.empty()) os << "diff: " << p.gens[src].name << " -> " << format_vector(p, v) << "\n";
    std::string mix = mixed_operator(p.algebra);
    for (auto& [op, rows] : p.act)
        for (auto& [src, v] : rows) {
            if (v.empty()) continue;
            const std::string& name = p.algebra.gen(op).name;
            if (name == mix) os << "mix: " << p.gens[src].name << " -> " << format_vector(p, v) << "\n";
            else os << "act " << name << ": " << p.gens[src].name << " -> " << format_vector(p, v) << "\n";
        }
    return os.str();
}

inline std::string serialize(const CatalogueRef& r) {
    std::ostringstream os;
    const auto& e = catalogue_entry(r.name);
    os << "use " << r.name;
    if (e.needs_n) os << " n=" << r.params.n;
    if (e.needs_m) os << " m=" << r.params.m;
    os << "\n";
    return os.str();
}

/** Serialized form of a catalogue entry: explicit when finitely presented, a `use` line otherwise. */
inline std::string serialize_entry(const CatalogueRef& r) {
    if (auto p = catalogue_presentation(r.name, r.params)) {
        ModulePresentation q = *p;
        q.name = r.name;
        return serialize(q);
    }
    return serialize(r);
}

/** Structural equality of presentations (same algebra shape, generators and images). */
inline bool same_presentation(const ModulePresentation& a, const ModulePresentation& b) {
    if (a.name != b.name || a.algebra.kind() != b.algebra.kind() || a.algebra.param() != b.algebra.param()) return false;
    if (a.algebra.size() != b.algebra.size()) return false;
    for (int i = 0; i < a.algebra.size(); ++i)
        if (a.algebra.gen(i).name != b.algebra.gen(i).name || !(a.algebra.gen(i).grade == b.algebra.gen(i).grade) ||
            a.algebra.differential(i) != b.algebra.differential(i))
            return false;
    if (a.gens.size() != b.gens.size() || a.free_vars != b.free_vars) return false;
    for (std::size_t i = 0; i < a.gens.size(); ++i)
        if (a.gens[i].name != b.gens[i].name || !(a.gens[i].grade == b.gens[i].grade)) return false;
    auto norm = [](const ModuleVector& v) {
        std::map<std::pair<int, Monomial>, Q> out;
        for (auto& t : v)
            for (auto& [m, c] : t.coef) out[{t.gen, m}] += c;
        std::erase_if(out, [](auto& kv) { return kv.second.is_zero(); });
        return out;
    };
    auto same_rows = [&](const std::map<int, ModuleVector>& x, const std::map<int, ModuleVector>& y) {
        for (std::size_t g = 0; g < a.gens.size(); ++g) {
            auto ix = x.find(static_cast<int>(g));
            auto iy = y.find(static_cast<int>(g));
            ModuleVector ex = ix == x.end() ? ModuleVector{} : ix->second;
            ModuleVector ey = iy == y.end() ? ModuleVector{} : iy->second;
            if (norm(ex) != norm(ey)) return false;
        }
        return true;
    };
    if (!same_rows(a.diff, b.diff)) return false;
    for (int op = 0; op < a.algebra.size(); ++op) {
        auto ia = a.act.find(op);
        auto ib = b.act.find(op);
        std::map<int, ModuleVector> ea = ia == a.act.end() ? std::map<int, ModuleVector>{} : ia->second;
        std::map<int, ModuleVector> eb = ib == b.act.end() ? std::map<int, ModuleVector>{} : ib->second;
        if (!same_rows(ea, eb)) return false;
    }
    return true;
}

} // namespace kd
