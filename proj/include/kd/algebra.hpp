#pragma once

#include "kd/grade.hpp"
#include "kd/rational.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace kd {

/** @brief Algebra generator; parity is read off the cohomological degree. */
struct Generator {
    std::string name;
    Trigrade grade;
    /// Normal-form group: 0 base variables, 1 forms/odd, 2 delta/h, 3 xi, 4 t/u.
    int group = 0;
    bool odd() const { return grade.odd(); }
};

/// Exponent vector in normal-form order; odd exponents are 0 or 1.
using Monomial = std::vector<int>;
/// Normal-form polynomial: monomial -> nonzero coefficient.
using Poly = std::map<Monomial, Q>;

enum class AlgebraKind { sym, exterior, mixed_de_rham, rees_weyl, bgm_block, bgm_dual, bga_block, bga_dual, custom };

inline std::string to_string(AlgebraKind k) {
    switch (k) {
    case AlgebraKind::sym: return "sym";
    case AlgebraKind::exterior: return "exterior";
    case AlgebraKind::mixed_de_rham: return "mixed_de_rham";
    case AlgebraKind::rees_weyl: return "rees_weyl";
    case AlgebraKind::bgm_block: return "bgm_block";
    case AlgebraKind::bgm_dual: return "bgm_dual";
    case AlgebraKind::bga_block: return "bga_block";
    case AlgebraKind::bga_dual: return "bga_dual";
    case AlgebraKind::custom: return "custom";
    }
    return "custom";
}

struct UnknownGenerator : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InfinitePiece : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonHomogeneous : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline void add_to(Poly& p, const Monomial& m, const Q& c) {
    if (c.is_zero()) return;
    auto it = p.find(m);
    if (it == p.end()) p.emplace(m, c);
    else {
        it->second += c;
        if (it->second.is_zero()) p.erase(it);
    }
}
inline void add_to(Poly& p, const Poly& q, const Q& scale = Q(1)) {
    for (const auto& [m, c] : q) add_to(p, m, c * scale);
}

/**
 * @brief Finite presentation with PBW rewriting: every ordered pair i > j carries a rule
 * g_i g_j -> sign * g_j g_i + correction, odd generators square to zero, and a differential
 * on generators extended by the Leibniz rule.
 */
class Algebra {
public:
    struct SwapRule {
        int sign = 1;
        Poly correction;  // normal form, strictly lower in the PBW order
    };

    Algebra() = default;
    Algebra(AlgebraKind kind, std::vector<Generator> gens) : kind_(kind), gens_(std::move(gens)) {
        for (std::size_t i = 0; i < gens_.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (gens_[i].name == gens_[j].name)
                    throw std::invalid_argument("duplicate generator '" + gens_[i].name + "'");
        for (std::size_t i = 1; i < gens_.size(); ++i)
            if (gens_[i].group < gens_[i - 1].group)
                throw std::invalid_argument("generators must be listed in normal-form order");
        dgen_.assign(gens_.size(), Poly{});
        cache_ = std::make_shared<Cache>();
    }

    AlgebraKind kind() const { return kind_; }
    int param() const { return param_; }
    void set_param(int p) { param_ = p; }
    const std::string& label() const { return label_; }
    void set_label(std::string s) { label_ = std::move(s); }

    int size() const { return static_cast<int>(gens_.size()); }
    const std::vector<Generator>& generators() const { return gens_; }
    const Generator& gen(int i) const { return gens_.at(i); }
    int index(const std::string& name) const {
        for (int i = 0; i < size(); ++i)
            if (gens_[i].name == name) return i;
        throw UnknownGenerator("unknown generator '" + name + "'");
    }
    bool has(const std::string& name) const {
        return std::any_of(gens_.begin(), gens_.end(), [&](const Generator& g) { return g.name == name; });
    }

    /// Declares g_i g_j = sign g_j g_i + correction for i > j.
    void set_rule(int i, int j, int sign, Poly correction) {
        if (i <= j) throw std::invalid_argument("rules are declared for i > j in normal-form order");
        rules_[{i, j}] = SwapRule{sign, std::move(correction)};
        cache_ = std::make_shared<Cache>();
    }
    SwapRule rule(int i, int j) const {
        auto it = rules_.find({i, j});
        if (it != rules_.end()) return it->second;
        int s = (gens_[i].odd() && gens_[j].odd()) ? -1 : 1;
        return SwapRule{s, {}};
    }
    const std::map<std::pair<int, int>, SwapRule>& explicit_rules() const { return rules_; }

    void set_differential(int i, Poly p) {
        dgen_.at(i) = std::move(p);
        cache_ = std::make_shared<Cache>();
    }
    const Poly& differential(int i) const { return dgen_.at(i); }
    bool has_differential() const {
        return std::any_of(dgen_.begin(), dgen_.end(), [](const Poly& p) { return !p.empty(); });
    }

    Monomial one() const { return Monomial(gens_.size(), 0); }
    Monomial unit(int i) const {
        Monomial m = one();
        m[i] = 1;
        return m;
    }
    Poly poly(const Monomial& m, const Q& c = Q(1)) const {
        Poly p;
        add_to(p, m, c);
        return p;
    }
    Poly gen_poly(int i) const { return poly(unit(i)); }

    Trigrade grade(const Monomial& m) const {
        Trigrade g;
        for (int i = 0; i < size(); ++i) g = g + gens_[i].grade * m[i];
        return g;
    }
    bool odd(const Monomial& m) const { return grade(m).odd(); }

    /// Generator word of a normal monomial, in order.
    std::vector<int> word(const Monomial& m) const {
        std::vector<int> w;
        for (int i = 0; i < size(); ++i)
            for (int k = 0; k < m[i]; ++k) w.push_back(i);
        return w;
    }

    /** g_i * m, normal form (left strategy). */
    Poly left_mult(int i, const Monomial& m) const {
        {
            std::lock_guard<std::mutex> lock(cache_->mu);
            auto it = cache_->left.find({i, m});
            if (it != cache_->left.end()) return it->second;
        }
        Poly out;
        int j = first_index(m);
        if (j < 0 || i < j) {
            Monomial r = m;
            r[i] += 1;
            out[r] = 1;
        } else if (i == j) {
            if (!gens_[i].odd()) {
                Monomial r = m;
                r[i] += 1;
                out[r] = 1;
            }
        } else {
            Monomial rest = m;
            rest[j] -= 1;
            SwapRule rl = rule(i, j);
            Poly inner = left_mult(i, rest);
            for (const auto& [mm, c] : inner) add_to(out, left_mult(j, mm), c * rl.sign);
            for (const auto& [cm, cc] : rl.correction) add_to(out, mul_left_strategy(cm, rest), cc);
        }
        std::lock_guard<std::mutex> lock(cache_->mu);
        cache_->left.emplace(std::make_pair(i, m), out);
        return out;
    }

    /** m * g_i, normal form (right strategy). */
    Poly right_mult(const Monomial& m, int i) const {
        {
            std::lock_guard<std::mutex> lock(cache_->mu);
            auto it = cache_->right.find({i, m});
            if (it != cache_->right.end()) return it->second;
        }
        Poly out;
        int j = last_index(m);
        if (j < 0 || i > j) {
            Monomial r = m;
            r[i] += 1;
            out[r] = 1;
        } else if (i == j) {
            if (!gens_[i].odd()) {
                Monomial r = m;
                r[i] += 1;
                out[r] = 1;
            }
        } else {
            Monomial rest = m;
            rest[j] -= 1;
            SwapRule rl = rule(j, i);  // g_j g_i = s g_i g_j + c
            Poly inner = right_mult(rest, i);
            for (const auto& [mm, c] : inner) add_to(out, right_mult(mm, j), c * rl.sign);
            for (const auto& [cm, cc] : rl.correction) add_to(out, mul_right_strategy(rest, cm), cc);
        }
        std::lock_guard<std::mutex> lock(cache_->mu);
        cache_->right.emplace(std::make_pair(i, m), out);
        return out;
    }

    /// a*b by pushing the generators of a onto b from the left.
    Poly mul_left_strategy(const Monomial& a, const Monomial& b) const {
        Poly cur = poly(b);
        auto w = word(a);
        for (auto it = w.rbegin(); it != w.rend(); ++it) {
            Poly next;
            for (const auto& [m, c] : cur) add_to(next, left_mult(*it, m), c);
            cur.swap(next);
        }
        return cur;
    }
    /// a*b by pushing the generators of b onto a from the right.
    Poly mul_right_strategy(const Monomial& a, const Monomial& b) const {
        Poly cur = poly(a);
        for (int g : word(b)) {
            Poly next;
            for (const auto& [m, c] : cur) add_to(next, right_mult(m, g), c);
            cur.swap(next);
        }
        return cur;
    }

    Poly mul(const Poly& p, const Poly& q) const {
        Poly out;
        for (const auto& [a, ca] : p)
            for (const auto& [b, cb] : q) add_to(out, mul_left_strategy(a, b), ca * cb);
        return out;
    }
    Poly mul(const Monomial& a, const Monomial& b) const { return mul_left_strategy(a, b); }

    /// Normal form of a word of generator indices with a coefficient.
    Poly normal_form(const std::vector<int>& w, const Q& c = Q(1)) const {
        Poly cur = poly(one(), c);
        for (auto it = w.rbegin(); it != w.rend(); ++it) {
            Poly next;
            for (const auto& [m, cc] : cur) add_to(next, left_mult(*it, m), cc);
            cur.swap(next);
        }
        return cur;
    }

    /** Differential of a normal monomial via d(g * rest) = d(g) rest + (-1)^{|g|} g d(rest). */
    Poly d(const Monomial& m) const {
        {
            std::lock_guard<std::mutex> lock(cache_->mu);
            auto it = cache_->diff.find(m);
            if (it != cache_->diff.end()) return it->second;
        }
        Poly out;
        int j = first_index(m);
        if (j >= 0) {
            Monomial rest = m;
            rest[j] -= 1;
            for (const auto& [dm, dc] : dgen_[j]) add_to(out, mul_left_strategy(dm, rest), dc);
            Poly drest = d(rest);
            Q s = gens_[j].odd() ? Q(-1) : Q(1);
            for (const auto& [rm, rc] : drest) add_to(out, left_mult(j, rm), rc * s);
        }
        std::lock_guard<std::mutex> lock(cache_->mu);
        cache_->diff.emplace(m, out);
        return out;
    }
    Poly d(const Poly& p) const {
        Poly out;
        for (const auto& [m, c] : p) add_to(out, d(m), c);
        return out;
    }

    /// Grade of a homogeneous polynomial; throws NonHomogeneous otherwise.
    std::optional<Trigrade> homogeneous_grade(const Poly& p) const {
        std::optional<Trigrade> g;
        for (const auto& [m, c] : p) {
            Trigrade h = grade(m);
            if (g && !(*g == h))
                throw NonHomogeneous("polynomial mixes trigrades " + to_string(*g) + " and " + to_string(h));
            g = h;
        }
        return g;
    }

    std::string format(const Monomial& m) const {
        std::ostringstream os;
        bool first = true;
        for (int i = 0; i < size(); ++i) {
            if (m[i] == 0) continue;
            if (!first) os << "*";
            first = false;
            os << gens_[i].name;
            if (m[i] > 1) os << "^" << m[i];
        }
        if (first) os << "1";
        return os.str();
    }
    std::string format(const Poly& p) const {
        if (p.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [m, c] : p) {
            bool is_one = std::all_of(m.begin(), m.end(), [](int e) { return e == 0; });
            Q a = abs(c);
            if (!first) os << (c < 0 ? " - " : " + ");
            else if (c < 0) os << "-";
            first = false;
            if (is_one) os << a.str();
            else if (a == 1) os << format(m);
            else os << a.str() << "*" << format(m);
        }
        return os.str();
    }

private:
    struct Cache {
        std::mutex mu;
        std::map<std::pair<int, Monomial>, Poly> left, right;
        std::map<Monomial, Poly> diff;
    };

    int first_index(const Monomial& m) const {
        for (int i = 0; i < size(); ++i)
            if (m[i] > 0) return i;
        return -1;
    }
    int last_index(const Monomial& m) const {
        for (int i = size() - 1; i >= 0; --i)
            if (m[i] > 0) return i;
        return -1;
    }

    AlgebraKind kind_ = AlgebraKind::custom;
    int param_ = 0;
    std::string label_;
    std::vector<Generator> gens_;
    std::map<std::pair<int, int>, SwapRule> rules_;
    std::vector<Poly> dgen_;
    std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

using AlgebraPtr = std::shared_ptr<const Algebra>;

// ---------------------------------------------------------------------------------------------
// Graded pieces

namespace detail {

/// Positive functional on the even generators, or nullopt when some piece is infinite.
inline std::optional<Trigrade> finiteness_functional(const Algebra& a) {
    for (int s = 1; s <= 3; ++s)
        for (int cd = -s; cd <= s; ++cd)
            for (int cw = -s; cw <= s; ++cw)
                for (int ca = -s; ca <= s; ++ca) {
                    bool ok = true;
                    for (const auto& g : a.generators()) {
                        if (g.odd()) continue;
                        int v = cd * g.grade.deg + cw * g.grade.wt + ca * g.grade.aux;
                        if (v <= 0) {
                            ok = false;
                            break;
                        }
                    }
                    if (ok) return Trigrade{cd, cw, ca};
                }
    return std::nullopt;
}

inline int apply_functional(const Trigrade& f, const Trigrade& g) { return f.deg * g.deg + f.wt * g.wt + f.aux * g.aux; }

} // namespace detail

/**
 * Every normal monomial of the given trigrade, aux allowed to be any integer. Used internally:
 * individual generators such as xi carry negative aux.
 */
inline std::vector<Monomial> enumerate_monomials(const Algebra& a, const Trigrade& target) {
    auto f = detail::finiteness_functional(a);
    if (!f) throw InfinitePiece("pieces of this presentation are infinite-dimensional (no positive grading)");
    int budget_total = detail::apply_functional(*f, target);
    int odd_min = 0;
    for (const auto& g : a.generators())
        if (g.odd()) odd_min += std::min(0, detail::apply_functional(*f, g.grade));
    std::vector<Monomial> out;
    Monomial cur = a.one();
    const int n = a.size();
    std::function<void(int, Trigrade, int)> rec = [&](int i, Trigrade acc, int used) {
        if (i == n) {
            if (acc == target) out.push_back(cur);
            return;
        }
        const auto& g = a.gen(i);
        int fv = detail::apply_functional(*f, g.grade);
        int maxe;
        if (g.odd()) maxe = 1;
        else maxe = (budget_total - odd_min - used) / fv;
        for (int e = 0; e <= maxe; ++e) {
            cur[i] = e;
            int u = used + (g.odd() ? 0 : e * fv);
            if (!g.odd() && u > budget_total - odd_min) break;
            rec(i + 1, acc + g.grade * e, u);
        }
        cur[i] = 0;
    };
    rec(0, Trigrade{0, 0, 0}, 0);
    std::sort(out.begin(), out.end(), [](const Monomial& x, const Monomial& y) {
        int dx = 0, dy = 0;
        for (int e : x) dx += e;
        for (int e : y) dy += e;
        if (dx != dy) return dx < dy;
        return x > y;  // deg-lex: earlier generators first
    });
    return out;
}

/** Complete monomial basis of a piece; pieces with negative aux are never materialized. */
inline std::vector<Monomial> graded_piece(const Algebra& a, const Trigrade& g) {
    if (g.aux < 0) return {};
    return enumerate_monomials(a, g);
}

// ---------------------------------------------------------------------------------------------
// Invariant checks

struct AlgebraCheck {
    bool ok = true;
    std::vector<std::string> failures;
    int checked = 0;
    void fail(std::string s) {
        ok = false;
        failures.push_back(std::move(s));
    }
};

/** Both reassociation orders of every generator triple agree. */
inline AlgebraCheck check_confluence(const Algebra& a) {
    AlgebraCheck r;
    for (int i = 0; i < a.size(); ++i)
        for (int j = 0; j < a.size(); ++j)
            for (int k = 0; k < a.size(); ++k) {
                // (g_i g_j) g_k via right pushes; g_i (g_j g_k) via left pushes
                Poly left_first;
                for (const auto& [m, c] : a.right_mult(a.unit(i), j)) add_to(left_first, a.right_mult(m, k), c);
                Poly right_first;
                for (const auto& [m, c] : a.left_mult(j, a.unit(k))) add_to(right_first, a.left_mult(i, m), c);
                ++r.checked;
                if (left_first != right_first)
                    r.fail("confluence fails on " + a.gen(i).name + "*" + a.gen(j).name + "*" + a.gen(k).name + ": " +
                           a.format(left_first) + " vs " + a.format(right_first));
            }
    return r;
}

/** d(a b) = d(a) b + (-1)^{|a|} a d(b) for all generator pairs. */
inline AlgebraCheck check_leibniz(const Algebra& a) {
    AlgebraCheck r;
    for (int i = 0; i < a.size(); ++i)
        for (int j = 0; j < a.size(); ++j) {
            Poly prod = a.mul(a.gen_poly(i), a.gen_poly(j));
            Poly lhs = a.d(prod);
            Poly rhs = a.mul(a.differential(i), a.gen_poly(j));
            add_to(rhs, a.mul(a.gen_poly(i), a.differential(j)), a.gen(i).odd() ? Q(-1) : Q(1));
            ++r.checked;
            if (lhs != rhs)
                r.fail("Leibniz fails on " + a.gen(i).name + "*" + a.gen(j).name + ": " + a.format(lhs) + " vs " +
                       a.format(rhs));
        }
    return r;
}

inline AlgebraCheck check_d_squared(const Algebra& a) {
    AlgebraCheck r;
    for (int i = 0; i < a.size(); ++i) {
        ++r.checked;
        Poly dd = a.d(a.differential(i));
        if (!dd.empty()) r.fail("d^2(" + a.gen(i).name + ") = " + a.format(dd));
    }
    return r;
}

/** Every rewrite correction and every differential image is trigrade-homogeneous of the right grade. */
inline AlgebraCheck check_homogeneity(const Algebra& a) {
    AlgebraCheck r;
    for (const auto& [ij, rl] : a.explicit_rules()) {
        ++r.checked;
        Trigrade want = a.gen(ij.first).grade + a.gen(ij.second).grade;
        for (const auto& [m, c] : rl.correction)
            if (!(a.grade(m) == want))
                r.fail("rule " + a.gen(ij.first).name + a.gen(ij.second).name + " has term of grade " +
                       to_string(a.grade(m)) + " but needs " + to_string(want));
    }
    for (int i = 0; i < a.size(); ++i) {
        ++r.checked;
        Trigrade want = a.gen(i).grade + kDiffShift;
        for (const auto& [m, c] : a.differential(i))
            if (!(a.grade(m) == want))
                r.fail("d(" + a.gen(i).name + ") has term of grade " + to_string(a.grade(m)) + " but needs " +
                       to_string(want));
    }
    return r;
}

/** Throws on any failed presentation invariant. */
inline void validate_presentation(const Algebra& a) {
    for (auto chk : {check_homogeneity(a), check_confluence(a), check_leibniz(a), check_d_squared(a)})
        if (!chk.ok) throw std::invalid_argument("invalid presentation: " + chk.failures.front());
}

// ---------------------------------------------------------------------------------------------
// Builders

/// Graded-commutative algebra on the given generators (sym of evens, exterior on odds).
inline Algebra make_sym(std::vector<Generator> gens, AlgebraKind kind = AlgebraKind::sym) {
    std::stable_sort(gens.begin(), gens.end(), [](const Generator& x, const Generator& y) { return x.group < y.group; });
    return Algebra(kind, std::move(gens));
}

namespace detail {
inline std::string indexed(const std::string& base, int i, int n) { return n == 1 ? base : base + std::to_string(i + 1); }
} // namespace detail

/**
 * Mixed de Rham algebra of affine n-space: forms with an odd delta whose commutator with a form
 * is its de Rham differential. Coconnective grading puts dx and delta at (1,-1).
 */
inline Algebra make_mixed_de_rham(int n, bool connective = false) {
    if (n < 0) throw std::invalid_argument("mixed_de_rham needs n >= 0");
    std::vector<Generator> g;
    int fd = connective ? -1 : 1;
    for (int i = 0; i < n; ++i) g.push_back({detail::indexed("x", i, n), {0, 0, 1}, 0});
    for (int i = 0; i < n; ++i) g.push_back({detail::indexed("dx", i, n), {fd, -1, 1}, 1});
    g.push_back({"delta", {fd, -1, 0}, 2});
    Algebra a(AlgebraKind::mixed_de_rham, g);
    a.set_param(n);
    int delta = 2 * n;
    for (int i = 0; i < n; ++i) {
        Poly corr;
        corr[a.unit(n + i)] = 1;
        a.set_rule(delta, i, 1, corr);  // delta x_i = x_i delta + dx_i
    }
    return a;
}

/** Rees algebra of differential operators on affine n-space: [xi_i, x_j] = delta_ij t, t central. */
inline Algebra make_rees_weyl(int n) {
    if (n < 0) throw std::invalid_argument("rees_weyl needs n >= 0");
    std::vector<Generator> g;
    for (int i = 0; i < n; ++i) g.push_back({detail::indexed("x", i, n), {0, 0, 1}, 0});
    for (int i = 0; i < n; ++i) g.push_back({detail::indexed("xi", i, n), {0, 1, -1}, 3});
    g.push_back({"t", {0, 1, 0}, 4});
    Algebra a(AlgebraKind::rees_weyl, g);
    a.set_param(n);
    for (int i = 0; i < n; ++i) {
        Poly corr;
        corr[a.unit(2 * n)] = 1;
        a.set_rule(n + i, i, 1, corr);  // xi_i x_i = x_i xi_i + t
    }
    return a;
}

/** Block of the mixed side for character n of G_m: k[x, delta], d(delta) = n x. */
inline Algebra make_bgm_block(int n) {
    Algebra a(AlgebraKind::bgm_block, {{"x", {0, -1, 0}, 0}, {"delta", {-1, -1, 0}, 2}});
    a.set_param(n);
    if (n != 0) a.set_differential(1, a.poly(a.unit(0), Q(n)));
    return a;
}

/** Dual block k[t, h_x], d(h_x) = n t. */
inline Algebra make_bgm_dual(int n) {
    Algebra a(AlgebraKind::bgm_dual, {{"h_x", {-1, 1, 0}, 2}, {"t", {0, 1, 0}, 4}});
    a.set_param(n);
    if (n != 0) a.set_differential(0, a.poly(a.unit(1), Q(n)));
    return a;
}

/** k[x, y, delta], d(delta) = x y. */
inline Algebra make_bga_block() {
    Algebra a(AlgebraKind::bga_block, {{"x", {0, -1, 0}, 0}, {"y", {0, 0, 0}, 0}, {"delta", {-1, -1, 0}, 2}});
    Monomial xy = a.one();
    xy[0] = 1;
    xy[1] = 1;
    a.set_differential(2, a.poly(xy));
    return a;
}

/** k[y, h_x, t], d(h_x) = y t. */
inline Algebra make_bga_dual() {
    Algebra a(AlgebraKind::bga_dual, {{"y", {0, 0, 0}, 0}, {"h_x", {-1, 1, 0}, 2}, {"t", {0, 1, 0}, 4}});
    Monomial yt = a.one();
    yt[0] = 1;
    yt[2] = 1;
    a.set_differential(1, a.poly(yt));
    return a;
}

/** Named families reachable from the command line. */
inline Algebra build_catalogue_algebra(const std::string& kind, int n) {
    if (kind == "mixed_de_rham") {
        if (n < 1) throw std::invalid_argument("mixed_de_rham needs n >= 1");
        return make_mixed_de_rham(n);
    }
    if (kind == "rees_weyl") {
        if (n < 1) throw std::invalid_argument("rees_weyl needs n >= 1");
        return make_rees_weyl(n);
    }
    if (kind == "bgm_block") return make_bgm_block(n);
    if (kind == "bgm_dual") return make_bgm_dual(n);
    if (kind == "bga_block") return make_bga_block();
    if (kind == "bga_dual") return make_bga_dual();
    if (kind == "sym") {
        if (n < 1) throw std::invalid_argument("sym needs at least one generator");
        std::vector<Generator> g;
        for (int i = 0; i < n; ++i) g.push_back({detail::indexed("z", i, n), {0, 0, 0}, 0});
        return make_sym(g);
    }
    if (kind == "exterior") {
        if (n < 1) throw std::invalid_argument("exterior needs at least one generator");
        std::vector<Generator> g;
        for (int i = 0; i < n; ++i) g.push_back({detail::indexed("e", i, n), {-1, 0, 0}, 1});
        return make_sym(g, AlgebraKind::exterior);
    }
    throw std::invalid_argument("unknown algebra kind '" + kind + "'");
}

/**
 * Associated graded of a Rees-type presentation: t is sent to zero. The result is checked to
 * be graded-commutative.
 */
inline Algebra associated_graded(const Algebra& a) {
    if (a.label() == "gr") return a;  // already an associated graded: idempotent
    if (!a.has("t")) throw std::invalid_argument("associated_graded: presentation has no Rees parameter t");
    int ti = a.index("t");
    std::vector<Generator> g;
    std::vector<int> keep;
    for (int i = 0; i < a.size(); ++i)
        if (i != ti) {
            g.push_back(a.gen(i));
            keep.push_back(i);
        }
    Algebra out(AlgebraKind::sym, g);
    out.set_label("gr");
    auto project = [&](const Poly& p) {
        Poly q;
        for (const auto& [m, c] : p) {
            if (m[ti] != 0) continue;
            Monomial r;
            for (int i : keep) r.push_back(m[i]);
            add_to(q, r, c);
        }
        return q;
    };
    for (const auto& [ij, rl] : a.explicit_rules()) {
        if (ij.first == ti || ij.second == ti) continue;
        auto pos = [&](int i) { return static_cast<int>(std::find(keep.begin(), keep.end(), i) - keep.begin()); };
        Poly corr = project(rl.correction);
        int defsign = (a.gen(ij.first).odd() && a.gen(ij.second).odd()) ? -1 : 1;
        if (!corr.empty() || rl.sign != defsign) out.set_rule(pos(ij.first), pos(ij.second), rl.sign, corr);
    }
    for (int k = 0; k < static_cast<int>(keep.size()); ++k) out.set_differential(k, project(a.differential(keep[k])));
    // commutativity check on generator pairs
    for (int i = 0; i < out.size(); ++i)
        for (int j = 0; j < out.size(); ++j) {
            Poly ab = out.mul(out.gen_poly(i), out.gen_poly(j));
            Poly ba = out.mul(out.gen_poly(j), out.gen_poly(i));
            Q s = (out.gen(i).odd() && out.gen(j).odd()) ? Q(-1) : Q(1);
            Poly diff = ab;
            add_to(diff, ba, -s);
            if (!diff.empty()) throw std::logic_error("associated graded is not commutative");
        }
    return out;
}

} // namespace kd
