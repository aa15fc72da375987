#pragma once

#include <compare>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>

namespace kd {

/** @brief (cohomological degree, internal weight, auxiliary polynomial degree). */
struct Trigrade {
    int deg = 0;
    int wt = 0;
    int aux = 0;

    auto operator<=>(const Trigrade&) const = default;

    Trigrade operator+(const Trigrade& o) const { return {deg + o.deg, wt + o.wt, aux + o.aux}; }
    Trigrade operator-(const Trigrade& o) const { return {deg - o.deg, wt - o.wt, aux - o.aux}; }
    Trigrade operator-() const { return {-deg, -wt, -aux}; }
    Trigrade operator*(int k) const { return {deg * k, wt * k, aux * k}; }

    bool odd() const { return (deg % 2) != 0; }
};

inline const Trigrade kDiffShift{1, 0, 0};

inline std::string to_string(const Trigrade& g) {
    std::ostringstream os;
    os << "(" << g.deg << "," << g.wt << "," << g.aux << ")";
    return os.str();
}

/// Thrown whenever a computation would need a piece outside the materialized region.
struct WindowOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/**
 * @brief Finite trigraded region. Only 0 <= aux <= aux_max is ever materialized.
 *
 * Every differential in the engine has shift (+1,0,0) and preserves (wt, aux), so a piece
 * is certified exactly when both of its degree neighbours are inside the region.
 */
struct Window {
    int deg_min = -8, deg_max = 8;
    int wt_min = -6, wt_max = 6;
    int aux_max = 8;

    bool operator==(const Window&) const = default;

    bool contains(const Trigrade& g) const {
        return g.deg >= deg_min && g.deg <= deg_max && g.wt >= wt_min && g.wt <= wt_max && g.aux >= 0 &&
               g.aux <= aux_max;
    }
    bool certified(const Trigrade& g) const {
        return contains(g) && g.deg > deg_min && g.deg < deg_max;
    }
    void validate() const {
        if (deg_min > deg_max || wt_min > wt_max || aux_max < 0)
            throw std::invalid_argument("window bounds are inverted or aux_max is negative");
    }
    Window widened(int ddeg, int dwt, int daux) const {
        return {deg_min - ddeg, deg_max + ddeg, wt_min - dwt, wt_max + dwt, aux_max + daux};
    }
};

inline std::string to_string(const Window& w) {
    std::ostringstream os;
    os << "d=" << w.deg_min << ".." << w.deg_max << ",w=" << w.wt_min << ".." << w.wt_max << ",a=" << w.aux_max;
    return os.str();
}

/** Parses "d=-6..6,w=-6..6,a=8"; omitted keys keep their defaults. */
inline Window parse_window(const std::string& text) {
    Window w;
    std::stringstream ss(text);
    std::string item;
    auto parse_range = [&](const std::string& v, int& lo, int& hi) {
        auto dots = v.find("..");
        if (dots == std::string::npos) throw std::invalid_argument("expected lo..hi in '" + v + "'");
        lo = std::stoi(v.substr(0, dots));
        hi = std::stoi(v.substr(dots + 2));
    };
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("bad window component '" + item + "'");
        std::string key = item.substr(0, eq), val = item.substr(eq + 1);
        try {
            if (key == "d") parse_range(val, w.deg_min, w.deg_max);
            else if (key == "w") parse_range(val, w.wt_min, w.wt_max);
            else if (key == "a") w.aux_max = std::stoi(val);
            else throw std::invalid_argument("unknown window key '" + key + "'");
        } catch (const std::logic_error& e) {
            throw std::invalid_argument(std::string("bad window '") + text + "': " + e.what());
        }
    }
    w.validate();
    return w;
}

} // namespace kd
