#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <stdexcept>
#include <string>

namespace kd {

/** @brief Exact rational scalar; GMP keeps it in lowest terms with a positive denominator. */
using Q = boost::multiprecision::mpq_rational;
using Z = boost::multiprecision::mpz_int;

inline bool is_zero(const Q& q) { return q.is_zero(); }

inline std::string to_string(const Q& q) {
    return q.str();
}

/** Parses "7", "-3/4" or "+2". Throws std::invalid_argument on junk. */
inline Q parse_rational(const std::string& text) {
    std::string s = text;
    if (!s.empty() && s[0] == '+') s.erase(0, 1);
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    std::size_t slash = s.find('/');
    auto check_int = [](const std::string& part) {
        std::size_t i = (!part.empty() && part[0] == '-') ? 1 : 0;
        if (i >= part.size()) return false;
        for (; i < part.size(); ++i)
            if (part[i] < '0' || part[i] > '9') return false;
        return true;
    };
    if (slash == std::string::npos) {
        if (!check_int(s)) throw std::invalid_argument("bad rational literal '" + text + "'");
        return Q(Z(s));
    }
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    if (!check_int(num) || !check_int(den) || den[0] == '-')
        throw std::invalid_argument("bad rational literal '" + text + "'");
    Z d(den);
    if (d == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
    return Q(Z(num), d);
}

} // namespace kd
