#pragma once

// Independent dense oracles shared by the unit tests and the acceptance binary. Nothing here
// calls the engine's complexes; only the dense rank routine is reused.

#include "kd/graded.hpp"

#include <functional>
#include <map>
#include <vector>

namespace kd::oracle {

/// Stupidly truncated de Rham complex of A^n, Omega^{>=k}, with x^alpha dx_S at aux |alpha|+|S|.
inline std::map<int, int> truncated_de_rham(int n, int k, int aux) {
    std::map<int, std::vector<std::pair<std::vector<int>, unsigned>>> deg;
    for (unsigned S = 0; S < (1u << n); ++S) {
        int p = __builtin_popcount(S);
        if (p < k) continue;
        int a = aux - p;
        if (a < 0) continue;
        std::vector<int> al(n, 0);
        std::function<void(int, int)> rec = [&](int i, int left) {
            if (i == n - 1) {
                al[i] = left;
                deg[p].push_back({al, S});
                return;
            }
            for (int v = 0; v <= left; ++v) {
                al[i] = v;
                rec(i + 1, left - v);
            }
        };
        if (n == 0) {
            if (a == 0) deg[p].push_back({al, S});
        } else {
            rec(0, a);
        }
    }
    std::map<int, int> rk;
    for (auto& [p, src] : deg) {
        if (!deg.count(p + 1)) continue;
        auto& tgt = deg[p + 1];
        std::vector<std::vector<Q>> m(tgt.size(), std::vector<Q>(src.size(), Q(0)));
        for (int j = 0; j < (int)src.size(); ++j)
            for (int i = 0; i < n; ++i) {
                auto [al, S] = src[j];
                if ((S >> i) & 1u || al[i] == 0) continue;
                Q c(al[i]);
                if (__builtin_popcount(S & ((1u << i) - 1)) % 2) c = -c;
                al[i] -= 1;
                for (int r = 0; r < (int)tgt.size(); ++r)
                    if (tgt[r].first == al && tgt[r].second == (S | (1u << i))) m[r][j] += c;
            }
        rk[p] = detail::dense_rank(m, (int)src.size());
    }
    std::map<int, int> h;
    for (auto& [p, v] : deg) {
        int d = (int)v.size() - (rk.count(p) ? rk[p] : 0) - (rk.count(p - 1) ? rk[p - 1] : 0);
        if (d) h[p] = d;
    }
    return h;
}

} // namespace kd::oracle
