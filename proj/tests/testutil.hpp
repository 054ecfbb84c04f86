#pragma once
#include <random>

#include "cfm/exactpoly.hpp"

namespace testutil {

inline std::mt19937_64& rng() {
    static std::mt19937_64 g(20261016);
    return g;
}

inline int rint(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng()); }

inline cfm::Q rq() { return cfm::frac(rint(-6, 6), rint(1, 4)); }

// random form with polynomial degree <= maxdeg and the given form degree (or any if -1)
inline cfm::PolyForm random_form(const cfm::Shape& s, int maxdeg, int formdeg = -1, int nterms = 4) {
    cfm::PolyForm f(s);
    int n = s.nvars();
    for (int i = 0; i < nterms; ++i) {
        cfm::PolyKey k;
        int budget = rint(0, maxdeg);
        for (int b = 0; b < budget; ++b) {
            int v = rint(0, n - 1);
            k.set_exp(v, k.exp(v) + 1);
        }
        if (formdeg < 0) {
            for (int v = 0; v < n; ++v)
                if (rint(0, 2) == 0) k.dt |= uint8_t(1u << v);
        } else {
            std::vector<int> vs(n);
            for (int v = 0; v < n; ++v) vs[v] = v;
            std::shuffle(vs.begin(), vs.end(), rng());
            for (int j = 0; j < formdeg && j < n; ++j) k.dt |= uint8_t(1u << vs[j]);
        }
        cfm::add_term(f.terms(), k, rq());
    }
    return f;
}

}  // namespace testutil
