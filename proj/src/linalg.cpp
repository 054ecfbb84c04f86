#include "cfm/linalg.hpp"

namespace cfm {

namespace {
void make_primitive(std::map<int, mpz_class>& r) {
    mpz_class g = 0;
    for (auto& [c, v] : r) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), v.get_mpz_t());
    if (g > 1)
        for (auto& [c, v] : r) mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), g.get_mpz_t());
    if (!r.empty() && r.begin()->second < 0)
        for (auto& [c, v] : r) v = -v;
}
}  // namespace

bool RowReducer::add(const QRow& row) {
    mpz_class den = 1;
    for (auto& [c, v] : row)
        if (v != 0) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), v.get_den_mpz_t());
    ZRow r;
    for (auto& [c, v] : row)
        if (v != 0) r[c] = mpz_class(v.get_num() * (den / v.get_den()));
    make_primitive(r);
    while (!r.empty()) {
        auto it = pivots_.find(r.begin()->first);
        if (it == pivots_.end()) {
            int lead = r.begin()->first;
            pivots_.emplace(lead, std::move(r));
            return true;
        }
        const ZRow& p = it->second;
        mpz_class a = p.begin()->second, b = r.begin()->second;
        // r <- a*r - b*p
        for (auto& [c, v] : r) v *= a;
        for (auto& [c, v] : p) {
            auto [jt, fresh] = r.try_emplace(c, 0);
            jt->second -= b * v;
            if (jt->second == 0) r.erase(jt);
        }
        make_primitive(r);
    }
    return false;
}

long rank_exact(const std::vector<QRow>& rows) {
    RowReducer red;
    for (auto& r : rows) red.add(r);
    return red.rank();
}

}  // namespace cfm
