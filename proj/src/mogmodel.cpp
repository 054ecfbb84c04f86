#include "cfm/mogmodel.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "cfm/linalg.hpp"
#include "cfm/parallel.hpp"

namespace cfm {

std::pair<int, int> HBasis::mul(int x, int y) const {
    if (x == 0) return {1, y};
    if (y == 0) return {1, x};
    if (degree(x) + degree(y) > 2) return {0, 0};
    // both of degree one
    if (x <= g && y == x + g) return {1, nu()};
    if (y <= g && x == y + g) return {-1, nu()};
    return {0, 0};
}

std::string HBasis::name(int c) const {
    if (c == 0) return "1";
    if (c == nu()) return "nu";
    if (c <= g) return "a" + std::to_string(c);
    return "b" + std::to_string(c - g);
}

MogElement::MogElement(int g, std::vector<int> pts) : g_(g), bv_(Presentation::bv(std::move(pts))) {
    if (g < 0 || g > 7) throw std::invalid_argument("genus out of range");
    pts_ = bv_.points;
}

MogElement MogElement::one(int g, std::vector<int> pts) {
    MogElement e(g, std::move(pts));
    e.add_raw({}, 1);
    return e;
}

MogElement MogElement::from_raw(int g, std::vector<int> pts, const std::vector<MSym>& raw, const Q& c) {
    MogElement e(g, std::move(pts));
    e.add_raw(raw, c);
    return e;
}

int MogElement::index_of(int p) const {
    auto it = std::lower_bound(pts_.begin(), pts_.end(), p);
    if (it == pts_.end() || *it != p) return -1;
    return int(it - pts_.begin());
}

// Root (index of the smallest point) of the omega-cluster of every point index.
static std::vector<int> cluster_roots(const std::vector<int>& pts, const Mono& m) {
    std::vector<int> par(pts.size());
    std::iota(par.begin(), par.end(), 0);
    auto find = [&](int x) {
        while (par[x] != x) x = par[x] = par[par[x]];
        return x;
    };
    auto idx = [&](Label l) { return int(std::lower_bound(pts.begin(), pts.end(), lbl::point_of(l)) - pts.begin()); };
    for (Gen x : m) {
        if (is_theta(x)) continue;
        int a = find(idx(glo(x))), b = find(idx(ghi(x)));
        if (a != b) par[std::max(a, b)] = std::min(a, b);
    }
    std::vector<int> r(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) r[i] = find(int(i));
    return r;
}

void MogElement::add_raw(const std::vector<MSym>& raw, const Q& c) {
    if (c == 0) return;
    HBasis H{g_};
    std::vector<std::pair<int, int>> hs;  // (point index, class)
    Mono bv;
    int sign = 1;
    for (const MSym& s : raw) {
        if (s.is_h) {
            int i = index_of(s.point);
            if (i < 0) throw std::invalid_argument("unknown point " + std::to_string(s.point));
            if (s.cls < 0 || s.cls >= H.size()) throw std::invalid_argument("unknown surface class");
            if (s.cls == 0) continue;
            if (H.degree(s.cls) == 1 && bv.n % 2) sign = -sign;
            hs.push_back({i, s.cls});
        } else {
            if (!bv_.ctx.has(glo(s.gen)) || !bv_.ctx.has(ghi(s.gen)))
                throw std::invalid_argument("unknown generator " + gen_token(s.gen));
            if (bv.n == Mono::kCap) return;  // degree beyond any basis element
            bv.push(s.gen);
        }
    }
    AlgTerms t;
    reduce_into(bv, c * sign, bv_.ctx, t);
    for (auto& [m, k] : t) {
        auto root = cluster_roots(pts_, m);
        std::vector<std::pair<int, int>> v;
        for (auto [i, cl] : hs) v.push_back({root[i], cl});
        int s = 1;
        // stable insertion sort with Koszul sign
        for (size_t a = 1; a < v.size(); ++a)
            for (size_t b = a; b > 0 && v[b - 1].first > v[b].first; --b) {
                if (H.degree(v[b - 1].second) == 1 && H.degree(v[b].second) == 1) s = -s;
                std::swap(v[b - 1], v[b]);
            }
        MogKey key;
        key.h.assign(pts_.size(), 0);
        key.bv = m;
        bool zero = false;
        for (auto [i, cl] : v) {
            auto [cc, r] = H.mul(key.h[i], cl);
            if (cc == 0) {
                zero = true;
                break;
            }
            s *= cc;
            key.h[i] = uint8_t(r);
        }
        if (zero) continue;
        auto& val = terms_[key];
        val += k * s;
        if (val == 0) terms_.erase(key);
    }
}

static void same_space(const MogElement& a, const MogElement& b) {
    if (a.genus() != b.genus() || a.points() != b.points()) throw std::invalid_argument("Mo_g space mismatch");
}

MogElement MogElement::operator+(const MogElement& o) const {
    same_space(*this, o);
    MogElement r = *this;
    for (auto& [k, c] : o.terms_) {
        auto& v = r.terms_[k];
        v += c;
        if (v == 0) r.terms_.erase(k);
    }
    return r;
}

MogElement MogElement::operator-(const MogElement& o) const { return *this + o * Q(-1); }

MogElement MogElement::operator*(const Q& c) const {
    MogElement r(g_, pts_);
    if (c == 0) return r;
    for (auto& [k, v] : terms_) r.terms_[k] = v * c;
    return r;
}

std::vector<MSym> MogElement::key_syms(const MogKey& k) const {
    std::vector<MSym> r;
    for (size_t i = 0; i < k.h.size(); ++i)
        if (k.h[i]) r.push_back(MSym::h(pts_[i], k.h[i]));
    for (Gen x : k.bv) r.push_back(MSym::w(x));
    return r;
}

std::string MogElement::key_str(const MogKey& k) const {
    HBasis H{g_};
    std::string s;
    for (const MSym& x : key_syms(k)) {
        if (!s.empty()) s += "*";
        s += x.is_h ? H.name(x.cls) + "_" + std::to_string(x.point) : gen_token(x.gen);
    }
    return s.empty() ? "1" : s;
}

std::string MogElement::str() const {
    if (terms_.empty()) return "0";
    std::string s;
    bool first = true;
    for (auto& [k, c] : terms_) {
        Q a = abs(c);
        s += first ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + ");
        first = false;
        std::string ks = key_str(k);
        if (ks == "1") s += qstr(a);
        else if (a == 1) s += ks;
        else s += qstr(a) + "*" + ks;
    }
    return s;
}

static MSym parse_sym(const HBasis& H, const std::string& tok) {
    auto us = tok.find('_');
    if (tok.find('(') == std::string::npos && us != std::string::npos) {
        std::string head = tok.substr(0, us), pt = tok.substr(us + 1);
        if (pt.empty() || !std::all_of(pt.begin(), pt.end(), ::isdigit)) throw std::invalid_argument("bad token: " + tok);
        int p = std::stoi(pt);
        if (head == "nu") return MSym::h(p, H.nu());
        if (head.size() >= 2 && (head[0] == 'a' || head[0] == 'b') &&
            std::all_of(head.begin() + 1, head.end(), ::isdigit)) {
            int k = std::stoi(head.substr(1));
            if (k < 1 || k > H.g) throw std::invalid_argument("class index out of range: " + tok);
            return MSym::h(p, head[0] == 'a' ? H.a(k) : H.b(k));
        }
        throw std::invalid_argument("bad token: " + tok);
    }
    return MSym::w(parse_gen_token(tok));
}

MogElement MogElement::parse(int g, std::vector<int> pts, const std::string& text) {
    MogElement e(g, std::move(pts));
    HBasis H{g};
    for (auto& [c, toks] : split_terms(text)) {
        std::vector<MSym> raw;
        for (auto& t : toks) raw.push_back(parse_sym(H, t));
        e.add_raw(raw, c);
    }
    return e;
}

int mog_degree(int g, const MogKey& k) {
    HBasis H{g};
    int d = k.bv.n;
    for (auto c : k.h) d += H.degree(c);
    return d;
}

MogElement mog_multiply(const MogElement& a, const MogElement& b) {
    same_space(a, b);
    MogElement r(a.genus(), a.points());
    for (auto& [ka, ca] : a.terms())
        for (auto& [kb, cb] : b.terms()) {
            auto raw = a.key_syms(ka);
            auto rb = b.key_syms(kb);
            raw.insert(raw.end(), rb.begin(), rb.end());
            r.add_raw(raw, ca * cb);
        }
    return r;
}

MogElement mog_differential(const MogElement& a) {
    int g = a.genus();
    HBasis H{g};
    MogElement r(g, a.points());
    for (auto& [k, c] : a.terms()) {
        std::vector<MSym> hs;
        int hdeg = 0;
        for (size_t i = 0; i < k.h.size(); ++i)
            if (k.h[i]) {
                hs.push_back(MSym::h(a.points()[i], k.h[i]));
                hdeg += H.degree(k.h[i]);
            }
        for (int m = 0; m < k.bv.n; ++m) {
            Q sc = ((hdeg + m) % 2 ? -c : c);
            Gen x = k.bv[m];
            std::vector<MSym> rest = hs;
            for (int q = 0; q < k.bv.n; ++q)
                if (q != m) rest.push_back(MSym::w(k.bv[q]));
            // d(x) is even, so it may be placed in front
            auto emit = [&](std::vector<MSym> pre, const Q& cc) {
                pre.insert(pre.end(), rest.begin(), rest.end());
                r.add_raw(pre, sc * cc);
            };
            int i = lbl::point_of(glo(x)), j = lbl::point_of(ghi(x));
            if (is_theta(x)) {
                if (g != 1) emit({MSym::h(i, H.nu())}, 2 - 2 * g);
                continue;
            }
            emit({MSym::h(i, H.nu())}, 1);
            emit({MSym::h(j, H.nu())}, 1);
            for (int q = 1; q <= g; ++q) {
                emit({MSym::h(i, H.a(q)), MSym::h(j, H.b(q))}, -1);
                emit({MSym::h(j, H.a(q)), MSym::h(i, H.b(q))}, -1);
            }
        }
    }
    return r;
}

std::vector<MogKey> mog_basis(int g, const std::vector<int>& pts, int degree) {
    HBasis H{g};
    Presentation P = Presentation::bv(pts);
    std::vector<MogKey> out;
    for (int d = 0; d <= degree; ++d) {
        for (const Mono& m : basis(P, d)) {
            auto root = cluster_roots(P.points, m);
            std::vector<int> roots;
            for (size_t i = 0; i < root.size(); ++i)
                if (root[i] == int(i)) roots.push_back(int(i));
            MogKey key;
            key.h.assign(P.points.size(), 0);
            key.bv = m;
            auto rec = [&](auto&& self, size_t ri, int left) -> void {
                if (ri == roots.size()) {
                    if (left == 0) out.push_back(key);
                    return;
                }
                for (int c = 0; c < H.size(); ++c) {
                    if (H.degree(c) > left) continue;
                    key.h[roots[ri]] = uint8_t(c);
                    self(self, ri + 1, left - H.degree(c));
                }
                key.h[roots[ri]] = 0;
            };
            rec(rec, 0, degree - d);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

MogTensor mog_coaction(const MogElement& a, const std::vector<int>& T, int newlabel) {
    std::set<int> Ts(T.begin(), T.end());
    if (Ts.empty()) throw std::invalid_argument("empty collapse set");
    for (int t : Ts)
        if (a.index_of(t) < 0) throw std::invalid_argument("collapse set not contained in the labels");
    std::vector<int> lpts;
    for (int x : a.points())
        if (!Ts.count(x)) lpts.push_back(x);
    if (std::find(lpts.begin(), lpts.end(), newlabel) != lpts.end()) throw std::invalid_argument("new label clashes");
    lpts.push_back(newlabel);
    std::sort(lpts.begin(), lpts.end());
    MogTensor out{lpts, std::vector<int>(Ts.begin(), Ts.end()), {}};
    HBasis H{a.genus()};
    Context rctx;
    for (int t : Ts) rctx.add(lbl::rpt(t), 0);
    Label n = lbl::pt(newlabel);
    auto inT = [&](Label l) { return Ts.count(lbl::point_of(l)) > 0; };

    for (auto& [k, c] : a.terms()) {
        auto syms = a.key_syms(k);
        std::vector<std::vector<MSym>> imgs(syms.size());
        for (size_t i = 0; i < syms.size(); ++i) {
            const MSym& s = syms[i];
            if (s.is_h) {
                imgs[i].push_back(MSym::h(Ts.count(s.point) ? newlabel : s.point, s.cls));
                continue;
            }
            Label x = glo(s.gen), y = ghi(s.gen);
            bool ix = inT(x), iy = inT(y);
            if (ix && iy) {
                imgs[i].push_back(MSym::w(mkgen(n, n)));
                imgs[i].push_back(MSym::w(mkgen(lbl::rpt(lbl::point_of(x)), lbl::rpt(lbl::point_of(y)))));
            } else {
                imgs[i].push_back(MSym::w(mkgen(ix ? n : x, iy ? n : y)));
            }
        }
        std::vector<size_t> idx(syms.size(), 0);
        while (true) {
            std::vector<MSym> left;
            Mono right;
            int inv = 0;
            for (size_t i = 0; i < syms.size(); ++i) {
                const MSym& s = imgs[i][idx[i]];
                if (!s.is_h && lbl::is_rpt(glo(s.gen))) {
                    right.push(s.gen);
                } else {
                    bool odd = !s.is_h || H.degree(s.cls) == 1;
                    if (odd) inv += right.n;
                    left.push_back(s);
                }
            }
            MogElement L = MogElement::from_raw(a.genus(), lpts, left, inv % 2 ? -c : c);
            AlgTerms R;
            reduce_into(right, 1, rctx, R);
            for (auto& [lk, lc] : L.terms())
                for (auto& [rm, rc] : R) {
                    Mono rr;
                    for (Gen x : rm) rr.push(mkgen(lbl::pt(lbl::point_of(glo(x))), lbl::pt(lbl::point_of(ghi(x)))));
                    auto key = std::make_pair(lk, rr);
                    auto& v = out.terms[key];
                    v += lc * rc;
                    if (v == 0) out.terms.erase(key);
                }
            size_t i = syms.size();
            while (i > 0 && ++idx[i - 1] == imgs[i - 1].size()) idx[--i] = 0;
            if (i == 0) break;
        }
    }
    return out;
}

MogElement extend_points(const MogElement& a, const std::vector<int>& new_labels) {
    std::vector<int> pts = a.points();
    for (int x : new_labels) {
        if (a.index_of(x) >= 0) throw std::invalid_argument("label clash");
        pts.push_back(x);
    }
    MogElement r(a.genus(), pts);
    for (auto& [k, c] : a.terms()) r.add_raw(a.key_syms(k), c);
    return r;
}

CohomologyReport cohomology_ranks(int g, const std::vector<int>& pts, int max_degree) {
    int top = int(2 * pts.size() - 1 + 2 * pts.size());
    if (max_degree < 0 || max_degree > top) max_degree = top;
    std::vector<std::vector<MogKey>> B(max_degree + 2);
    for (int k = 0; k <= max_degree + 1; ++k) {
        auto all = mog_basis(g, pts, k);
        for (auto& key : all)
            if (mog_degree(g, key) == k) B[k].push_back(key);
    }
    CohomologyReport rep;
    for (int k = 0; k <= max_degree; ++k) rep.dims.push_back(long(B[k].size()));
    for (int k = 0; k <= max_degree; ++k) {
        std::map<MogKey, int> col;
        for (size_t i = 0; i < B[k + 1].size(); ++i) col[B[k + 1][i]] = int(i);
        std::vector<QRow> rows(B[k].size());
        parallel_for(B[k].size(), [&](size_t i) {
            MogElement e(g, pts);
            e.terms()[B[k][i]] = 1;
            MogElement d = mog_differential(e);
            for (auto& [dk, dc] : d.terms()) {
                auto it = col.find(dk);
                if (it == col.end()) throw std::logic_error("differential left the basis");
                rows[i][it->second] = dc;
            }
        });
        RowReducer rr;
        for (auto& r : rows)
            if (!r.empty()) rr.add(r);
        rep.ranks.push_back(rr.rank());
    }
    for (int k = 0; k <= max_degree; ++k)
        rep.betti.push_back(rep.dims[k] - rep.ranks[k] - (k ? rep.ranks[k - 1] : 0));
    while (rep.dims.size() > 1 && rep.dims.back() == 0) {
        rep.dims.pop_back();
        rep.ranks.pop_back();
        rep.betti.pop_back();
    }
    return rep;
}

}  // namespace cfm
