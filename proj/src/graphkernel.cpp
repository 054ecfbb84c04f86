#include "cfm/graphkernel.hpp"

#include <algorithm>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cfm {

namespace {

// Sorts codes in place with the Koszul sign of the odd entries; 0 if an odd entry repeats.
int sort_codes(std::vector<uint32_t>& c, const HBasis& H) {
    int s = 1;
    for (size_t a = 1; a < c.size(); ++a)
        for (size_t b = a; b > 0 && c[b - 1] > c[b]; --b) {
            if (GSym::from_code(c[b - 1]).odd(H) && GSym::from_code(c[b]).odd(H)) s = -s;
            std::swap(c[b - 1], c[b]);
        }
    for (size_t a = 1; a < c.size(); ++a)
        if (c[a] == c[a - 1] && GSym::from_code(c[a]).odd(H)) return 0;
    return s;
}

struct DSU {
    std::vector<int> p;
    explicit DSU(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
    void unite(int a, int b) { p[find(a)] = find(b); }
};

// Koszul sign of moving the entries selected by pick to the front, keeping relative orders.
int front_sign(const std::vector<GSym>& w, const std::vector<bool>& pick, const HBasis& H) {
    int passed = 0, s = 1;
    for (size_t i = 0; i < w.size(); ++i) {
        if (!w[i].odd(H)) continue;
        if (pick[i]) {
            if (passed % 2) s = -s;
        } else {
            ++passed;
        }
    }
    return s;
}

}  // namespace

std::pair<int, GraphKey> canonicalize(int g, int r, int k, const std::vector<GSym>& word) {
    HBasis H{g};
    int n = r + k;
    for (const GSym& s : word) {
        if (s.u >= n || s.v >= n) throw std::invalid_argument("graph vertex out of range");
        if (s.kind == 1 && (s.cls == 0 || s.cls >= H.size())) throw std::invalid_argument("bad decoration class");
    }
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    GraphKey best;
    best.k = uint8_t(k);
    int best_sign = 0;
    bool have = false, zero = false;
    std::vector<uint32_t> codes(word.size());
    auto mapv = [&](int x) { return x < r ? x : r + perm[x - r]; };
    do {
        for (size_t i = 0; i < word.size(); ++i) {
            const GSym& s = word[i];
            GSym t = s.kind == 0 ? GSym::edge(mapv(s.u), mapv(s.v)) : GSym::deco(mapv(s.u), s.cls);
            codes[i] = t.code();
        }
        int sg = sort_codes(codes, H);
        if (sg == 0) return {0, {}};
        if (!have || codes < best.word) {
            best.word = codes;
            best_sign = sg;
            have = true;
            zero = false;
        } else if (codes == best.word && sg != best_sign) {
            zero = true;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (zero) return {0, {}};
    return {best_sign, best};
}

Q z_triv(int g, int k, const std::vector<GSym>& word) {
    if (k != 1) return 0;
    HBasis H{g};
    int cls = 0, sign = 1;
    for (const GSym& s : word) {
        if (s.kind == 0) return 0;
        auto [c, r] = H.mul(cls, s.cls);
        if (c == 0) return 0;
        sign *= c;
        cls = r;
    }
    return cls == H.nu() ? Q(sign) : Q(0);
}

GraphSum::GraphSum(int g, std::vector<int> ext) : g_(g), ext_(std::move(ext)) {
    if (g < 0 || g > 7) throw std::invalid_argument("genus out of range");
    std::sort(ext_.begin(), ext_.end());
    if (std::adjacent_find(ext_.begin(), ext_.end()) != ext_.end()) throw std::invalid_argument("duplicate external label");
    for (int x : ext_)
        if (x < 1 || x > 47) throw std::invalid_argument("labels must lie in 1..47");
}

GraphSum GraphSum::empty_graph(int g, std::vector<int> ext) {
    GraphSum s(g, std::move(ext));
    s.add_word(0, {}, 1);
    return s;
}

int GraphSum::index_of(int label) const {
    auto it = std::lower_bound(ext_.begin(), ext_.end(), label);
    return it != ext_.end() && *it == label ? int(it - ext_.begin()) : -1;
}

void GraphSum::add_word(int k, const std::vector<GSym>& word, const Q& c) {
    if (c == 0) return;
    auto [s, key] = canonicalize(g_, r(), k, word);
    if (s == 0) return;
    auto& v = terms_[key];
    v += c * s;
    if (v == 0) terms_.erase(key);
}

static void same_space(const GraphSum& a, const GraphSum& b) {
    if (a.genus() != b.genus() || a.ext() != b.ext()) throw std::invalid_argument("graph space mismatch");
}

GraphSum GraphSum::operator+(const GraphSum& o) const {
    same_space(*this, o);
    GraphSum r = *this;
    for (auto& [k, c] : o.terms_) {
        auto& v = r.terms_[k];
        v += c;
        if (v == 0) r.terms_.erase(k);
    }
    return r;
}

GraphSum GraphSum::operator-(const GraphSum& o) const { return *this + o * Q(-1); }

GraphSum GraphSum::operator*(const Q& c) const {
    GraphSum r(g_, ext_);
    if (c == 0) return r;
    for (auto& [k, v] : terms_) r.terms_[k] = v * c;
    return r;
}

std::vector<GSym> GraphSum::word(const GraphKey& key) const {
    std::vector<GSym> w;
    for (uint32_t c : key.word) w.push_back(GSym::from_code(c));
    return w;
}

std::string GraphSum::record(const GraphKey& key) const {
    HBasis H{g_};
    int base = ext_.empty() ? 0 : ext_.back();
    auto name = [&](int v) { return v < r() ? ext_[v] : base + 1 + (v - r()); };
    std::ostringstream os;
    os << "genus=" << g_ << "; ext=[";
    for (size_t i = 0; i < ext_.size(); ++i) os << (i ? "," : "") << ext_[i];
    os << "]; int=" << int(key.k) << "; edges=[";
    bool first = true;
    for (const GSym& s : word(key))
        if (s.kind == 0) {
            os << (first ? "" : ",") << "(" << name(s.u) << "," << name(s.v) << ")";
            first = false;
        }
    os << "]; deco={";
    int cur = -1;
    for (const GSym& s : word(key)) {
        if (s.kind != 1) continue;
        if (s.u != cur) {
            if (cur >= 0) os << "],";
            os << name(s.u) << ":[";
            cur = s.u;
        } else {
            os << ",";
        }
        os << H.name(s.cls);
    }
    if (cur >= 0) os << "]";
    os << "}";
    return os.str();
}

std::string GraphSum::str() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (auto& [k, c] : terms_) {
        if (!s.empty()) s += "\n";
        if (c != 1) s += "coef=" + qstr(c) + "; ";
        s += record(k);
    }
    return s;
}

static std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n"), b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

static int parse_int(const std::string& s) {
    std::string t = trim(s);
    if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char ch) { return std::isdigit(ch); }))
        throw std::invalid_argument("expected a nonnegative integer, got '" + s + "'");
    return std::stoi(t);
}

GraphSum GraphSum::parse(const std::string& text) {
    std::vector<std::string> recs;
    {
        std::string cur;
        for (char ch : text) {
            if (ch == '\n' || ch == '|') {
                recs.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        recs.push_back(cur);
    }
    GraphSum out;
    bool init = false;
    for (auto& raw : recs) {
        std::string rec = trim(raw);
        if (rec.empty() || rec == "0" || rec[0] == '#') continue;
        std::map<std::string, std::string> f;
        std::string cur;
        int depth = 0;
        auto flush = [&] {
            std::string t = trim(cur);
            cur.clear();
            if (t.empty()) return;
            auto eq = t.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("bad graph field: " + t);
            std::string key = trim(t.substr(0, eq));
            if (f.count(key)) throw std::invalid_argument("duplicate graph field: " + key);
            f[key] = trim(t.substr(eq + 1));
        };
        for (char ch : rec) {
            if (ch == '[' || ch == '{' || ch == '(') ++depth;
            if (ch == ']' || ch == '}' || ch == ')') --depth;
            if (ch == ';' && depth == 0) flush();
            else cur += ch;
        }
        flush();
        for (auto& [key, v] : f)
            if (key != "genus" && key != "ext" && key != "int" && key != "edges" && key != "deco" && key != "coef")
                throw std::invalid_argument("unknown graph field: " + key);
        if (!f.count("genus") || !f.count("ext")) throw std::invalid_argument("graph record needs genus and ext");
        int g = parse_int(f["genus"]);
        std::string e = f["ext"];
        if (e.size() < 2 || e.front() != '[' || e.back() != ']') throw std::invalid_argument("bad ext list");
        std::vector<int> ext;
        {
            std::stringstream ss(e.substr(1, e.size() - 2));
            std::string item;
            while (std::getline(ss, item, ','))
                if (!trim(item).empty()) ext.push_back(parse_int(item));
        }
        GraphSum here(g, ext);
        if (!init) {
            out = GraphSum(g, ext);
            init = true;
        }
        same_space(out, here);
        int k = f.count("int") ? parse_int(f["int"]) : 0;
        int r = int(here.ext().size());
        int base = here.ext().empty() ? 0 : here.ext().back();
        auto vid = [&](int name) {
            int i = here.index_of(name);
            if (i >= 0) return i;
            if (name > base && name <= base + k) return r + (name - base - 1);
            throw std::invalid_argument("unknown vertex " + std::to_string(name));
        };
        std::vector<GSym> word;
        if (f.count("edges")) {
            std::string s = f["edges"];
            if (s.size() < 2 || s.front() != '[' || s.back() != ']') throw std::invalid_argument("bad edge list");
            std::string body = s.substr(1, s.size() - 2);
            static const std::regex re(R"(\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*(,|$))");
            auto it = body.cbegin();
            std::smatch m;
            while (it != body.cend()) {
                if (!std::regex_search(it, body.cend(), m, re, std::regex_constants::match_continuous))
                    throw std::invalid_argument("bad edge list: " + s);
                word.push_back(GSym::edge(vid(std::stoi(m[1])), vid(std::stoi(m[2]))));
                it = m[0].second;
            }
        }
        if (f.count("deco")) {
            std::string s = f["deco"];
            if (s.size() < 2 || s.front() != '{' || s.back() != '}') throw std::invalid_argument("bad deco map");
            std::string body = s.substr(1, s.size() - 2);
            static const std::regex re(R"(\s*(\d+)\s*:\s*\[([^\]]*)\]\s*(,|$))");
            auto it = body.cbegin();
            std::smatch m;
            HBasis H{g};
            while (it != body.cend()) {
                if (!std::regex_search(it, body.cend(), m, re, std::regex_constants::match_continuous))
                    throw std::invalid_argument("bad deco map: " + s);
                int v = vid(std::stoi(m[1]));
                std::stringstream ss(m[2].str());
                std::string item;
                while (std::getline(ss, item, ',')) {
                    item = trim(item);
                    int cls = -1;
                    for (int c = 1; c < H.size(); ++c)
                        if (H.name(c) == item) cls = c;
                    if (cls < 0) throw std::invalid_argument("unknown decoration '" + item + "'");
                    word.push_back(GSym::deco(v, cls));
                }
                it = m[0].second;
            }
        }
        Q c = f.count("coef") ? qparse(trim(f["coef"])) : Q(1);
        auto [sg, key] = canonicalize(g, r, k, word);
        if (sg != 0 && !graph_admissible(r, key))
            throw std::invalid_argument("graph violates connectivity or has an internal tadpole");
        for (const GSym& s : word)
            if (s.kind == 0 && s.u == s.v && s.u >= r) throw std::invalid_argument("internal tadpole");
        out.add_word(k, word, c);
    }
    if (!init) throw std::invalid_argument("no graph records");
    return out;
}

int graph_degree(int g, const GraphKey& key) {
    HBasis H{g};
    int d = -2 * key.k;
    for (uint32_t c : key.word) {
        GSym s = GSym::from_code(c);
        d += s.kind == 0 ? 1 : H.degree(s.cls);
    }
    return d;
}

static bool admissible_word(int r, int k, const std::vector<GSym>& w) {
    DSU d(r + k);
    for (const GSym& s : w) {
        if (s.kind != 0) continue;
        if (s.u == s.v && s.u >= r) return false;
        d.unite(s.u, s.v);
    }
    std::vector<bool> ok(r + k, false);
    for (int i = 0; i < r; ++i) ok[d.find(i)] = true;
    for (int i = r; i < r + k; ++i)
        if (!ok[d.find(i)]) return false;
    return true;
}

bool graph_admissible(int r, const GraphKey& key) {
    std::vector<GSym> w;
    for (uint32_t c : key.word) w.push_back(GSym::from_code(c));
    return admissible_word(r, key.k, w);
}

GraphSum graph_multiply(const GraphSum& a, const GraphSum& b) {
    same_space(a, b);
    GraphSum out(a.genus(), a.ext());
    int r = a.r();
    for (auto& [ka, ca] : a.terms())
        for (auto& [kb, cb] : b.terms()) {
            auto w = a.word(ka);
            for (GSym s : b.word(kb)) {
                auto sh = [&](int v) { return v < r ? v : v + ka.k; };
                w.push_back(s.kind == 0 ? GSym::edge(sh(s.u), sh(s.v)) : GSym::deco(sh(s.u), s.cls));
            }
            out.add_word(ka.k + kb.k, w, ca * cb);
        }
    return out;
}

// Diagonal class as pairs (class at the first vertex, class at the second, coefficient); class 0 is no decoration.
static std::vector<std::tuple<int, int, int>> diagonal(const HBasis& H) {
    std::vector<std::tuple<int, int, int>> d{{0, H.nu(), 1}, {H.nu(), 0, 1}};
    for (int q = 1; q <= H.g; ++q) {
        d.push_back({H.a(q), H.b(q), -1});
        d.push_back({H.b(q), H.a(q), 1});
    }
    return d;
}

GraphSum graph_differential(const GraphSum& a, const PartitionFn& Z) {
    int g = a.genus(), r = a.r();
    HBasis H{g};
    auto diag = diagonal(H);
    GraphSum out(g, a.ext());
    for (auto& [key, c] : a.terms()) {
        auto w = a.word(key);
        int k = key.k;
        int odd_before = 0;
        for (size_t m = 0; m < w.size(); ++m) {
            const GSym e = w[m];
            if (e.kind != 0) {
                if (e.odd(H)) ++odd_before;
                continue;
            }
            Q sc = odd_before % 2 ? -c : c;
            ++odd_before;
            // d_s: replace the edge by the diagonal class
            for (auto [x, y, coef] : diag) {
                std::vector<GSym> nw(w.begin(), w.begin() + m);
                if (x) nw.push_back(GSym::deco(e.u, x));
                if (y) nw.push_back(GSym::deco(e.v, y));
                nw.insert(nw.end(), w.begin() + m + 1, w.end());
                DSU d(r + k);
                for (const GSym& s : nw)
                    if (s.kind == 0) d.unite(s.u, s.v);
                std::vector<bool> reach(r + k, false);
                for (int i = 0; i < r; ++i) reach[d.find(i)] = true;
                std::vector<bool> pick(nw.size(), false);
                std::vector<int> comp;
                for (int i = r; i < r + k; ++i)
                    if (!reach[d.find(i)]) comp.push_back(i);
                if (comp.empty()) {
                    out.add_word(k, nw, sc * coef);
                    continue;
                }
                // the removed edge splits off at most one vacuum component
                std::vector<int> newidx(r + k, -1);
                int kc = 0, kr = 0;
                for (int i = r; i < r + k; ++i) {
                    if (!reach[d.find(i)]) newidx[i] = kc++;
                    else newidx[i] = r + kr++;
                }
                for (int i = 0; i < r; ++i) newidx[i] = i;
                std::vector<GSym> cw, rw;
                for (size_t i = 0; i < nw.size(); ++i) {
                    const GSym& s = nw[i];
                    bool in = s.u >= r && !reach[d.find(s.u)];
                    pick[i] = in;
                    GSym t = s.kind == 0 ? GSym::edge(newidx[s.u], newidx[s.v]) : GSym::deco(newidx[s.u], s.cls);
                    (in ? cw : rw).push_back(t);
                }
                Q z = Z(g, kc, cw);
                if (z == 0) continue;
                out.add_word(kr, rw, sc * coef * z * front_sign(nw, pick, H));
            }
            // d_c: contract an edge with an internal endpoint
            if (e.u != e.v && (e.u >= r || e.v >= r)) {
                int s = e.u < r ? e.u : e.v < r ? e.v : std::min(e.u, e.v);
                int x = s == e.u ? e.v : e.u;
                auto mv = [&](int v) {
                    if (v == x) v = s;
                    return v > x ? v - 1 : v;
                };
                std::vector<GSym> nw;
                for (size_t i = 0; i < w.size(); ++i) {
                    if (i == m) continue;
                    const GSym& t = w[i];
                    nw.push_back(t.kind == 0 ? GSym::edge(mv(t.u), mv(t.v)) : GSym::deco(mv(t.u), t.cls));
                }
                out.add_word(k - 1, nw, -sc);
            }
        }
    }
    return out;
}

GraphTensor graph_coaction(const GraphSum& a, const std::vector<int>& T, int newlabel) {
    std::set<int> Ts(T.begin(), T.end());
    if (Ts.empty()) throw std::invalid_argument("empty collapse set");
    for (int t : Ts)
        if (a.index_of(t) < 0) throw std::invalid_argument("collapse set not contained in the external labels");
    std::vector<int> lext;
    for (int x : a.ext())
        if (!Ts.count(x)) lext.push_back(x);
    if (std::find(lext.begin(), lext.end(), newlabel) != lext.end()) throw std::invalid_argument("new label clashes");
    lext.push_back(newlabel);
    std::sort(lext.begin(), lext.end());
    GraphTensor out{lext, std::vector<int>(Ts.begin(), Ts.end()), {}};
    int g = a.genus(), r = a.r(), r2 = int(lext.size());
    HBasis H{g};
    Presentation bvT = Presentation::bv(out.right_pts);
    int nidx = int(std::lower_bound(lext.begin(), lext.end(), newlabel) - lext.begin());
    auto mapv = [&](int v) {
        if (v >= r) return r2 + (v - r);
        int lab = a.ext()[v];
        if (Ts.count(lab)) return nidx;
        return int(std::lower_bound(lext.begin(), lext.end(), lab) - lext.begin());
    };
    auto inT = [&](int v) { return v < r && Ts.count(a.ext()[v]) > 0; };
    for (auto& [key, c] : a.terms()) {
        auto w = a.word(key);
        std::vector<size_t> inner;
        for (size_t i = 0; i < w.size(); ++i)
            if (w[i].kind == 0 && inT(w[i].u) && inT(w[i].v)) inner.push_back(i);
        for (uint32_t mask = 0; mask < (1u << inner.size()); ++mask) {
            std::vector<bool> right(w.size(), false);
            for (size_t b = 0; b < inner.size(); ++b)
                if (mask >> b & 1) right[inner[b]] = true;
            std::vector<GSym> lw;
            Mono rm;
            int inv = 0;
            for (size_t i = 0; i < w.size(); ++i) {
                const GSym& s = w[i];
                if (right[i]) {
                    rm.push(mkgen(lbl::pt(a.ext()[s.u]), lbl::pt(a.ext()[s.v])));
                } else {
                    if (s.odd(H)) inv += rm.n;
                    lw.push_back(s.kind == 0 ? GSym::edge(mapv(s.u), mapv(s.v)) : GSym::deco(mapv(s.u), s.cls));
                }
            }
            auto [sg, lk] = canonicalize(g, r2, key.k, lw);
            if (sg == 0) continue;
            AlgTerms R;
            reduce_into(rm, 1, bvT.ctx, R);
            for (auto& [m, rc] : R) {
                auto kk = std::make_pair(lk, m);
                auto& v = out.terms[kk];
                v += c * rc * sg * (inv % 2 ? -1 : 1);
                if (v == 0) out.terms.erase(kk);
            }
        }
    }
    return out;
}

MogElement project_to_mog(const GraphSum& a) {
    MogElement out(a.genus(), a.ext());
    for (auto& [key, c] : a.terms()) {
        if (key.k) continue;
        std::vector<MSym> raw;
        for (const GSym& s : a.word(key)) {
            int p = a.ext()[s.u], q = a.ext()[s.v];
            raw.push_back(s.kind == 0 ? MSym::w(mkgen(lbl::pt(p), lbl::pt(q))) : MSym::h(p, s.cls));
        }
        out.add_raw(raw, c);
    }
    return out;
}

namespace {

void choose_edges(const std::vector<GSym>& cand, int max_edges, const std::function<void(const std::vector<GSym>&)>& f) {
    std::vector<GSym> cur;
    std::function<void(size_t)> rec = [&](size_t from) {
        f(cur);
        if (int(cur.size()) == max_edges) return;
        for (size_t i = from; i < cand.size(); ++i) {
            cur.push_back(cand[i]);
            rec(i + 1);
            cur.pop_back();
        }
    };
    rec(0);
}

// Multisets of decorations (vertex, class) with count <= max_count and, if degree >= 0, total degree == degree.
void choose_decos(int n, const HBasis& H, int max_count, int degree, const std::function<void(const std::vector<GSym>&)>& f) {
    std::vector<GSym> cur;
    std::function<void(int, int, int)> rec = [&](int v0, int c0, int deg) {
        if (degree < 0 || deg == degree) f(cur);
        if (int(cur.size()) == max_count) return;
        for (int v = v0; v < n; ++v)
            for (int c = (v == v0 ? c0 : 1); c < H.size(); ++c) {
                if (degree >= 0 && deg + H.degree(c) > degree) continue;
                cur.push_back(GSym::deco(v, c));
                rec(v, c, deg + H.degree(c));
                cur.pop_back();
            }
    };
    rec(0, 1, 0);
}

}  // namespace

std::vector<GraphKey> enumerate_graphs(int g, int r, int max_internal, int max_edges, int max_deco) {
    HBasis H{g};
    std::set<GraphKey> seen;
    for (int k = 0; k <= max_internal; ++k) {
        int n = r + k;
        std::vector<GSym> cand;
        for (int u = 0; u < n; ++u)
            for (int v = u; v < n; ++v)
                if (u != v || u < r) cand.push_back(GSym::edge(u, v));
        choose_edges(cand, max_edges, [&](const std::vector<GSym>& es) {
            if (!admissible_word(r, k, es)) return;
            choose_decos(n, H, max_deco, -1, [&](const std::vector<GSym>& ds) {
                std::vector<GSym> w = es;
                w.insert(w.end(), ds.begin(), ds.end());
                auto [s, key] = canonicalize(g, r, k, w);
                if (s) seen.insert(key);
            });
        });
    }
    return {seen.begin(), seen.end()};
}

std::vector<GraphKey> enumerate_vacuum_graphs(int g, int max_vertices, int max_edges) {
    HBasis H{g};
    std::set<GraphKey> seen;
    for (int k = 1; k <= max_vertices; ++k) {
        std::vector<GSym> cand;
        for (int u = 0; u < k; ++u)
            for (int v = u + 1; v < k; ++v) cand.push_back(GSym::edge(u, v));
        choose_edges(cand, max_edges, [&](const std::vector<GSym>& es) {
            DSU d(k);
            for (auto& e : es) d.unite(e.u, e.v);
            for (int i = 1; i < k; ++i)
                if (d.find(i) != d.find(0)) return;
            int D = 2 * k - int(es.size());
            if (D < 0) return;
            choose_decos(k, H, D, D, [&](const std::vector<GSym>& ds) {
                std::vector<GSym> w = es;
                w.insert(w.end(), ds.begin(), ds.end());
                auto [s, key] = canonicalize(g, 0, k, w);
                if (s) seen.insert(key);
            });
        });
    }
    return {seen.begin(), seen.end()};
}

}  // namespace cfm
