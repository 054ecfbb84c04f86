#include "cfm/bvalgebra.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace cfm {

void Mono::push(Gen x) {
    if (n >= kCap) throw std::overflow_error("monomial too long");
    g[n++] = x;
}

bool Mono::contains(Gen x) const { return std::find(begin(), end(), x) != end(); }

bool Mono::operator==(const Mono& o) const { return n == o.n && std::equal(begin(), end(), o.begin()); }

bool Mono::operator<(const Mono& o) const {
    if (n != o.n) return n < o.n;
    return std::lexicographical_compare(begin(), end(), o.begin(), o.end());
}

size_t MonoHash::operator()(const Mono& m) const {
    size_t h = m.n;
    for (Gen x : m) h = h * 1000003u ^ x;
    return h;
}

Mono concat(const Mono& a, const Mono& b) {
    Mono r = a;
    for (Gen x : b) r.push(x);
    return r;
}

int sort_mono(Mono& m) {
    int sign = 1;
    for (int i = 1; i < m.n; ++i)
        for (int j = i; j > 0 && m.g[j - 1] >= m.g[j]; --j) {
            if (m.g[j - 1] == m.g[j]) return 0;
            std::swap(m.g[j - 1], m.g[j]);
            sign = -sign;
        }
    return sign;
}

int extract_front(Mono& m, Gen x) {
    for (int i = 0; i < m.n; ++i)
        if (m.g[i] == x) {
            for (int j = i; j + 1 < m.n; ++j) m.g[j] = m.g[j + 1];
            --m.n;
            return i % 2 ? -1 : 1;
        }
    return 0;
}

bool Context::valid(Gen x) const {
    Label a = glo(x), b = ghi(x);
    if (!has(a) || !has(b)) return false;
    if (a == b) return !lbl::special(a);
    if (group[a] != group[b]) return false;
    return !(lbl::special(a) && lbl::special(b));
}

std::vector<Label> Context::labels() const {
    std::vector<Label> r;
    for (int l = 0; l < 256; ++l)
        if (group[l] >= 0) r.push_back(Label(l));
    return r;
}

void add_alg(AlgTerms& t, const Mono& m, const Q& c) {
    if (c == 0) return;
    auto [it, fresh] = t.try_emplace(m, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0) t.erase(it);
    }
}

namespace {
void arnold_rec(Mono m, long coef, std::map<Mono, long>& acc) {
    int s = sort_mono(m);
    if (!s) return;
    coef *= s;
    // first omega sharing its larger label with an earlier omega
    std::array<int8_t, 256> seen;
    seen.fill(-1);
    for (int b = 0; b < m.n; ++b) {
        Gen x = m.g[b];
        if (is_theta(x)) continue;
        int a = seen[ghi(x)];
        if (a < 0) {
            seen[ghi(x)] = int8_t(b);
            continue;
        }
        // omega_ik omega_jk -> omega_ij omega_jk - omega_ij omega_ik  (i < j < k)
        Label i = glo(m.g[a]), j = glo(x), k = ghi(x);
        Mono m1 = m, m2 = m;
        m1.g[a] = mkgen(i, j);
        m2.g[a] = mkgen(i, j);
        m2.g[b] = mkgen(i, k);
        arnold_rec(m1, coef, acc);
        arnold_rec(m2, -coef, acc);
        return;
    }
    long& v = acc[m];
    v += coef;
    if (v == 0) acc.erase(m);
}
}  // namespace

const std::vector<std::pair<Mono, long>>& arnold_nf(const Mono& sorted) {
    thread_local std::unordered_map<Mono, std::vector<std::pair<Mono, long>>, MonoHash> cache;
    auto it = cache.find(sorted);
    if (it != cache.end()) return it->second;
    std::map<Mono, long> acc;
    arnold_rec(sorted, 1, acc);
    std::vector<std::pair<Mono, long>> r(acc.begin(), acc.end());
    if (cache.size() > 2000000) cache.clear();
    return cache.emplace(sorted, std::move(r)).first->second;
}

void reduce_into(const Mono& raw, const Q& c, const Context& ctx, AlgTerms& out) {
    if (c == 0) return;
    for (Gen x : raw)
        if (!ctx.valid(x)) return;
    Mono m = raw;
    int s = sort_mono(m);
    if (!s) return;
    for (auto& [nm, k] : arnold_nf(m)) {
        bool ok = true;
        for (Gen x : nm)
            if (!ctx.valid(x)) {
                ok = false;
                break;
            }
        if (ok) add_alg(out, nm, c * (k * s));
    }
}

// ---------------- presentations ----------------

static void check_points(const std::vector<int>& pts) {
    std::set<int> s(pts.begin(), pts.end());
    if (s.size() != pts.size()) throw std::invalid_argument("duplicate label");
    for (int p : pts)
        if (p < 1 || p > 47) throw std::invalid_argument("labels must lie in 1..47");
}

Presentation Presentation::bv(std::vector<int> pts) {
    check_points(pts);
    std::sort(pts.begin(), pts.end());
    Presentation p;
    p.kind = Kind::BV;
    p.points = pts;
    for (int x : pts) p.ctx.add(lbl::pt(x), 0);
    return p;
}

Presentation Presentation::bvc(std::vector<int> pts) {
    Presentation p = bv(std::move(pts));
    p.kind = Kind::BVC;
    p.ctx.add(lbl::star(1, 1), 0);
    return p;
}

Presentation Presentation::bvgg(int g, std::vector<int> pts) {
    if (g < 0 || g > 7) throw std::invalid_argument("genus out of range");
    Presentation p = bv(std::move(pts));
    p.kind = Kind::BVGG;
    p.genus = g;
    for (int j = 1; j <= g; ++j) p.ctx.add(lbl::under(j), 0);
    for (int j = 2; j <= g; ++j) p.ctx.add(lbl::over(j), 0);
    return p;
}

bool Presentation::has_point(int x) const { return std::find(points.begin(), points.end(), x) != points.end(); }

std::string Presentation::str() const {
    std::ostringstream os;
    os << (kind == Kind::BV ? "BV" : kind == Kind::BVC ? "BVC" : "BVGG");
    if (kind == Kind::BVGG) os << "(g=" << genus << ")";
    os << "{";
    for (size_t i = 0; i < points.size(); ++i) os << (i ? "," : "") << points[i];
    os << "}";
    return os.str();
}

// ---------------- printing / parsing ----------------

std::string label_name(Label l) {
    if (lbl::is_pt(l)) return std::to_string(lbl::point_of(l));
    if (lbl::is_rpt(l)) return "'" + std::to_string(lbl::point_of(l));
    if (lbl::is_under(l)) return "_u " + std::to_string(l);
    if (lbl::is_over(l)) return "_o " + std::to_string(l - 8);
    if (lbl::is_star(l)) {
        if (l == lbl::star(1, 1)) return "*";
        return "*" + std::to_string(lbl::star_handle(l)) + "." + std::to_string(lbl::star_packet(l));
    }
    throw std::invalid_argument("unknown label code");
}

std::string gen_token(Gen g) {
    Label a = glo(g), b = ghi(g);
    if (a == b) return "t(" + label_name(a) + ")";
    if (lbl::is_star(a)) return "w(" + label_name(a) + "," + label_name(b) + ")";
    if (lbl::special(a)) return "w(" + label_name(b) + "," + label_name(a) + ")";
    return "w(" + label_name(a) + "," + label_name(b) + ")";
}

std::string mono_str(const Mono& m) {
    if (m.n == 0) return "1";
    std::string s;
    for (int i = 0; i < m.n; ++i) s += (i ? "*" : "") + gen_token(m.g[i]);
    return s;
}

std::string terms_str(const AlgTerms& t) {
    if (t.empty()) return "0";
    std::string s;
    bool first = true;
    for (auto& [m, c] : t) {
        Q a = abs(c);
        s += first ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + ");
        first = false;
        if (m.n == 0) s += qstr(a);
        else if (a == 1) s += mono_str(m);
        else s += qstr(a) + "*" + mono_str(m);
    }
    return s;
}

static Label parse_label(std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); }), s.end());
    auto num = [&](const std::string& x) {
        if (x.empty() || !std::all_of(x.begin(), x.end(), [](unsigned char ch) { return std::isdigit(ch); }))
            throw std::invalid_argument("bad label: " + s);
        return std::stoi(x);
    };
    if (s == "*") return lbl::star(1, 1);
    if (s.rfind("*", 0) == 0) {
        auto dot = s.find('.');
        if (dot == std::string::npos) throw std::invalid_argument("bad label: " + s);
        return lbl::star(num(s.substr(1, dot - 1)), num(s.substr(dot + 1)));
    }
    if (s.rfind("_u", 0) == 0) return lbl::under(num(s.substr(2)));
    if (s.rfind("_o", 0) == 0) return lbl::over(num(s.substr(2)));
    if (s.rfind("'", 0) == 0) return lbl::rpt(num(s.substr(1)));
    int p = num(s);
    if (p < 1 || p > 127) throw std::invalid_argument("bad label: " + s);
    return lbl::pt(p);
}

static Gen parse_gen(const std::string& tok) {
    auto open = tok.find('('), close = tok.rfind(')');
    if (open == std::string::npos || close != tok.size() - 1) throw std::invalid_argument("bad token: " + tok);
    std::string head = tok.substr(0, open), body = tok.substr(open + 1, close - open - 1);
    if (head == "t") {
        Label a = parse_label(body);
        return mkgen(a, a);
    }
    if (head == "w") {
        auto comma = body.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("bad token: " + tok);
        Label a = parse_label(body.substr(0, comma)), b = parse_label(body.substr(comma + 1));
        return mkgen(a, b);  // w(i,i) is theta_i
    }
    throw std::invalid_argument("bad token: " + tok);
}

std::vector<std::pair<Q, std::vector<std::string>>> split_terms(const std::string& text) {
    std::vector<std::pair<int, std::string>> parts;
    int depth = 0, sign = 1;
    std::string cur;
    auto flush = [&] {
        std::string t;
        for (char ch : cur)
            if (!std::isspace(static_cast<unsigned char>(ch))) t += ch;
        if (!t.empty()) parts.push_back({sign, t});
        else if (sign < 0) throw std::invalid_argument("dangling sign in: " + text);
        cur.clear();
    };
    for (char ch : text) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (depth == 0 && (ch == '+' || ch == '-')) {
            flush();
            sign = ch == '-' ? -1 : 1;
            continue;
        }
        cur += ch;
    }
    flush();
    std::vector<std::pair<Q, std::vector<std::string>>> out;
    for (auto& [sg, t] : parts) {
        if (t == "0") continue;
        Q c = sg;
        std::vector<std::string> toks;
        std::string f;
        int d = 0;
        for (char ch : t) {
            if (ch == '(') ++d;
            if (ch == ')') --d;
            if (ch == '*' && d == 0) {
                if (f.empty()) throw std::invalid_argument("bad term: " + t);
                toks.push_back(f);
                f.clear();
            } else {
                f += ch;
            }
        }
        if (f.empty()) throw std::invalid_argument("bad term: " + t);
        toks.push_back(f);
        std::vector<std::string> gens;
        for (auto& x : toks) {
            if (std::isdigit(static_cast<unsigned char>(x[0]))) c *= qparse(x);
            else gens.push_back(x);
        }
        out.push_back({c, gens});
    }
    return out;
}

Gen parse_gen_token(const std::string& tok) { return parse_gen(tok); }

AlgTerms parse_terms(const std::string& text) {
    AlgTerms out;
    for (auto& [c, toks] : split_terms(text)) {
        Mono m;
        for (auto& t : toks) m.push(parse_gen(t));
        // kept in the given order; callers normalize
        add_alg(out, m, c);
    }
    return out;
}

AlgElement AlgElement::one(const Presentation& p) {
    AlgElement a(p);
    a.terms_[Mono{}] = 1;
    return a;
}

AlgElement AlgElement::normal_form(const Presentation& p, const std::vector<Gen>& raw, const Q& c) {
    AlgElement a(p);
    Mono m;
    for (Gen x : raw) {
        Label lo = glo(x), hi = ghi(x);
        if (!p.ctx.has(lo) || !p.ctx.has(hi)) throw std::invalid_argument("unknown generator " + gen_token(x));
        m.push(x);
    }
    reduce_into(m, c, p.ctx, a.terms_);
    return a;
}

AlgElement AlgElement::generator(const Presentation& p, Gen g) { return normal_form(p, {g}); }

AlgElement AlgElement::parse(const Presentation& p, const std::string& text) {
    AlgElement a(p);
    for (auto& [m, c] : parse_terms(text)) {
        std::vector<Gen> raw(m.begin(), m.end());
        a = a + normal_form(p, raw, c);
    }
    return a;
}

static void same_pres(const AlgElement& a, const AlgElement& b) {
    if (!(a.pres() == b.pres())) throw std::invalid_argument("presentation mismatch");
}

AlgElement AlgElement::operator+(const AlgElement& o) const {
    same_pres(*this, o);
    AlgElement r = *this;
    for (auto& [m, c] : o.terms_) add_alg(r.terms_, m, c);
    return r;
}

AlgElement AlgElement::operator-(const AlgElement& o) const { return *this + o * Q(-1); }

AlgElement AlgElement::operator*(const Q& c) const {
    AlgElement r(pres_);
    if (c == 0) return r;
    for (auto& [m, x] : terms_) r.terms_.emplace(m, x * c);
    return r;
}

std::string AlgElement::str() const { return terms_str(terms_); }

AlgElement multiply(const AlgElement& a, const AlgElement& b) {
    same_pres(a, b);
    AlgElement r(a.pres());
    for (auto& [ma, ca] : a.terms())
        for (auto& [mb, cb] : b.terms()) reduce_into(concat(ma, mb), ca * cb, a.pres().ctx, r.terms());
    return r;
}

std::vector<Mono> basis(const Presentation& p, int degree) {
    std::vector<Label> labs = p.ctx.labels();
    std::vector<Label> ordinary;
    for (Label l : labs)
        if (!lbl::special(l)) ordinary.push_back(l);
    std::vector<Mono> out;
    Mono cur;
    // each ordinary label: optional theta, optional single omega to a smaller label
    std::function<void(size_t)> rec = [&](size_t i) {
        if (cur.n > degree) return;
        if (i == ordinary.size()) {
            if (cur.n == degree) {
                Mono m = cur;
                sort_mono(m);
                out.push_back(m);
            }
            return;
        }
        Label k = ordinary[i];
        for (int th = 0; th < 2; ++th) {
            int save = cur.n;
            if (th) cur.push(mkgen(k, k));
            rec(i + 1);
            for (Label l : labs) {
                if (l >= k || !p.ctx.valid(mkgen(l, k))) continue;
                cur.push(mkgen(l, k));
                rec(i + 1);
                cur.n = uint8_t(cur.n - 1);
            }
            cur.n = uint8_t(save);
        }
    };
    rec(0);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<long> poincare(const Presentation& p) {
    std::vector<long> d;
    for (int k = 0;; ++k) {
        long n = long(basis(p, k).size());
        if (n == 0) break;
        d.push_back(n);
    }
    return d;
}

// ---------------- tensors ----------------

int split_mono(const Mono& m, const std::function<bool(Gen)>& in_right, Mono& l, Mono& r) {
    l.n = r.n = 0;
    int inv = 0;
    for (Gen x : m) {
        if (in_right(x)) r.push(x);
        else {
            l.push(x);
            inv += r.n;
        }
    }
    return inv % 2 ? -1 : 1;
}

std::string AlgTensor::str() const {
    if (terms.empty()) return "0";
    std::string s;
    bool first = true;
    for (auto& [k, c] : terms) {
        Q a = abs(c);
        s += first ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + ");
        first = false;
        if (a != 1) s += qstr(a) + "*";
        s += "(" + mono_str(k.first) + ")@(" + mono_str(k.second) + ")";
    }
    return s;
}

static Label relabel_right(Label l) { return lbl::is_rpt(l) ? lbl::pt(lbl::point_of(l)) : l; }

static Mono map_labels(const Mono& m, const std::function<Label(Label)>& f) {
    Mono r;
    for (Gen x : m) r.push(mkgen(f(glo(x)), f(ghi(x))));
    return r;
}

static Presentation same_kind(const Presentation& p, std::vector<int> pts) {
    switch (p.kind) {
        case Kind::BV: return Presentation::bv(std::move(pts));
        case Kind::BVC: return Presentation::bvc(std::move(pts));
        default: return Presentation::bvgg(p.genus, std::move(pts));
    }
}

AlgTensor cocompose(const AlgElement& a, const std::vector<int>& T, int newlabel) {
    const Presentation& P = a.pres();
    if (T.empty()) throw std::invalid_argument("empty collapse set");
    std::set<int> Ts(T.begin(), T.end());
    for (int t : Ts)
        if (!P.has_point(t)) throw std::invalid_argument("collapse set not contained in the ordinary labels");
    std::vector<int> lpts;
    for (int x : P.points)
        if (!Ts.count(x)) lpts.push_back(x);
    if (std::find(lpts.begin(), lpts.end(), newlabel) != lpts.end()) throw std::invalid_argument("new label clashes");
    lpts.push_back(newlabel);
    AlgTensor out{same_kind(P, lpts), Presentation::bv(std::vector<int>(Ts.begin(), Ts.end())), {}};

    Context ctx = out.left.ctx;
    for (int t : Ts) ctx.add(lbl::rpt(t), 1);
    Label n = lbl::pt(newlabel);
    auto inT = [&](Label l) { return lbl::is_pt(l) && Ts.count(lbl::point_of(l)); };
    auto f = [&](Gen x) {
        Label i = glo(x), j = ghi(x);
        bool a1 = inT(i), b1 = inT(j);
        if (a1 && b1) {
            GenImage r;
            r.add(mkgen(n, n), 1);
            r.add(mkgen(lbl::rpt(lbl::point_of(i)), lbl::rpt(lbl::point_of(j))), 1);
            return r;
        }
        if (a1) return GenImage::of(mkgen(n, j));
        if (b1) return GenImage::of(mkgen(i, n));
        return GenImage::of(x);
    };
    AlgTerms tmp;
    for (auto& [m, c] : a.terms()) map_mono(m, c, f, ctx, tmp);
    for (auto& [m, c] : tmp) {
        Mono l, r;
        int s = split_mono(m, [](Gen x) { return lbl::is_rpt(glo(x)); }, l, r);
        r = map_labels(r, relabel_right);
        auto& v = out.terms[{l, r}];
        v += c * s;
        if (v == 0) out.terms.erase({l, r});
    }
    return out;
}

GenImage involution_gen(Gen g, Label s, const std::function<bool(Label)>& inGroup) {
    Label a = glo(g), b = ghi(g);
    if (!inGroup(a) || !inGroup(b)) return GenImage::of(g);
    GenImage r;
    if (a == s || b == s) {
        r.add(g, -1);
    } else if (a == b) {
        r.add(g, 1);
        r.add(mkgen(s, a), -2);
    } else {
        r.add(g, 1);
        r.add(mkgen(s, a), -1);
        r.add(mkgen(s, b), -1);
    }
    return r;
}

GenImage approach_gen(Gen g, const std::function<bool(Label)>& inP, Label m, Label s) {
    Label a = glo(g), b = ghi(g);
    bool pa = inP(a), pb = inP(b);
    if (pa == pb) return GenImage::of(g);
    Label p = pa ? a : b, y = pa ? b : a;
    if (y == m) return GenImage::of(mkgen(s, p));
    return GenImage::of(mkgen(m, y));
}

GenImage infinity_gen(Gen g, const std::function<bool(Label)>& inP, Label s) {
    Label a = glo(g), b = ghi(g);
    bool pa = inP(a), pb = inP(b);
    if (pa == pb) return GenImage::of(g);
    return GenImage::of(mkgen(s, pa ? a : b));
}

static Label target_label(const Presentation& P, Target t) {
    switch (t.kind) {
        case Target::Under:
            if (P.kind != Kind::BVGG || t.j < 1 || t.j > P.genus) throw std::invalid_argument("invalid target");
            return lbl::under(t.j);
        case Target::Over:
            if (P.kind != Kind::BVGG || t.j < 2 || t.j > P.genus) throw std::invalid_argument("invalid target");
            return lbl::over(t.j);
        case Target::Star:
            if (P.kind != Kind::BVC) throw std::invalid_argument("invalid target");
            return lbl::star(1, 1);
        default: throw std::invalid_argument("invalid target");
    }
}

namespace {
constexpr Label kTmpStar = lbl::star(7, 8);

// The packet-side algebra map D for point p; result in a context with the packet as group 1.
AlgTerms packet_map(const AlgElement& a, int p, Target t, Context& ctx) {
    const Presentation& P = a.pres();
    if (!P.has_point(p)) throw std::invalid_argument("point not in label set");
    Label lp = lbl::pt(p);
    ctx = P.ctx;
    ctx.add(lp, 1);
    ctx.add(kTmpStar, 1);
    auto inP = [lp](Label l) { return l == lp; };
    AlgTerms out;
    if (t.kind == Target::Inf) {
        auto f = [&](Gen x) { return infinity_gen(x, inP, kTmpStar); };
        for (auto& [m, c] : a.terms()) map_mono(m, c, f, ctx, out);
    } else {
        Label m0 = target_label(P, t);
        auto f = [&](Gen x) { return approach_gen(x, inP, m0, kTmpStar); };
        for (auto& [m, c] : a.terms()) map_mono(m, c, f, ctx, out);
        if (t.kind == Target::Over) {
            AlgTerms inv;
            auto grp = [lp](Label l) { return l == lp || l == kTmpStar; };
            auto fi = [&](Gen x) { return involution_gen(x, kTmpStar, grp); };
            for (auto& [m, c] : out) map_mono(m, c, fi, ctx, inv);
            out = std::move(inv);
        }
    }
    return out;
}
}  // namespace

AlgTensor cocompose_at_marked(const AlgElement& a, int p, Target t) {
    const Presentation& P = a.pres();
    if (P.kind == Kind::BV) throw std::invalid_argument("needs a presentation with marked points");
    Context ctx;
    AlgTerms img = packet_map(a, p, t, ctx);
    std::vector<int> rest;
    for (int x : P.points)
        if (x != p) rest.push_back(x);
    AlgTensor out{Presentation::bvc({p}), same_kind(P, rest), {}};
    Label lp = lbl::pt(p);
    for (auto& [m, c] : img) {
        Mono l, r;
        // packet generators go left
        int s = split_mono(m, [&](Gen x) { return !(glo(x) == lp || ghi(x) == lp || glo(x) == kTmpStar); }, l, r);
        l = map_labels(l, [](Label x) { return x == kTmpStar ? lbl::star(1, 1) : x; });
        auto& v = out.terms[{l, r}];
        v += c * s;
        if (v == 0) out.terms.erase({l, r});
    }
    return out;
}

Q cobracket_projection(const AlgElement& a) {
    const Presentation& P = a.pres();
    if (P.kind != Kind::BVC || P.points.size() != 1) throw std::invalid_argument("cobracket projection needs BVC on one label");
    Mono m;
    m.push(mkgen(lbl::star(1, 1), lbl::pt(P.points[0])));
    auto it = a.terms().find(m);
    return it == a.terms().end() ? Q(0) : it->second;
}

AlgElement boundary(const AlgElement& a, int i, Target j) {
    const Presentation& P = a.pres();
    if (!P.has_point(i)) throw std::invalid_argument("invalid label");
    std::vector<int> rest;
    for (int x : P.points)
        if (x != i) rest.push_back(x);
    AlgElement out(same_kind(P, rest));
    Label li = lbl::pt(i);
    if (j.kind == Target::Point) {
        if (j.j == i || !P.has_point(j.j)) throw std::invalid_argument("invalid label");
        Label lj = lbl::pt(j.j);
        auto f = [&](Gen x) {
            Label a1 = glo(x) == li ? lj : glo(x), b1 = ghi(x) == li ? lj : ghi(x);
            return GenImage::of(mkgen(a1, b1));
        };
        for (auto& [m, c] : a.terms()) {
            Mono rest_m = m;
            int s = extract_front(rest_m, mkgen(li, lj));
            if (s) map_mono(rest_m, c * s, f, out.pres().ctx, out.terms());
        }
        return out;
    }
    if (j.kind == Target::Inf) {
        // the packet factor must be exactly omega_{*i}: one generator touching i, and it is not theta_i
        for (auto& [m, c] : a.terms()) {
            int pos = -1, cnt = 0;
            for (int k = 0; k < m.n; ++k)
                if (glo(m.g[k]) == li || ghi(m.g[k]) == li) {
                    ++cnt;
                    pos = k;
                }
            if (cnt != 1 || is_theta(m.g[pos])) continue;
            Mono r = m;
            int s = extract_front(r, m.g[pos]);
            reduce_into(r, c * s, out.pres().ctx, out.terms());
        }
        return out;
    }
    Context ctx;
    AlgTerms img = packet_map(a, i, j, ctx);
    Gen w = mkgen(kTmpStar, li);
    for (auto& [m, c] : img) {
        bool other = false;
        for (Gen x : m)
            if (x != w && (glo(x) == li || ghi(x) == li)) other = true;
        if (other) continue;
        Mono r = m;
        int s = extract_front(r, w);
        if (s) add_alg(out.terms(), r, c * s);
    }
    return out;
}

AlgElement involution(const AlgElement& a) {
    const Presentation& P = a.pres();
    if (P.kind != Kind::BVC) throw std::invalid_argument("involution needs a BVC presentation");
    AlgElement out(P);
    auto all = [](Label) { return true; };
    auto f = [&](Gen x) { return involution_gen(x, lbl::star(1, 1), all); };
    for (auto& [m, c] : a.terms()) map_mono(m, c, f, P.ctx, out.terms());
    return out;
}

}  // namespace cfm
