#include "cfm/totalization.hpp"

#include <algorithm>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cfm/parallel.hpp"

namespace cfm {

namespace {
constexpr int kRightGroup = 120;

std::pair<int, PolyKey> mul_keys(const PolyKey& a, const PolyKey& b) {
    int s = wedge_sign(a.dt, b.dt);
    if (!s) return {0, {}};
    PolyKey k;
    k.dt = a.dt | b.dt;
    for (int v = 0; v < kMaxVars; ++v)
        if (a.exp(v) + b.exp(v)) k.set_exp(v, a.exp(v) + b.exp(v));
    return {s, k};
}

Gen relabel_gen(Gen x, const std::map<Label, Label>& m) {
    auto f = [&](Label l) {
        auto it = m.find(l);
        return it == m.end() ? l : it->second;
    };
    return mkgen(f(glo(x)), f(ghi(x)));
}

void check_same(const StratifiedElement& a, const StratifiedElement& b) {
    if (a.genus() != b.genus() || a.labels() != b.labels() || a.right() != b.right())
        throw std::invalid_argument("stratified elements live on different label sets");
}

std::string place_str(int g, const Place& p) {
    if (p.h >= 1) return std::to_string(p.h) + "." + std::to_string(p.q);
    if (g == 0) return p.h == 0 ? "L" : "R";
    return "0";
}

std::string stratum_str(int g, const Stratum& s) {
    std::string o = "(";
    for (size_t h = 0; h < s.r.size(); ++h) o += (h ? "," : "") + std::to_string(s.r[h]);
    o += " | ";
    for (size_t i = 0; i < s.f.size(); ++i) o += (i ? "," : "") + place_str(g, s.f[i]);
    return o + ")";
}

int mono_touching(const Mono& m, Label a, Label b, Gen& only) {
    int cnt = 0;
    for (Gen x : m)
        if (glo(x) == a || ghi(x) == a || glo(x) == b || ghi(x) == b) {
            ++cnt;
            only = x;
        }
    return cnt;
}
}  // namespace

int handle_count(int g) { return g == 0 ? 1 : g; }

Label star_label(int h, int q) {
    if (h < 1 || h > 8 || q < 1 || q > 8) throw std::invalid_argument("too many packets");
    return lbl::star(h, q);
}

int group_of(const Place& p) {
    if (p.h == 0) return 0;
    if (p.h < 0) return 1;
    return 2 + (p.h - 1) * 8 + (p.q - 1);
}

std::vector<Stratum> enumerate_strata(int g, const std::vector<int>& labels) {
    if (g < 0 || g > 7) throw std::invalid_argument("genus out of range");
    int n = int(labels.size()), H = handle_count(g);
    std::vector<Stratum> out;
    std::vector<int> r(H, 0);
    // every r with sum <= n
    std::function<void(int, int)> rec_r = [&](int h, int left) {
        if (h == H) {
            std::vector<Place> B;
            B.push_back({0, 0});
            if (g == 0) B.push_back({-1, 0});
            for (int hh = 0; hh < H; ++hh)
                for (int q = 1; q <= r[hh]; ++q) B.push_back({hh + 1, q});
            int nb = int(B.size());
            std::vector<int> idx(n, 0);
            while (true) {
                std::vector<int> hit(nb, 0);
                for (int i = 0; i < n; ++i) hit[idx[i]] = 1;
                bool surj = true;
                for (int b = g == 0 ? 2 : 1; b < nb; ++b) surj &= bool(hit[b]);
                if (surj) {
                    Stratum s;
                    s.r = r;
                    for (int i = 0; i < n; ++i) s.f.push_back(B[idx[i]]);
                    out.push_back(std::move(s));
                }
                int i = n - 1;
                while (i >= 0 && ++idx[i] == nb) idx[i--] = 0;
                if (i < 0) break;
            }
            return;
        }
        for (int x = 0; x <= left; ++x) {
            r[h] = x;
            rec_r(h + 1, left - x);
        }
        r[h] = 0;
    };
    rec_r(0, n);
    std::sort(out.begin(), out.end());
    return out;
}

int StrataTable::find(const Stratum& s) const {
    auto it = index.find(s);
    return it == index.end() ? -1 : it->second;
}

int StrataTable::pos(int label) const {
    auto it = std::lower_bound(labels.begin(), labels.end(), label);
    return it != labels.end() && *it == label ? int(it - labels.begin()) : -1;
}

std::shared_ptr<const StrataTable> strata_table(int g, const std::vector<int>& labels_in) {
    static std::mutex mu;
    static std::map<std::pair<int, std::vector<int>>, std::shared_ptr<const StrataTable>> cache;
    std::vector<int> labels = labels_in;
    std::sort(labels.begin(), labels.end());
    if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) throw std::invalid_argument("duplicate label");
    for (int p : labels)
        if (p < 1 || p > 47) throw std::invalid_argument("labels must lie in 1..47");
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = cache.find({g, labels});
        if (it != cache.end()) return it->second;
    }
    auto t = std::make_shared<StrataTable>();
    t->g = g;
    t->labels = labels;
    t->strata = enumerate_strata(g, labels);
    for (size_t i = 0; i < t->strata.size(); ++i) {
        const Stratum& s = t->strata[i];
        t->index[s] = int(i);
        Context c;
        if (g >= 1) {
            for (int j = 1; j <= g; ++j) c.add(lbl::under(j), 0);
            for (int j = 2; j <= g; ++j) c.add(lbl::over(j), 0);
        }
        for (int h = 1; h <= int(s.r.size()); ++h)
            for (int q = 1; q <= s.r[h - 1]; ++q) c.add(star_label(h, q), group_of({h, q}));
        for (size_t p = 0; p < labels.size(); ++p) c.add(lbl::pt(labels[p]), group_of(s.f[p]));
        t->ctx.push_back(c);
        Shape sh;
        sh.r = s.r;
        if (sh.nvars() > kMaxVars) throw std::invalid_argument("too many packets");
        t->shape.push_back(sh);
    }
    std::lock_guard<std::mutex> lk(mu);
    cache[{g, labels}] = t;
    return t;
}

void add_value(StratumValue& v, const Mono& m, const PolyKey& k, const Q& c) {
    if (c == 0) return;
    auto [it, fresh] = v.try_emplace({m, k}, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0) v.erase(it);
    }
}

// ---------------- element ----------------

StratifiedElement::StratifiedElement(int g, std::vector<int> labels, std::vector<int> right)
    : table_(strata_table(g, labels)), right_(std::move(right)) {
    std::sort(right_.begin(), right_.end());
    for (int p : right_)
        if (p < 1 || p > 47) throw std::invalid_argument("labels must lie in 1..47");
    ctx_ = table_->ctx;
    for (auto& c : ctx_)
        for (int p : right_) c.add(lbl::rpt(p), kRightGroup);
    values_.resize(table_->strata.size());
}

StratifiedElement StratifiedElement::constant(int g, std::vector<int> labels, const Q& c) {
    StratifiedElement a(g, std::move(labels));
    for (auto& v : a.values_) add_value(v, Mono{}, PolyKey{}, c);
    return a;
}

bool StratifiedElement::is_zero() const {
    return std::all_of(values_.begin(), values_.end(), [](const StratumValue& v) { return v.empty(); });
}

void StratifiedElement::add(size_t i, const std::vector<Gen>& raw, const PolyForm& form, const Q& c) {
    if (!(form.shape() == table_->shape[i])) throw std::invalid_argument("form lives on the wrong simplex product");
    Mono m;
    for (Gen x : raw) m.push(x);
    AlgTerms t;
    reduce_into(m, c, ctx_[i], t);
    for (auto& [mm, cm] : t)
        for (auto& [k, cf] : form.terms()) add_value(values_[i], mm, k, cm * cf);
}

StratifiedElement StratifiedElement::operator+(const StratifiedElement& o) const {
    check_same(*this, o);
    StratifiedElement r = *this;
    for (size_t i = 0; i < values_.size(); ++i)
        for (auto& [k, c] : o.values_[i]) add_value(r.values_[i], k.first, k.second, c);
    return r;
}

StratifiedElement StratifiedElement::operator-(const StratifiedElement& o) const { return *this + o * Q(-1); }

StratifiedElement StratifiedElement::operator*(const Q& c) const {
    StratifiedElement r = *this;
    for (auto& v : r.values_) {
        if (c == 0) v.clear();
        for (auto& [k, x] : v) x *= c;
    }
    return r;
}

bool StratifiedElement::operator==(const StratifiedElement& o) const {
    return genus() == o.genus() && labels() == o.labels() && right_ == o.right_ && values_ == o.values_;
}

PolyForm value_form(const StratumValue& v, const Mono& m, const Shape& s) {
    PolyForm f(s);
    for (auto it = v.lower_bound({m, PolyKey{}}); it != v.end() && it->first.first == m; ++it)
        add_term(f.terms(), it->first.second, it->second);
    return f;
}

std::string StratifiedElement::value_str(size_t i) const {
    const StratumValue& v = values_[i];
    if (v.empty()) return "0";
    std::string s;
    for (auto it = v.begin(); it != v.end();) {
        const Mono& m = it->first.first;
        PolyForm f = value_form(v, m, table_->shape[i]);
        if (!s.empty()) s += " + ";
        s += mono_str(m) + " * (" + f.str() + ")";
        while (it != v.end() && it->first.first == m) ++it;
    }
    return s;
}

std::string StratifiedElement::dump() const {
    std::ostringstream os;
    os << "genus=" << genus() << "; labels=[";
    for (size_t i = 0; i < labels().size(); ++i) os << (i ? "," : "") << labels()[i];
    os << "]; right=[";
    for (size_t i = 0; i < right_.size(); ++i) os << (i ? "," : "") << right_[i];
    os << "]\n";
    for (size_t i = 0; i < values_.size(); ++i)
        os << stratum_str(genus(), table_->strata[i]) << " : " << value_str(i) << "\n";
    return os.str();
}

namespace {
std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::string cur;
    for (char ch : s + ",") {
        if (std::isspace(static_cast<unsigned char>(ch))) continue;
        if (ch == ',') {
            if (!cur.empty()) out.push_back(std::stoi(cur));
            cur.clear();
        } else if (std::isdigit(static_cast<unsigned char>(ch))) {
            cur += ch;
        } else {
            throw std::invalid_argument("bad integer list: " + s);
        }
    }
    return out;
}

std::string field(const std::string& header, const std::string& key) {
    auto p = header.find(key + "=");
    if (p == std::string::npos) throw std::invalid_argument("dump header lacks " + key);
    p += key.size() + 1;
    auto e = header.find(';', p);
    std::string v = header.substr(p, e == std::string::npos ? std::string::npos : e - p);
    v.erase(std::remove_if(v.begin(), v.end(), [](unsigned char c) { return std::isspace(c); }), v.end());
    return v;
}

std::string unbracket(const std::string& s) {
    if (s.size() < 2 || s.front() != '[' || s.back() != ']') throw std::invalid_argument("expected [..]: " + s);
    return s.substr(1, s.size() - 2);
}

Place parse_place(int g, std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    if (g == 0 && s == "L") return {0, 0};
    if (g == 0 && s == "R") return {-1, 0};
    if (g >= 1 && s == "0") return {0, 0};
    auto dot = s.find('.');
    if (dot == std::string::npos) throw std::invalid_argument("bad place: " + s);
    return {std::stoi(s.substr(0, dot)), std::stoi(s.substr(dot + 1))};
}
}  // namespace

StratifiedElement StratifiedElement::parse_dump(const std::string& text) {
    std::istringstream is(text);
    std::string header;
    while (std::getline(is, header) && header.find_first_not_of(" \t\r") == std::string::npos) {
    }
    int g = std::stoi(field(header, "genus"));
    StratifiedElement a(g, parse_int_list(unbracket(field(header, "labels"))),
                        parse_int_list(unbracket(field(header, "right"))));
    std::vector<bool> seen(a.size(), false);
    std::string line;
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto close = line.find(')');
        auto colon = line.find(':', close == std::string::npos ? 0 : close);
        if (line.find('(') != 0 || close == std::string::npos || colon == std::string::npos)
            throw std::invalid_argument("bad dump record: " + line);
        std::string head = line.substr(1, close - 1);
        auto bar = head.find('|');
        if (bar == std::string::npos) throw std::invalid_argument("bad dump record: " + line);
        Stratum s;
        s.r = parse_int_list(head.substr(0, bar));
        std::string fs = head.substr(bar + 1);
        std::string cur;
        for (char ch : fs + ",") {
            if (ch == ',') {
                if (cur.find_first_not_of(" ") != std::string::npos) s.f.push_back(parse_place(g, cur));
                cur.clear();
            } else {
                cur += ch;
            }
        }
        int idx = a.table().find(s);
        if (idx < 0) throw std::invalid_argument("unknown stratum: " + line);
        if (seen[idx]) throw std::invalid_argument("duplicate stratum: " + line);
        seen[idx] = true;
        std::string body = line.substr(colon + 1);
        // terms "mono * (form)" separated by depth-0 '+'
        std::vector<std::string> parts;
        int depth = 0;
        std::string part;
        for (char ch : body) {
            if (ch == '(') ++depth;
            if (ch == ')') --depth;
            if (ch == '+' && depth == 0) {
                parts.push_back(part);
                part.clear();
            } else {
                part += ch;
            }
        }
        parts.push_back(part);
        for (auto& p : parts) {
            auto b = p.find_first_not_of(" \t\r"), e = p.find_last_not_of(" \t\r");
            if (b == std::string::npos) throw std::invalid_argument("empty term: " + line);
            p = p.substr(b, e - b + 1);
            if (p == "0" && parts.size() == 1) break;
            if (p.back() != ')') throw std::invalid_argument("bad term: " + p);
            int d = 0;
            size_t open = std::string::npos;
            for (size_t k = p.size(); k-- > 0;) {
                if (p[k] == ')') ++d;
                if (p[k] == '(' && --d == 0) {
                    open = k;
                    break;
                }
            }
            if (open == std::string::npos) throw std::invalid_argument("bad term: " + p);
            std::string form = p.substr(open + 1, p.size() - open - 2);
            std::string mono = p.substr(0, open);
            auto star = mono.find_last_not_of(" ");
            if (star == std::string::npos || mono[star] != '*') throw std::invalid_argument("bad term: " + p);
            mono = mono.substr(0, star);
            std::vector<Gen> raw;
            std::string tok;
            int dd = 0;
            std::string trimmed;
            for (char ch : mono)
                if (!std::isspace(static_cast<unsigned char>(ch)) || dd) trimmed += ch;
            if (trimmed != "1") {
                for (char ch : trimmed + "*") {
                    if (ch == '(') ++dd;
                    if (ch == ')') --dd;
                    if (ch == '*' && dd == 0) {
                        raw.push_back(parse_gen_token(tok));
                        tok.clear();
                    } else {
                        tok += ch;
                    }
                }
            }
            for (Gen x : raw)
                if (!a.ctx_[idx].valid(x)) throw std::invalid_argument("generator not on this stratum: " + gen_token(x));
            a.add(idx, raw, parse_polyform(a.table().shape[idx], form));
        }
    }
    return a;
}

// ---------------- continuity ----------------

namespace {
struct FaceMap {
    std::map<Label, Label> relabel;
    std::set<Label> P;
    enum Kind { Approach, Infinity } kind;
    Label m = 0, s = 0;
    bool involution = false;
};

AlgTerms apply_face_map(const Mono& m, const Q& c, const FaceMap& fm, const Context& ctx) {
    auto inP = [&](Label l) { return fm.P.count(l) > 0; };
    auto f = [&](Gen x) {
        Gen y = relabel_gen(x, fm.relabel);
        return fm.kind == FaceMap::Approach ? approach_gen(y, inP, fm.m, fm.s) : infinity_gen(y, inP, fm.s);
    };
    AlgTerms out;
    map_mono(m, c, f, ctx, out);
    if (!fm.involution) return out;
    AlgTerms inv;
    auto grp = [&](Label l) { return l == fm.s || fm.P.count(l) > 0; };
    auto fi = [&](Gen x) { return involution_gen(x, fm.s, grp); };
    for (auto& [mm, cc] : out) map_mono(mm, cc, fi, ctx, inv);
    return inv;
}
}  // namespace

ContinuityReport check_continuity(const StratifiedElement& a) {
    const StrataTable& T = a.table();
    int g = T.g;
    size_t N = T.strata.size();
    std::vector<ContinuityReport> per(N);
    parallel_for(N, [&](size_t i) {
        const Stratum& S = T.strata[i];
        const Shape& sh = T.shape[i];
        ContinuityReport& rep = per[i];
        for (int h = 1; h <= int(S.r.size()); ++h) {
            int rh = S.r[h - 1];
            for (int j = 0; j <= rh && rh >= 1; ++j) {
                Stratum St = S;
                St.r[h - 1] -= 1;
                FaceMap fm;
                FaceSpec face{};
                int moving = j == 0 ? 1 : j == rh ? rh : j + 1;
                for (size_t p = 0; p < S.f.size(); ++p) {
                    Place pl = S.f[p];
                    if (pl.h == h && pl.q == moving) fm.P.insert(lbl::pt(T.labels[p]));
                }
                if (j > 0 && j < rh) {
                    face = {FaceSpec::Collision, h - 1, j};
                    for (auto& pl : St.f)
                        if (pl.h == h && pl.q > j) pl.q -= 1;
                    for (int q = j + 1; q < rh; ++q) fm.relabel[star_label(h, q)] = star_label(h, q + 1);
                    fm.kind = FaceMap::Approach;
                    fm.m = star_label(h, j);
                    fm.s = star_label(h, j + 1);
                } else if (j == 0) {
                    face = {FaceSpec::LeftEnd, h - 1, 0};
                    for (auto& pl : St.f) {
                        if (pl.h == h && pl.q == 1) pl = {0, 0};
                        else if (pl.h == h) pl.q -= 1;
                    }
                    for (int q = 1; q < rh; ++q) fm.relabel[star_label(h, q)] = star_label(h, q + 1);
                    fm.s = star_label(h, 1);
                    if (g == 0) {
                        fm.kind = FaceMap::Infinity;
                        fm.involution = true;
                    } else {
                        fm.kind = FaceMap::Approach;
                        fm.m = lbl::under(h);
                    }
                } else {
                    face = {FaceSpec::RightEnd, h - 1, 0};
                    for (auto& pl : St.f)
                        if (pl.h == h && pl.q == rh) pl = g == 0 ? Place{-1, 0} : Place{0, 0};
                    fm.s = star_label(h, rh);
                    if (g == 0 || h == 1) {
                        fm.kind = FaceMap::Infinity;
                    } else {
                        fm.kind = FaceMap::Approach;
                        fm.m = lbl::over(h);
                        fm.involution = true;
                    }
                }
                int k = T.find(St);
                if (k < 0) throw std::logic_error("face stratum missing");
                VarSubst sub = face_subst(sh, face);
                StratumValue lhs, rhs;
                for (auto& [key, c] : a.value(i)) {
                    auto [sg, nk] = substitute(key.second, sub);
                    if (sg) add_value(lhs, key.first, nk, c * sg);
                }
                for (auto& [key, c] : a.value(k)) {
                    AlgTerms img = apply_face_map(key.first, c, fm, a.context(i));
                    for (auto& [mm, cc] : img) add_value(rhs, mm, key.second, cc);
                }
                ++rep.faces_checked;
                if (lhs != rhs) {
                    rep.ok = false;
                    std::string what = j == 0 ? "t=0 end" : j == rh ? "t=1 end" : "collision " + std::to_string(j);
                    rep.violations.push_back(stratum_str(g, S) + " handle " + std::to_string(h) + " " + what +
                                             " vs " + stratum_str(g, St));
                }
            }
        }
    });
    ContinuityReport out;
    for (auto& r : per) {
        out.ok &= r.ok;
        out.faces_checked += r.faces_checked;
        for (auto& v : r.violations) out.violations.push_back(v);
    }
    return out;
}

// ---------------- d, product ----------------

StratifiedElement total_d(const StratifiedElement& a) {
    StratifiedElement r = a * Q(0);
    parallel_for(a.size(), [&](size_t i) {
        for (auto& [key, c] : a.value(i)) {
            PolyTerms out;
            d_monomial(key.second, key.first.n % 2 ? Q(-c) : c, out);
            for (auto& [k, cc] : out) add_value(r.value(i), key.first, k, cc);
        }
    });
    return r;
}

StratifiedElement total_wedge(const StratifiedElement& a, const StratifiedElement& b,
                              const std::vector<char>* mask) {
    if (a.genus() != b.genus() || a.labels() != b.labels()) throw std::invalid_argument("label sets differ");
    std::vector<int> right = a.right();
    if (right.empty()) right = b.right();
    else if (!b.right().empty() && b.right() != right) throw std::invalid_argument("right factors differ");
    StratifiedElement r(a.genus(), a.labels(), right);
    parallel_for(a.size(), [&](size_t i) {
        if (a.value(i).empty() || b.value(i).empty() || (mask && !(*mask)[i])) return;
        const StratumValue& va = a.value(i);
        const StratumValue& vb = b.value(i);
        // entries are sorted by monomial: reduce each pair of monomials once
        for (auto ga = va.begin(); ga != va.end();) {
            auto ea = ga;
            while (ea != va.end() && ea->first.first == ga->first.first) ++ea;
            for (auto gb = vb.begin(); gb != vb.end();) {
                auto eb = gb;
                while (eb != vb.end() && eb->first.first == gb->first.first) ++eb;
                AlgTerms t;
                reduce_into(concat(ga->first.first, gb->first.first), 1, r.context(i), t);
                if (!t.empty()) {
                    bool odd_b = gb->first.first.n % 2;
                    for (auto ia = ga; ia != ea; ++ia)
                        for (auto ib = gb; ib != eb; ++ib) {
                            auto [s, k] = mul_keys(ia->first.second, ib->first.second);
                            if (!s) continue;
                            if (odd_b && ia->first.second.degree() % 2) s = -s;
                            Q c = ia->second * ib->second * s;
                            for (auto& [m, x] : t) add_value(r.value(i), m, k, c * x);
                        }
                }
                gb = eb;
            }
            ga = ea;
        }
    });
    return r;
}

// ---------------- pullback ----------------

StratifiedElement pullback(const StratifiedElement& a, const std::map<int, int>& relabel,
                           const std::vector<int>& target) {
    const StrataTable& A = a.table();
    std::vector<int> img;
    for (int p : A.labels) {
        auto it = relabel.find(p);
        img.push_back(it == relabel.end() ? p : it->second);
    }
    StratifiedElement r(A.g, target, a.right());
    const StrataTable& T = r.table();
    std::set<int> seen;
    for (int x : img) {
        if (T.pos(x) < 0) throw std::invalid_argument("relabelled point not in target");
        if (!seen.insert(x).second) throw std::invalid_argument("relabelling is not injective");
    }
    parallel_for(T.strata.size(), [&](size_t i) {
        const Stratum& S = T.strata[i];
        int H = int(S.r.size());
        std::vector<std::vector<int>> used(H);  // used packet indices in S per handle
        for (int x : img) {
            Place p = S.f[T.pos(x)];
            if (p.h >= 1) used[p.h - 1].push_back(p.q);
        }
        Stratum src;
        src.r.assign(H, 0);
        std::map<Label, Label> lm;
        VarSubst sub;
        for (int h = 0; h < H; ++h) {
            std::sort(used[h].begin(), used[h].end());
            used[h].erase(std::unique(used[h].begin(), used[h].end()), used[h].end());
            src.r[h] = int(used[h].size());
        }
        Shape ssh;
        ssh.r = src.r;
        sub.resize(ssh.nvars());
        for (int h = 0; h < H; ++h)
            for (int q = 1; q <= src.r[h]; ++q) {
                int qs = used[h][q - 1];
                lm[star_label(h + 1, q)] = star_label(h + 1, qs);
                sub[ssh.var(h, q)] = VarImage{VarImage::Var, T.shape[i].var(h, qs)};
            }
        for (size_t p = 0; p < A.labels.size(); ++p) {
            Place pl = S.f[T.pos(img[p])];
            if (pl.h >= 1) pl.q = int(std::lower_bound(used[pl.h - 1].begin(), used[pl.h - 1].end(), pl.q) -
                                      used[pl.h - 1].begin()) + 1;
            src.f.push_back(pl);
            lm[lbl::pt(A.labels[p])] = lbl::pt(img[p]);
        }
        int k = A.find(src);
        if (k < 0) throw std::logic_error("pullback stratum missing");
        auto f = [&](Gen x) { return GenImage::of(relabel_gen(x, lm)); };
        for (auto& [key, c] : a.value(k)) {
            auto [sg, nk] = substitute(key.second, sub);
            if (!sg) continue;
            AlgTerms t;
            map_mono(key.first, c * sg, f, r.context(i), t);
            for (auto& [m, cc] : t) add_value(r.value(i), m, nk, cc);
        }
    });
    return r;
}

StratifiedElement extend_points(const StratifiedElement& a, const std::vector<int>& new_labels) {
    std::vector<int> target = a.labels();
    for (int p : new_labels) {
        if (std::find(target.begin(), target.end(), p) != target.end()) throw std::invalid_argument("label clash");
        target.push_back(p);
    }
    std::sort(target.begin(), target.end());
    return pullback(a, {}, target);
}

// ---------------- coaction, boundary ----------------

StratifiedElement total_coaction(const StratifiedElement& a, const std::vector<int>& Tv, int newlabel) {
    if (!a.right().empty()) throw std::invalid_argument("element already carries a right factor");
    const StrataTable& A = a.table();
    std::set<int> T(Tv.begin(), Tv.end());
    if (T.empty()) throw std::invalid_argument("empty collapse set");
    for (int t : T)
        if (A.pos(t) < 0) throw std::invalid_argument("collapse set not contained in the labels");
    std::vector<int> out_labels;
    for (int p : A.labels)
        if (!T.count(p)) out_labels.push_back(p);
    if (std::find(out_labels.begin(), out_labels.end(), newlabel) != out_labels.end())
        throw std::invalid_argument("new label clashes");
    out_labels.push_back(newlabel);
    std::sort(out_labels.begin(), out_labels.end());
    StratifiedElement r(A.g, out_labels, std::vector<int>(T.begin(), T.end()));
    const StrataTable& R = r.table();
    Label n = lbl::pt(newlabel);
    auto inT = [&](Label l) { return lbl::is_pt(l) && T.count(lbl::point_of(l)); };
    auto f = [&](Gen x) {
        Label i = glo(x), j = ghi(x);
        bool a1 = inT(i), b1 = inT(j);
        if (a1 && b1) {
            GenImage g;
            g.add(mkgen(n, n), 1);
            g.add(mkgen(lbl::rpt(lbl::point_of(i)), lbl::rpt(lbl::point_of(j))), 1);
            return g;
        }
        if (a1) return GenImage::of(mkgen(n, j));
        if (b1) return GenImage::of(mkgen(i, n));
        return GenImage::of(x);
    };
    parallel_for(R.strata.size(), [&](size_t i) {
        const Stratum& S = R.strata[i];
        Stratum src;
        src.r = S.r;
        for (int p : A.labels) src.f.push_back(S.f[R.pos(T.count(p) ? newlabel : p)]);
        int k = A.find(src);
        for (auto& [key, c] : a.value(k)) {
            AlgTerms t;
            map_mono(key.first, c, f, r.context(i), t);
            for (auto& [m, cc] : t) add_value(r.value(i), m, key.second, cc);
        }
    });
    return r;
}

StratifiedElement with_right(const StratifiedElement& a, const AlgElement& b) {
    if (!a.right().empty()) throw std::invalid_argument("element already carries a right factor");
    if (b.pres().kind != Kind::BV) throw std::invalid_argument("right factor must be in BV");
    StratifiedElement r(a.genus(), a.labels(), b.pres().points);
    std::map<Label, Label> lm;
    for (int p : b.pres().points) lm[lbl::pt(p)] = lbl::rpt(p);
    std::vector<std::pair<Mono, Q>> bs;
    for (auto& [m, c] : b.terms()) {
        Mono mm;
        for (Gen x : m) mm.push(relabel_gen(x, lm));
        bs.push_back({mm, c});
    }
    for (size_t i = 0; i < a.size(); ++i)
        for (auto& [key, c] : a.value(i))
            for (auto& [mb, cb] : bs) {
                Q s = (key.second.degree() % 2 && mb.n % 2) ? Q(-1) : Q(1);
                AlgTerms t;
                reduce_into(concat(key.first, mb), c * cb * s, r.context(i), t);
                for (auto& [m, cc] : t) add_value(r.value(i), m, key.second, cc);
            }
    return r;
}

StratifiedElement total_boundary(const StratifiedElement& a, int i, int j) {
    const StrataTable& A = a.table();
    if (i == j || A.pos(i) < 0 || A.pos(j) < 0) throw std::invalid_argument("invalid labels");
    std::vector<int> out_labels;
    for (int p : A.labels)
        if (p != i) out_labels.push_back(p);
    StratifiedElement r(A.g, out_labels, a.right());
    const StrataTable& R = r.table();
    Label li = lbl::pt(i), lj = lbl::pt(j);
    Gen w = mkgen(li, lj);
    std::map<Label, Label> lm{{li, lj}};
    auto f = [&](Gen x) { return GenImage::of(relabel_gen(x, lm)); };
    parallel_for(R.strata.size(), [&](size_t s) {
        const Stratum& S = R.strata[s];
        Stratum src;
        src.r = S.r;
        for (int p : A.labels) src.f.push_back(S.f[R.pos(p == i ? j : p)]);
        int k = A.find(src);
        for (auto& [key, c] : a.value(k)) {
            Mono rest = key.first;
            int sg = extract_front(rest, w);
            if (!sg) continue;
            AlgTerms t;
            map_mono(rest, c * sg, f, r.context(s), t);
            for (auto& [m, cc] : t) add_value(r.value(s), m, key.second, cc);
        }
    });
    return r;
}

// ---------------- fiber integral ----------------

std::vector<char> fiber_support(const StrataTable& t, const std::vector<int>& K) {
    std::vector<char> m(t.strata.size(), 1);
    for (size_t s = 0; s < t.strata.size(); ++s) {
        const Stratum& S = t.strata[s];
        for (int p : K) {
            Place pl = S.f[size_t(t.pos(p))];
            int n = 0;
            for (auto& o : S.f) n += o == pl;
            if (pl.h < 1 || n != 1) m[s] = 0;
        }
    }
    return m;
}

StratifiedElement total_fiber_integrate(const StratifiedElement& a, const std::vector<int>& Kv) {
    if (Kv.empty()) return a;
    const StrataTable& A = a.table();
    std::set<int> K(Kv.begin(), Kv.end());
    for (int p : K)
        if (A.pos(p) < 0) throw std::invalid_argument("integrated label not present");
    std::vector<int> base_labels;
    for (int p : A.labels)
        if (!K.count(p)) base_labels.push_back(p);
    StratifiedElement r(A.g, base_labels, a.right());
    const StrataTable& R = r.table();
    int k = int(K.size());

    struct Source {
        int idx;
        FiberPlan plan;
        std::vector<std::pair<int, Gen>> kgens;  // (var index, omega_{*p}) per integrated point
        std::vector<Label> kstars, kpts;
        std::map<Label, Label> lm;
    };
    std::vector<std::vector<Source>> by_base(R.strata.size());
    for (size_t s = 0; s < A.strata.size(); ++s) {
        const Stratum& S = A.strata[s];
        int H = int(S.r.size());
        std::vector<std::vector<int>> count(H);
        for (int h = 0; h < H; ++h) count[h].assign(S.r[h], 0);
        for (auto& pl : S.f)
            if (pl.h >= 1) count[pl.h - 1][pl.q - 1]++;
        bool ok = true;
        std::vector<std::vector<bool>> retained(H);
        for (int h = 0; h < H; ++h) retained[h].assign(S.r[h], true);
        Source src;
        for (int p : K) {
            Place pl = S.f[A.pos(p)];
            if (pl.h < 1 || count[pl.h - 1][pl.q - 1] != 1) {
                ok = false;
                break;
            }
            retained[pl.h - 1][pl.q - 1] = false;
            Label st = star_label(pl.h, pl.q);
            src.kgens.push_back({A.shape[s].var(pl.h - 1, pl.q), mkgen(st, lbl::pt(p))});
            src.kstars.push_back(st);
            src.kpts.push_back(lbl::pt(p));
        }
        if (!ok) continue;
        Stratum base;
        base.r.assign(H, 0);
        std::vector<std::vector<int>> newq(H);
        for (int h = 0; h < H; ++h) {
            newq[h].assign(S.r[h], 0);
            for (int q = 0; q < S.r[h]; ++q)
                if (retained[h][q]) {
                    newq[h][q] = ++base.r[h];
                    src.lm[star_label(h + 1, q + 1)] = star_label(h + 1, base.r[h]);
                }
        }
        for (size_t p = 0; p < A.labels.size(); ++p) {
            if (K.count(A.labels[p])) continue;
            Place pl = S.f[p];
            if (pl.h >= 1) pl.q = newq[pl.h - 1][pl.q - 1];
            base.f.push_back(pl);
        }
        int b = R.find(base);
        if (b < 0) throw std::logic_error("base stratum missing");
        src.idx = int(s);
        src.plan = make_fiber_plan(A.shape[s], retained);
        std::sort(src.kgens.begin(), src.kgens.end());
        by_base[b].push_back(std::move(src));
    }

    parallel_for(R.strata.size(), [&](size_t b) {
        for (const Source& src : by_base[b]) {
            auto f = [&](Gen x) { return GenImage::of(relabel_gen(x, src.lm)); };
            for (auto& [key, c] : a.value(src.idx)) {
                if ((key.second.dt & src.plan.forgotten) != src.plan.forgotten) continue;
                const Mono& m = key.first;
                bool ok = true;
                for (size_t q = 0; q < src.kpts.size() && ok; ++q) {
                    Gen only = 0;
                    int cnt = mono_touching(m, src.kpts[q], src.kstars[q], only);
                    ok = cnt == 1 && only == mkgen(src.kstars[q], src.kpts[q]);
                }
                if (!ok) continue;
                Mono rest = m;
                int sg = 1;
                for (size_t q = src.kgens.size(); q-- > 0;) sg *= extract_front(rest, src.kgens[q].second);
                int e = rest.n * k + k * (k - 1) / 2 + k;
                if (e % 2) sg = -sg;
                PolyTerms forms;
                integrate_monomial(key.second, Q(1), src.plan, forms);
                if (forms.empty()) continue;
                AlgTerms t;
                map_mono(rest, c * sg, f, r.context(b), t);
                for (auto& [mm, cm] : t)
                    for (auto& [kk, cf] : forms) add_value(r.value(b), mm, kk, cm * cf);
            }
        }
    });
    return r;
}

StratifiedElement stokes_defect(const StratifiedElement& a, const std::vector<int>& Kv) {
    std::vector<int> K = Kv;
    std::sort(K.begin(), K.end());
    StratifiedElement out = total_d(total_fiber_integrate(a, K)) -
                            total_fiber_integrate(total_d(a), K);
    const Q sign = K.size() % 2 ? -1 : 1;
    for (int i : K) {
        std::vector<int> rest;
        for (int p : K)
            if (p != i) rest.push_back(p);
        for (int j : a.labels()) {
            if (j >= i) break;
            out = out - total_fiber_integrate(total_boundary(a, i, j), rest) * sign;
        }
    }
    return out;
}

}  // namespace cfm
