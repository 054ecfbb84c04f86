#include "cfm/exactpoly.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace cfm {

std::string qstr(const Q& q) { return q.get_str(); }

Q qparse(const std::string& s) {
    Q q;
    if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad rational: " + s);
    q.canonicalize();
    return q;
}

int Shape::nvars() const {
    int n = 0;
    for (int x : r) n += x;
    return n;
}

int Shape::offset(int h) const {
    int n = 0;
    for (int i = 0; i < h; ++i) n += r[i];
    return n;
}

void PolyKey::set_exp(int v, int e) {
    if (e < 0 || e > 255) throw std::overflow_error("exponent out of range");
    exps &= ~(uint64_t(0xff) << (8 * v));
    exps |= uint64_t(e) << (8 * v);
}

void add_term(PolyTerms& t, const PolyKey& k, const Q& c) {
    if (c == 0) return;
    auto [it, fresh] = t.try_emplace(k, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0) t.erase(it);
    }
}

int wedge_sign(uint8_t s, uint8_t t) {
    if (s & t) return 0;
    int inv = 0;
    for (int b = 0; b < 8; ++b)
        if (t >> b & 1) inv += __builtin_popcount(s >> (b + 1));
    return inv & 1 ? -1 : 1;
}

static int parity_sort(std::vector<int>& v) {
    int sign = 1;
    for (size_t i = 1; i < v.size(); ++i)
        for (size_t j = i; j > 0 && v[j - 1] > v[j]; --j) {
            std::swap(v[j - 1], v[j]);
            sign = -sign;
        }
    return sign;
}

std::pair<int, PolyKey> substitute(const PolyKey& k, const VarSubst& s) {
    PolyKey out;
    std::vector<int> dts;
    for (int v = 0; v < int(s.size()); ++v) {
        int e = k.exp(v);
        bool d = k.dt >> v & 1;
        if (!e && !d) continue;
        const auto& im = s[v];
        if (im.kind == VarImage::Zero) {
            if (e || d) return {0, {}};
        } else if (im.kind == VarImage::One) {
            if (d) return {0, {}};
        } else {
            if (e) out.set_exp(im.v, out.exp(im.v) + e);
            if (d) dts.push_back(im.v);
        }
    }
    int sign = parity_sort(dts);
    for (size_t i = 0; i < dts.size(); ++i) {
        if (i && dts[i] == dts[i - 1]) return {0, {}};
        out.dt |= uint8_t(1u << dts[i]);
    }
    return {sign, out};
}

static void check_face(const Shape& s, const FaceSpec& f) {
    if (f.handle < 0 || f.handle >= int(s.r.size())) throw std::invalid_argument("face handle out of range");
    int r = s.r[f.handle];
    if (f.kind == FaceSpec::Collision) {
        if (f.j < 1 || f.j >= r) throw std::invalid_argument("collision index out of range");
    } else if (r < 1) {
        throw std::invalid_argument("end face of empty handle");
    }
}

Shape face_shape(const Shape& s, const FaceSpec& f) {
    check_face(s, f);
    Shape o = s;
    o.r[f.handle] -= 1;
    return o;
}

VarSubst face_subst(const Shape& s, const FaceSpec& f) {
    Shape o = face_shape(s, f);
    VarSubst sub(s.nvars());
    for (int h = 0; h < int(s.r.size()); ++h)
        for (int q = 1; q <= s.r[h]; ++q) {
            VarImage im;
            if (h != f.handle) {
                im.v = o.var(h, q);
            } else if (f.kind == FaceSpec::Collision) {
                im.v = o.var(h, q <= f.j ? q : q - 1);
            } else if (f.kind == FaceSpec::LeftEnd) {
                if (q == 1) im.kind = VarImage::Zero;
                else im.v = o.var(h, q - 1);
            } else {
                if (q == s.r[h]) im.kind = VarImage::One;
                else im.v = o.var(h, q);
            }
            sub[s.var(h, q)] = im;
        }
    return sub;
}

FiberPlan make_fiber_plan(const Shape& total, const std::vector<std::vector<bool>>& retained) {
    if (retained.size() != total.r.size()) throw std::invalid_argument("retained marking has wrong handle count");
    FiberPlan p;
    p.base.r.assign(total.r.size(), 0);
    p.newindex.assign(total.nvars(), -1);
    for (size_t h = 0; h < total.r.size(); ++h) {
        if (int(retained[h].size()) != total.r[h]) throw std::invalid_argument("retained marking has wrong packet count");
        for (bool b : retained[h]) p.base.r[h] += b;
    }
    for (int h = 0; h < int(total.r.size()); ++h) {
        int nq = 0, lo = -1;
        std::vector<int> run;
        for (int q = 1; q <= total.r[h]; ++q) {
            int v = total.var(h, q);
            if (retained[h][q - 1]) {
                p.newindex[v] = p.base.var(h, ++nq);
                if (!run.empty()) p.runs.push_back({lo, run, v});
                run.clear();
                lo = v;
            } else {
                run.push_back(v);
                p.forgotten |= uint8_t(1u << v);
            }
        }
        if (!run.empty()) p.runs.push_back({lo, run, -2});
    }
    return p;
}

namespace {
using Poly = std::map<uint64_t, Q>;

int pexp(uint64_t e, int v) { return int((e >> (8 * v)) & 0xff); }
uint64_t pset(uint64_t e, int v, int x) {
    if (x > 255) throw std::overflow_error("exponent out of range");
    return (e & ~(uint64_t(0xff) << (8 * v))) | (uint64_t(x) << (8 * v));
}
void padd(Poly& p, uint64_t e, const Q& c) {
    if (c == 0) return;
    auto [it, fresh] = p.try_emplace(e, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0) p.erase(it);
    }
}

// bound: var index, -1 for 0, -2 for 1; returns false when the monomial vanishes
bool mult_bound(uint64_t& e, int bound, int power) {
    if (bound == -1) return false;
    if (bound == -2) return true;
    e = pset(e, bound, pexp(e, bound) + power);
    return true;
}

Poly integrate_var(const Poly& p, int u, int lo, int hi) {
    Poly out;
    for (auto& [e, c] : p) {
        int n = pexp(e, u);
        uint64_t base = pset(e, u, 0);
        Q cc = c / (n + 1);
        uint64_t up = base, dn = base;
        if (mult_bound(up, hi, n + 1)) padd(out, up, cc);
        if (mult_bound(dn, lo, n + 1)) padd(out, dn, -cc);
    }
    return out;
}
}  // namespace

void integrate_monomial(const PolyKey& k, const Q& c, const FiberPlan& p, PolyTerms& out) {
    if ((k.dt & p.forgotten) != p.forgotten) return;
    int inv = 0;
    for (int f = 0; f < 8; ++f)
        if (p.forgotten >> f & 1) inv += __builtin_popcount(k.dt & ~p.forgotten & ((1u << f) - 1));
    Poly poly{{k.exps, inv & 1 ? Q(-c) : c}};
    for (auto& run : p.runs)
        for (size_t i = 0; i < run.vars.size(); ++i) {
            int hi = i + 1 < run.vars.size() ? run.vars[i + 1] : run.hi;
            poly = integrate_var(poly, run.vars[i], run.lo, hi);
        }
    uint8_t ndt = 0;
    for (int v = 0; v < int(p.newindex.size()); ++v)
        if ((k.dt >> v & 1) && p.newindex[v] >= 0) ndt |= uint8_t(1u << p.newindex[v]);
    for (auto& [e, cc] : poly) {
        PolyKey nk;
        nk.dt = ndt;
        for (int v = 0; v < int(p.newindex.size()); ++v)
            if (pexp(e, v)) nk.set_exp(p.newindex[v], pexp(e, v));
        add_term(out, nk, cc);
    }
}

void d_monomial(const PolyKey& k, const Q& c, PolyTerms& out) {
    for (int v = 0; v < 8; ++v) {
        int e = k.exp(v);
        if (!e || (k.dt >> v & 1)) continue;
        PolyKey nk = k;
        nk.set_exp(v, e - 1);
        nk.dt |= uint8_t(1u << v);
        int sign = __builtin_popcount(k.dt & ((1u << v) - 1)) & 1 ? -1 : 1;
        add_term(out, nk, c * e * sign);
    }
}

PolyForm PolyForm::constant(const Shape& s, const Q& c) {
    PolyForm f(s);
    add_term(f.terms_, PolyKey{}, c);
    return f;
}

static void check_var(const Shape& s, int h, int q) {
    if (h < 0 || h >= int(s.r.size()) || q < 1 || q > s.r[h]) throw std::invalid_argument("coordinate out of range");
    if (s.nvars() > kMaxVars) throw std::invalid_argument("too many coordinates");
}

PolyForm PolyForm::coord(const Shape& s, int h, int q) {
    check_var(s, h, q);
    PolyForm f(s);
    PolyKey k;
    k.set_exp(s.var(h, q), 1);
    f.terms_[k] = 1;
    return f;
}

PolyForm PolyForm::dcoord(const Shape& s, int h, int q) {
    check_var(s, h, q);
    PolyForm f(s);
    PolyKey k;
    k.dt = uint8_t(1u << s.var(h, q));
    f.terms_[k] = 1;
    return f;
}

static void same_shape(const PolyForm& a, const PolyForm& b) {
    if (!(a.shape() == b.shape())) throw std::invalid_argument("shape mismatch");
}

PolyForm PolyForm::operator+(const PolyForm& o) const {
    same_shape(*this, o);
    PolyForm r = *this;
    for (auto& [k, c] : o.terms_) add_term(r.terms_, k, c);
    return r;
}

PolyForm PolyForm::operator-(const PolyForm& o) const { return *this + (-o); }

PolyForm PolyForm::operator-() const {
    PolyForm r = *this;
    for (auto& [k, c] : r.terms_) c = -c;
    return r;
}

PolyForm PolyForm::operator*(const Q& c) const {
    PolyForm r(shape_);
    if (c == 0) return r;
    for (auto& [k, x] : terms_) r.terms_.emplace(k, x * c);
    return r;
}

std::string var_name(const Shape& s, int v) {
    for (int h = 0; h < int(s.r.size()); ++h)
        if (v < s.offset(h) + s.r[h]) return "t" + std::to_string(h + 1) + "_" + std::to_string(v - s.offset(h) + 1);
    throw std::invalid_argument("variable out of range");
}

std::string PolyForm::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [k, c] : terms_) {
        Q a = abs(c);
        if (first) os << (c < 0 ? "-" : "");
        else os << (c < 0 ? " - " : " + ");
        first = false;
        std::vector<std::string> f;
        for (int v = 0; v < shape_.nvars(); ++v) {
            int e = k.exp(v);
            if (e == 1) f.push_back(var_name(shape_, v));
            else if (e > 1) f.push_back(var_name(shape_, v) + "^" + std::to_string(e));
        }
        for (int v = 0; v < shape_.nvars(); ++v)
            if (k.dt >> v & 1) f.push_back("d" + var_name(shape_, v));
        if (a != 1 || f.empty()) f.insert(f.begin(), qstr(a));
        for (size_t i = 0; i < f.size(); ++i) os << (i ? "*" : "") << f[i];
    }
    return os.str();
}

PolyForm wedge(const PolyForm& a, const PolyForm& b) {
    same_shape(a, b);
    PolyForm r(a.shape());
    for (auto& [ka, ca] : a.terms())
        for (auto& [kb, cb] : b.terms()) {
            int s = wedge_sign(ka.dt, kb.dt);
            if (!s) continue;
            PolyKey k;
            k.dt = ka.dt | kb.dt;
            for (int v = 0; v < a.shape().nvars(); ++v)
                if (ka.exp(v) + kb.exp(v)) k.set_exp(v, ka.exp(v) + kb.exp(v));
            add_term(r.terms(), k, s > 0 ? Q(ca * cb) : Q(-ca * cb));
        }
    return r;
}

PolyForm exterior_d(const PolyForm& a) {
    PolyForm r(a.shape());
    for (auto& [k, c] : a.terms()) d_monomial(k, c, r.terms());
    return r;
}

PolyForm restrict_face(const PolyForm& a, const FaceSpec& f) {
    PolyForm r(face_shape(a.shape(), f));
    VarSubst sub = face_subst(a.shape(), f);
    for (auto& [k, c] : a.terms()) {
        auto [s, nk] = substitute(k, sub);
        if (s) add_term(r.terms(), nk, s > 0 ? c : Q(-c));
    }
    return r;
}

PolyForm fiber_integrate(const PolyForm& a, const std::vector<std::vector<bool>>& retained) {
    FiberPlan p = make_fiber_plan(a.shape(), retained);
    PolyForm r(p.base);
    for (auto& [k, c] : a.terms()) integrate_monomial(k, c, p, r.terms());
    return r;
}

Q evaluate(const PolyForm& a, const std::vector<Q>& point) {
    if (int(point.size()) != a.shape().nvars()) throw std::invalid_argument("point has wrong dimension");
    Q sum = 0;
    for (auto& [k, c] : a.terms()) {
        if (k.dt) throw std::invalid_argument("evaluate needs a 0-form");
        Q m = c;
        for (int v = 0; v < int(point.size()); ++v)
            for (int e = k.exp(v); e > 0; --e) m *= point[v];
        sum += m;
    }
    return sum;
}

}  // namespace cfm

namespace cfm {

PolyForm parse_polyform(const Shape& s, const std::string& text) {
    PolyForm r(s);
    std::string t;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) t += ch;
    if (t == "0") return r;
    size_t i = 0;
    auto fail = [&] { throw std::invalid_argument("bad polyform: " + text); };
    while (i < t.size()) {
        int sign = 1;
        if (t[i] == '+' || t[i] == '-') sign = t[i++] == '-' ? -1 : 1;
        size_t j = i;
        while (j < t.size() && t[j] != '+' && t[j] != '-') ++j;
        std::string term = t.substr(i, j - i);
        i = j;
        if (term.empty()) fail();
        Q c = sign;
        PolyKey k;
        std::vector<int> dts;
        std::stringstream ss(term);
        std::string f;
        while (std::getline(ss, f, '*')) {
            if (f.empty()) fail();
            bool d = f[0] == 'd';
            if (std::isdigit(static_cast<unsigned char>(f[0]))) {
                c *= qparse(f);
                continue;
            }
            size_t p = d ? 1 : 0;
            if (f[p] != 't') fail();
            int h = 0, q = 0, e = 1;
            if (std::sscanf(f.c_str() + p, "t%d_%d^%d", &h, &q, &e) < 2) fail();
            if (h < 1 || h > int(s.r.size()) || q < 1 || q > s.r[h - 1]) fail();
            int v = s.var(h - 1, q);
            if (d) dts.push_back(v);
            else k.set_exp(v, k.exp(v) + e);
        }
        for (int v : dts) {
            if (k.dt >> v & 1) fail();
            int sg = wedge_sign(k.dt, uint8_t(1u << v));
            k.dt |= uint8_t(1u << v);
            if (sg < 0) c = -c;
        }
        add_term(r.terms(), k, c);
    }
    return r;
}

}  // namespace cfm
