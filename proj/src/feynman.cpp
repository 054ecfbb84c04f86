#include "cfm/feynman.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace cfm {

namespace {

PolyForm lin(const Shape& s, const Q& c0, const std::vector<std::pair<int, Q>>& vt = {}) {
    PolyForm f(s);
    add_term(f.terms(), PolyKey{}, c0);
    for (auto& [v, c] : vt) {
        PolyKey k;
        k.set_exp(v, 1);
        add_term(f.terms(), k, c);
    }
    return f;
}

PolyForm dt(const Shape& s, int v) {
    PolyForm f(s);
    PolyKey k;
    k.dt = uint8_t(1u << v);
    f.terms()[k] = 1;
    return f;
}

Gen W(Label a, Label b) { return mkgen(a, b); }
const Label P1 = lbl::pt(1), P2 = lbl::pt(2);

Label star_of(const Place& p) { return star_label(p.h, p.q); }

bool in_bulk(const Place& p) { return p.h <= 0; }

// Swaps labels 1 and 2 in every stratum value: value_S = sigma(value_{sigma S}).
StratifiedElement symmetrise_from(const StratifiedElement& canon, const std::vector<bool>& is_canon) {
    StratifiedElement r = canon * Q(0);
    const StrataTable& T = canon.table();
    std::map<Label, Label> sw{{P1, P2}, {P2, P1}};
    auto f = [&](Gen x) {
        auto m = [&](Label l) {
            auto it = sw.find(l);
            return it == sw.end() ? l : it->second;
        };
        return GenImage::of(mkgen(m(glo(x)), m(ghi(x))));
    };
    for (size_t i = 0; i < T.strata.size(); ++i) {
        if (is_canon[i]) {
            r.value(i) = canon.value(i);
            continue;
        }
        Stratum s = T.strata[i];
        std::swap(s.f[0], s.f[1]);
        int k = T.find(s);
        if (!is_canon[k]) throw std::logic_error("propagator stratum has no canonical partner");
        for (auto& [key, c] : canon.value(k)) {
            AlgTerms t;
            map_mono(key.first, c, f, r.context(i), t);
            for (auto& [m, cc] : t) add_value(r.value(i), m, key.second, cc);
        }
    }
    return r;
}

StratifiedElement omega_positive(int g, const Q& half) {
    StratifiedElement w(g, {1, 2});
    const StrataTable& T = w.table();
    std::vector<bool> canon(T.strata.size(), true);
    for (size_t i = 0; i < T.strata.size(); ++i) {
        const Stratum& S = T.strata[i];
        const Shape& sh = T.shape[i];
        Place f1 = S.f[0], f2 = S.f[1];
        auto var = [&](const Place& p) { return sh.var(p.h - 1, p.q); };
        if (!in_bulk(f1) && (in_bulk(f2) || (f1.h == f2.h && f1.q > f2.q) || (f1.h >= 2 && f2.h == 1))) {
            canon[i] = false;
            continue;
        }
        if (in_bulk(f1) && in_bulk(f2)) {  // A
            w.add(i, {W(P1, P2)}, lin(sh, 1));
            w.add(i, {W(P1, lbl::under(1))}, lin(sh, -half));
            w.add(i, {W(P2, lbl::under(1))}, lin(sh, -half));
        } else if (in_bulk(f1) && f2.h == 1) {  // B_2
            int t = var(f2);
            w.add(i, {W(P1, lbl::under(1))}, lin(sh, frac(1, 2), {{t, -1}}));
            w.add(i, {W(star_of(f2), P2)}, lin(sh, frac(-1, 2), {{t, 1}}));
        } else if (in_bulk(f1)) {  // C_2
            int t = var(f2), j = f2.h;
            w.add(i, {W(P1, lbl::under(j))}, lin(sh, 1, {{t, -1}}));
            w.add(i, {W(P1, lbl::over(j))}, lin(sh, 0, {{t, 1}}));
            w.add(i, {W(P1, lbl::under(1))}, lin(sh, frac(-1, 2)));
        } else if (f1 == f2) {  // B_(12), C_(12)
            Label s = star_of(f1);
            w.add(i, {W(P1, P2)}, lin(sh, 1));
            PolyForm c = f1.h == 1 ? lin(sh, frac(-1, 2)) : lin(sh, 0, {{var(f1), -1}});
            w.add(i, {W(s, P1)}, c);
            w.add(i, {W(s, P2)}, c);
        } else if (f1.h == f2.h) {  // B_12, C_12
            int t1 = var(f1), t2 = var(f2);
            if (f1.h == 1) {
                w.add(i, {W(star_of(f1), P1)}, lin(sh, frac(1, 2), {{t1, 1}, {t2, -1}}));
                w.add(i, {W(star_of(f2), P2)}, lin(sh, frac(-1, 2), {{t2, 1}, {t1, -1}}));
            } else {
                w.add(i, {W(star_of(f1), P1)}, lin(sh, 1, {{t2, -1}}));
                w.add(i, {W(star_of(f2), P2)}, lin(sh, 0, {{t1, -1}}));
            }
        } else if (f1.h == 1) {  // B_1C_2
            w.add(i, {W(star_of(f1), P1)}, lin(sh, frac(-1, 2), {{var(f1), 1}}));
        }
        // C_1C_2: zero
    }
    return symmetrise_from(w, canon);
}

StratifiedElement omega_sphere() {
    StratifiedElement w(0, {1, 2});
    const StrataTable& T = w.table();
    std::vector<bool> canon(T.strata.size(), true);
    for (size_t i = 0; i < T.strata.size(); ++i) {
        const Stratum& S = T.strata[i];
        const Shape& sh = T.shape[i];
        Place f1 = S.f[0], f2 = S.f[1];
        auto var = [&](const Place& p) { return sh.var(p.h - 1, p.q); };
        if (!in_bulk(f1) && (in_bulk(f2) || f1.q > f2.q)) {
            canon[i] = false;
            continue;
        }
        if (in_bulk(f1) && in_bulk(f2)) {
            if (f1 == f2) w.add(i, {W(P1, P2)}, lin(sh, 1));
        } else if (in_bulk(f1)) {
            int t = var(f2);
            if (f1.h < 0) w.add(i, {W(star_of(f2), P2)}, lin(sh, 0, {{t, 1}}));    // right sphere
            else w.add(i, {W(star_of(f2), P2)}, lin(sh, -1, {{t, 1}}));            // left sphere
        } else if (f1 == f2) {
            Label s = star_of(f1);
            int t = var(f1);
            w.add(i, {W(P1, P2)}, lin(sh, 1));
            w.add(i, {W(s, P1)}, lin(sh, -1, {{t, 1}}));
            w.add(i, {W(s, P2)}, lin(sh, -1, {{t, 1}}));
        } else {
            int t1 = var(f1), t2 = var(f2);
            w.add(i, {W(star_of(f1), P1)}, lin(sh, 0, {{t1, 1}}));
            w.add(i, {W(star_of(f2), P2)}, lin(sh, -1, {{t2, 1}}));
        }
    }
    return symmetrise_from(w, canon);
}

}  // namespace

StratifiedElement build_omega(int g, const Q& bulk_coefficient) {
    if (g == 0) return omega_sphere();
    return omega_positive(g, bulk_coefficient);
}

ModelFormCatalog build_catalog(int g) {
    if (g < 0 || g > 7) throw std::invalid_argument("genus out of range");
    ModelFormCatalog c;
    c.g = g;
    StratifiedElement one_pt(g, {1});
    const StrataTable& T = one_pt.table();
    c.a.assign(g + 1, one_pt);
    c.b.assign(g + 1, one_pt);
    c.eta = one_pt;
    for (size_t i = 0; i < T.strata.size(); ++i) {
        const Shape& sh = T.shape[i];
        Place f = T.strata[i].f[0];
        if (g == 0) {
            if (in_bulk(f)) {
                c.eta.add(i, {W(P1, P1)}, lin(sh, 1));
            } else {
                c.eta.add(i, {W(P1, P1)}, lin(sh, 1));
                c.eta.add(i, {W(star_of(f), P1)}, lin(sh, -2, {{sh.var(0, 1), 2}}));
            }
            continue;
        }
        if (in_bulk(f)) {
            for (int j = 1; j <= g; ++j) {
                c.b[j].add(i, {W(P1, lbl::under(j))}, lin(sh, 1));
                if (j >= 2) c.b[j].add(i, {W(P1, lbl::over(j))}, lin(sh, -1));
            }
            c.eta.add(i, {W(P1, P1)}, lin(sh, 1));
            c.eta.add(i, {W(P1, lbl::under(1))}, lin(sh, -1));
        } else {
            int j = f.h, t = sh.var(j - 1, 1);
            c.a[j].add(i, {}, dt(sh, t));
            c.b[j].add(i, {W(star_of(f), P1)}, lin(sh, 1));
            c.eta.add(i, {W(P1, P1)}, lin(sh, 1));
            if (j == 1) c.eta.add(i, {W(star_of(f), P1)}, lin(sh, -1));
            else c.eta.add(i, {W(star_of(f), P1)}, lin(sh, 0, {{t, -2}}));
        }
    }
    if (g == 0) {
        c.nu = one_pt;
        for (size_t i = 0; i < T.strata.size(); ++i) {
            Place f = T.strata[i].f[0];
            if (!in_bulk(f)) c.nu.add(i, {W(star_of(f), P1)}, dt(T.shape[i], T.shape[i].var(0, 1)), -1);
        }
    } else {
        c.nu = total_wedge(c.a[1], c.b[1]);
    }
    c.omega = build_omega(g);
    return c;
}

const ModelFormCatalog& catalog(int g) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<ModelFormCatalog>> cache;
    std::lock_guard<std::mutex> lk(mu);
    auto& p = cache[g];
    if (!p) p = std::make_unique<ModelFormCatalog>(build_catalog(g));
    return *p;
}

StratifiedElement class_form(const ModelFormCatalog& c, int cls) {
    HBasis H{c.g};
    if (cls == 0) return StratifiedElement::constant(c.g, {1}, 1);
    if (cls == H.nu()) return c.nu;
    if (cls >= 1 && cls <= c.g) return c.a[cls];
    if (cls > c.g && cls <= 2 * c.g) return c.b[cls - c.g];
    throw std::invalid_argument("bad surface class");
}

StratifiedElement pulled_class(int g, int cls, int p, const std::vector<int>& labels) {
    return pullback(class_form(catalog(g), cls), {{1, p}}, labels);
}

StratifiedElement pulled_omega(int g, int p, int q, const std::vector<int>& labels) {
    return pullback(catalog(g).omega, {{1, p}, {2, q}}, labels);
}

StratifiedElement pulled_eta(int g, int p, const std::vector<int>& labels) {
    return pullback(catalog(g).eta, {{1, p}}, labels);
}

std::vector<int> graph_labels(const std::vector<int>& ext, int k) {
    std::vector<int> l = ext;
    int base = ext.empty() ? 0 : *std::max_element(ext.begin(), ext.end());
    for (int i = 0; i < k; ++i) l.push_back(base + 1 + i);
    if (!l.empty() && l.back() > 47) throw std::invalid_argument("too many vertices");
    std::sort(l.begin(), l.end());
    return l;
}

namespace {

// Pulled-back factors are shared across graphs on the same label set.
const StratifiedElement& cached_factor(int g, const GSym& s, int u, int v, const std::vector<int>& labels) {
    using Key = std::tuple<int, int, int, int, int, std::vector<int>>;
    static std::mutex mu;
    static std::map<Key, std::unique_ptr<StratifiedElement>> cache;
    Key key{g, s.kind, s.cls, u, v, labels};
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return *it->second;
    }
    StratifiedElement f;
    if (s.kind == 1) f = pulled_class(g, s.cls, u, labels);
    else if (u == v) f = pulled_eta(g, u, labels);
    else f = pulled_omega(g, u, v, labels);
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[key];
    if (!slot) slot = std::make_unique<StratifiedElement>(std::move(f));
    return *slot;
}

}  // namespace

StratifiedElement map_A_word(int g, const std::vector<int>& ext, int k, const std::vector<GSym>& word,
                             const std::vector<char>* mask) {
    std::vector<int> labels = graph_labels(ext, k);
    int r = int(ext.size());
    int base = ext.empty() ? 0 : ext.back();
    auto name = [&](int v) { return v < r ? ext[v] : base + 1 + (v - r); };
    if (word.empty()) return StratifiedElement::constant(g, labels, 1);
    StratifiedElement out = cached_factor(g, word[0], name(word[0].u), name(word[0].v), labels);
    if (mask)
        for (size_t i = 0; i < out.size(); ++i)
            if (!(*mask)[i]) out.value(i).clear();
    for (size_t i = 1; i < word.size() && !out.is_zero(); ++i)
        out = total_wedge(out, cached_factor(g, word[i], name(word[i].u), name(word[i].v), labels), mask);
    return out;
}

StratifiedElement map_A(const GraphSum& gr) {
    int kmax = 0;
    for (auto& [key, c] : gr.terms()) kmax = std::max(kmax, int(key.k));
    StratifiedElement out(gr.genus(), graph_labels(gr.ext(), kmax));
    for (auto& [key, c] : gr.terms()) {
        if (key.k != kmax) throw std::invalid_argument("map_A needs a fixed number of internal vertices");
        out = out + map_A_word(gr.genus(), gr.ext(), key.k, gr.word(key)) * c;
    }
    return out;
}

StratifiedElement map_F(const GraphSum& gr) {
    StratifiedElement out(gr.genus(), gr.ext());
    for (auto& [key, c] : gr.terms()) {
        std::vector<int> labels = graph_labels(gr.ext(), key.k);
        std::vector<int> K(labels.begin() + gr.r(), labels.end());
        std::vector<char> mask = fiber_support(*strata_table(gr.genus(), labels), K);
        StratifiedElement a = map_A_word(gr.genus(), gr.ext(), key.k, gr.word(key), &mask);
        out = out + total_fiber_integrate(a, K) * c;
    }
    return out;
}

StratifiedElement map_F(int g, const GraphTensor& t) {
    Presentation bvT = Presentation::bv(t.right_pts);
    StratifiedElement out(g, t.left_ext, t.right_pts);
    for (auto& [key, c] : t.terms) {
        GraphSum left(g, t.left_ext);
        left.add_word(key.first.k, left.word(key.first), c);
        AlgElement b(bvT);
        b.terms()[key.second] = 1;
        out = out + with_right(map_F(left), b);
    }
    return out;
}

Q partition_Z(int g, int k, const std::vector<GSym>& word) {
    std::vector<int> K = graph_labels({}, k);
    std::vector<char> mask = fiber_support(*strata_table(g, K), K);
    StratifiedElement a = map_A_word(g, {}, k, word, &mask);
    StratifiedElement z = total_fiber_integrate(a, K);
    Q v = 0;
    for (auto& [key, c] : z.value(0)) {
        if (key.first.n != 0 || key.second.dt != 0 || key.second.exps != 0)
            throw std::logic_error("partition function is not a number");
        v += c;
    }
    return v;
}

PolyForm genus0_f(int r) {
    if (r < 1) throw std::invalid_argument("r must be positive");
    Shape sh;
    sh.r = {r};
    auto t = [&](int j) {
        if (j == 0) return PolyForm(sh);
        if (j == r + 1) return PolyForm::constant(sh, 1);
        return PolyForm::coord(sh, 0, j);
    };
    PolyForm out(sh);
    for (int j = 0; j <= r; ++j) {
        PolyForm term = t(j + 1) - t(j);
        for (int k = 1; k <= j; ++k) term = wedge(term, t(k));
        for (int k = j + 1; k <= r; ++k) term = wedge(term, t(k) - PolyForm::constant(sh, 1));
        out = out + term;
    }
    return out;
}

PolyForm genus0_f_integrated(int r) {
    if (r < 1) throw std::invalid_argument("r must be positive");
    Shape base;
    base.r = {r};
    PolyForm out(base);
    // the moving point sits in slot j; the integrand factor for point k is t_k - [t < t_k]
    for (int j = 0; j <= r; ++j) {
        Shape sh;
        sh.r = {r + 1};
        int mv = j + 1;
        PolyForm integrand = PolyForm::dcoord(sh, 0, mv);
        for (int k = 1; k <= r; ++k) {
            int q = k <= j ? k : k + 1;
            PolyForm tk = PolyForm::coord(sh, 0, q);
            integrand = wedge(integrand, k <= j ? tk : tk - PolyForm::constant(sh, 1));
        }
        std::vector<std::vector<bool>> retained{std::vector<bool>(r + 1, true)};
        retained[0][mv - 1] = false;
        out = out + fiber_integrate(integrand, retained);
    }
    return out;
}

GraphSum gamma_graph(int g, int j) {
    if (j < 1 || j > g) throw std::invalid_argument("handle index out of range");
    HBasis H{g};
    GraphSum s(g, {1});
    s.add_word(1, {GSym::edge(0, 1), GSym::deco(1, H.a(j)), GSym::deco(1, H.b(j))}, 1);
    return s;
}

StratifiedElement example_alpha(int g) {
    if (g < 2) throw std::invalid_argument("example needs genus at least 2");
    StratifiedElement out(g, {1});
    for (int j = 2; j <= g; ++j) out = out + map_F(gamma_graph(g, j)) * Q(2);
    return out;
}

StratifiedElement domega_expected(int g) {
    std::vector<int> L{1, 2};
    HBasis H{g};
    StratifiedElement out = pulled_class(g, H.nu(), 1, L) + pulled_class(g, H.nu(), 2, L);
    for (int k = 1; k <= g; ++k) {
        out = out - total_wedge(pulled_class(g, H.a(k), 1, L), pulled_class(g, H.b(k), 2, L));
        out = out - total_wedge(pulled_class(g, H.a(k), 2, L), pulled_class(g, H.b(k), 1, L));
    }
    return out;
}

}  // namespace cfm
