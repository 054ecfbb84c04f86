#pragma once
// Graded-commutative algebras generated by omega_{ij}, theta_i, omega_{*i}, omega_{i,marked}.
//
// Every algebra here is realized inside one universal Arnold algebra on byte-coded labels:
// a Context assigns each label a group, generators across groups vanish, and so do
// omega between two special labels (stars, marked points) and theta of a special label.
// Tensor products are several groups in one context.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cfm/exactpoly.hpp"

namespace cfm {

using Label = uint8_t;

namespace lbl {
constexpr Label under(int j) { return Label(j); }              // 1..7
constexpr Label over(int j) { return Label(8 + j); }           // 9..15
constexpr Label star(int h, int q) { return Label(16 + (h - 1) * 8 + (q - 1)); }  // 16..79
constexpr Label rpt(int p) { return Label(80 + p); }           // right factor of a cocomposition
constexpr Label pt(int p) { return Label(128 + p); }           // ordinary points 1..127
constexpr bool special(Label l) { return l < 80; }
constexpr bool is_under(Label l) { return l >= 1 && l <= 7; }
constexpr bool is_over(Label l) { return l >= 9 && l <= 15; }
constexpr bool is_star(Label l) { return l >= 16 && l < 80; }
constexpr bool is_rpt(Label l) { return l >= 80 && l < 128; }
constexpr bool is_pt(Label l) { return l >= 128; }
constexpr int point_of(Label l) { return is_pt(l) ? l - 128 : l - 80; }
constexpr int star_handle(Label l) { return (l - 16) / 8 + 1; }
constexpr int star_packet(Label l) { return (l - 16) % 8 + 1; }
}  // namespace lbl

// omega_{lo,hi} with lo < hi, or theta_lo when lo == hi.
using Gen = uint16_t;
constexpr Gen mkgen(Label a, Label b) { return a <= b ? Gen(a << 8 | b) : Gen(b << 8 | a); }
constexpr Label glo(Gen g) { return Label(g >> 8); }
constexpr Label ghi(Gen g) { return Label(g & 0xff); }
constexpr bool is_theta(Gen g) { return glo(g) == ghi(g); }

// Ordered product of degree-one generators.
struct Mono {
    static constexpr int kCap = 18;
    std::array<Gen, kCap> g{};
    uint8_t n = 0;
    int degree() const { return n; }
    void push(Gen x);
    const Gen* begin() const { return g.data(); }
    const Gen* end() const { return g.data() + n; }
    Gen operator[](int i) const { return g[i]; }
    bool contains(Gen x) const;
    bool operator==(const Mono& o) const;
    bool operator<(const Mono& o) const;
};

struct MonoHash {
    size_t operator()(const Mono& m) const;
};

Mono concat(const Mono& a, const Mono& b);
// Sorts in place; returns the Koszul sign, or 0 if a generator repeats.
int sort_mono(Mono& m);
// Removes x and returns (-1)^(its position), i.e. the sign of moving it to the front; 0 if absent.
int extract_front(Mono& m, Gen x);

struct Context {
    std::array<int8_t, 256> group;
    Context() { group.fill(-1); }
    void add(Label l, int grp) { group[l] = int8_t(grp); }
    bool has(Label l) const { return group[l] >= 0; }
    bool valid(Gen x) const;
    std::vector<Label> labels() const;
};

using AlgTerms = std::map<Mono, Q>;

void add_alg(AlgTerms& t, const Mono& m, const Q& c);
// Normal form of c * raw (any order, any generators) added into out.
void reduce_into(const Mono& raw, const Q& c, const Context& ctx, AlgTerms& out);
// Integer-coefficient Arnold normal form of a sorted, repetition-free product, ignoring the context.
const std::vector<std::pair<Mono, long>>& arnold_nf(const Mono& sorted);

// A linear combination of at most four generators; the image of one generator under an algebra map.
struct GenImage {
    std::array<std::pair<Gen, int>, 4> v{};
    int n = 0;
    void add(Gen g, int c) { v[n++] = {g, c}; }
    static GenImage of(Gen g) { GenImage r; r.add(g, 1); return r; }
};

// Applies the algebra map determined by f to c*m and reduces in the target context.
template <class F>
void map_mono(const Mono& m, const Q& c, F&& f, const Context& target, AlgTerms& out) {
    std::array<GenImage, Mono::kCap> imgs;
    for (int i = 0; i < m.n; ++i) {
        imgs[i] = f(m.g[i]);
        if (imgs[i].n == 0) return;
    }
    std::array<int, Mono::kCap> idx{};
    Mono cur;
    cur.n = m.n;
    while (true) {
        long coef = 1;
        for (int i = 0; i < m.n; ++i) {
            cur.g[i] = imgs[i].v[idx[i]].first;
            coef *= imgs[i].v[idx[i]].second;
        }
        reduce_into(cur, c * coef, target, out);
        int i = m.n - 1;
        while (i >= 0 && ++idx[i] == imgs[i].n) idx[i--] = 0;
        if (i < 0) break;
    }
}

enum class Kind { BV, BVC, BVGG };

struct Presentation {
    Kind kind = Kind::BV;
    int genus = 0;
    std::vector<int> points;  // ordinary labels
    Context ctx;

    static Presentation bv(std::vector<int> pts);
    static Presentation bvc(std::vector<int> pts);
    static Presentation bvgg(int g, std::vector<int> pts);
    bool has_point(int p) const;
    bool operator==(const Presentation& o) const { return kind == o.kind && genus == o.genus && points == o.points; }
    std::string str() const;
};

// Names used by printer and parser: p, *, *h.q, _u j, _o j, 'p for right-factor points.
std::string label_name(Label l);
std::string gen_token(Gen g);
std::string mono_str(const Mono& m);

class AlgElement {
public:
    AlgElement() = default;
    explicit AlgElement(Presentation p) : pres_(std::move(p)) {}
    static AlgElement one(const Presentation& p);
    static AlgElement generator(const Presentation& p, Gen g);
    static AlgElement parse(const Presentation& p, const std::string& text);
    // Normal form of a raw product (errors on generators not in the presentation).
    static AlgElement normal_form(const Presentation& p, const std::vector<Gen>& raw, const Q& c = 1);

    const Presentation& pres() const { return pres_; }
    const AlgTerms& terms() const { return terms_; }
    AlgTerms& terms() { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    AlgElement operator+(const AlgElement& o) const;
    AlgElement operator-(const AlgElement& o) const;
    AlgElement operator*(const Q& c) const;
    bool operator==(const AlgElement& o) const { return pres_ == o.pres_ && terms_ == o.terms_; }
    std::string str() const;

private:
    Presentation pres_;
    AlgTerms terms_;
};

std::string terms_str(const AlgTerms& t);
AlgTerms parse_terms(const std::string& text);
// Splits "c*x*y - z" into (coefficient, factor tokens); parenthesised tokens may contain '*'.
std::vector<std::pair<Q, std::vector<std::string>>> split_terms(const std::string& text);
Gen parse_gen_token(const std::string& tok);

AlgElement multiply(const AlgElement& a, const AlgElement& b);
std::vector<Mono> basis(const Presentation& p, int degree);
std::vector<long> poincare(const Presentation& p);  // dims in degrees 0..top

struct AlgTensor {
    Presentation left, right;
    std::map<std::pair<Mono, Mono>, Q> terms;
    bool operator==(const AlgTensor& o) const { return left == o.left && right == o.right && terms == o.terms; }
    std::string str() const;
};

// Splits m into the generators satisfying in_right (moved to the right) and the rest; returns the sign.
int split_mono(const Mono& m, const std::function<bool(Gen)>& in_right, Mono& l, Mono& r);

// Delta_T: collapse T into newlabel. Left: same kind on (S\T) + newlabel, right: BV(T).
AlgTensor cocompose(const AlgElement& a, const std::vector<int>& T, int newlabel);

struct Target {
    enum Kind { Under, Over, Star, Inf, Point } kind;
    int j = 0;
};

// Point p approaches a marked point, the star, or infinity. Left: BVC({p}), right: same kind on S\{p}.
// The involution is applied to the packet for the overline targets.
AlgTensor cocompose_at_marked(const AlgElement& a, int p, Target t);

Q cobracket_projection(const AlgElement& a);

// Degree -1 operators. Point target collapses i into j (label j kept); Inf in BV is the 0 index.
AlgElement boundary(const AlgElement& a, int i, Target j);

AlgElement involution(const AlgElement& a);

// ---- generator maps shared with the totalization ----

// The involution on the packet group with star s (labels flagged by inGroup); other generators fixed.
GenImage involution_gen(Gen g, Label s, const std::function<bool(Label)>& inGroup);
// Packet P (labels flagged by inP) arrives at the special label m, becoming a group with star s.
GenImage approach_gen(Gen g, const std::function<bool(Label)>& inP, Label m, Label s);
// Packet P goes to infinity, becoming a group with star s.
GenImage infinity_gen(Gen g, const std::function<bool(Label)>& inP, Label s);

}  // namespace cfm
