#pragma once
// Exact rationals and polynomial differential forms on products of simplices.

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cfm {

using Q = mpq_class;

std::string qstr(const Q& q);
// Always use this rather than Q(n, d): gmpxx does not reduce on construction.
inline Q frac(long n, long d) {
    Q q(n, d);
    q.canonicalize();
    return q;
}
Q qparse(const std::string& s);

// Polynomial forms use at most this many coordinates in total.
constexpr int kMaxVars = 8;

// Handle sizes (r_1..r_g); coordinates t_h^(1..r_h) satisfy 0 <= t^(1) <= ... <= t^(r) <= 1.
struct Shape {
    std::vector<int> r;
    int nvars() const;
    int offset(int h) const;  // h is 0-based
    int var(int h, int q) const { return offset(h) + q - 1; }  // q is 1-based
    bool operator==(const Shape&) const = default;
    auto operator<=>(const Shape&) const = default;
};

// Monomial t^e dt^S; exponents packed 8 bits each, dt subset as a bitmask.
struct PolyKey {
    uint64_t exps = 0;
    uint8_t dt = 0;
    int exp(int v) const { return int((exps >> (8 * v)) & 0xff); }
    void set_exp(int v, int e);
    int degree() const { return __builtin_popcount(dt); }
    auto operator<=>(const PolyKey&) const = default;
};

using PolyTerms = std::map<PolyKey, Q>;

void add_term(PolyTerms& t, const PolyKey& k, const Q& c);

// dt_S ^ dt_T: returns 0 on overlap, otherwise the reordering sign.
int wedge_sign(uint8_t s, uint8_t t);

// Where an old coordinate goes under a face inclusion / degeneracy.
struct VarImage {
    enum Kind : uint8_t { Var, Zero, One } kind = Var;
    int v = 0;
};
using VarSubst = std::vector<VarImage>;  // indexed by old variable

// Pull back a monomial along a coordinate substitution. Returns sign 0 when it vanishes.
std::pair<int, PolyKey> substitute(const PolyKey& k, const VarSubst& s);

struct FaceSpec {
    enum Kind { Collision, LeftEnd, RightEnd } kind;
    int handle;  // 0-based
    int j = 0;   // collision between packets j and j+1 (1-based)
};

Shape face_shape(const Shape& s, const FaceSpec& f);
VarSubst face_subst(const Shape& s, const FaceSpec& f);

// Integrate out forgotten packets. retained[h][q-1] marks packet q of handle h.
struct FiberPlan {
    Shape base;
    uint8_t forgotten = 0;       // mask of forgotten vars in the total shape
    std::vector<int> newindex;   // total var -> base var, or -1
    struct Run { int lo; std::vector<int> vars; int hi; };  // lo/hi: var index, -1 for 0, -2 for 1
    std::vector<Run> runs;
};
FiberPlan make_fiber_plan(const Shape& total, const std::vector<std::vector<bool>>& retained);

// Integrates one monomial; the forgotten dt's are moved to the front (ascending) first.
void integrate_monomial(const PolyKey& k, const Q& c, const FiberPlan& p, PolyTerms& out);

void d_monomial(const PolyKey& k, const Q& c, PolyTerms& out);

class PolyForm {
public:
    PolyForm() = default;
    explicit PolyForm(Shape s) : shape_(std::move(s)) {}
    static PolyForm constant(const Shape& s, const Q& c);
    static PolyForm coord(const Shape& s, int h, int q);   // t_h^(q)
    static PolyForm dcoord(const Shape& s, int h, int q);  // dt_h^(q)

    const Shape& shape() const { return shape_; }
    const PolyTerms& terms() const { return terms_; }
    PolyTerms& terms() { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    PolyForm operator+(const PolyForm& o) const;
    PolyForm operator-(const PolyForm& o) const;
    PolyForm operator-() const;
    PolyForm operator*(const Q& c) const;
    bool operator==(const PolyForm& o) const { return shape_ == o.shape_ && terms_ == o.terms_; }

    std::string str() const;

private:
    Shape shape_;
    PolyTerms terms_;
};

PolyForm wedge(const PolyForm& a, const PolyForm& b);
PolyForm exterior_d(const PolyForm& a);
PolyForm restrict_face(const PolyForm& a, const FaceSpec& f);
PolyForm fiber_integrate(const PolyForm& a, const std::vector<std::vector<bool>>& retained);
// Value of a 0-form at a point (coordinates listed in variable order).
Q evaluate(const PolyForm& a, const std::vector<Q>& point);

std::string var_name(const Shape& s, int v);
// Inverse of PolyForm::str().
PolyForm parse_polyform(const Shape& s, const std::string& text);

}  // namespace cfm
