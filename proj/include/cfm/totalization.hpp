#pragma once
// The strict totalization M'_g(S): values on strata (r, f), continuity, d, products, coactions,
// boundary operators and the combinatorial fiber integral.
//
// g >= 1: a bulk sphere with marked points _u1.._ug, _o2.._og and g handles. Handle 1 runs from _u1
// (t = 0) to infinity (t = 1); handle j >= 2 from _uj to _oj, with the involution at _oj.
// g = 0: a left sphere L and a right sphere R joined by one handle; t = 0 meets infinity of L
// (with the involution), t = 1 meets infinity of R.
//
// A stratum value is a sum of (algebra monomial, polynomial form) pairs in one universal Arnold
// algebra: bulk and every packet are separate label groups, packet (h, q) has star label
// star(h, q), and forms sit to the right of the algebra part. Packets on a handle are ordered by
// their coordinate; when two collide the one with the larger coordinate becomes the inner one.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cfm/bvalgebra.hpp"
#include "cfm/exactpoly.hpp"

namespace cfm {

// Where a point sits: h = 0 bulk (L for g = 0), h = -1 the right sphere R (g = 0), h >= 1 packet q
// of handle h.
struct Place {
    int h = 0, q = 0;
    auto operator<=>(const Place&) const = default;
};

struct Stratum {
    std::vector<int> r;      // packets per handle
    std::vector<Place> f;    // per label position
    auto operator<=>(const Stratum&) const = default;
};

int handle_count(int g);

// All strata for the sorted label set, in a fixed order.
std::vector<Stratum> enumerate_strata(int g, const std::vector<int>& labels);

struct StrataTable {
    int g = 0;
    std::vector<int> labels;
    std::vector<Stratum> strata;
    std::vector<Context> ctx;
    std::vector<Shape> shape;
    std::map<Stratum, int> index;
    int find(const Stratum& s) const;  // -1 when absent
    int pos(int label) const;          // position in labels, -1 when absent
};
std::shared_ptr<const StrataTable> strata_table(int g, const std::vector<int>& labels);

// Label of the packet group / bulk group containing a point on a stratum.
Label star_label(int h, int q);
int group_of(const Place& p);

using StratumValue = std::map<std::pair<Mono, PolyKey>, Q>;
void add_value(StratumValue& v, const Mono& m, const PolyKey& k, const Q& c);

class StratifiedElement {
public:
    StratifiedElement() = default;
    // right: labels of an extra BV(right) factor carried as right-point generators
    StratifiedElement(int g, std::vector<int> labels, std::vector<int> right = {});
    static StratifiedElement constant(int g, std::vector<int> labels, const Q& c);

    int genus() const { return table_->g; }
    const std::vector<int>& labels() const { return table_->labels; }
    const std::vector<int>& right() const { return right_; }
    const StrataTable& table() const { return *table_; }
    std::shared_ptr<const StrataTable> table_ptr() const { return table_; }
    size_t size() const { return values_.size(); }
    const StratumValue& value(size_t i) const { return values_[i]; }
    StratumValue& value(size_t i) { return values_[i]; }
    const Context& context(size_t i) const { return ctx_[i]; }
    bool is_zero() const;

    // Adds c * (ordered raw generators) * form on stratum i, reduced to normal form.
    void add(size_t i, const std::vector<Gen>& raw, const PolyForm& form, const Q& c = 1);

    StratifiedElement operator+(const StratifiedElement& o) const;
    StratifiedElement operator-(const StratifiedElement& o) const;
    StratifiedElement operator*(const Q& c) const;
    bool operator==(const StratifiedElement& o) const;

    std::string value_str(size_t i) const;
    std::string dump() const;
    static StratifiedElement parse_dump(const std::string& text);

private:
    std::shared_ptr<const StrataTable> table_;
    std::vector<int> right_;
    std::vector<Context> ctx_;  // table contexts plus the right group
    std::vector<StratumValue> values_;
};

PolyForm value_form(const StratumValue& v, const Mono& m, const Shape& s);

struct ContinuityReport {
    bool ok = true;
    long faces_checked = 0;
    std::vector<std::string> violations;
};
ContinuityReport check_continuity(const StratifiedElement& a);

StratifiedElement total_d(const StratifiedElement& a);
// mask, when given, restricts the product to the flagged strata (the rest stay zero).
StratifiedElement total_wedge(const StratifiedElement& a, const StratifiedElement& b,
                              const std::vector<char>* mask = nullptr);

// Pullback along an injective relabelling of a's labels into the target label set.
StratifiedElement pullback(const StratifiedElement& a, const std::map<int, int>& relabel,
                           const std::vector<int>& target);
// Nullary cogenerator: the same element on a larger label set, independent of the new points.
StratifiedElement extend_points(const StratifiedElement& a, const std::vector<int>& new_labels);

// Delta_T: collapse T into newlabel; the BV(T) factor is carried as right-point generators.
StratifiedElement total_coaction(const StratifiedElement& a, const std::vector<int>& T, int newlabel);
// a * b with b in BV(T) placed in the right factor.
StratifiedElement with_right(const StratifiedElement& a, const AlgElement& b);

// d_ij: collapse i into j and project the binary factor to the cobracket; label j is kept.
StratifiedElement total_boundary(const StratifiedElement& a, int i, int j);

// Strata read by the fiber integral over K: every K-point alone in a handle packet.
std::vector<char> fiber_support(const StrataTable& t, const std::vector<int>& K);
StratifiedElement total_fiber_integrate(const StratifiedElement& a, const std::vector<int>& K);

// d int_K a - int_K d a - (-1)^|K| sum_{i in K} sum_{j < i} int_{K - i} d_ij a; zero by Stokes.
StratifiedElement stokes_defect(const StratifiedElement& a, const std::vector<int>& K);

}  // namespace cfm
