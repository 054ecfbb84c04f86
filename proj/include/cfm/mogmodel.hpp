#pragma once
// The small model Mo_g(S) = H(Sigma_g)^{(x)S} (x) BV(S) / (a_i w_ij - a_j w_ij, b_i w_ij - b_j w_ij).

#include <map>
#include <string>
#include <vector>

#include "cfm/bvalgebra.hpp"

namespace cfm {

// Surface classes: 0 = 1, 1..g = a^k, g+1..2g = b^k, 2g+1 = nu.
struct HBasis {
    int g;
    int size() const { return 2 * g + 2; }
    int a(int k) const { return k; }
    int b(int k) const { return g + k; }
    int nu() const { return 2 * g + 1; }
    int degree(int c) const { return c == 0 ? 0 : c == nu() ? 2 : 1; }
    // product of basis classes: (coefficient, class); coefficient 0 when it vanishes
    std::pair<int, int> mul(int x, int y) const;
    std::string name(int c) const;
};

// An ordered raw symbol: a BV generator or a surface class at a point.
struct MSym {
    bool is_h = false;
    Gen gen = 0;
    int point = 0, cls = 0;
    static MSym w(Gen x) { return {false, x, 0, 0}; }
    static MSym h(int p, int c) { return {true, 0, p, c}; }
};

struct MogKey {
    std::vector<uint8_t> h;  // class per point (index into the sorted point list)
    Mono bv;
    bool operator<(const MogKey& o) const { return h != o.h ? h < o.h : bv < o.bv; }
    bool operator==(const MogKey& o) const { return h == o.h && bv == o.bv; }
};

class MogElement {
public:
    MogElement() = default;
    MogElement(int g, std::vector<int> pts);
    static MogElement one(int g, std::vector<int> pts);
    // Normal form of c * (ordered product of raw symbols).
    static MogElement from_raw(int g, std::vector<int> pts, const std::vector<MSym>& raw, const Q& c = 1);
    static MogElement parse(int g, std::vector<int> pts, const std::string& text);

    int genus() const { return g_; }
    const std::vector<int>& points() const { return pts_; }
    const Presentation& bvpres() const { return bv_; }
    const std::map<MogKey, Q>& terms() const { return terms_; }
    std::map<MogKey, Q>& terms() { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int index_of(int p) const;

    // adds c * raw into this element
    void add_raw(const std::vector<MSym>& raw, const Q& c);

    MogElement operator+(const MogElement& o) const;
    MogElement operator-(const MogElement& o) const;
    MogElement operator*(const Q& c) const;
    bool operator==(const MogElement& o) const { return g_ == o.g_ && pts_ == o.pts_ && terms_ == o.terms_; }
    std::string str() const;
    std::string key_str(const MogKey& k) const;
    std::vector<MSym> key_syms(const MogKey& k) const;

private:
    int g_ = 0;
    std::vector<int> pts_;
    Presentation bv_;
    std::map<MogKey, Q> terms_;
};

int mog_degree(int g, const MogKey& k);
MogElement mog_multiply(const MogElement& a, const MogElement& b);
MogElement mog_differential(const MogElement& a);
std::vector<MogKey> mog_basis(int g, const std::vector<int>& pts, int degree);

struct MogTensor {
    std::vector<int> left_pts, right_pts;
    std::map<std::pair<MogKey, Mono>, Q> terms;
    bool operator==(const MogTensor& o) const { return terms == o.terms && left_pts == o.left_pts; }
};
MogTensor mog_coaction(const MogElement& a, const std::vector<int>& T, int newlabel);
MogElement extend_points(const MogElement& a, const std::vector<int>& new_labels);

struct CohomologyReport {
    std::vector<long> dims, ranks, betti;  // ranks[k] = rank of d: degree k -> k+1
};
CohomologyReport cohomology_ranks(int g, const std::vector<int>& pts, int max_degree = -1);

}  // namespace cfm
