#pragma once
// Decorated graph complexes: graphs with numbered external and unlabelled internal vertices,
// odd edges and tadpoles, and surface-class decorations.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cfm/mogmodel.hpp"

namespace cfm {

// One factor of a graph word: an edge (u <= v, u == v is a tadpole) or a decoration at u.
// Vertices 0..r-1 are external (sorted labels), r..r+k-1 internal.
struct GSym {
    uint8_t kind = 0;  // 0 edge, 1 decoration
    uint8_t u = 0, v = 0, cls = 0;
    static GSym edge(int a, int b) { return {0, uint8_t(std::min(a, b)), uint8_t(std::max(a, b)), 0}; }
    static GSym deco(int a, int c) { return {1, uint8_t(a), uint8_t(a), uint8_t(c)}; }
    uint32_t code() const { return uint32_t(kind) << 24 | uint32_t(u) << 16 | uint32_t(v) << 8 | cls; }
    static GSym from_code(uint32_t c) { return {uint8_t(c >> 24), uint8_t(c >> 16), uint8_t(c >> 8), uint8_t(c)}; }
    bool odd(const HBasis& H) const { return kind == 0 || H.degree(cls) == 1; }
};

struct GraphKey {
    uint8_t k = 0;                // internal vertices
    std::vector<uint32_t> word;   // canonical sorted codes
    bool operator<(const GraphKey& o) const { return k != o.k ? k < o.k : word < o.word; }
    bool operator==(const GraphKey& o) const { return k == o.k && word == o.word; }
};

// Sign (0 when the graph vanishes) and canonical key of the ordered word.
std::pair<int, GraphKey> canonicalize(int g, int r, int k, const std::vector<GSym>& word);

// Partition function on connected graphs without external vertices (given as an ordered word
// on vertices 0..k-1).
using PartitionFn = std::function<Q(int g, int k, const std::vector<GSym>& word)>;
Q z_triv(int g, int k, const std::vector<GSym>& word);

class GraphSum {
public:
    GraphSum() = default;
    GraphSum(int g, std::vector<int> ext);
    static GraphSum empty_graph(int g, std::vector<int> ext);
    // Parses records "genus=..; ext=[..]; int=k; edges=[..]; deco={..}", optionally prefixed by "coef=c;",
    // one per line or separated by '|'.
    static GraphSum parse(const std::string& text);

    int genus() const { return g_; }
    int r() const { return int(ext_.size()); }
    const std::vector<int>& ext() const { return ext_; }
    const std::map<GraphKey, Q>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int index_of(int label) const;

    void add_word(int k, const std::vector<GSym>& word, const Q& c);

    GraphSum operator+(const GraphSum& o) const;
    GraphSum operator-(const GraphSum& o) const;
    GraphSum operator*(const Q& c) const;
    bool operator==(const GraphSum& o) const { return g_ == o.g_ && ext_ == o.ext_ && terms_ == o.terms_; }
    std::string str() const;                  // one record per line
    std::string record(const GraphKey& key) const;
    std::vector<GSym> word(const GraphKey& key) const;

private:
    int g_ = 0;
    std::vector<int> ext_;
    std::map<GraphKey, Q> terms_;
};

int graph_degree(int g, const GraphKey& key);
// Every component reaches an external vertex and internal vertices carry no tadpoles.
bool graph_admissible(int r, const GraphKey& key);

GraphSum graph_multiply(const GraphSum& a, const GraphSum& b);
GraphSum graph_differential(const GraphSum& a, const PartitionFn& Z = z_triv);

struct GraphTensor {
    std::vector<int> left_ext, right_pts;
    std::map<std::pair<GraphKey, Mono>, Q> terms;
    bool operator==(const GraphTensor& o) const { return terms == o.terms && left_ext == o.left_ext; }
};
// Collapse the external set T into newlabel; right factor in BV(T).
GraphTensor graph_coaction(const GraphSum& a, const std::vector<int>& T, int newlabel);

MogElement project_to_mog(const GraphSum& a);

// All admissible canonical graphs within the bounds (decorations: at most max_deco odd or even classes).
std::vector<GraphKey> enumerate_graphs(int g, int r, int max_internal, int max_edges, int max_deco);
// Connected graphs without external vertices, k >= 1 vertices, with E + deco degree = 2k.
std::vector<GraphKey> enumerate_vacuum_graphs(int g, int max_vertices, int max_edges);

}  // namespace cfm
