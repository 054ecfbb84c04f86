#pragma once
// Model forms, the propagator, the Feynman rules A, the integral map F and the partition function.

#include <vector>

#include "cfm/graphkernel.hpp"
#include "cfm/totalization.hpp"

namespace cfm {

struct ModelFormCatalog {
    int g = 0;
    std::vector<StratifiedElement> a, b;  // index 1..g; index 0 unused
    StratifiedElement nu, eta;            // on {1}
    StratifiedElement omega;              // on {1, 2}
};

ModelFormCatalog build_catalog(int g);
// Shared instance per genus.
const ModelFormCatalog& catalog(int g);

// The propagator with a replaceable bulk coefficient (1/2 in the model); used by negative controls.
StratifiedElement build_omega(int g, const Q& bulk_coefficient = frac(1, 2));

// Surface class (HBasis index) as a form on {1}.
StratifiedElement class_form(const ModelFormCatalog& c, int cls);
// pi_p^* of a surface class, pi_{pq}^* of omega, pi_p^* of eta on the given label set.
StratifiedElement pulled_class(int g, int cls, int p, const std::vector<int>& labels);
StratifiedElement pulled_omega(int g, int p, int q, const std::vector<int>& labels);
StratifiedElement pulled_eta(int g, int p, const std::vector<int>& labels);

// Labels used for a graph: externals keep theirs, internal vertex i gets max(ext) + 1 + i.
std::vector<int> graph_labels(const std::vector<int>& ext, int k);

// mask: compute only on the flagged strata (see fiber_support).
StratifiedElement map_A_word(int g, const std::vector<int>& ext, int k, const std::vector<GSym>& word,
                             const std::vector<char>* mask = nullptr);
StratifiedElement map_A(const GraphSum& gr);
StratifiedElement map_F(const GraphSum& gr);
// F applied to the left factor of a graph coaction, the BV(T) factor carried along.
StratifiedElement map_F(int g, const GraphTensor& t);

// Full combinatorial integral of a connected graph without external vertices.
Q partition_Z(int g, int k, const std::vector<GSym>& word);

// Sum over segments of the genus-0 integrand, as a 0-form on r ordered handle points.
PolyForm genus0_f(int r);
// The same integral evaluated directly on the simplex with one extra moving point.
PolyForm genus0_f_integrated(int r);

// alpha = 2 sum_{j >= 2} F(Gamma_j), Gamma_j = one external vertex joined to an internal a^j b^j vertex.
GraphSum gamma_graph(int g, int j);
StratifiedElement example_alpha(int g);

// pi_1^* nu + pi_2^* nu - sum_k (pi_1^* a^k pi_2^* b^k + pi_2^* a^k pi_1^* b^k) on {1, 2}.
StratifiedElement domega_expected(int g);

}  // namespace cfm
