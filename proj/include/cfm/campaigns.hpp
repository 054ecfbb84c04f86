#pragma once
// Verification campaigns shared by the command-line driver and the acceptance suite.

#include <string>
#include <utility>
#include <vector>

#include "cfm/feynman.hpp"

namespace cfm {

inline constexpr const char* kEngineVersion = "1.0.0";

struct Check {
    std::string name;
    bool ok = true;
    long cases = 0;
    std::string detail;
    std::string counterexample;  // graph record or stratum face of the first failure
};

using Row = std::vector<std::pair<std::string, std::string>>;

struct Campaign {
    std::string command;
    std::vector<std::pair<std::string, std::string>> args;
    std::vector<Check> checks;
    std::vector<std::string> flags;  // documented discrepancies
    std::vector<Row> rows;           // per-item listing
    bool ok() const;
};

struct GraphBounds {
    int max_internal = 2;
    int max_external = 3;
    int max_edges = 3;
    int max_deco = 1;
    int min_external = 1;
};

Campaign run_verify_model(int g);
Campaign run_partition(int g, int max_vertices = 3, int max_edges = 4);
Campaign run_cohomology(int g, int points);
Campaign run_d_squared(int g, const GraphBounds& b);
Campaign run_stokes(int g, const GraphBounds& b);
Campaign run_chainmap(int g, const GraphBounds& b);
Campaign run_coaction(int g, const GraphBounds& b);
Campaign run_vanishing(int g, const GraphBounds& b);
Campaign run_golden(int g);
Campaign run_genus0(int max_r = 3);
Campaign run_bv_algebra(int max_r = 4, int samples = 120, unsigned long seed = 20261016);
// F of the graph sum; the element is returned through out.
Campaign run_integrate(const GraphSum& gr, StratifiedElement& out);

// Betti numbers of Mo_g(r) registered as oracle values; empty when none is registered.
std::vector<long> betti_oracle(int g, int points);

}  // namespace cfm
