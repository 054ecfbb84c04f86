#pragma once
// Exact rank of sparse rational matrices by fraction-free row reduction.

#include <gmpxx.h>

#include <map>
#include <vector>

#include "cfm/exactpoly.hpp"

namespace cfm {

using QRow = std::map<int, Q>;

class RowReducer {
public:
    // Adds a row; returns true if it increased the rank.
    bool add(const QRow& row);
    long rank() const { return long(pivots_.size()); }

private:
    using ZRow = std::map<int, mpz_class>;
    std::map<int, ZRow> pivots_;  // leading column -> primitive row
};

long rank_exact(const std::vector<QRow>& rows);

}  // namespace cfm
