#include "clickpol/numeric.hpp"

namespace clickpol {

BinomialTable::BinomialTable(int n_max) : n_max_(n_max), rows_(static_cast<std::size_t>(n_max) + 1) {
    for (int n = 0; n <= n_max; ++n) {
        auto& row = rows_[static_cast<std::size_t>(n)];
        row.assign(static_cast<std::size_t>(n) + 1, 1.0L);
        for (int k = 1; k < n; ++k) {
            const auto& prev = rows_[static_cast<std::size_t>(n - 1)];
            row[static_cast<std::size_t>(k)] =
                prev[static_cast<std::size_t>(k - 1)] + prev[static_cast<std::size_t>(k)];
        }
    }
}

const BinomialTable& binomials() {
    static const BinomialTable table(2 * kMaxBins);
    return table;
}

}  // namespace clickpol
