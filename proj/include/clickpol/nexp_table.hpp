#pragma once

#include <cstddef>
#include <vector>

#include "clickpol/errors.hpp"

namespace clickpol {

/// Table of normally ordered exponentials
///   E(m_a, m_b) = <:exp(-(eta m_a / N) n_A - (eta m_b / N) n_B):>
/// for 0 <= m_a, m_b <= max_index.  Everything the click model computes is a
/// linear functional of this table, so any state with a known generating
/// function can be fed through the same code.
class NexpTable {
public:
    NexpTable(int bins, int max_index)
        : bins_(bins), max_index_(max_index),
          values_(static_cast<std::size_t>(max_index + 1) * static_cast<std::size_t>(max_index + 1), 0.0L) {
        if (bins < 1 || max_index < 0 || max_index > bins)
            throw InvalidArgument("NexpTable: need 0 <= max_index <= bins");
    }

    int bins() const { return bins_; }
    int max_index() const { return max_index_; }
    bool complete() const { return max_index_ == bins_; }

    long double operator()(int m_a, int m_b) const { return values_[offset(m_a, m_b)]; }
    long double& at(int m_a, int m_b) { return values_[offset(m_a, m_b)]; }

private:
    std::size_t offset(int m_a, int m_b) const {
        if (m_a < 0 || m_b < 0 || m_a > max_index_ || m_b > max_index_)
            throw InvalidArgument("NexpTable index out of range");
        return static_cast<std::size_t>(m_a) * static_cast<std::size_t>(max_index_ + 1) +
               static_cast<std::size_t>(m_b);
    }

    int bins_;
    int max_index_;
    std::vector<long double> values_;
};

}  // namespace clickpol
