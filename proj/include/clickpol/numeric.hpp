#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace clickpol {

/// Neumaier-compensated running sum.  Used for the alternating binomial sums,
/// where O(1e5) terms cancel down to results of order 1e-6.
template <typename T>
class CompensatedSum {
public:
    void add(T x) {
        const T t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            carry_ += (sum_ - t) + x;
        else
            carry_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(T x) {
        add(x);
        return *this;
    }
    T value() const { return sum_ + carry_; }

private:
    T sum_{};
    T carry_{};
};

/// Pascal-triangle binomial coefficients C(n, k) for n <= n_max, stored as
/// long double (exact while C(n, k) < 2^64, i.e. n <= 67).
class BinomialTable {
public:
    explicit BinomialTable(int n_max);

    int n_max() const { return n_max_; }
    long double operator()(int n, int k) const {
        if (k < 0 || k > n) return 0.0L;
        return rows_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
    }

private:
    int n_max_;
    std::vector<std::vector<long double>> rows_;
};

/// Shared table covering every detector size the library accepts.
const BinomialTable& binomials();

inline constexpr int kMaxBins = 128;

}  // namespace clickpol
