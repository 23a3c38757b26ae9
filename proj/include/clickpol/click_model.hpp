#pragma once

// Click-counting combinatorics.  With pi = 1 - :exp(-eta n / N): per arm, the
// k-click POVM element is :C(N,k) pi^k (1-pi)^(N-k):, so joint click
// probabilities and normally ordered pi-moments are both finite alternating
// binomial sums over the NexpTable.  The inverse map (moments from measured
// statistics) needs no state model at all.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "clickpol/nexp_table.hpp"
#include "clickpol/polarization.hpp"

namespace clickpol {

inline constexpr int kMaxCovarianceBins = 32;

/// (N+1) x (N+1) table c_{k,l} of joint click outcomes, k clicks in arm A and l in arm B.
class JointClickStatistics {
public:
    enum class Kind { probability, empirical_frequency };

    /// Validates non-negativity and, for probabilities, unit sum within 1e-10.
    JointClickStatistics(int bins, std::vector<double> table, Kind kind,
                         std::optional<std::int64_t> shots = std::nullopt);

    /// Relative frequencies from an integer count table; records the shot number.
    static JointClickStatistics from_counts(int bins, const std::vector<std::int64_t>& counts);

    int bins() const { return bins_; }
    Kind kind() const { return kind_; }
    std::optional<std::int64_t> shots() const { return shots_; }
    double operator()(int k, int l) const { return table_[index(k, l)]; }
    const std::vector<double>& table() const { return table_; }
    double total() const;

    std::size_t index(int k, int l) const {
        return static_cast<std::size_t>(k) * static_cast<std::size_t>(bins_ + 1) + static_cast<std::size_t>(l);
    }

private:
    int bins_;
    std::vector<double> table_;
    Kind kind_;
    std::optional<std::int64_t> shots_;
};

/// Normally ordered moments <:pi_A^j pi_B^j':> for 0 <= j, j' <= max_order.
class MomentSet {
public:
    MomentSet(int bins, int max_order, std::vector<double> values,
              std::optional<Eigen::MatrixXd> covariance = std::nullopt);

    int bins() const { return bins_; }
    int max_order() const { return max_order_; }
    double operator()(int j_a, int j_b) const;
    /// Row/column index of (j_a, j_b) in the covariance matrix.
    std::size_t index(int j_a, int j_b) const {
        return static_cast<std::size_t>(j_a) * static_cast<std::size_t>(max_order_ + 1) +
               static_cast<std::size_t>(j_b);
    }
    const std::optional<Eigen::MatrixXd>& covariance() const { return covariance_; }
    const std::vector<double>& values() const { return values_; }

private:
    int bins_;
    int max_order_;
    std::vector<double> values_;
    std::optional<Eigen::MatrixXd> covariance_;
};

/// A scalar witness with optional first-order (delta-method) uncertainty.
struct WitnessValue {
    double value = 0.0;
    std::optional<double> sigma;
};

struct MomentMatrix {
    enum class Labels { snl_powers, pi_index_pairs };

    Eigen::MatrixXd entries;
    Labels labels = Labels::snl_powers;
    /// For snl_powers: (k, 0); for pi_index_pairs: (j_A, j_B).
    std::vector<std::pair<int, int>> index;
    double min_eigenvalue = 0.0;
    std::optional<double> min_eigenvalue_sigma;
};

// --- analytic route -------------------------------------------------------

/// c_{k,l} = sum_{i<=k, j<=l} (-1)^{i+j} C(N,k)C(k,i)C(N,l)C(l,j) E(N-k+i, N-l+j).
/// Slightly negative entries are clamped to zero (threshold 1e-12, widened to
/// the long double roundoff of the input table amplified by the sum); anything
/// more negative, or a total off by more than 1e-9, raises NumericDegeneracy.
/// The analytic Bell-state route switches to 200-digit arithmetic whenever
/// long double could lose the 1e-13 level.
JointClickStatistics click_probabilities(const NexpTable& nexp);

JointClickStatistics click_probabilities_analytic(const BellStateParams& state, const MeasurementSetting& setting,
                                                  const DetectorConfig& det);

/// <:pi_A^a pi_B^b:> = sum (-1)^{k_A+k_B} C(a,k_A) C(b,k_B) E(k_A, k_B), up to nexp.max_index().
MomentSet pi_moments(const NexpTable& nexp);

/// max_order < 0 means N.
MomentSet pi_moments_analytic(const BellStateParams& state, const MeasurementSetting& setting,
                              const DetectorConfig& det, int max_order = -1);

/// NexpTable of a product of coherent states whose detected modes carry mean
/// photon numbers mean_a and mean_b: E = exp(-eta (m_a mean_a + m_b mean_b) / N).
NexpTable coherent_nexp_table(double mean_a, double mean_b, const DetectorConfig& det, int max_index = -1);

/// Closed forms for the same product coherent input: each arm clicks binomially
/// with per-bin probability p = 1 - exp(-eta mean / N), and <:pi_A^a pi_B^b:> = p_A^a p_B^b.
JointClickStatistics coherent_click_probabilities(double mean_a, double mean_b, const DetectorConfig& det);
MomentSet coherent_pi_moments(double mean_a, double mean_b, const DetectorConfig& det, int max_order = -1);

// --- measured route -------------------------------------------------------

/// <:pi_A^j pi_B^j':> = sum_{k>=j, l>=j'} c_{k,l} C(k,j) C(l,j') / (C(N,j) C(N,j')).
/// With a shot count, also fills the multinomial estimator covariance
/// (diag(c) - c c^T) / shots pushed through this linear map; that dense
/// covariance is only built for N <= kMaxCovarianceBins.
MomentSet moments_from_statistics(const JointClickStatistics& stats, const DetectorConfig& det);

// --- observables and witnesses ---------------------------------------------

/// <:S_NL^k:> = N^k sum_i C(k,i) (-1)^(k-i) <:pi_A^i pi_B^(k-i):>, k = 0..order.
std::vector<double> s_nl_moments(const MomentSet& m, const DetectorConfig& det, int order);

/// <:S0_NL^k:>, same expansion with all signs positive.
std::vector<double> s0_nl_moments(const MomentSet& m, const DetectorConfig& det, int order);

/// Normally ordered variance <:S_NL^2:> - <:S_NL:>^2; negative certifies
/// nonlinear polarization squeezing.
WitnessValue second_order_witness(const MomentSet& m, const DetectorConfig& det);

/// Hankel matrix (<:S_NL^{k+l}:>)_{k,l = 0..floor(N/2)}.
MomentMatrix moment_matrix_M(const MomentSet& m, const DetectorConfig& det);

/// (<:pi_A^{j_A+j'_A} pi_B^{j_B+j'_B}:>) over index pairs in {0..N/2}^2; N must be even.
MomentMatrix moment_matrix_Mprime(const MomentSet& m, const DetectorConfig& det);

/// Smallest eigenvalue of a real symmetric matrix.
double min_symmetric_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace clickpol
