#pragma once

// Brute-force reference path.  Builds the Bell state in a truncated Fock
// basis, applies the wave-plate beam splitter to each arm with explicit
// Fock-space matrix elements, and folds the detected photon-number
// distribution through the per-photon click response.  Shares no code with
// the Gaussian engine.

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "clickpol/click_model.hpp"
#include "clickpol/polarization.hpp"

namespace clickpol {

/// Amplitudes psi(m, n) of |m, n, n, m> (H_A, V_A, H_B, V_B) for m, n <= cutoff.
class FockStateVector {
public:
    FockStateVector(int cutoff, std::vector<cdouble> amplitudes, double tail_tolerance);

    int cutoff() const { return cutoff_; }
    cdouble amplitude(int m, int n) const {
        return amplitudes_[static_cast<std::size_t>(m) * static_cast<std::size_t>(cutoff_ + 1) +
                           static_cast<std::size_t>(n)];
    }
    /// 1 - sum |psi|^2, the probability mass lost to truncation.
    double norm_deficit() const { return norm_deficit_; }
    bool truncation_warning() const { return warning_; }

private:
    int cutoff_;
    std::vector<cdouble> amplitudes_;
    double norm_deficit_;
    bool warning_;
};

/// Smallest per-mode cutoff whose discarded mass 1 - (1 - |l|^(2(c+1)))^2 is below tail.
int default_cutoff(double lambda_abs, double tail = 1e-12);

/// cutoff < 0 selects default_cutoff(|lambda|).
FockStateVector build_bell_state(const BellStateParams& state, int cutoff = -1, double tail_tolerance = 1e-12);

/// p(n_A, n_B) for the two detected modes.
class JointPhotonDistribution {
public:
    JointPhotonDistribution(int max_photons, std::vector<double> probabilities);

    int max_photons() const { return max_photons_; }
    double operator()(int n_a, int n_b) const {
        return p_[static_cast<std::size_t>(n_a) * static_cast<std::size_t>(max_photons_ + 1) +
                  static_cast<std::size_t>(n_b)];
    }
    double total() const;
    double mean_a() const;
    double mean_b() const;

private:
    int max_photons_;
    std::vector<double> p_;
};

/// Fock matrix of the two-mode transform with detected amplitude tau a + rho b
/// on the block of total photon number T: entry (k, m) is <k, T-k| U |m, T-m>.
Eigen::MatrixXcd beam_splitter_block(cdouble tau, cdouble rho, int total);

JointPhotonDistribution detected_photon_distribution(const FockStateVector& fock, const MeasurementSetting& setting);

/// Product of Poissonians (detected modes of a product coherent state),
/// truncated where both tails fall below 1e-16.
JointPhotonDistribution coherent_product_distribution(double mean_a, double mean_b);

/// P(k | n) = C(N,k) sum_i (-1)^i C(k,i) (1 - eta (N-k+i)/N)^n.
double click_response(int photons, int clicks, const DetectorConfig& det);

struct OracleStatistics {
    JointClickStatistics stats;
    double truncation_deficit = 0.0;
    bool truncation_warning = false;
};

/// c_{k,l} = sum p(n_A, n_B) P(k|n_A) P(l|n_B), renormalized over the retained support.
OracleStatistics oracle_click_statistics(const JointPhotonDistribution& dist, const DetectorConfig& det,
                                         double tail_tolerance = 1e-10);

OracleStatistics oracle_click_statistics(const BellStateParams& state, const MeasurementSetting& setting,
                                         const DetectorConfig& det, int cutoff = -1);

}  // namespace clickpol
