#pragma once

// Closed-form normally ordered exponentials for the wave-plate-transformed
// macroscopic Bell state.  The state has a Gaussian P-function representation,
// so <:exp(-X_a n_A - X_d n_B):> reduces to a complex Gaussian integral over
// four coherent amplitudes, which evaluates to a 4x4 determinant:
//
//   E = (1-|l|^2)^2 (1-X_a)(1-X_d) / det K,
//
//       | 1-|rho|^2 X_a   rho tau* X_a    0                 l~        |
//   K = | rho* tau X_a    1-|tau|^2 X_a   l~ e^{i phi}      0         |
//       | 0               l~* e^{-i phi}  1-|tau|^2 X_d    -rho* tau X_d |
//       | l~*             0              -rho tau* X_d      1-|rho|^2 X_d |
//
// with l~ = sqrt((1-X_a)(1-X_d)) l.
//
// Numerator and det K both vanish like (1-X_a)(1-X_d) as X -> 1, so the
// evaluators below use the algebraically identical rescaled form
// E = (1-|l|^2)^2 / det(I - C^dagger C), which has no cancellation and is
// finite on the boundary.  The direct quotient is kept for cross-checks.

#include <complex>

#include <Eigen/Core>

#include "clickpol/nexp_table.hpp"
#include "clickpol/polarization.hpp"

namespace clickpol {

using cldouble = std::complex<long double>;

/// Absorption arguments (X_a, X_d) of the normally ordered exponential.
/// X = 1 is admitted as the closed boundary (eta = 1, all bins).
class NexpArgs {
public:
    NexpArgs(double x_a, double x_d);

    double x_a() const { return x_a_; }
    double x_d() const { return x_d_; }
    bool on_boundary() const { return x_a_ == 1.0 || x_d_ == 1.0; }

private:
    double x_a_;
    double x_d_;
};

/// The 4x4 matrix K above, in extended precision.
struct QuadraticFormMatrix {
    Eigen::Matrix<cldouble, 4, 4> entries;

    cldouble determinant() const;
    /// det of the (A,A) and (B,B) 2x2 blocks, i.e. det K at lambda = 0.
    cldouble block_determinant_product() const;
};

QuadraticFormMatrix quadratic_form_matrix(const BellStateParams& state, const MeasurementSetting& setting,
                                          const NexpArgs& args);

/// E at continuous absorption arguments (rescaled form).  Throws NumericDegeneracy if the
/// determinant collapses (|det| < 1e-300) or the result has an imaginary
/// residue above 1e-12.
double nexp_expectation_general(const BellStateParams& state, const MeasurementSetting& setting,
                                double x_a, double x_d);

/// E at the click-detector grid X = eta m / N.
double nexp_expectation(const BellStateParams& state, const MeasurementSetting& setting,
                        const DetectorConfig& det, int m_a, int m_b);

/// The direct quotient (1-|l|^2)^2 (1-X_a)(1-X_d) / det K; loses relative
/// accuracy like 1e-19 / ((1-X_a)(1-X_d)).  Throws NumericDegeneracy at X = 1.
long double nexp_expectation_direct(const BellStateParams& state, const MeasurementSetting& setting,
                                    const NexpArgs& args);

/// Same value through a congruence that factors (1-X_a)(1-X_d) out of det K
/// analytically; finite up to and including X = 1.
long double nexp_expectation_rescaled(const BellStateParams& state, const MeasurementSetting& setting,
                                      const NexpArgs& args);

/// Extended-precision grid of E(m_a, m_b) for 0 <= m <= max_index
/// (defaults to the full detector range).
NexpTable bell_nexp_table(const BellStateParams& state, const MeasurementSetting& setting,
                          const DetectorConfig& det, int max_index = -1);

}  // namespace clickpol
