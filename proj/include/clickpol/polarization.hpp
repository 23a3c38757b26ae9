#pragma once

// Domain values shared by every module: the macroscopic Bell state, the
// click detector, wave-plate Jones matrices and the measurement setting they
// produce.
//
// Mode convention: the source emits four modes (H_A, V_A, H_B, V_B).  Both
// arms pass the same HWP*QWP combination before a PBS.  Arm A detects the
// first output of the composite matrix (amplitude tau*alpha + rho*beta), arm B
// detects the second output (amplitude -conj(rho)*gamma + conj(tau)*delta).

#include <array>
#include <complex>

#include <Eigen/Core>
#include <Eigen/LU>

namespace clickpol {

using cdouble = std::complex<double>;

/// Squeezing amplitude and Sagnac phase of the four-mode macroscopic Bell state.
/// phi = 0 and phi = pi give the symmetric and antisymmetric states.
class BellStateParams {
public:
    /// Throws InvalidState for |lambda| >= 1, InvalidArgument for non-finite input.
    BellStateParams(cdouble lambda, double phi);

    cdouble lambda() const { return lambda_; }
    double phi() const { return phi_; }
    cdouble phase_factor() const { return std::polar(1.0, phi_); }

    static BellStateParams symmetric(double lambda) { return {lambda, 0.0}; }
    static BellStateParams antisymmetric(double lambda);

private:
    cdouble lambda_;
    double phi_;  // in [0, 2pi)
};

/// N-bin click detector with overall efficiency eta.
class DetectorConfig {
public:
    DetectorConfig(int bins, double efficiency);

    int bins() const { return bins_; }
    double efficiency() const { return efficiency_; }
    bool even_bins() const { return bins_ % 2 == 0; }

private:
    int bins_;
    double efficiency_;
};

/// 2x2 unitary acting on the (horizontal, vertical) Jones vector.
class JonesMatrix {
public:
    explicit JonesMatrix(const Eigen::Matrix2cd& m) : m_(m) {}

    static JonesMatrix identity() { return JonesMatrix(Eigen::Matrix2cd::Identity()); }

    const Eigen::Matrix2cd& matrix() const { return m_; }
    cdouble operator()(int row, int col) const { return m_(row, col); }

    /// Product this * rhs (rhs acts first).
    JonesMatrix operator*(const JonesMatrix& rhs) const { return JonesMatrix(m_ * rhs.m_); }

    /// Frobenius norm of M M^dagger - I.
    double unitarity_defect() const;
    cdouble determinant() const { return m_.determinant(); }

private:
    Eigen::Matrix2cd m_;
};

using Vector3 = std::array<double, 3>;

/// Effective beam-splitter coefficients and Poincare direction for one
/// wave-plate configuration.
struct MeasurementSetting {
    double qwp_angle = 0.0;  // radians
    double hwp_angle = 0.0;  // radians
    cdouble tau{1.0, 0.0};
    cdouble rho{0.0, 0.0};
    Vector3 direction{0.0, 0.0, 1.0};
    double polar = 0.0;    // vartheta, |tau| = cos(vartheta/2)
    double azimuth = 0.0;  // arg(conj(rho) tau) in [0, 2pi)

    /// Setting defined directly by its first-row coefficients; angles are left at zero.
    /// Throws InvalidArgument unless |tau|^2 + |rho|^2 = 1 within 1e-12.
    static MeasurementSetting from_coefficients(cdouble tau, cdouble rho);

    static MeasurementSetting identity() { return from_coefficients(1.0, 0.0); }
};

JonesMatrix jones_qwp(double theta);
JonesMatrix jones_hwp(double theta);

/// HWP applied after QWP: composite = jones_hwp(hwp) * jones_qwp(qwp).
MeasurementSetting compose_setting(double qwp_angle, double hwp_angle);

double deg_to_rad(double deg);
double rad_to_deg(double rad);

}  // namespace clickpol
