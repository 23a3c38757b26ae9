#include "clickpol/polarization.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "clickpol/errors.hpp"

namespace clickpol {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double reduce_angle(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be finite");
}

}  // namespace

BellStateParams::BellStateParams(cdouble lambda, double phi) : lambda_(lambda), phi_(0.0) {
    require_finite(lambda.real(), "lambda");
    require_finite(lambda.imag(), "lambda");
    require_finite(phi, "phi");
    if (std::abs(lambda) >= 1.0) throw InvalidState("|lambda| must be < 1 for a normalizable state");
    phi_ = reduce_angle(phi);
}

BellStateParams BellStateParams::antisymmetric(double lambda) {
    return {lambda, std::numbers::pi};
}

DetectorConfig::DetectorConfig(int bins, double efficiency) : bins_(bins), efficiency_(efficiency) {
    if (bins < 1) throw InvalidArgument("detector needs at least one bin");
    if (!(efficiency >= 0.0 && efficiency <= 1.0))
        throw InvalidArgument("efficiency must lie in [0, 1]");
}

double JonesMatrix::unitarity_defect() const {
    return (m_ * m_.adjoint() - Eigen::Matrix2cd::Identity()).norm();
}

JonesMatrix jones_qwp(double theta) {
    require_finite(theta, "QWP angle");
    const double c = std::cos(2.0 * theta);
    const double s = std::sin(2.0 * theta);
    const double r = 1.0 / std::numbers::sqrt2;
    const cdouble i{0.0, 1.0};
    Eigen::Matrix2cd m;
    m << (1.0 - i * c) * r, -i * s * r,
         -i * s * r, (1.0 + i * c) * r;
    return JonesMatrix(m);
}

JonesMatrix jones_hwp(double theta) {
    require_finite(theta, "HWP angle");
    const double c = std::cos(2.0 * theta);
    const double s = std::sin(2.0 * theta);
    const cdouble i{0.0, 1.0};
    Eigen::Matrix2cd m;
    m << -i * c, -i * s,
         -i * s, i * c;
    return JonesMatrix(m);
}

MeasurementSetting MeasurementSetting::from_coefficients(cdouble tau, cdouble rho) {
    const double norm = std::norm(tau) + std::norm(rho);
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-12)
        throw InvalidArgument("|tau|^2 + |rho|^2 must equal 1");

    MeasurementSetting s;
    s.tau = tau;
    s.rho = rho;
    // e = (2 Re(rho* tau), 2 Im(rho* tau), |tau|^2 - |rho|^2), i.e. the
    // (sin t cos p, sin t sin p, cos t) form with |tau| = cos(t/2), p = arg(rho* tau).
    const cdouble cross = std::conj(rho) * tau;
    s.direction = {2.0 * cross.real(), 2.0 * cross.imag(), std::norm(tau) - std::norm(rho)};
    s.polar = 2.0 * std::atan2(std::abs(rho), std::abs(tau));
    s.azimuth = std::abs(cross) > 0.0 ? reduce_angle(std::arg(cross)) : 0.0;
    return s;
}

MeasurementSetting compose_setting(double qwp_angle, double hwp_angle) {
    const JonesMatrix composite = jones_hwp(hwp_angle) * jones_qwp(qwp_angle);
    const cdouble tau = composite(0, 0);
    const cdouble rho = composite(0, 1);
    // Renormalize away the last-ulp drift of the product so the coefficient
    // invariant holds at 1e-12 for every angle.
    const double n = std::sqrt(std::norm(tau) + std::norm(rho));
    MeasurementSetting s = MeasurementSetting::from_coefficients(tau / n, rho / n);
    s.qwp_angle = qwp_angle;
    s.hwp_angle = hwp_angle;
    return s;
}

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace clickpol
