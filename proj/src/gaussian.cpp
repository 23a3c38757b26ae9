#include "clickpol/gaussian.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "clickpol/errors.hpp"
#include "kernels.hpp"

namespace clickpol {

namespace {

constexpr long double kMinDeterminant = 1e-300L;
constexpr long double kMaxImagResidue = 1e-12L;

cldouble to_ld(cdouble z) { return {static_cast<long double>(z.real()), static_cast<long double>(z.imag())}; }

void check_x(long double x, const char* name) {
    if (!(x >= 0.0L && x <= 1.0L))
        throw InvalidArgument(std::string(name) + " must lie in [0, 1]");
}

Eigen::Matrix<cldouble, 4, 4> build_matrix(const BellStateParams& state, const MeasurementSetting& setting,
                                           long double xa, long double xd) {
    const cldouble tau = to_ld(setting.tau);
    const cldouble rho = to_ld(setting.rho);
    const cldouble lam = to_ld(state.lambda());
    const cldouble phase = std::polar(1.0L, static_cast<long double>(state.phi()));
    const long double t2 = std::norm(tau);
    const long double r2 = std::norm(rho);
    const cldouble lt = std::sqrt((1.0L - xa) * (1.0L - xd)) * lam;

    Eigen::Matrix<cldouble, 4, 4> k;
    k << 1.0L - r2 * xa, rho * std::conj(tau) * xa, 0.0L, lt,
         std::conj(rho) * tau * xa, 1.0L - t2 * xa, lt * phase, 0.0L,
         0.0L, std::conj(lt * phase), 1.0L - t2 * xd, -std::conj(rho) * tau * xd,
         std::conj(lt), 0.0L, -rho * std::conj(tau) * xd, 1.0L - r2 * xd;
    return k;
}

long double checked_real(cldouble value) {
    if (std::abs(value.imag()) > kMaxImagResidue * std::max(1.0L, std::abs(value.real())))
        throw NumericDegeneracy("normally ordered exponential has a non-negligible imaginary part");
    return value.real();
}

long double direct_expectation(const BellStateParams& state, const MeasurementSetting& setting, long double xa,
                               long double xd) {
    const QuadraticFormMatrix k{build_matrix(state, setting, xa, xd)};
    const cldouble det = k.determinant();
    if (std::abs(det) < kMinDeterminant) throw NumericDegeneracy("quadratic-form determinant vanishes");
    const long double l2 = std::norm(to_ld(state.lambda()));
    const long double num = (1.0L - l2) * (1.0L - l2) * (1.0L - xa) * (1.0L - xd);
    return checked_real(num / det);
}

// Each diagonal block of K is I - X u u^dagger for a unit vector u, so a
// block-diagonal unitary V brings it to diag(1-X, 1).  The coupling block
// carries a factor sqrt((1-X_a)(1-X_d)); rescaling rows and columns by
// diag(sqrt(1-X_a), 1, sqrt(1-X_d), 1) gives det K = (1-X_a)(1-X_d) det(I - C^dagger C)
// with C finite at X = 1.
long double rescaled_expectation(const BellStateParams& state, const MeasurementSetting& setting, long double xa,
                                 long double xd) {
    const detail::BellKernel<long double> kernel(state, setting);
    const long double value = kernel(std::sqrt(1.0L - xa), std::sqrt(1.0L - xd));
    if (!std::isfinite(value) || value <= 0.0L) throw NumericDegeneracy("rescaled determinant vanishes");
    return value;
}

long double expectation_ld(const BellStateParams& state, const MeasurementSetting& setting, long double xa,
                           long double xd) {
    check_x(xa, "X_a");
    check_x(xd, "X_d");
    return rescaled_expectation(state, setting, xa, xd);
}

}  // namespace

NexpArgs::NexpArgs(double x_a, double x_d) : x_a_(x_a), x_d_(x_d) {
    check_x(x_a, "X_a");
    check_x(x_d, "X_d");
}

cldouble QuadraticFormMatrix::determinant() const { return entries.determinant(); }

cldouble QuadraticFormMatrix::block_determinant_product() const {
    return entries.topLeftCorner<2, 2>().determinant() * entries.bottomRightCorner<2, 2>().determinant();
}

QuadraticFormMatrix quadratic_form_matrix(const BellStateParams& state, const MeasurementSetting& setting,
                                          const NexpArgs& args) {
    return {build_matrix(state, setting, args.x_a(), args.x_d())};
}

double nexp_expectation_general(const BellStateParams& state, const MeasurementSetting& setting, double x_a,
                                double x_d) {
    const NexpArgs args(x_a, x_d);
    return static_cast<double>(expectation_ld(state, setting, args.x_a(), args.x_d()));
}

double nexp_expectation(const BellStateParams& state, const MeasurementSetting& setting, const DetectorConfig& det,
                        int m_a, int m_b) {
    const int n = det.bins();
    if (m_a < 0 || m_b < 0 || m_a > n || m_b > n) throw InvalidArgument("bin indices must lie in [0, N]");
    const long double eta = det.efficiency();
    return static_cast<double>(expectation_ld(state, setting, eta * m_a / n, eta * m_b / n));
}

long double nexp_expectation_direct(const BellStateParams& state, const MeasurementSetting& setting,
                                    const NexpArgs& args) {
    if (args.on_boundary()) throw NumericDegeneracy("the direct form is 0/0 at X = 1");
    return direct_expectation(state, setting, args.x_a(), args.x_d());
}

long double nexp_expectation_rescaled(const BellStateParams& state, const MeasurementSetting& setting,
                                      const NexpArgs& args) {
    return rescaled_expectation(state, setting, args.x_a(), args.x_d());
}

NexpTable bell_nexp_table(const BellStateParams& state, const MeasurementSetting& setting, const DetectorConfig& det,
                          int max_index) {
    const int n = det.bins();
    if (max_index < 0) max_index = n;
    NexpTable table(n, max_index);
    const long double eta = det.efficiency();
    for (int a = 0; a <= max_index; ++a)
        for (int b = 0; b <= max_index; ++b)
            table.at(a, b) = (a == 0 && b == 0) ? 1.0L : expectation_ld(state, setting, eta * a / n, eta * b / n);
    return table;
}

}  // namespace clickpol
