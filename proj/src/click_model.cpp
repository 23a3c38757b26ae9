#include "clickpol/click_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "clickpol/errors.hpp"
#include "clickpol/gaussian.hpp"
#include "clickpol/numeric.hpp"
#include "kernels.hpp"

namespace clickpol {

namespace {

constexpr double kClampTolerance = 1e-12;
constexpr double kNormTolerance = 1e-9;

long double sign(int parity) { return (parity % 2 == 0) ? 1.0L : -1.0L; }

void check_bins(int bins) {
    if (bins < 1 || bins > kMaxBins) throw InvalidArgument("bin count outside [1, 128]");
}

}  // namespace

// ---------------------------------------------------------------------------

JointClickStatistics::JointClickStatistics(int bins, std::vector<double> table, Kind kind,
                                           std::optional<std::int64_t> shots)
    : bins_(bins), table_(std::move(table)), kind_(kind), shots_(shots) {
    check_bins(bins);
    const auto cells = static_cast<std::size_t>(bins + 1) * static_cast<std::size_t>(bins + 1);
    if (table_.size() != cells) throw InvalidArgument("click table must be (N+1) x (N+1)");
    for (double c : table_)
        if (!(c >= 0.0)) throw InvalidArgument("click table entries must be non-negative");
    if (shots_ && *shots_ <= 0) throw InvalidArgument("shot count must be positive");
    if (kind_ == Kind::probability && std::abs(total() - 1.0) > 1e-10)
        throw InvalidArgument("probability table must sum to 1");
}

JointClickStatistics JointClickStatistics::from_counts(int bins, const std::vector<std::int64_t>& counts) {
    const std::int64_t shots = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
    if (shots <= 0) throw InsufficientData("count table is empty");
    std::vector<double> freq(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] < 0) throw InvalidArgument("counts must be non-negative");
        freq[i] = static_cast<double>(counts[i]) / static_cast<double>(shots);
    }
    return {bins, std::move(freq), Kind::empirical_frequency, shots};
}

double JointClickStatistics::total() const {
    CompensatedSum<double> s;
    for (double c : table_) s += c;
    return s.value();
}

MomentSet::MomentSet(int bins, int max_order, std::vector<double> values, std::optional<Eigen::MatrixXd> covariance)
    : bins_(bins), max_order_(max_order), values_(std::move(values)), covariance_(std::move(covariance)) {
    if (max_order < 0 || max_order > bins) throw InvalidArgument("moment order must lie in [0, N]");
    const auto n = static_cast<std::size_t>(max_order + 1) * static_cast<std::size_t>(max_order + 1);
    if (values_.size() != n) throw InvalidArgument("moment vector has the wrong size");
    if (covariance_ && (covariance_->rows() != static_cast<Eigen::Index>(n) || covariance_->cols() != covariance_->rows()))
        throw InvalidArgument("moment covariance has the wrong shape");
}

double MomentSet::operator()(int j_a, int j_b) const {
    if (j_a < 0 || j_b < 0 || j_a > max_order_ || j_b > max_order_)
        throw InsufficientData("moment order exceeds the available data");
    return values_[index(j_a, j_b)];
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
std::vector<T> table_entries(const NexpTable& nexp, int order) {
    const auto w = static_cast<std::size_t>(order + 1);
    std::vector<T> e(w * w);
    for (int a = 0; a <= order; ++a)
        for (int b = 0; b <= order; ++b) e[static_cast<std::size_t>(a) * w + static_cast<std::size_t>(b)] = T(nexp(a, b));
    return e;
}

template <typename T>
std::vector<T> bell_entries(const BellStateParams& state, const MeasurementSetting& setting, const DetectorConfig& det,
                            int order) {
    using std::sqrt;
    const detail::BellKernel<T> kernel(state, setting);
    const T x = T(det.efficiency()) / T(det.bins());
    const auto w = static_cast<std::size_t>(order + 1);
    std::vector<T> s(w);
    for (int m = 0; m <= order; ++m) s[static_cast<std::size_t>(m)] = m == 0 ? T(1) : T(sqrt(T(1) - x * T(m)));
    std::vector<T> e(w * w);
    for (std::size_t a = 0; a < w; ++a)
        for (std::size_t b = 0; b < w; ++b) {
            const T v = kernel(s[a], s[b]);
            if (!(v > T(0))) throw NumericDegeneracy("Gaussian expectation is not positive");
            e[a * w + b] = v;
        }
    return e;
}

template <typename T>
std::vector<double> to_doubles(const std::vector<T>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v[i]);
    return out;
}

JointClickStatistics finish_click_table(int n, std::vector<double> table, double clamp = kClampTolerance) {
    for (double& c : table) {
        if (c < 0.0) {
            if (c < -clamp) throw NumericDegeneracy("click probability is significantly negative");
            c = 0.0;
        }
    }
    CompensatedSum<double> total;
    for (double c : table) total += c;
    if (std::abs(total.value() - 1.0) > kNormTolerance)
        throw NumericDegeneracy("click probabilities do not sum to one");
    // Remove the residual so the table satisfies the 1e-10 probability invariant.
    for (double& c : table) c /= total.value();
    return {n, std::move(table), JointClickStatistics::Kind::probability};
}

}  // namespace

// A caller-supplied table is only as precise as its long double entries, so
// the clamp threshold grows with the worst-case amplification of their roundoff.
JointClickStatistics click_probabilities(const NexpTable& nexp) {
    if (!nexp.complete()) throw InvalidArgument("click probabilities need E(m_a, m_b) for all m <= N");
    const int n = nexp.bins();
    const long double roundoff =
        detail::click_amplification(n) * 64.0L * std::numeric_limits<long double>::epsilon();
    const double clamp = std::max(kClampTolerance, static_cast<double>(roundoff));
    return finish_click_table(n, to_doubles(detail::click_sums(n, table_entries<long double>(nexp, n))), clamp);
}

JointClickStatistics click_probabilities_analytic(const BellStateParams& state, const MeasurementSetting& setting,
                                                  const DetectorConfig& det) {
    const int n = det.bins();
    check_bins(n);
    if (detail::needs_precise(detail::click_amplification(n)))
        return finish_click_table(n, to_doubles(detail::click_sums(n, bell_entries<detail::Precise>(state, setting, det, n))));
    return finish_click_table(n, to_doubles(detail::click_sums(n, bell_entries<long double>(state, setting, det, n))));
}

MomentSet pi_moments(const NexpTable& nexp) {
    const int order = nexp.max_index();
    return {nexp.bins(), order, to_doubles(detail::moment_sums(order, table_entries<long double>(nexp, order)))};
}

MomentSet pi_moments_analytic(const BellStateParams& state, const MeasurementSetting& setting,
                              const DetectorConfig& det, int max_order) {
    check_bins(det.bins());
    if (max_order > det.bins())
        throw InsufficientData("moments beyond order N are not accessible with N bins");
    const int order = max_order < 0 ? det.bins() : max_order;
    if (detail::needs_precise(detail::moment_amplification(order)))
        return {det.bins(), order,
                to_doubles(detail::moment_sums(order, bell_entries<detail::Precise>(state, setting, det, order)))};
    return {det.bins(), order, to_doubles(detail::moment_sums(order, bell_entries<long double>(state, setting, det, order)))};
}

NexpTable coherent_nexp_table(double mean_a, double mean_b, const DetectorConfig& det, int max_index) {
    if (!(mean_a >= 0.0 && mean_b >= 0.0)) throw InvalidArgument("mean photon numbers must be non-negative");
    const int n = det.bins();
    NexpTable table(n, max_index < 0 ? n : max_index);
    const long double x = static_cast<long double>(det.efficiency()) / n;
    for (int a = 0; a <= table.max_index(); ++a)
        for (int b = 0; b <= table.max_index(); ++b)
            table.at(a, b) = std::exp(-x * (a * static_cast<long double>(mean_a) + b * static_cast<long double>(mean_b)));
    return table;
}

namespace {

long double coherent_click_chance(double mean, const DetectorConfig& det) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw InvalidArgument("mean photon numbers must be non-negative");
    return -std::expm1(-static_cast<long double>(det.efficiency()) * mean / det.bins());
}

}  // namespace

JointClickStatistics coherent_click_probabilities(double mean_a, double mean_b, const DetectorConfig& det) {
    const int n = det.bins();
    const long double pa = coherent_click_chance(mean_a, det);
    const long double pb = coherent_click_chance(mean_b, det);
    const auto& binom = binomials();
    auto arm = [&](long double p, int k) {
        return binom(n, k) * std::pow(p, static_cast<long double>(k)) * std::pow(1.0L - p, static_cast<long double>(n - k));
    };
    std::vector<double> table(static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k)
        for (int l = 0; l <= n; ++l)
            table[static_cast<std::size_t>(k) * static_cast<std::size_t>(n + 1) + static_cast<std::size_t>(l)] =
                static_cast<double>(arm(pa, k) * arm(pb, l));
    return finish_click_table(n, std::move(table));
}

MomentSet coherent_pi_moments(double mean_a, double mean_b, const DetectorConfig& det, int max_order) {
    const int order = max_order < 0 ? det.bins() : max_order;
    if (order > det.bins()) throw InsufficientData("moments beyond order N are not accessible with N bins");
    const long double pa = coherent_click_chance(mean_a, det);
    const long double pb = coherent_click_chance(mean_b, det);
    std::vector<double> values(static_cast<std::size_t>(order + 1) * static_cast<std::size_t>(order + 1));
    for (int a = 0; a <= order; ++a)
        for (int b = 0; b <= order; ++b)
            values[static_cast<std::size_t>(a) * static_cast<std::size_t>(order + 1) + static_cast<std::size_t>(b)] =
                static_cast<double>(std::pow(pa, static_cast<long double>(a)) * std::pow(pb, static_cast<long double>(b)));
    return {det.bins(), order, std::move(values)};
}

// ---------------------------------------------------------------------------

MomentSet moments_from_statistics(const JointClickStatistics& stats, const DetectorConfig& det) {
    const int n = det.bins();
    if (stats.bins() != n) throw InvalidArgument("click table size does not match the detector");
    if (stats.shots() && n > kMaxCovarianceBins)
        throw InvalidArgument("shot-noise covariance is limited to N <= " + std::to_string(kMaxCovarianceBins));
    const auto& binom = binomials();
    const auto w = static_cast<Eigen::Index>(n + 1);

    // The map factorizes per arm: m = A c A^T with A(j, k) = C(k, j) / C(N, j).
    Eigen::MatrixXd arm = Eigen::MatrixXd::Zero(w, w);
    for (int j = 0; j <= n; ++j)
        for (int k = j; k <= n; ++k) arm(j, k) = static_cast<double>(binom(k, j) / binom(n, j));
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> c(
        stats.table().data(), w, w);
    const Eigen::MatrixXd moments = arm * c * arm.transpose();

    std::vector<double> values(static_cast<std::size_t>(w * w));
    for (Eigen::Index j = 0; j < w; ++j)
        for (Eigen::Index jp = 0; jp < w; ++jp) values[static_cast<std::size_t>(j * w + jp)] = moments(j, jp);

    std::optional<Eigen::MatrixXd> cov;
    if (stats.shots()) {
        const Eigen::Index dim = w * w;
        Eigen::MatrixXd map(dim, dim);
        for (Eigen::Index j = 0; j < w; ++j)
            for (Eigen::Index jp = 0; jp < w; ++jp)
                for (Eigen::Index k = 0; k < w; ++k)
                    for (Eigen::Index l = 0; l < w; ++l) map(j * w + jp, k * w + l) = arm(j, k) * arm(jp, l);
        const Eigen::Map<const Eigen::VectorXd> flat(stats.table().data(), dim);
        const Eigen::VectorXd mean = map * flat;
        const Eigen::MatrixXd weighted = map * flat.asDiagonal();
        cov = (weighted * map.transpose() - mean * mean.transpose()) / static_cast<double>(*stats.shots());
    }
    return {n, n, std::move(values), std::move(cov)};
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> stokes_like_moments(const MomentSet& m, const DetectorConfig& det, int order, bool difference) {
    const int n = det.bins();
    if (order < 0) throw InvalidArgument("moment order must be non-negative");
    if (order > n) throw InsufficientData("moments beyond order N are not accessible with N bins");
    if (order > m.max_order()) throw InsufficientData("moment set does not reach the requested order");
    const auto& binom = binomials();
    std::vector<double> out(static_cast<std::size_t>(order) + 1);
    long double scale = 1.0L;
    for (int k = 0; k <= order; ++k) {
        CompensatedSum<long double> s;
        for (int i = 0; i <= k; ++i) {
            const long double sgn = difference ? sign(k - i) : 1.0L;
            s += sgn * binom(k, i) * m(i, k - i);
        }
        out[static_cast<std::size_t>(k)] = static_cast<double>(scale * s.value());
        scale *= n;
    }
    return out;
}

}  // namespace

std::vector<double> s_nl_moments(const MomentSet& m, const DetectorConfig& det, int order) {
    return stokes_like_moments(m, det, order, true);
}

std::vector<double> s0_nl_moments(const MomentSet& m, const DetectorConfig& det, int order) {
    return stokes_like_moments(m, det, order, false);
}

WitnessValue second_order_witness(const MomentSet& m, const DetectorConfig& det) {
    const auto s = s_nl_moments(m, det, 2);
    WitnessValue w{s[2] - s[1] * s[1], std::nullopt};

    if (m.covariance()) {
        // W = N^2 (m20 - 2 m11 + m02) - N^2 (m10 - m01)^2
        const double n = det.bins();
        const double n2 = n * n;
        const auto dim = m.covariance()->rows();
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim);
        grad(static_cast<Eigen::Index>(m.index(1, 0))) = -2.0 * n * s[1];
        grad(static_cast<Eigen::Index>(m.index(0, 1))) = 2.0 * n * s[1];
        grad(static_cast<Eigen::Index>(m.index(2, 0))) += n2;
        grad(static_cast<Eigen::Index>(m.index(1, 1))) += -2.0 * n2;
        grad(static_cast<Eigen::Index>(m.index(0, 2))) += n2;
        const double var = grad.dot(*m.covariance() * grad);
        w.sigma = std::sqrt(std::max(var, 0.0));
    }
    return w;
}

double min_symmetric_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericDegeneracy("symmetric eigensolver did not converge");
    return solver.eigenvalues().minCoeff();
}

MomentMatrix moment_matrix_M(const MomentSet& m, const DetectorConfig& det) {
    const int half = det.bins() / 2;
    const auto s = s_nl_moments(m, det, 2 * half);
    MomentMatrix out;
    out.labels = MomentMatrix::Labels::snl_powers;
    out.entries.resize(half + 1, half + 1);
    for (int k = 0; k <= half; ++k) {
        out.index.emplace_back(k, 0);
        for (int l = 0; l <= half; ++l) out.entries(k, l) = s[static_cast<std::size_t>(k + l)];
    }
    out.min_eigenvalue = min_symmetric_eigenvalue(out.entries);
    return out;
}

MomentMatrix moment_matrix_Mprime(const MomentSet& m, const DetectorConfig& det) {
    if (!det.even_bins()) throw InvalidArgument("M' needs an even number of bins");
    const int half = det.bins() / 2;
    if (m.max_order() < det.bins()) throw InsufficientData("M' needs moments up to order N");
    MomentMatrix out;
    out.labels = MomentMatrix::Labels::pi_index_pairs;
    for (int a = 0; a <= half; ++a)
        for (int b = 0; b <= half; ++b) out.index.emplace_back(a, b);
    const auto dim = static_cast<Eigen::Index>(out.index.size());
    out.entries.resize(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            const auto [ja, jb] = out.index[static_cast<std::size_t>(r)];
            const auto [ka, kb] = out.index[static_cast<std::size_t>(c)];
            out.entries(r, c) = m(ja + ka, jb + kb);
        }
    }
    out.min_eigenvalue = min_symmetric_eigenvalue(out.entries);
    return out;
}

}  // namespace clickpol
