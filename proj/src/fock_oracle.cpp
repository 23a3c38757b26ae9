#include "clickpol/fock_oracle.hpp"

#include <cmath>

#include "clickpol/errors.hpp"
#include "clickpol/numeric.hpp"

namespace clickpol {

namespace {

cdouble ipow(cdouble z, int e) {
    cdouble r{1.0, 0.0};
    for (int i = 0; i < e; ++i) r *= z;
    return r;
}

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace

FockStateVector::FockStateVector(int cutoff, std::vector<cdouble> amplitudes, double tail_tolerance)
    : cutoff_(cutoff), amplitudes_(std::move(amplitudes)), norm_deficit_(0.0), warning_(false) {
    if (cutoff < 0) throw InvalidArgument("cutoff must be non-negative");
    if (amplitudes_.size() != static_cast<std::size_t>(cutoff + 1) * static_cast<std::size_t>(cutoff + 1))
        throw InvalidArgument("amplitude grid does not match the cutoff");
    CompensatedSum<double> norm;
    for (const auto& a : amplitudes_) norm += std::norm(a);
    norm_deficit_ = 1.0 - norm.value();
    warning_ = norm_deficit_ > tail_tolerance;
}

int default_cutoff(double lambda_abs, double tail) {
    if (!(lambda_abs >= 0.0 && lambda_abs < 1.0)) throw InvalidState("|lambda| must be < 1");
    if (lambda_abs == 0.0) return 1;
    const double l2 = lambda_abs * lambda_abs;
    for (int c = 1; c < 100000; ++c) {
        const double kept = 1.0 - std::pow(l2, c + 1);
        if (1.0 - kept * kept < tail) return c;
    }
    throw NumericDegeneracy("no practical cutoff reaches the requested tail bound");
}

FockStateVector build_bell_state(const BellStateParams& state, int cutoff, double tail_tolerance) {
    if (cutoff < 0) cutoff = default_cutoff(std::abs(state.lambda()));
    if (cutoff < 1) throw InvalidArgument("cutoff must be at least 1");
    const cdouble lam = state.lambda();
    const cdouble lam_phase = lam * state.phase_factor();
    const double prefactor = 1.0 - std::norm(lam);
    std::vector<cdouble> amps(static_cast<std::size_t>(cutoff + 1) * static_cast<std::size_t>(cutoff + 1));
    for (int m = 0; m <= cutoff; ++m)
        for (int n = 0; n <= cutoff; ++n)
            amps[static_cast<std::size_t>(m) * static_cast<std::size_t>(cutoff + 1) + static_cast<std::size_t>(n)] =
                prefactor * ipow(lam, m) * ipow(lam_phase, n);
    return {cutoff, std::move(amps), tail_tolerance};
}

JointPhotonDistribution::JointPhotonDistribution(int max_photons, std::vector<double> probabilities)
    : max_photons_(max_photons), p_(std::move(probabilities)) {
    if (p_.size() != static_cast<std::size_t>(max_photons + 1) * static_cast<std::size_t>(max_photons + 1))
        throw InvalidArgument("distribution grid does not match max_photons");
}

double JointPhotonDistribution::total() const {
    CompensatedSum<double> s;
    for (double p : p_) s += p;
    return s.value();
}

double JointPhotonDistribution::mean_a() const {
    CompensatedSum<double> s;
    for (int a = 0; a <= max_photons_; ++a)
        for (int b = 0; b <= max_photons_; ++b) s += a * (*this)(a, b);
    return s.value();
}

double JointPhotonDistribution::mean_b() const {
    CompensatedSum<double> s;
    for (int a = 0; a <= max_photons_; ++a)
        for (int b = 0; b <= max_photons_; ++b) s += b * (*this)(a, b);
    return s.value();
}

Eigen::MatrixXcd beam_splitter_block(cdouble tau, cdouble rho, int total) {
    // Input creation operators in terms of outputs (a' = tau a + rho b, b' = -rho* a + tau* b):
    //   a^dag = tau a'^dag - rho* b'^dag,  b^dag = rho a'^dag + tau* b'^dag.
    // Expanding (a^dag)^m (b^dag)^(T-m) |0> binomially gives column m.
    const int t = total;
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(t + 1, t + 1);
    const auto& binom = binomials();
    for (int m = 0; m <= t; ++m) {
        const int n = t - m;
        for (int i = 0; i <= m; ++i) {
            for (int j = 0; j <= n; ++j) {
                const int k = i + j;
                const double weight = static_cast<double>(binom(m, i) * binom(n, j)) *
                                      std::exp(0.5 * (log_factorial(k) + log_factorial(t - k) - log_factorial(m) -
                                                      log_factorial(n)));
                u(k, m) += weight * ipow(tau, i) * ipow(-std::conj(rho), m - i) * ipow(rho, j) *
                           ipow(std::conj(tau), n - j);
            }
        }
    }
    return u;
}

JointPhotonDistribution detected_photon_distribution(const FockStateVector& fock, const MeasurementSetting& setting) {
    const int cutoff = fock.cutoff();
    const int max_total = 2 * cutoff;
    std::vector<double> p(static_cast<std::size_t>(max_total + 1) * static_cast<std::size_t>(max_total + 1), 0.0);

    // Photon number is conserved per arm and both arms carry T = m + n, so the
    // post-transform state splits into orthogonal blocks labelled by T.  In a
    // block, arm A's input is |m, T-m> and arm B's is |T-m, m>; arm B detects
    // its second output, so l detected photons means first-output count T-l.
    for (int t = 0; t <= max_total; ++t) {
        const Eigen::MatrixXcd u = beam_splitter_block(setting.tau, setting.rho, t);
        Eigen::MatrixXcd amp = Eigen::MatrixXcd::Zero(t + 1, t + 1);
        for (int m = std::max(0, t - cutoff); m <= std::min(t, cutoff); ++m) {
            const cdouble psi = fock.amplitude(m, t - m);
            if (psi == cdouble{}) continue;
            for (int k = 0; k <= t; ++k) {
                const cdouble ua = psi * u(k, m);
                for (int l = 0; l <= t; ++l) amp(k, l) += ua * u(t - l, t - m);
            }
        }
        for (int k = 0; k <= t; ++k)
            for (int l = 0; l <= t; ++l)
                p[static_cast<std::size_t>(k) * static_cast<std::size_t>(max_total + 1) + static_cast<std::size_t>(l)] +=
                    std::norm(amp(k, l));
    }
    return {max_total, std::move(p)};
}

JointPhotonDistribution coherent_product_distribution(double mean_a, double mean_b) {
    if (!(mean_a >= 0.0 && mean_b >= 0.0)) throw InvalidArgument("mean photon numbers must be non-negative");
    auto poisson = [](double mu, int n_max) {
        std::vector<double> p(static_cast<std::size_t>(n_max) + 1);
        p[0] = std::exp(-mu);
        for (int n = 1; n <= n_max; ++n) p[static_cast<std::size_t>(n)] = p[static_cast<std::size_t>(n - 1)] * mu / n;
        return p;
    };
    const double mu = std::max(mean_a, mean_b);
    int n_max = 1;
    while (true) {
        // tail of the larger Poissonian
        const auto p = poisson(mu, n_max);
        CompensatedSum<double> kept;
        for (double v : p) kept += v;
        if (1.0 - kept.value() < 1e-16 || n_max > 4000) break;
        n_max += 4;
    }
    const auto pa = poisson(mean_a, n_max);
    const auto pb = poisson(mean_b, n_max);
    std::vector<double> joint(static_cast<std::size_t>(n_max + 1) * static_cast<std::size_t>(n_max + 1));
    for (int a = 0; a <= n_max; ++a)
        for (int b = 0; b <= n_max; ++b)
            joint[static_cast<std::size_t>(a) * static_cast<std::size_t>(n_max + 1) + static_cast<std::size_t>(b)] =
                pa[static_cast<std::size_t>(a)] * pb[static_cast<std::size_t>(b)];
    return {n_max, std::move(joint)};
}

double click_response(int photons, int clicks, const DetectorConfig& det) {
    const int n = det.bins();
    if (photons < 0) throw InvalidArgument("photon number must be non-negative");
    if (clicks < 0 || clicks > n) throw InvalidArgument("click number must lie in [0, N]");
    const auto& binom = binomials();
    const long double eta = det.efficiency();
    // A photon misses a given set of j bins with probability 1 - eta j / N.
    // Inclusion-exclusion over the k firing bins: i of them forced dark.
    CompensatedSum<long double> s;
    for (int i = 0; i <= clicks; ++i) {
        const long double base = 1.0L - eta * (n - clicks + i) / n;
        s += (i % 2 == 0 ? 1.0L : -1.0L) * binom(clicks, i) * std::pow(base, photons);
    }
    return static_cast<double>(binom(n, clicks) * s.value());
}

OracleStatistics oracle_click_statistics(const JointPhotonDistribution& dist, const DetectorConfig& det,
                                         double tail_tolerance) {
    const int n = det.bins();
    const int max_photons = dist.max_photons();
    Eigen::MatrixXd response(n + 1, max_photons + 1);
    for (int k = 0; k <= n; ++k)
        for (int p = 0; p <= max_photons; ++p) response(k, p) = click_response(p, k, det);

    Eigen::MatrixXd photons(max_photons + 1, max_photons + 1);
    for (int a = 0; a <= max_photons; ++a)
        for (int b = 0; b <= max_photons; ++b) photons(a, b) = dist(a, b);

    const Eigen::MatrixXd c = response * photons * response.transpose();
    const double kept = dist.total();
    std::vector<double> table(static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k)
        for (int l = 0; l <= n; ++l) {
            double v = c(k, l) / kept;
            if (v < 0.0 && v > -1e-13) v = 0.0;
            table[static_cast<std::size_t>(k) * static_cast<std::size_t>(n + 1) + static_cast<std::size_t>(l)] = v;
        }
    OracleStatistics out{JointClickStatistics(n, std::move(table), JointClickStatistics::Kind::probability),
                         1.0 - kept, false};
    out.truncation_warning = out.truncation_deficit > tail_tolerance;
    return out;
}

OracleStatistics oracle_click_statistics(const BellStateParams& state, const MeasurementSetting& setting,
                                         const DetectorConfig& det, int cutoff) {
    const FockStateVector fock = build_bell_state(state, cutoff);
    OracleStatistics out = oracle_click_statistics(detected_photon_distribution(fock, setting), det);
    out.truncation_warning = out.truncation_warning || fock.truncation_warning();
    return out;
}

}  // namespace clickpol
