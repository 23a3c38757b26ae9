#include "clickpol/noise.hpp"

#include <cmath>

namespace clickpol::noise {

namespace {

constexpr double kBracketHigh = 10.0;
constexpr double kTolerance = 1e-6;

// Two-mode version of transform_exp with independent thermal noise per mode.
template <typename Generating>
double transform_exp2(double za, double zb, double nbar, Generating&& noiseless) {
    return transform_exp(za, nbar, [&](double za_out) {
        return transform_exp(zb, nbar, [&](double zb_out) { return noiseless(za_out, zb_out); });
    });
}

}  // namespace

void NoisySingleProbe::validate() const {
    if (!std::isfinite(theta)) throw InvalidArgument("theta must be finite");
    if (!(nbar >= 0.0) || !std::isfinite(nbar)) throw InvalidArgument("nbar must be a finite non-negative number");
    if (bins < 1) throw InvalidArgument("bins must be positive");
}

double transform_mean(double mean, double nbar) {
    if (nbar < 0.0) throw InvalidArgument("nbar must be non-negative");
    return mean + nbar;
}

double transform_second_factorial(double second_factorial, double mean, double nbar) {
    if (nbar < 0.0) throw InvalidArgument("nbar must be non-negative");
    return second_factorial + 4.0 * nbar * mean + 2.0 * nbar * nbar;
}

double linear_noisy_variance(const NoisySingleProbe& probe) {
    probe.validate();
    const double c = std::cos(probe.theta);
    return 4.0 * probe.nbar - c * c;
}

NoisyMoments nonlinear_noisy_moments(const NoisySingleProbe& probe) {
    probe.validate();
    const double n = probe.bins;
    const double nb = probe.nbar;
    const double one = 1.0 + nb / n;
    const double two = 1.0 + 2.0 * nb / n;
    NoisyMoments out;
    out.mean = std::cos(probe.theta) / (one * one);
    out.second_moment = 2.0 * n * (n + 2.0 * nb - 1.0) / (two * two) - 2.0 * n * (n + nb - 1.0) / (one * one * one);
    return out;
}

NoisyMoments nonlinear_noisy_moments_via_transform(const NoisySingleProbe& probe) {
    probe.validate();
    const double n = probe.bins;
    const double ch = std::cos(0.5 * probe.theta);
    const double sh = std::sin(0.5 * probe.theta);
    // <:e^{-za na - zb nb}:> = <(1-za)^na (1-zb)^nb> on the single-photon state
    auto photon = [&](double za, double zb) { return 1.0 - ch * ch * za - sh * sh * zb; };
    auto g = [&](double za, double zb) { return transform_exp2(za, zb, probe.nbar, photon); };

    // S_NL = N :e^{-n_b/N}: - N :e^{-n_a/N}:
    const double x = 1.0 / n;
    NoisyMoments out;
    out.mean = n * (g(0.0, x) - g(x, 0.0));
    out.second_moment = n * n * (g(0.0, 2.0 * x) - 2.0 * g(x, x) + g(2.0 * x, 0.0));
    return out;
}

double noise_threshold(Criterion criterion, double theta, int bins) {
    const double c = std::cos(theta);
    if (std::abs(c) < 1e-15) throw NoThreshold("cos(theta) = 0: no squeezing at any noise level");
    if (criterion == Criterion::linear) return c * c / 4.0;

    auto variance = [&](double nbar) { return nonlinear_noisy_moments({theta, nbar, bins}).variance(); };
    double lo = 0.0;
    double hi = kBracketHigh;
    double f_lo = variance(lo);
    if (!(f_lo < 0.0) || !(variance(hi) > 0.0))
        throw NumericDegeneracy("nonlinear variance does not change sign on [0, 10]");
    while (hi - lo > kTolerance) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = variance(mid);
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double robustness_improvement_percent(double theta, int bins) {
    return 100.0 * (noise_threshold(Criterion::nonlinear, theta, bins) / noise_threshold(Criterion::linear, theta, bins) -
                    1.0);
}

}  // namespace clickpol::noise
