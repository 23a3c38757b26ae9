#pragma once

// Linear versus nonlinear polarization squeezing of a single photon,
// cos(theta/2)|1,0> + e^{i phi} sin(theta/2)|0,1>, on a symmetric thermal
// background of nbar photons per mode, detected with eta = 1.

#include "clickpol/errors.hpp"

namespace clickpol::noise {

struct NoisySingleProbe {
    double theta = 0.0;  // polar angle of the photon's polarization
    double nbar = 0.0;   // thermal photons per mode
    int bins = 8;

    /// Throws InvalidArgument for nbar < 0, bins < 1 or non-finite theta.
    void validate() const;
};

struct NoisyMoments {
    double mean = 0.0;           // <:S_NL:>
    double second_moment = 0.0;  // <:S_NL^2:>
    double variance() const { return second_moment - mean * mean; }
};

// --- thermal-noise input-output rules (expectation level) -------------------

/// <:e^{-z n}:>_nbar = G(z / (1 + nbar z)) / (1 + nbar z), where G is the
/// noiseless <:e^{-z' n}:>.  Requires 1 + nbar z > 0.
template <typename Generating>
double transform_exp(double z, double nbar, Generating&& noiseless) {
    const double d = 1.0 + nbar * z;
    if (!(d > 0.0) || nbar < 0.0) throw InvalidArgument("thermal map needs nbar >= 0 and 1 + nbar z > 0");
    return noiseless(z / d) / d;
}

/// <n>_nbar = <n> + nbar.
double transform_mean(double mean, double nbar);

/// <:n^2:>_nbar = <:n^2:> + 4 nbar <n> + 2 nbar^2.
double transform_second_factorial(double second_factorial, double mean, double nbar);

// --- the two criteria ----------------------------------------------------------

/// <:(Delta S_L)^2:>_nbar = 4 nbar - cos^2 theta.
double linear_noisy_variance(const NoisySingleProbe& probe);

/// Closed forms: mean = cos(theta) / (1 + nbar/N)^2,
/// second = 2N(N+2nbar-1)/(1+2nbar/N)^2 - 2N(N+nbar-1)/(1+nbar/N)^3.
NoisyMoments nonlinear_noisy_moments(const NoisySingleProbe& probe);

/// Same moments assembled from transform_exp applied to the exact
/// single-photon generating function G(z_a, z_b) = 1 - cos^2(theta/2) z_a - sin^2(theta/2) z_b.
NoisyMoments nonlinear_noisy_moments_via_transform(const NoisySingleProbe& probe);

enum class Criterion { linear, nonlinear };

/// Noise level nbar* at which the respective variance reaches zero, found by
/// bisection on [0, 10] to 1e-6 (linear: exactly cos^2(theta) / 4).
/// Throws NoThreshold when cos(theta) == 0.
double noise_threshold(Criterion criterion, double theta, int bins);

/// nonlinear / linear threshold - 1, in percent.
double robustness_improvement_percent(double theta, int bins);

}  // namespace clickpol::noise
