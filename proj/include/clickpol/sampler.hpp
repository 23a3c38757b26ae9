#pragma once

// Finite-shot click data and witness estimation.
//
// Random numbers come from std::mt19937_64.  A run seeded with s draws its
// multinomial sample from the engine seeded by std::seed_seq{lo32(s), hi32(s), 0};
// substream i (bootstrap resample i) uses std::seed_seq{lo32(s), hi32(s), i + 1}.
// The multinomial draw is sequential binomial conditioning over the cells in
// row-major (k, l) order with std::binomial_distribution, so results are
// bit-reproducible for a given standard library.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "clickpol/click_model.hpp"
#include "clickpol/polarization.hpp"

namespace clickpol {

class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : seed_(seed), engine_(make(seed, 0)) {}

    std::mt19937_64& engine() { return engine_; }
    std::uint64_t seed() const { return seed_; }
    /// Independent child stream; child(i) is a pure function of (seed, i).
    SplitRng child(std::uint64_t stream) const { return SplitRng(seed_, stream + 1); }

private:
    SplitRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), engine_(make(seed, stream)) {}
    static std::mt19937_64 make(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// Multinomial draw of `shots` outcomes over `probabilities` (must sum to 1).
std::vector<std::int64_t> multinomial_draw(const std::vector<double>& probabilities, std::int64_t shots,
                                           std::mt19937_64& rng);

struct SampleRun {
    std::uint64_t seed = 0;
    std::int64_t shots = 0;
    int bins = 0;
    std::vector<std::int64_t> counts;  // (N+1) x (N+1), row-major in (k, l)
    std::optional<MeasurementSetting> source_setting;
    std::optional<BellStateParams> source_state;

    JointClickStatistics frequencies() const { return JointClickStatistics::from_counts(bins, counts); }
};

/// Throws InvalidArgument unless stats is a probability table.
SampleRun sample(const JointClickStatistics& stats, std::int64_t shots, std::uint64_t seed);

struct WitnessReport {
    enum class Method { delta, bootstrap };

    double value = 0.0;
    double sigma = 0.0;
    double significance = 0.0;  // value / sigma
    Method method = Method::delta;
};

struct WitnessEstimates {
    WitnessReport second_order;          // delta method
    WitnessReport mprime_min_eigenvalue;  // bootstrap
    double second_order_bootstrap_sigma = 0.0;
};

/// Frequencies -> moments with multinomial covariance -> witnesses.  The
/// min-eigenvalue uncertainty is bootstrap only.  Throws InsufficientData when
/// the counts occupy a single cell (every estimator variance vanishes).
WitnessEstimates estimate_witnesses(const SampleRun& run, const DetectorConfig& det, int bootstrap_resamples = 200);

/// Bootstrap standard deviations of (second-order witness, M' min eigenvalue)
/// from multinomial resamples of the run's empirical frequencies.
struct BootstrapSpread {
    double second_order_sigma = 0.0;
    double mprime_min_eigenvalue_sigma = 0.0;
};
BootstrapSpread bootstrap_witnesses(const SampleRun& run, const DetectorConfig& det, int resamples);

}  // namespace clickpol
