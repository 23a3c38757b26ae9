#include "clickpol/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "clickpol/errors.hpp"
#include "clickpol/numeric.hpp"

namespace clickpol {

std::mt19937_64 SplitRng::make(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream & 0xffffffffu), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

std::vector<std::int64_t> multinomial_draw(const std::vector<double>& probabilities, std::int64_t shots,
                                           std::mt19937_64& rng) {
    if (shots < 0) throw InvalidArgument("shot count must be non-negative");
    std::vector<std::int64_t> counts(probabilities.size(), 0);
    const auto last = std::find_if(probabilities.rbegin(), probabilities.rend(), [](double p) { return p > 0.0; });
    if (last == probabilities.rend()) throw InvalidArgument("probability vector has no support");
    const auto final_cell = static_cast<std::size_t>(probabilities.rend() - last - 1);

    // Cell i is binomial in the shots left over, with its probability
    // conditioned on not landing in cells 0..i-1.  The last supported cell
    // takes the remainder.
    std::int64_t remaining = shots;
    long double mass_left = 1.0L;
    for (std::size_t i = 0; i < final_cell && remaining > 0; ++i) {
        const long double p = probabilities[i];
        if (p <= 0.0L) continue;
        const double conditional = std::clamp(static_cast<double>(p / mass_left), 0.0, 1.0);
        std::binomial_distribution<std::int64_t> draw(remaining, conditional);
        counts[i] = draw(rng);
        remaining -= counts[i];
        mass_left = std::max(mass_left - p, 0.0L);
    }
    counts[final_cell] += remaining;
    return counts;
}

SampleRun sample(const JointClickStatistics& stats, std::int64_t shots, std::uint64_t seed) {
    if (stats.kind() != JointClickStatistics::Kind::probability)
        throw InvalidArgument("sampling needs a probability table");
    if (shots <= 0) throw InvalidArgument("shot count must be positive");
    SplitRng rng(seed);
    SampleRun run;
    run.seed = seed;
    run.shots = shots;
    run.bins = stats.bins();
    run.counts = multinomial_draw(stats.table(), shots, rng.engine());
    return run;
}

namespace {

struct PointEstimate {
    double second_order;
    double mprime_min_eigenvalue;
};

PointEstimate point_estimate(const JointClickStatistics& freq, const DetectorConfig& det) {
    const MomentSet m = moments_from_statistics(freq, det);
    return {second_order_witness(m, det).value, moment_matrix_Mprime(m, det).min_eigenvalue};
}

double stddev(const std::vector<double>& xs) {
    CompensatedSum<double> s;
    for (double x : xs) s += x;
    const double mean = s.value() / static_cast<double>(xs.size());
    CompensatedSum<double> ss;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss.value() / static_cast<double>(xs.size() - 1));
}

void require_spread(const SampleRun& run) {
    const auto occupied = std::count_if(run.counts.begin(), run.counts.end(), [](std::int64_t c) { return c > 0; });
    if (occupied < 2)
        throw InsufficientData("counts occupy a single cell; estimator variances vanish and no uncertainty exists");
}

}  // namespace

BootstrapSpread bootstrap_witnesses(const SampleRun& run, const DetectorConfig& det, int resamples) {
    if (resamples < 2) throw InvalidArgument("bootstrap needs at least two resamples");
    require_spread(run);
    const JointClickStatistics freq = run.frequencies();
    const SplitRng root(run.seed);
    std::vector<double> second(static_cast<std::size_t>(resamples));
    std::vector<double> mineig(static_cast<std::size_t>(resamples));
    for (int r = 0; r < resamples; ++r) {
        SplitRng stream = root.child(static_cast<std::uint64_t>(r));
        const auto counts = multinomial_draw(freq.table(), run.shots, stream.engine());
        std::vector<double> table(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i)
            table[i] = static_cast<double>(counts[i]) / static_cast<double>(run.shots);
        // no shot count: the resample only needs point estimates
        const JointClickStatistics resampled(run.bins, std::move(table),
                                             JointClickStatistics::Kind::empirical_frequency);
        const PointEstimate e = point_estimate(resampled, det);
        second[static_cast<std::size_t>(r)] = e.second_order;
        mineig[static_cast<std::size_t>(r)] = e.mprime_min_eigenvalue;
    }
    return {stddev(second), stddev(mineig)};
}

WitnessEstimates estimate_witnesses(const SampleRun& run, const DetectorConfig& det, int bootstrap_resamples) {
    if (run.bins != det.bins()) throw InvalidArgument("run and detector disagree on the bin count");
    if (run.counts.size() != static_cast<std::size_t>(run.bins + 1) * static_cast<std::size_t>(run.bins + 1))
        throw InvalidArgument("count table has the wrong size");
    require_spread(run);

    const JointClickStatistics freq = run.frequencies();
    const MomentSet moments = moments_from_statistics(freq, det);
    const WitnessValue w2 = second_order_witness(moments, det);
    const MomentMatrix mprime = moment_matrix_Mprime(moments, det);
    const BootstrapSpread spread = bootstrap_witnesses(run, det, bootstrap_resamples);

    WitnessEstimates out;
    out.second_order.value = w2.value;
    out.second_order.sigma = w2.sigma.value_or(0.0);
    out.second_order.method = WitnessReport::Method::delta;
    out.second_order.significance = out.second_order.sigma > 0.0 ? w2.value / out.second_order.sigma : 0.0;

    out.mprime_min_eigenvalue.value = mprime.min_eigenvalue;
    out.mprime_min_eigenvalue.sigma = spread.mprime_min_eigenvalue_sigma;
    out.mprime_min_eigenvalue.method = WitnessReport::Method::bootstrap;
    out.mprime_min_eigenvalue.significance =
        spread.mprime_min_eigenvalue_sigma > 0.0 ? mprime.min_eigenvalue / spread.mprime_min_eigenvalue_sigma : 0.0;

    out.second_order_bootstrap_sigma = spread.second_order_sigma;
    return out;
}

}  // namespace clickpol
