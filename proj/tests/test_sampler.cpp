#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "clickpol/click_model.hpp"
#include "clickpol/errors.hpp"
#include "clickpol/sampler.hpp"

using namespace clickpol;

namespace {

const DetectorConfig kFit(8, 0.135);
const BellStateParams kAnti(0.36, std::numbers::pi);

}  // namespace

TEST_CASE("sampling needs a probability table") {
    const auto f = JointClickStatistics::from_counts(1, {1, 2, 3, 4});
    CHECK_THROWS_AS(sample(f, 10, 1), InvalidArgument);
    const auto c = click_probabilities_analytic(kAnti, compose_setting(0, 0), kFit);
    CHECK_THROWS_AS(sample(c, 0, 1), InvalidArgument);
}

TEST_CASE("point mass stays put") {
    const auto vac = click_probabilities_analytic(BellStateParams(0.0, 0.0), compose_setting(0, 0), kFit);
    const auto run = sample(vac, 12345, 3);
    CHECK(run.counts[0] == 12345);
    CHECK(std::accumulate(run.counts.begin(), run.counts.end(), std::int64_t{0}) == 12345);
}

TEST_CASE("same seed, same counts; different seeds differ") {
    const auto c = click_probabilities_analytic(kAnti, compose_setting(0.2, 0.1), kFit);
    const auto a = sample(c, 100000, 42);
    const auto b = sample(c, 100000, 42);
    const auto d = sample(c, 100000, 43);
    CHECK(a.counts == b.counts);
    CHECK(a.counts != d.counts);
    CHECK(std::accumulate(a.counts.begin(), a.counts.end(), std::int64_t{0}) == 100000);
}

TEST_CASE("child streams are reproducible and distinct") {
    const SplitRng root(9);
    auto c1 = root.child(1);
    auto c1b = root.child(1);
    auto c2 = root.child(2);
    SplitRng fresh(9);
    const auto x = c1.engine()();
    CHECK(x == c1b.engine()());
    CHECK(x != c2.engine()());
    CHECK(x != fresh.engine()());
}

TEST_CASE("frequencies lie within five sigma of the table") {
    const auto c = click_probabilities_analytic(kAnti, compose_setting(0.0, 0.0), kFit);
    const std::int64_t shots = 1000000;
    const auto run = sample(c, shots, 2024);
    const auto f = run.frequencies();
    for (std::size_t i = 0; i < c.table().size(); ++i) {
        const double p = c.table()[i];
        if (p <= 1e-5) continue;
        const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(shots));
        CHECK(std::abs(f.table()[i] - p) < 5 * sigma);
    }
}

TEST_CASE("witness estimates at the fit parameters") {
    const auto c = click_probabilities_analytic(kAnti, compose_setting(0.0, 0.0), kFit);
    const double analytic = second_order_witness(pi_moments_analytic(kAnti, compose_setting(0, 0), kFit), kFit).value;
    const auto run = sample(c, 100000, 5);
    const auto est = estimate_witnesses(run, kFit, 200);
    CHECK(est.second_order.method == WitnessReport::Method::delta);
    CHECK(est.mprime_min_eigenvalue.method == WitnessReport::Method::bootstrap);
    CHECK(est.second_order.sigma > 0);
    CHECK(est.mprime_min_eigenvalue.sigma > 0);
    CHECK(est.second_order.significance == doctest::Approx(est.second_order.value / est.second_order.sigma));
    CHECK(std::abs(est.second_order.value - analytic) < 5 * est.second_order.sigma);
    const double ratio = est.second_order_bootstrap_sigma / est.second_order.sigma;
    CHECK(ratio > 1 / 1.5);
    CHECK(ratio < 1.5);
}

TEST_CASE("classical input is not flagged") {
    const auto c = coherent_click_probabilities(1.1, 0.8, kFit);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto est = estimate_witnesses(sample(c, 200000, seed), kFit, 50);
        CHECK(est.second_order.value > -5 * est.second_order.sigma);
    }
}

TEST_CASE("degenerate runs carry no uncertainty") {
    const auto vac = click_probabilities_analytic(BellStateParams(0.0, 0.0), compose_setting(0, 0), kFit);
    CHECK_THROWS_AS(estimate_witnesses(sample(vac, 1000, 1), kFit), InsufficientData);
}

TEST_CASE("bootstrap is deterministic") {
    const auto c = click_probabilities_analytic(kAnti, compose_setting(0.3, 0.0), kFit);
    const auto run = sample(c, 50000, 11);
    const auto a = bootstrap_witnesses(run, kFit, 30);
    const auto b = bootstrap_witnesses(run, kFit, 30);
    CHECK(a.second_order_sigma == b.second_order_sigma);
    CHECK(a.mprime_min_eigenvalue_sigma == b.mprime_min_eigenvalue_sigma);
    CHECK_THROWS_AS(bootstrap_witnesses(run, kFit, 1), InvalidArgument);
}
