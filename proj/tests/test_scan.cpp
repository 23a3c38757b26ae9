#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "clickpol/scan.hpp"

using namespace clickpol;

namespace {

ScanConfig fit_scan(double phi_deg, ScanAxis axis) {
    ScanConfig c;
    c.phi_deg = phi_deg;
    c.axis = axis;
    c.step = 7.5;
    return c;
}

std::string message_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("config parsing") {
    const auto c = parse_config_text("lambda: 0.2\nphi_deg: 0\naxis: hwp\noutputs: [second-order]\nshots: 1000\n"
                                     "grid_deg: [0, 45]\n");
    CHECK(c.lambda == 0.2);
    CHECK(c.axis == ScanAxis::hwp);
    CHECK(c.outputs.size() == 1);
    CHECK(c.shots == 1000);
    CHECK(c.grid_deg.size() == 2);
    CHECK(parse_config_text("outputs: second-order, s-nl-moments\n").outputs.size() == 2);
    CHECK_FALSE(parse_config_text("shots: none\n").shots.has_value());
    CHECK(parse_config_text("").bins == 8);
}

TEST_CASE("config errors name the line and field") {
    CHECK(message_of("lambda: 0.36\nefficency: 0.1\n").find("line 2") != std::string::npos);
    CHECK(message_of("lambda: 0.36\nefficency: 0.1\n").find("efficency") != std::string::npos);
    const auto bad_type = message_of("bins: 8\nstep: fast\n");
    CHECK(bad_type.find("line 2") != std::string::npos);
    CHECK(bad_type.find("step") != std::string::npos);
    CHECK(message_of("axis: diagonal\n").find("axis") != std::string::npos);
    CHECK(message_of("outputs: [witness]\n").find("outputs") != std::string::npos);
    CHECK(message_of("lambda: [1\n").find("line") != std::string::npos);
    CHECK_THROWS_AS(load_config_file("/nonexistent/config.yaml"), ConfigError);
}

TEST_CASE("config validation") {
    ScanConfig c;
    CHECK_NOTHROW(c.validate());
    c.step = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.stop = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.snl_order = 9;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.bins = 7;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.outputs = {ScanOutput::second_order};
    CHECK_NOTHROW(c.validate());
    c = {};
    c.lambda = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(ScanConfig{}.points().size() == 19);
}

TEST_CASE("vacuum scan has vanishing witnesses") {
    ScanConfig c;
    c.lambda = 0.0;
    const auto t = run_scan(c);
    for (const auto& row : t.rows) {
        CHECK(std::abs(*row[t.column("witness_2nd")]) < 1e-10);
        CHECK(std::abs(*row[t.column("mprime_mineig")]) < 1e-10);
        CHECK(std::abs(*row[t.column("snl_mean")]) < 1e-10);
        CHECK_FALSE(row[t.column("witness_2nd_sigma")].has_value());
    }
}

TEST_CASE("antisymmetric scans are negative everywhere") {
    for (auto axis : {ScanAxis::qwp, ScanAxis::hwp}) {
        const auto t = run_scan(fit_scan(180, axis));
        CHECK(t.rows.size() == 13);
        for (const auto& row : t.rows) {
            CHECK(*row[t.column("witness_2nd")] < 0);
            CHECK(*row[t.column("mprime_mineig")] < 0);
        }
    }
}

TEST_CASE("symmetric scans change sign with angle") {
    for (auto axis : {ScanAxis::qwp, ScanAxis::hwp}) {
        const auto t = run_scan(fit_scan(0, axis));
        bool negative = false;
        bool positive = false;
        for (const auto& row : t.rows) {
            negative |= *row[t.column("witness_2nd")] < 0;
            positive |= *row[t.column("witness_2nd")] > 0;
        }
        CHECK(negative);
        CHECK(positive);
    }
}

TEST_CASE("frozen symmetric-phase QWP scan") {
    ScanConfig c;
    c.phi_deg = 0;
    c.step = 15;
    const auto t = run_scan(c);
    const double expected[] = {-5.373385590030e-03, -2.672437147427e-03, 4.142208055565e-04, 8.000425301544e-04,
                               4.142208055565e-04,  -2.672437147427e-03, -5.373385590030e-03};
    REQUIRE(t.rows.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) CHECK(std::abs(*t.rows[i][t.column("witness_2nd")] - expected[i]) < 1e-12);
}

TEST_CASE("sampling mode adds estimates and significances") {
    ScanConfig c;
    c.shots = 200000;
    c.bootstrap = 20;
    c.stop = 10;
    const auto t = run_scan(c);
    CHECK(t.rows.size() == 3);
    for (const auto& row : t.rows) {
        CHECK(row[t.column("witness_2nd_sigma")].has_value());
        CHECK(row[t.column("mprime_mineig_sigma")].has_value());
        CHECK(*row[t.column("witness_2nd_significance")] < 0);
        CHECK(row[t.column("witness_2nd_analytic")].has_value());
    }
    // per-point seeds: neighbouring rows are not copies
    CHECK(*t.rows[0][t.column("witness_2nd")] != *t.rows[1][t.column("witness_2nd")]);
}

TEST_CASE("scan output is deterministic") {
    ScanConfig c;
    c.shots = 50000;
    c.bootstrap = 10;
    c.stop = 20;
    std::ostringstream a;
    std::ostringstream b;
    write_csv(a, run_scan(c), c, "scan");
    write_csv(b, run_scan(c), c, "scan");
    CHECK(a.str() == b.str());
    CHECK(a.str().find("angle_deg,witness_2nd,witness_2nd_sigma,mprime_mineig,mprime_mineig_sigma,s0nl_mean,snl_mean") !=
          std::string::npos);
    CHECK(a.str().find("# lambda = 0.36") != std::string::npos);
    CHECK(a.str().find("# column witness_2nd:") != std::string::npos);

    std::ostringstream j;
    write_json(j, run_scan(ScanConfig{}), ScanConfig{}, "scan");
    CHECK(j.str().find("\"columns\"") != std::string::npos);
}

TEST_CASE("noise study") {
    ScanConfig c;
    c.axis = ScanAxis::nbar;
    c.start = 0;
    c.stop = 0.6;
    c.step = 0.05;
    c.outputs = {ScanOutput::noise_thresholds};
    const auto t = run_noise_study(c);
    const auto v = t.column("nl_variance");
    double most_negative = 0;
    std::size_t where = 0;
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        if (*t.rows[i][v] < most_negative) {
            most_negative = *t.rows[i][v];
            where = i;
        }
    CHECK(*t.rows[where][t.column("cos_theta")] == 1.0);
    CHECK(*t.rows[where][t.column("nbar")] == 0.0);
    CHECK(*t.rows[0][t.column("linear_threshold")] == 0.25);
    CHECK(std::abs(*t.rows[0][t.column("nonlinear_threshold")] - 0.385) < 0.005);
    CHECK_THROWS_AS(run_noise_study(ScanConfig{}), ConfigError);
}

TEST_CASE("oracle check") {
    ScanConfig c;
    const auto pass = run_oracle_check(c);
    CHECK(pass.pass);
    CHECK(pass.max_deviation < 1e-8);
    CHECK(pass.table.rows.size() == 50);

    c.oracle_efficiency_offset = 0.01;
    const auto fail = run_oracle_check(c);
    CHECK_FALSE(fail.pass);
    CHECK(fail.max_deviation > 1e-8);

    ScanConfig vac;
    vac.lambda = 0.0;
    CHECK(run_oracle_check(vac).max_deviation < 1e-14);
}

TEST_CASE("sample command") {
    ScanConfig c;
    c.shots = 100000;
    c.bootstrap = 20;
    const auto r = run_sample(c);
    CHECK(r.witnesses.rows.size() == 1);
    CHECK(r.counts.rows.size() == 81);
    double total = 0;
    for (const auto& row : r.counts.rows) total += *row[2];
    CHECK(total == 100000);
    c.shots.reset();
    CHECK_THROWS_AS(run_sample(c), ConfigError);
}
