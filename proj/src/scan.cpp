#include "clickpol/scan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "clickpol/click_model.hpp"
#include "clickpol/errors.hpp"
#include "clickpol/fock_oracle.hpp"
#include "clickpol/gaussian.hpp"
#include "clickpol/noise.hpp"
#include "clickpol/polarization.hpp"
#include "clickpol/sampler.hpp"

namespace clickpol {

// --- names -------------------------------------------------------------------

std::string to_string(ScanAxis axis) {
    switch (axis) {
        case ScanAxis::qwp: return "qwp";
        case ScanAxis::hwp: return "hwp";
        case ScanAxis::nbar: return "nbar";
    }
    return "?";
}

std::string to_string(ScanOutput output) {
    switch (output) {
        case ScanOutput::second_order: return "second-order";
        case ScanOutput::mprime_mineig: return "mprime-mineig";
        case ScanOutput::snl_moments: return "s-nl-moments";
        case ScanOutput::noise_thresholds: return "noise-thresholds";
    }
    return "?";
}

ScanAxis parse_axis(const std::string& s) {
    if (s == "qwp") return ScanAxis::qwp;
    if (s == "hwp") return ScanAxis::hwp;
    if (s == "nbar") return ScanAxis::nbar;
    throw ConfigError("axis: expected one of qwp, hwp, nbar (got '" + s + "')");
}

ScanOutput parse_output(const std::string& s) {
    for (auto o : {ScanOutput::second_order, ScanOutput::mprime_mineig, ScanOutput::snl_moments,
                   ScanOutput::noise_thresholds})
        if (s == to_string(o)) return o;
    throw ConfigError("outputs: unknown output '" + s +
                      "' (expected second-order, mprime-mineig, s-nl-moments, noise-thresholds)");
}

// --- config ---------------------------------------------------------------------

void ScanConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& msg) { throw ConfigError(field + ": " + msg); };
    if (!(lambda >= 0.0 && lambda < 1.0)) fail("lambda", "must satisfy 0 <= lambda < 1");
    if (!std::isfinite(phi_deg)) fail("phi_deg", "must be finite");
    if (bins < 1 || bins > 128) fail("bins", "must lie in [1, 128]");
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) fail("efficiency", "must lie in [0, 1]");
    if (!std::isfinite(qwp_deg)) fail("qwp_deg", "must be finite");
    if (!std::isfinite(hwp_deg)) fail("hwp_deg", "must be finite");
    if (!std::isfinite(fixed_deg)) fail("fixed_deg", "must be finite");
    if (!(step > 0.0) || !std::isfinite(step)) fail("step", "must be positive");
    if (!std::isfinite(start) || !std::isfinite(stop) || stop < start) fail("stop", "range is empty (stop < start)");
    if (snl_order < 1 || snl_order > bins) fail("snl_order", "must lie in [1, bins]");
    if (outputs.count(ScanOutput::mprime_mineig) && bins % 2 != 0)
        fail("outputs", "mprime-mineig needs an even number of bins");
    if (outputs.count(ScanOutput::second_order) && bins < 2) fail("outputs", "second-order needs bins >= 2");
    if (shots && *shots <= 0) fail("shots", "must be positive");
    if (shots && bins % 2 != 0) fail("shots", "sampling mode evaluates M' and needs an even number of bins");
    if (shots && bins > kMaxCovarianceBins)
        fail("shots", "sampling mode builds a dense estimator covariance and supports at most " +
                          std::to_string(kMaxCovarianceBins) + " bins");
    if (bootstrap < 2) fail("bootstrap", "must be at least 2");
    if (cos_points < 2) fail("cos_points", "must be at least 2");
    if (grid_deg.empty()) fail("grid_deg", "must not be empty");
    if (phis_deg.empty()) fail("phis_deg", "must not be empty");
    if (cutoff == 0 || cutoff < -1) fail("cutoff", "must be -1 (automatic) or >= 1");
    if (!(tolerance > 0.0)) fail("tolerance", "must be positive");
    if (!std::isfinite(oracle_efficiency_offset)) fail("oracle_efficiency_offset", "must be finite");
}

std::vector<double> ScanConfig::points() const {
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
}

namespace {

std::string num(double v) { return fmt::format("{:.12g}", v); }

std::string join_numbers(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + num(xs[i]);
    return "[" + s + "]";
}

}  // namespace

std::vector<std::pair<std::string, std::string>> ScanConfig::resolved() const {
    std::string outs;
    for (auto o : outputs) outs += (outs.empty() ? "" : ", ") + to_string(o);
    return {
        {"lambda", num(lambda)},
        {"phi_deg", num(phi_deg)},
        {"bins", std::to_string(bins)},
        {"efficiency", num(efficiency)},
        {"axis", to_string(axis)},
        {"fixed_deg", num(fixed_deg)},
        {"start", num(start)},
        {"stop", num(stop)},
        {"step", num(step)},
        {"outputs", "[" + outs + "]"},
        {"snl_order", std::to_string(snl_order)},
        {"shots", shots ? std::to_string(*shots) : std::string("none")},
        {"seed", std::to_string(seed)},
        {"bootstrap", std::to_string(bootstrap)},
        {"qwp_deg", num(qwp_deg)},
        {"hwp_deg", num(hwp_deg)},
        {"cos_points", std::to_string(cos_points)},
        {"grid_deg", join_numbers(grid_deg)},
        {"phis_deg", join_numbers(phis_deg)},
        {"cutoff", std::to_string(cutoff)},
        {"tolerance", num(tolerance)},
        {"oracle_efficiency_offset", num(oracle_efficiency_offset)},
    };
}

namespace {

std::string where(const YAML::Node& node, const std::string& key) {
    return fmt::format("line {}, field '{}'", node.Mark().line + 1, key);
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key, const char* expected) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(fmt::format("{}: expected {}", where(node, key), expected));
    }
}

std::vector<double> number_list(const YAML::Node& node, const std::string& key) {
    if (!node.IsSequence()) throw ConfigError(where(node, key) + ": expected a list of numbers");
    std::vector<double> out;
    for (const auto& item : node) out.push_back(scalar<double>(item, key, "a number"));
    return out;
}

}  // namespace

ScanConfig parse_config_text(const std::string& text, ScanConfig c) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(fmt::format("line {}: {}", e.mark.line + 1, e.msg));
    }
    if (root.IsNull()) return c;
    if (!root.IsMap()) throw ConfigError("config must be a mapping of key: value pairs");

    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        const YAML::Node& v = kv.second;
        try {
            if (key == "lambda") c.lambda = scalar<double>(v, key, "a number");
            else if (key == "phi_deg") c.phi_deg = scalar<double>(v, key, "a number");
            else if (key == "bins") c.bins = scalar<int>(v, key, "an integer");
            else if (key == "efficiency") c.efficiency = scalar<double>(v, key, "a number");
            else if (key == "axis") c.axis = parse_axis(scalar<std::string>(v, key, "a string"));
            else if (key == "fixed_deg") c.fixed_deg = scalar<double>(v, key, "a number");
            else if (key == "start") c.start = scalar<double>(v, key, "a number");
            else if (key == "stop") c.stop = scalar<double>(v, key, "a number");
            else if (key == "step") c.step = scalar<double>(v, key, "a number");
            else if (key == "snl_order") c.snl_order = scalar<int>(v, key, "an integer");
            else if (key == "shots") {
                if (v.IsNull() || (v.IsScalar() && v.Scalar() == "none")) c.shots.reset();
                else c.shots = static_cast<std::int64_t>(scalar<double>(v, key, "a number"));
            }
            else if (key == "seed") c.seed = scalar<std::uint64_t>(v, key, "a non-negative integer");
            else if (key == "bootstrap") c.bootstrap = scalar<int>(v, key, "an integer");
            else if (key == "qwp_deg") c.qwp_deg = scalar<double>(v, key, "a number");
            else if (key == "hwp_deg") c.hwp_deg = scalar<double>(v, key, "a number");
            else if (key == "cos_points") c.cos_points = scalar<int>(v, key, "an integer");
            else if (key == "grid_deg") c.grid_deg = number_list(v, key);
            else if (key == "phis_deg") c.phis_deg = number_list(v, key);
            else if (key == "cutoff") c.cutoff = scalar<int>(v, key, "an integer");
            else if (key == "tolerance") c.tolerance = scalar<double>(v, key, "a number");
            else if (key == "oracle_efficiency_offset") c.oracle_efficiency_offset = scalar<double>(v, key, "a number");
            else if (key == "outputs") {
                c.outputs.clear();
                if (v.IsSequence()) {
                    for (const auto& item : v) c.outputs.insert(parse_output(scalar<std::string>(item, key, "a string")));
                } else {
                    std::stringstream ss(scalar<std::string>(v, key, "a list of outputs"));
                    std::string item;
                    while (std::getline(ss, item, ',')) {
                        item.erase(0, item.find_first_not_of(' '));
                        item.erase(item.find_last_not_of(' ') + 1);
                        if (!item.empty()) c.outputs.insert(parse_output(item));
                    }
                }
            } else {
                throw ConfigError(fmt::format("line {}: unknown key '{}'", kv.first.Mark().line + 1, key));
            }
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            if (msg.rfind("line ", 0) == 0) throw;
            throw ConfigError(fmt::format("line {}, {}", v.Mark().line + 1, msg));
        }
    }
    return c;
}

ScanConfig load_config_file(const std::string& path, ScanConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config_text(buf.str(), std::move(base));
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::size_t ResultTable::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw InvalidArgument("no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

// --- drivers ----------------------------------------------------------------------

namespace {

MeasurementSetting setting_for(const ScanConfig& c, double angle_deg) {
    const double angle = deg_to_rad(angle_deg);
    const double fixed = deg_to_rad(c.fixed_deg);
    return c.axis == ScanAxis::qwp ? compose_setting(angle, fixed) : compose_setting(fixed, angle);
}

void add_column(ResultTable& t, std::string name, std::string description) {
    t.columns.push_back(std::move(name));
    t.descriptions.push_back(std::move(description));
}

}  // namespace

ResultTable run_scan(const ScanConfig& config) {
    config.validate();
    if (config.axis == ScanAxis::nbar) throw ConfigError("axis: nbar scans belong to the noise-study command");

    const BellStateParams state(config.lambda, deg_to_rad(config.phi_deg));
    const DetectorConfig det(config.bins, config.efficiency);
    const bool sampling = config.shots.has_value();
    const auto& out = config.outputs;
    const bool want_w2 = out.count(ScanOutput::second_order) > 0;
    const bool want_mp = out.count(ScanOutput::mprime_mineig) > 0;
    const bool want_snl = out.count(ScanOutput::snl_moments) > 0;

    ResultTable t;
    const std::string plate = config.axis == ScanAxis::qwp ? "QWP" : "HWP";
    const std::string mode = sampling ? "estimate from sampled counts" : "analytic";
    add_column(t, "angle_deg", "scanned " + plate + " angle [deg]; other plate fixed at fixed_deg");
    add_column(t, "witness_2nd", "normally ordered variance <:(Delta S_NL)^2:> [clicks^2], " + mode);
    add_column(t, "witness_2nd_sigma", "delta-method standard deviation of witness_2nd [clicks^2]; empty when analytic");
    add_column(t, "mprime_mineig",
               "minimum eigenvalue of the pi-moment matrix M' over index pairs in {0..N/2}^2 [dimensionless], " + mode);
    add_column(t, "mprime_mineig_sigma", "bootstrap standard deviation of mprime_mineig; empty when analytic");
    add_column(t, "s0nl_mean", "<:S0_NL:> = N(<pi_A> + <pi_B>) [clicks], " + mode);
    add_column(t, "snl_mean", "<:S_NL:> = N(<pi_A> - <pi_B>) [clicks], " + mode);
    const int extra_orders = want_snl ? config.snl_order : 1;
    for (int k = 2; k <= extra_orders; ++k)
        add_column(t, fmt::format("snl_moment_{}", k), fmt::format("<:S_NL^{}:> [clicks^{}], {}", k, k, mode));
    if (sampling) {
        add_column(t, "witness_2nd_analytic", "analytic <:(Delta S_NL)^2:> at this setting [clicks^2]");
        add_column(t, "witness_2nd_significance", "witness_2nd / witness_2nd_sigma [standard deviations]");
        add_column(t, "mprime_mineig_analytic", "analytic minimum eigenvalue of M'");
        add_column(t, "mprime_mineig_significance", "mprime_mineig / mprime_mineig_sigma [standard deviations]");
    }

    const auto angles = config.points();
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const MeasurementSetting setting = setting_for(config, angles[i]);
        std::vector<std::optional<double>> row(t.columns.size());
        row[0] = angles[i];

        const MomentSet analytic = pi_moments_analytic(state, setting, det);
        std::optional<double> w2_analytic;
        std::optional<double> mp_analytic;
        if (want_w2) w2_analytic = second_order_witness(analytic, det).value;
        if (want_mp) mp_analytic = moment_matrix_Mprime(analytic, det).min_eigenvalue;

        const MomentSet* moments = &analytic;
        std::optional<MomentSet> measured;
        if (sampling) {
            const auto stats = click_probabilities_analytic(state, setting, det);
            SampleRun run = sample(stats, *config.shots, config.seed + i);
            run.source_setting = setting;
            run.source_state = state;
            const WitnessEstimates est = estimate_witnesses(run, det, config.bootstrap);
            measured = moments_from_statistics(run.frequencies(), det);
            moments = &*measured;
            if (want_w2) {
                row[t.column("witness_2nd")] = est.second_order.value;
                row[t.column("witness_2nd_sigma")] = est.second_order.sigma;
                row[t.column("witness_2nd_analytic")] = w2_analytic;
                row[t.column("witness_2nd_significance")] = est.second_order.significance;
            }
            if (want_mp) {
                row[t.column("mprime_mineig")] = est.mprime_min_eigenvalue.value;
                row[t.column("mprime_mineig_sigma")] = est.mprime_min_eigenvalue.sigma;
                row[t.column("mprime_mineig_analytic")] = mp_analytic;
                row[t.column("mprime_mineig_significance")] = est.mprime_min_eigenvalue.significance;
            }
        } else {
            row[t.column("witness_2nd")] = w2_analytic;
            row[t.column("mprime_mineig")] = mp_analytic;
        }

        if (want_snl) {
            const auto snl = s_nl_moments(*moments, det, config.snl_order);
            const auto s0 = s0_nl_moments(*moments, det, 1);
            row[t.column("s0nl_mean")] = s0[1];
            row[t.column("snl_mean")] = snl[1];
            for (int k = 2; k <= config.snl_order; ++k)
                row[t.column(fmt::format("snl_moment_{}", k))] = snl[static_cast<std::size_t>(k)];
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

ResultTable run_noise_study(const ScanConfig& config) {
    config.validate();
    if (config.axis != ScanAxis::nbar) throw ConfigError("axis: the noise study scans nbar");
    if (config.start < 0.0) throw ConfigError("start: nbar must be non-negative");

    ResultTable t;
    add_column(t, "cos_theta", "cosine of the single-photon polarization angle");
    add_column(t, "nbar", "thermal photons per mode");
    add_column(t, "nl_variance", "<:(Delta S_NL)^2:>_nbar at eta = 1 [clicks^2]");
    add_column(t, "linear_variance", "<:(Delta S_L)^2:>_nbar = 4 nbar - cos^2(theta) [photons^2]");
    const bool thresholds = config.outputs.count(ScanOutput::noise_thresholds) > 0;
    if (thresholds) {
        add_column(t, "linear_threshold", "nbar where the linear variance reaches zero, cos^2(theta)/4; empty if none");
        add_column(t, "nonlinear_threshold", "nbar where the nonlinear variance reaches zero; empty if none");
    }

    const auto nbars = config.points();
    for (int ic = 0; ic < config.cos_points; ++ic) {
        // cos(theta) from 1 down to -1
        double c = 1.0 - 2.0 * ic / static_cast<double>(config.cos_points - 1);
        if (std::abs(c) < 1e-12) c = 0.0;
        const double theta = std::acos(c);
        std::optional<double> lin_th;
        std::optional<double> nl_th;
        if (thresholds && c != 0.0) {
            lin_th = noise::noise_threshold(noise::Criterion::linear, theta, config.bins);
            nl_th = noise::noise_threshold(noise::Criterion::nonlinear, theta, config.bins);
        }
        for (double nbar : nbars) {
            const noise::NoisySingleProbe probe{theta, nbar, config.bins};
            std::vector<std::optional<double>> row{c, nbar, noise::nonlinear_noisy_moments(probe).variance(),
                                                   noise::linear_noisy_variance(probe)};
            if (thresholds) {
                row.push_back(lin_th);
                row.push_back(nl_th);
            }
            t.rows.push_back(std::move(row));
        }
    }
    return t;
}

SampleReport run_sample(const ScanConfig& config) {
    config.validate();
    if (!config.shots) throw ConfigError("shots: the sample command needs a shot count");

    const BellStateParams state(config.lambda, deg_to_rad(config.phi_deg));
    const DetectorConfig det(config.bins, config.efficiency);
    const MeasurementSetting setting = compose_setting(deg_to_rad(config.qwp_deg), deg_to_rad(config.hwp_deg));
    const auto stats = click_probabilities_analytic(state, setting, det);
    SampleRun run = sample(stats, *config.shots, config.seed);
    run.source_setting = setting;
    run.source_state = state;
    const WitnessEstimates est = estimate_witnesses(run, det, config.bootstrap);
    const MomentSet analytic = pi_moments_analytic(state, setting, det);

    SampleReport report;
    ResultTable& w = report.witnesses;
    add_column(w, "qwp_deg", "QWP angle [deg]");
    add_column(w, "hwp_deg", "HWP angle [deg]");
    add_column(w, "witness_2nd", "estimated <:(Delta S_NL)^2:> [clicks^2]");
    add_column(w, "witness_2nd_sigma", "delta-method standard deviation [clicks^2]");
    add_column(w, "witness_2nd_sigma_bootstrap", "bootstrap standard deviation [clicks^2]");
    add_column(w, "witness_2nd_significance", "witness_2nd / witness_2nd_sigma [standard deviations]");
    add_column(w, "witness_2nd_analytic", "analytic <:(Delta S_NL)^2:> [clicks^2]");
    add_column(w, "mprime_mineig", "estimated minimum eigenvalue of M'");
    add_column(w, "mprime_mineig_sigma", "bootstrap standard deviation of mprime_mineig");
    add_column(w, "mprime_mineig_significance", "mprime_mineig / mprime_mineig_sigma [standard deviations]");
    add_column(w, "mprime_mineig_analytic", "analytic minimum eigenvalue of M'");
    w.rows.push_back({config.qwp_deg, config.hwp_deg, est.second_order.value, est.second_order.sigma,
                      est.second_order_bootstrap_sigma, est.second_order.significance,
                      second_order_witness(analytic, det).value, est.mprime_min_eigenvalue.value,
                      est.mprime_min_eigenvalue.sigma, est.mprime_min_eigenvalue.significance,
                      moment_matrix_Mprime(analytic, det).min_eigenvalue});

    ResultTable& c = report.counts;
    add_column(c, "k", "clicks in arm A");
    add_column(c, "l", "clicks in arm B");
    add_column(c, "count", "events with (k, l) clicks");
    add_column(c, "frequency", "count / shots");
    add_column(c, "probability", "analytic c_{k,l}");
    const auto freq = run.frequencies();
    for (int k = 0; k <= det.bins(); ++k)
        for (int l = 0; l <= det.bins(); ++l)
            c.rows.push_back({static_cast<double>(k), static_cast<double>(l),
                              static_cast<double>(run.counts[stats.index(k, l)]), freq(k, l), stats(k, l)});
    return report;
}

OracleCheckReport run_oracle_check(const ScanConfig& config) {
    config.validate();
    const DetectorConfig det(config.bins, config.efficiency);
    const DetectorConfig oracle_det(config.bins, std::clamp(config.efficiency + config.oracle_efficiency_offset, 0.0, 1.0));

    OracleCheckReport report;
    report.tolerance = config.tolerance;
    add_column(report.table, "phi_deg", "Bell-state phase [deg]");
    add_column(report.table, "qwp_deg", "QWP angle [deg]");
    add_column(report.table, "hwp_deg", "HWP angle [deg]");
    add_column(report.table, "max_abs_dev", "max over (k,l) of |c_analytic - c_fock|");

    for (double phi : config.phis_deg) {
        const BellStateParams state(config.lambda, deg_to_rad(phi));
        for (double q : config.grid_deg) {
            for (double h : config.grid_deg) {
                const MeasurementSetting setting = compose_setting(deg_to_rad(q), deg_to_rad(h));
                const auto analytic = click_probabilities_analytic(state, setting, det);
                const auto oracle = oracle_click_statistics(state, setting, oracle_det, config.cutoff);
                double dev = 0.0;
                for (std::size_t i = 0; i < analytic.table().size(); ++i)
                    dev = std::max(dev, std::abs(analytic.table()[i] - oracle.stats.table()[i]));
                report.max_deviation = std::max(report.max_deviation, dev);
                report.table.rows.push_back({phi, q, h, dev});
            }
        }
    }
    report.pass = report.max_deviation <= config.tolerance;
    return report;
}

// --- writers --------------------------------------------------------------------

void write_csv(std::ostream& out, const ResultTable& table, const ScanConfig& config, const std::string& command) {
    out << "# clickpol " << command << "\n";
    for (const auto& [k, v] : config.resolved()) out << "# " << k << " = " << v << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << "# column " << table.columns[i] << ": " << table.descriptions[i] << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            if (row[i]) out << fmt::format("{:.12e}", *row[i]);
        }
        out << "\n";
    }
}

void write_json(std::ostream& out, const ResultTable& table, const ScanConfig& config, const std::string& command) {
    nlohmann::ordered_json j;
    j["command"] = command;
    nlohmann::ordered_json cfg;
    for (const auto& [k, v] : config.resolved()) cfg[k] = v;
    j["config"] = cfg;
    j["columns"] = table.columns;
    j["descriptions"] = table.descriptions;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json r = nlohmann::ordered_json::array();
        for (const auto& v : row) r.push_back(v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr));
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    out << j.dump(2) << "\n";
}

}  // namespace clickpol
