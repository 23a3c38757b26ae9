#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clickpol/errors.hpp"
#include "clickpol/scan.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitOracle = 4;

struct Overrides {
    std::string config_path;
    std::string output_path;
    std::string json_path;
    std::string counts_path;

    std::optional<double> lambda, phi_deg, efficiency, fixed_deg, start, stop, step;
    std::optional<double> qwp_deg, hwp_deg, tolerance, eta_offset;
    std::optional<int> bins, snl_order, bootstrap, cos_points, cutoff;
    std::optional<std::int64_t> shots;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> axis;
    std::vector<std::string> outputs;
    std::vector<double> grid_deg, phis_deg;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config_path, "YAML config file; flags override its keys");
    cmd->add_option("-o,--output", o.output_path, "CSV output file (default: stdout)");
    cmd->add_option("--json", o.json_path, "also write a JSON mirror of the table");
    cmd->add_option("--lambda", o.lambda, "squeezing amplitude, 0 <= lambda < 1");
    cmd->add_option("--phi", o.phi_deg, "Bell-state phase [deg]");
    cmd->add_option("-N,--bins", o.bins, "number of click bins per arm");
    cmd->add_option("--eta,--efficiency", o.efficiency, "detection efficiency");
}

void add_range(CLI::App* cmd, Overrides& o, const std::string& unit) {
    cmd->add_option("--start", o.start, "first scan point [" + unit + "]");
    cmd->add_option("--stop", o.stop, "last scan point [" + unit + "]");
    cmd->add_option("--step", o.step, "scan step [" + unit + "]");
}

void add_sampling(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--shots", o.shots, "events per setting");
    cmd->add_option("--seed", o.seed, "64-bit RNG seed");
    cmd->add_option("--bootstrap", o.bootstrap, "bootstrap resamples for the M' eigenvalue");
}

template <typename T>
void apply(const std::optional<T>& flag, T& field) {
    if (flag) field = *flag;
}

clickpol::ScanConfig resolve(const Overrides& o, clickpol::ScanConfig base) {
    clickpol::ScanConfig c = o.config_path.empty() ? base : clickpol::load_config_file(o.config_path, base);
    apply(o.lambda, c.lambda);
    apply(o.phi_deg, c.phi_deg);
    apply(o.bins, c.bins);
    apply(o.efficiency, c.efficiency);
    apply(o.fixed_deg, c.fixed_deg);
    apply(o.start, c.start);
    apply(o.stop, c.stop);
    apply(o.step, c.step);
    apply(o.qwp_deg, c.qwp_deg);
    apply(o.hwp_deg, c.hwp_deg);
    apply(o.tolerance, c.tolerance);
    apply(o.eta_offset, c.oracle_efficiency_offset);
    apply(o.snl_order, c.snl_order);
    apply(o.bootstrap, c.bootstrap);
    apply(o.cos_points, c.cos_points);
    apply(o.cutoff, c.cutoff);
    apply(o.seed, c.seed);
    if (o.shots) c.shots = *o.shots;
    if (o.axis) c.axis = clickpol::parse_axis(*o.axis);
    if (!o.outputs.empty()) {
        c.outputs.clear();
        for (const auto& s : o.outputs) c.outputs.insert(clickpol::parse_output(s));
    }
    if (!o.grid_deg.empty()) c.grid_deg = o.grid_deg;
    if (!o.phis_deg.empty()) c.phis_deg = o.phis_deg;
    c.validate();
    return c;
}

void emit(const std::string& path, const clickpol::ResultTable& table, const clickpol::ScanConfig& config,
          const std::string& command, bool json) {
    auto write = [&](std::ostream& out) {
        if (json) clickpol::write_json(out, table, config, command);
        else clickpol::write_csv(out, table, config, command);
    };
    if (path.empty() || path == "-") {
        write(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw clickpol::ConfigError("cannot open output file '" + path + "'");
    write(out);
}

void emit_all(const Overrides& o, const clickpol::ResultTable& table, const clickpol::ScanConfig& config,
              const std::string& command) {
    emit(o.output_path, table, config, command, false);
    if (!o.json_path.empty()) emit(o.json_path, table, config, command, true);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clickpol: nonlinear polarization squeezing with click-counting detectors"};
    app.require_subcommand(1);
    Overrides o;

    auto* scan = app.add_subcommand("scan", "wave-plate scan of witnesses and S_NL moments");
    add_common(scan, o);
    add_range(scan, o, "deg");
    add_sampling(scan, o);
    scan->add_option("--axis", o.axis, "scanned plate: qwp or hwp");
    scan->add_option("--fixed", o.fixed_deg, "angle of the other plate [deg]");
    scan->add_option("--outputs", o.outputs, "second-order, mprime-mineig, s-nl-moments")->delimiter(',');
    scan->add_option("--snl-order", o.snl_order, "highest <:S_NL^k:> column");

    auto* noise = app.add_subcommand("noise-study", "thermal-noise robustness of a polarized single photon");
    add_common(noise, o);
    add_range(noise, o, "photons");
    noise->add_option("--cos-points", o.cos_points, "number of cos(theta) grid points in [-1, 1]");
    noise->add_option("--outputs", o.outputs, "noise-thresholds to add threshold columns")->delimiter(',');

    auto* samp = app.add_subcommand("sample", "one finite-shot experiment with witness estimates");
    add_common(samp, o);
    add_sampling(samp, o);
    samp->add_option("--qwp", o.qwp_deg, "QWP angle [deg]");
    samp->add_option("--hwp", o.hwp_deg, "HWP angle [deg]");
    samp->add_option("--counts", o.counts_path, "write the (k, l) count table to this CSV file");

    auto* oracle = app.add_subcommand("oracle-check", "analytic click statistics versus the Fock oracle");
    add_common(oracle, o);
    oracle->add_option("--grid", o.grid_deg, "wave-plate angles for both plates [deg]")->delimiter(',');
    oracle->add_option("--phis", o.phis_deg, "Bell-state phases [deg]")->delimiter(',');
    oracle->add_option("--cutoff", o.cutoff, "Fock cutoff per mode (-1: automatic)");
    oracle->add_option("--tolerance", o.tolerance, "maximum allowed entrywise deviation");
    oracle->add_option("--eta-offset", o.eta_offset, "test hook: perturb eta on the oracle side only");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*scan) {
            const auto config = resolve(o, {});
            emit_all(o, clickpol::run_scan(config), config, "scan");
        } else if (*noise) {
            clickpol::ScanConfig base;
            base.axis = clickpol::ScanAxis::nbar;
            base.start = 0.0;
            base.stop = 0.6;
            base.step = 0.01;
            base.outputs = {clickpol::ScanOutput::noise_thresholds};
            const auto config = resolve(o, base);
            emit_all(o, clickpol::run_noise_study(config), config, "noise-study");
        } else if (*samp) {
            clickpol::ScanConfig base;
            base.shots = 1000000;
            const auto config = resolve(o, base);
            const auto report = clickpol::run_sample(config);
            emit_all(o, report.witnesses, config, "sample");
            if (!o.counts_path.empty()) emit(o.counts_path, report.counts, config, "sample", false);
        } else if (*oracle) {
            const auto config = resolve(o, {});
            const auto report = clickpol::run_oracle_check(config);
            emit_all(o, report.table, config, "oracle-check");
            std::cerr << (report.pass ? "PASS" : "FAIL") << ": max deviation " << report.max_deviation
                      << " (tolerance " << report.tolerance << ")\n";
            if (!report.pass) return kExitOracle;
        }
    } catch (const clickpol::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const clickpol::InvalidArgument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const clickpol::NumericDegeneracy& e) {
        std::cerr << "numeric degeneracy: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const clickpol::InsufficientData& e) {
        std::cerr << "insufficient data: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const clickpol::NoThreshold& e) {
        std::cerr << "numeric degeneracy: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitOk;
}
