#pragma once

// Front-end drivers: wave-plate scans, the thermal-noise study and the
// analytic-versus-Fock equivalence check, plus their CSV/JSON writers.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace clickpol {

/// Invalid configuration; the message names the field (and line, when read from a file).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ScanAxis { qwp, hwp, nbar };
enum class ScanOutput { second_order, mprime_mineig, snl_moments, noise_thresholds };

struct ScanConfig {
    double lambda = 0.36;
    double phi_deg = 180.0;
    int bins = 8;
    double efficiency = 0.135;

    ScanAxis axis = ScanAxis::qwp;
    double fixed_deg = 0.0;  // angle of the plate that is not scanned
    double start = 0.0;      // degrees for qwp/hwp, photons for nbar
    double stop = 90.0;
    double step = 5.0;
    std::set<ScanOutput> outputs{ScanOutput::second_order, ScanOutput::mprime_mineig, ScanOutput::snl_moments};
    int snl_order = 2;

    std::optional<std::int64_t> shots;  // sampling mode when set
    std::uint64_t seed = 1;
    int bootstrap = 200;

    // single-setting sampling run
    double qwp_deg = 0.0;
    double hwp_deg = 0.0;

    // noise study
    int cos_points = 21;

    // oracle check
    std::vector<double> grid_deg{0.0, 22.5, 45.0, 67.5, 90.0};
    std::vector<double> phis_deg{0.0, 180.0};
    int cutoff = -1;
    double tolerance = 1e-8;
    double oracle_efficiency_offset = 0.0;  // negative-control hook: perturbs eta on the oracle side only

    /// Throws ConfigError naming the offending field.
    void validate() const;
    /// Scan coordinates from start to stop inclusive.
    std::vector<double> points() const;
    /// Resolved key/value pairs in canonical order (the provenance header).
    std::vector<std::pair<std::string, std::string>> resolved() const;
};

/// Reads a YAML mapping of scalar keys; unknown keys and type errors raise
/// ConfigError with the line number.
ScanConfig load_config_file(const std::string& path, ScanConfig base = {});
ScanConfig parse_config_text(const std::string& text, ScanConfig base = {});

std::string to_string(ScanAxis axis);
std::string to_string(ScanOutput output);
ScanAxis parse_axis(const std::string& s);
ScanOutput parse_output(const std::string& s);

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::string> descriptions;  // one per column, written to the header block
    std::vector<std::vector<std::optional<double>>> rows;

    std::size_t column(const std::string& name) const;
};

ResultTable run_scan(const ScanConfig& config);
ResultTable run_noise_study(const ScanConfig& config);

struct SampleReport {
    ResultTable witnesses;  // one row: estimates, sigmas, significances and analytic values
    ResultTable counts;     // k, l, count, frequency, probability
};

/// One finite-shot run at (qwp_deg, hwp_deg); needs shots.
SampleReport run_sample(const ScanConfig& config);

struct OracleCheckReport {
    ResultTable table;  // phi_deg, qwp_deg, hwp_deg, max_abs_dev
    double max_deviation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

OracleCheckReport run_oracle_check(const ScanConfig& config);

/// Comment block (# key = value, # column: description), header row, rows.
void write_csv(std::ostream& out, const ResultTable& table, const ScanConfig& config, const std::string& command);
void write_json(std::ostream& out, const ResultTable& table, const ScanConfig& config, const std::string& command);

}  // namespace clickpol
