#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "specfactor/estimator.hpp"
#include "specfactor/synthetic.hpp"
#include "specfactor/window.hpp"

namespace specfactor {

/// Comma-separated matrix, one row per variable. A first line containing any
/// non-numeric cell is treated as a header and skipped. Blank lines are ignored.
Eigen::MatrixXd read_matrix_csv(std::istream& in);
Eigen::MatrixXd read_matrix_csv_file(const std::string& path);

/// Writes with 17 significant digits so doubles round-trip exactly.
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);

/// Flat key = value configuration with '#' comments. Unknown keys are rejected.
class RunConfig {
public:
    static RunConfig parse(std::istream& in, const std::string& source = "config");
    static RunConfig from_file(const std::string& path);

    static const std::vector<std::string>& known_keys();

    /// Sets or overrides a value; throws ConfigError on an unknown key.
    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const { return values_.count(key) > 0; }
    const std::string& get(const std::string& key) const;

    void apply(EstimatorConfig& cfg) const;
    void apply(WindowConfig& cfg) const;
    void apply(SyntheticConfig& cfg) const;
    void apply(ScenarioConfig& cfg) const;

private:
    std::map<std::string, std::string> values_;
};

/// "0.01,0.02,0.5" or "lo:step:hi".
std::vector<double> parse_phi_grid(const std::string& text);
/// "row:start:level;row:start:level", rows 0-based, starts 1-based.
std::vector<StepEvent> parse_events(const std::string& text);

nlohmann::json to_json(const EstimationResult& r, Eigen::Index n, Eigen::Index t);
void write_surface_csv(std::ostream& out, const std::vector<SurfacePoint>& surface);
void write_window_csv(std::ostream& out, const WindowSeries& series);

}  // namespace specfactor
