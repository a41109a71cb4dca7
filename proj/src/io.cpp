#include "specfactor/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "specfactor/error.hpp"

namespace specfactor {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(s);
    while (std::getline(is, cell, sep)) {
        out.push_back(trim(cell));
    }
    if (!s.empty() && s.back() == sep) {
        out.emplace_back();
    }
    return out;
}

bool parse_double(const std::string& text, double& value) {
    if (text.empty()) {
        return false;
    }
    errno = 0;
    char* end = nullptr;
    value = std::strtod(text.c_str(), &end);
    return end == text.c_str() + text.size() && errno != ERANGE && std::isfinite(value);
}

double to_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    if (!parse_double(text, v)) {
        throw ConfigError("value for '" + key + "' is not a finite number: '" + text + "'");
    }
    return v;
}

long long to_integer(const std::string& key, const std::string& text) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
        throw ConfigError("value for '" + key + "' is not an integer: '" + text + "'");
    }
    return v;
}

int to_int(const std::string& key, const std::string& text) {
    const long long v = to_integer(key, text);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw ConfigError("value for '" + key + "' is out of range");
    }
    return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
    std::string t = text;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "1" || t == "true" || t == "yes" || t == "on") {
        return true;
    }
    if (t == "0" || t == "false" || t == "no" || t == "off") {
        return false;
    }
    throw ConfigError("value for '" + key + "' is not a boolean: '" + text + "'");
}

}  // namespace

Eigen::MatrixXd read_matrix_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split(line, ',');
        std::vector<double> row(cells.size());
        bool numeric = true;
        std::size_t bad = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!parse_double(cells[c], row[c])) {
                numeric = false;
                bad = c;
                break;
            }
        }
        if (!numeric) {
            if (first_content) {
                first_content = false;  // header line
                continue;
            }
            std::ostringstream msg;
            msg << "line " << line_no << ", column " << bad + 1 << ": '" << cells[bad]
                << "' is not a finite number";
            throw DataError(msg.str());
        }
        first_content = false;
        if (!rows.empty() && row.size() != rows.front().size()) {
            std::ostringstream msg;
            msg << "line " << line_no << " (data row " << rows.size() + 1 << ") has " << row.size()
                << " values, expected " << rows.front().size();
            throw DataError(msg.str());
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw DataError("matrix file contains no data rows");
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

Eigen::MatrixXd read_matrix_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open matrix file '" + path + "'");
    }
    try {
        return read_matrix_csv(in);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) {
                out << ',';
            }
            out << m(i, j);
        }
        out << '\n';
    }
}

const std::vector<std::string>& RunConfig::known_keys() {
    static const std::vector<std::string> keys{
        // estimator
        "p_max", "phi_grid", "refine", "bin_count", "grid", "epsilon", "threads",
        // window
        "width", "step",
        // synthetic and scenario
        "n", "t", "p", "gamma", "snr", "alpha", "beta", "j", "seed", "base_level", "events", "ar_coeff",
        "coupling"};
    return keys;
}

RunConfig RunConfig::parse(std::istream& in, const std::string& source) {
    RunConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream msg;
            msg << source << ":" << line_no << ": expected 'key = value'";
            throw ConfigError(msg.str());
        }
        try {
            cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            std::ostringstream msg;
            msg << source << ":" << line_no << ": " << e.what();
            throw ConfigError(msg.str());
        }
    }
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    return parse(in, path);
}

void RunConfig::set(const std::string& key, const std::string& value) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw ConfigError("unknown config key '" + key + "'");
    }
    values_[key] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        throw ConfigError("missing config key '" + key + "'");
    }
    return it->second;
}

void RunConfig::apply(EstimatorConfig& cfg) const {
    if (has("p_max")) cfg.p_max = to_int("p_max", get("p_max"));
    if (has("phi_grid")) cfg.phi_grid = parse_phi_grid(get("phi_grid"));
    if (has("refine")) cfg.refine = to_bool("refine", get("refine"));
    if (has("bin_count")) cfg.binning.bin_count = to_int("bin_count", get("bin_count"));
    if (has("grid")) cfg.grid = grid_mode_from_string(get("grid"));
    if (has("epsilon")) cfg.epsilon = to_double("epsilon", get("epsilon"));
    if (has("threads")) {
        const int th = to_int("threads", get("threads"));
        if (th < 0) {
            throw ConfigError("threads must be nonnegative");
        }
        cfg.threads = static_cast<unsigned>(th);
    }
}

void RunConfig::apply(WindowConfig& cfg) const {
    apply(cfg.estimator);
    if (has("width")) cfg.width = to_int("width", get("width"));
    if (has("step")) cfg.step = to_int("step", get("step"));
}

void RunConfig::apply(SyntheticConfig& cfg) const {
    if (has("n")) cfg.n = to_int("n", get("n"));
    if (has("t")) cfg.t = to_int("t", get("t"));
    if (has("p")) cfg.p = to_int("p", get("p"));
    if (has("alpha")) cfg.alpha = to_double("alpha", get("alpha"));
    if (has("beta")) cfg.beta = to_double("beta", get("beta"));
    if (has("j")) cfg.j = to_int("j", get("j"));
    if (has("seed")) cfg.seed = static_cast<std::uint64_t>(to_integer("seed", get("seed")));
    if (has("gamma") && has("snr")) {
        throw ConfigError("give either gamma or snr, not both");
    }
    if (has("gamma")) cfg.gamma = to_double("gamma", get("gamma"));
    if (has("snr")) {
        const double snr = to_double("snr", get("snr"));
        if (!(snr > 0.0)) {
            throw ConfigError("snr must be positive");
        }
        cfg.gamma = SyntheticConfig::gamma_for_snr(cfg.p, snr);
    }
}

void RunConfig::apply(ScenarioConfig& cfg) const {
    if (has("n")) cfg.n = to_int("n", get("n"));
    if (has("t")) cfg.t = to_int("t", get("t"));
    if (has("seed")) cfg.seed = static_cast<std::uint64_t>(to_integer("seed", get("seed")));
    if (has("snr")) cfg.snr = to_double("snr", get("snr"));
    if (has("ar_coeff")) cfg.ar_coeff = to_double("ar_coeff", get("ar_coeff"));
    if (has("coupling")) cfg.coupling = to_double("coupling", get("coupling"));
    if (has("events")) cfg.events = parse_events(get("events"));
    if (has("base_level")) {
        cfg.base_level.clear();
        for (const auto& cell : split(get("base_level"), ',')) {
            cfg.base_level.push_back(to_double("base_level", cell));
        }
    }
}

std::vector<double> parse_phi_grid(const std::string& text) {
    const auto parts = split(text, ':');
    std::vector<double> grid;
    if (parts.size() == 3) {
        const double lo = to_double("phi_grid", parts[0]);
        const double step = to_double("phi_grid", parts[1]);
        const double hi = to_double("phi_grid", parts[2]);
        if (!(step > 0.0) || hi < lo) {
            throw ConfigError("phi_grid range needs lo <= hi and a positive step");
        }
        const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
        for (long k = 0; k <= count; ++k) {
            grid.push_back(std::round((lo + k * step) * 1e12) / 1e12);
        }
    } else if (parts.size() == 1) {
        for (const auto& cell : split(text, ',')) {
            grid.push_back(to_double("phi_grid", cell));
        }
    } else {
        throw ConfigError("phi_grid must be a comma list or lo:step:hi");
    }
    return grid;
}

std::vector<StepEvent> parse_events(const std::string& text) {
    std::vector<StepEvent> events;
    for (const auto& item : split(text, ';')) {
        if (item.empty()) {
            continue;
        }
        const auto f = split(item, ':');
        if (f.size() != 3) {
            throw ConfigError("event '" + item + "' must be row:start:level");
        }
        events.push_back({to_int("events", f[0]), to_int("events", f[1]), to_double("events", f[2])});
    }
    return events;
}

nlohmann::json to_json(const EstimationResult& r, Eigen::Index n, Eigen::Index t) {
    return {{"p_hat", r.p_hat}, {"phi_hat", r.phi_hat}, {"d_min", r.d_min}, {"n", n}, {"t", t}};
}

void write_surface_csv(std::ostream& out, const std::vector<SurfacePoint>& surface) {
    out << "p,phi,divergence\n" << std::setprecision(17);
    for (const auto& s : surface) {
        out << s.p << ',' << s.phi << ',' << s.divergence << '\n';
    }
}

void write_window_csv(std::ostream& out, const WindowSeries& series) {
    out << "end_index,p_hat,phi_hat,d_min,error\n" << std::setprecision(17);
    for (const auto& e : series.entries) {
        out << e.end_index << ',';
        if (e.ok()) {
            out << e.p_hat << ',' << e.phi_hat << ',' << e.d_min << ",\n";
        } else {
            std::string msg = e.error;
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            out << ",,," << msg << '\n';
        }
    }
}

}  // namespace specfactor
