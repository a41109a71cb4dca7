#pragma once

#include <cstdint>
#include <vector>

#include "specfactor/residual.hpp"
#include "specfactor/spectral.hpp"

namespace specfactor {

/// Monte Carlo factor model
///
///     R_it = sum_j Lambda_ij F_jt + sqrt(gamma) U_it,
///     U_it = sqrt((1 - alpha^2) / (1 + 2 J beta^2)) e_it,
///     e_it = alpha e_i,t-1 + v_it + beta * (sum of v_ht over the J rows on each side of i),
///
/// with Lambda, F and v standard normal.
struct SyntheticConfig {
    int n = 100;
    int t = 100;
    int p = 3;
    double gamma = 0.3;  // residual level, p / SNR
    double alpha = 0.0;  // auto-correlation
    double beta = 0.0;   // cross-correlation
    int j = 0;           // cross-correlation range in rows
    std::uint64_t seed = 1;

    void validate() const;
    static double gamma_for_snr(int p, double snr) { return static_cast<double>(p) / snr; }
};

struct StepEvent {
    int row = 0;    // 0-based variable index
    int start = 1;  // 1-based sample index at which the new level applies
    double level = 0.0;
};

/// Level-step scenario: every row carries its baseline plus (wg + ar) / snr noise,
/// where wg is white Gaussian and ar is a unit-innovation AR(1) process. An event
/// switches its row to a new level from its start sample onwards.
///
/// With coupling c > 0 the step of size d also reaches row k as d * c^|k - row|,
/// a crude stand-in for the way a load change moves voltages at nearby buses.
/// c = 0 touches the event row only.
struct ScenarioConfig {
    int n = 118;
    int t = 1000;
    /// One value per row, or a single value broadcast to all rows.
    std::vector<double> base_level{20.0};
    std::vector<StepEvent> events;
    double snr = 1000.0;
    double ar_coeff = 0.5;
    double coupling = 0.5;
    std::uint64_t seed = 1;

    void validate() const;
};

DataMatrix generate_factor_data(const SyntheticConfig& cfg);

/// Four-factor model with Lambda ~ N(0, 1), F ~ N(0, 0.01) (variance), U ~ N(0, 1).
DataMatrix generate_iid_check_data(int n, int t, std::uint64_t seed);

DataMatrix generate_scenario(const ScenarioConfig& cfg);

/// Eigenvalues of Sigma_0 Sigma_1 with Sigma_i = G_i G_i^T / cols, G_i of shape
/// n_dim x round(n_dim / phi), computed through the symmetric similar form
/// Sigma_1^{1/2} Sigma_0 Sigma_1^{1/2}.
EigenSpectrum sample_wishart_product(int n_dim, double phi, std::uint64_t seed);

}  // namespace specfactor
