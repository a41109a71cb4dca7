#pragma once

// Limiting spectral density of the product of two free Wishart matrices
// Sigma_0 * Sigma_1, each Sigma_i = G_i G_i^T / n with G_i of shape m x n and
// aspect ratio phi = m / n in (0, 1].
//
// Each factor has S-transform 1 / (1 + phi w); the product has 1 / (1 + phi w)^2,
// which leads to the cubic
//
//     phi^2 z^2 G^3 + 2 (1 - phi) phi z G^2 + (phi^2 - 2 phi + 1 - z) G + 1 = 0
//
// for the Green's function G(z). The density is -Im G(x + i eps) / pi.

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "specfactor/spectral.hpp"

namespace specfactor {

using cplx = std::complex<double>;

struct ModelDensityParams {
    double phi = 0.5;
    /// Imaginary offset used when inverting the Stieltjes transform. Non-positive
    /// selects a tiny default relative to the upper support edge.
    double epsilon = 0.0;
    BinningPolicy grid{};

    void validate() const;
};

struct GreenValue {
    cplx z;
    cplx g;
};

/// Closed support [lower, upper] of the product law.
struct ModelSupport {
    double lower;
    double upper;
};

cplx s_transform_component(cplx w, double phi);
cplx s_transform_product(cplx w, double phi);

/// Coefficients (a, b, c, d) of a g^3 + b g^2 + c g + d for the Green's function cubic.
std::array<cplx, 4> green_cubic_coefficients(cplx z, double phi);

/// All three roots of a x^3 + b x^2 + c x + d (Cardano, Newton-polished). Requires a != 0.
std::array<cplx, 3> solve_cubic(cplx a, cplx b, cplx c, cplx d);

/// Physical root of the Green's function cubic at z (Im z > 0).
///
/// Roots with Im g < 0 are candidates. A single candidate is returned directly;
/// otherwise the one nearest `hint` (or, without a hint, nearest the asymptote 1/z)
/// wins. Outside the support, where every root is numerically real, the same
/// nearest-root rule applies to all three.
GreenValue green_function(cplx z, double phi, const std::optional<GreenValue>& hint = std::nullopt);

/// Residual |p(g)| of the cubic; used by tests and as a postcondition.
double green_residual(cplx z, cplx g, double phi);

/// Support edges from the critical points of the inverse moment generating function
/// x(M) = (1 + M)(1 + phi M)^2 / M, i.e. the roots of 2 phi M^2 + phi M - 1 = 0.
ModelSupport model_support(double phi);

/// Distribution function of the product law, tabulated on a fine grid that is
/// crowded toward both support edges. Bin masses are differences of this table,
/// so a singular edge (phi = 1 near zero) still gets its full weight.
class ModelCdf {
public:
    /// epsilon <= 0 picks a tiny offset relative to the upper edge.
    explicit ModelCdf(double phi, double epsilon = 0.0, int resolution = 4096);

    double operator()(double x) const;
    double quantile(double u) const;
    /// Renormalized masses on arbitrary edges; throws NumericalError if the edges miss the support.
    SpectralDensity on(std::span<const double> edges) const;

    double phi() const { return phi_; }
    const ModelSupport& support() const { return support_; }

private:
    double phi_;
    ModelSupport support_;
    std::vector<double> nodes_;
    std::vector<double> cdf_;
};

/// Density masses on arbitrary edges (integrals of the density over each bin).
SpectralDensity model_density(double phi, std::span<const double> edges, double epsilon = 0.0);
SpectralDensity model_density(const ModelDensityParams& params);

/// Inversion offset suited to a grid: 1e-6 * span, capped at half the narrowest bin.
double default_epsilon(std::span<const double> edges);

/// Closed-form moments of the product law, k in {1, 2, 3}.
double model_moment(double phi, int k);

}  // namespace specfactor
