#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

namespace specfactor {

/// Sorted, finite, nonnegative eigenvalues of a (positive semidefinite) matrix.
///
/// Construction sorts the input and clamps tiny negatives (>= -1e-8 * max|value|)
/// produced by finite-precision eigensolvers to zero. Larger negatives are rejected.
class EigenSpectrum {
public:
    explicit EigenSpectrum(std::vector<double> values);

    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    double max() const { return values_.back(); }
    double min() const { return values_.front(); }

private:
    std::vector<double> values_;
};

/// Histogram grid description: `bin_count` equal-width bins over [support_lo, support_hi].
struct BinningPolicy {
    int bin_count = 100;
    double support_lo = 0.0;
    double support_hi = 1.0;

    static constexpr int kMinBins = 10;

    void validate() const;
    std::vector<double> edges() const;
};

/// Probability masses over ascending bin edges. Bins need not be equally wide.
class SpectralDensity {
public:
    SpectralDensity(std::vector<double> edges, std::vector<double> mass);

    const std::vector<double>& edges() const noexcept { return edges_; }
    const std::vector<double>& mass() const noexcept { return mass_; }
    std::size_t bin_count() const noexcept { return mass_.size(); }
    double midpoint(std::size_t b) const { return 0.5 * (edges_[b] + edges_[b + 1]); }
    double width(std::size_t b) const { return edges_[b + 1] - edges_[b]; }

    /// Two-column TSV: bin midpoint, mass.
    void write_tsv(std::ostream& os) const;

private:
    std::vector<double> edges_;
    std::vector<double> mass_;
};

/// Empirical spectral density over an arbitrary ascending edge list.
/// Bins are half-open [e_b, e_{b+1}) except the last, which is closed.
/// Without `clip`, eigenvalues outside [edges.front(), edges.back()] are an error;
/// with it they are assigned to the nearest end bin.
SpectralDensity esd(const EigenSpectrum& spectrum, std::span<const double> edges, bool clip = false);
SpectralDensity esd(const EigenSpectrum& spectrum, const BinningPolicy& policy, bool clip = false);

/// Marchenko-Pastur density with ratio c in (0, 1] and scale sigma2 > 0.
double mp_pdf(double lambda, double c, double sigma2);

/// Bin masses of the Marchenko-Pastur law by Gauss-Legendre quadrature per bin, renormalized.
SpectralDensity mp_density_on_grid(double c, double sigma2, std::span<const double> edges);
SpectralDensity mp_density_on_grid(double c, double sigma2, const BinningPolicy& policy);

/// Jensen-Shannon divergence (natural log) of two densities on identical edges.
double js_divergence(const SpectralDensity& a, const SpectralDensity& b);

/// k-th moment by the midpoint rule.
double density_moment(const SpectralDensity& rho, int k);

/// Stieltjes transform sum_b mass_b / (z - midpoint_b); requires Im z > 0.
std::complex<double> stieltjes_of_density(const SpectralDensity& rho, std::complex<double> z);

}  // namespace specfactor
