#include "specfactor/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "specfactor/error.hpp"

namespace specfactor {

namespace {

constexpr double kMassTolerance = 1e-9;

// 20-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; symmetric).
constexpr std::array<double, 10> kGlNodes = {
    0.0765265211334973, 0.2277858511416451, 0.3737060887154195, 0.5108670019508271,
    0.6360536807265150, 0.7463319064601508, 0.8391169718222188, 0.9122344282513259,
    0.9639719272779138, 0.9931285991850949};
constexpr std::array<double, 10> kGlWeights = {
    0.1527533871307258, 0.1491729864726037, 0.1420961093183820, 0.1316886384491766,
    0.1181945319615184, 0.1019301198172404, 0.0832767415767048, 0.0626720483341091,
    0.0406014298003869, 0.0176140071391521};

template <class F>
double gauss_legendre(F&& f, double lo, double hi) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
        sum += kGlWeights[i] * (f(mid - half * kGlNodes[i]) + f(mid + half * kGlNodes[i]));
    }
    return sum * half;
}

void check_mp_params(double c, double sigma2) {
    if (!(c > 0.0 && c <= 1.0)) {
        throw ConfigError("Marchenko-Pastur ratio c must lie in (0, 1], got " + std::to_string(c));
    }
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
        throw ConfigError("Marchenko-Pastur scale sigma2 must be positive, got " + std::to_string(sigma2));
    }
}

void check_edges(std::span<const double> edges) {
    if (edges.size() < 2) {
        throw ConfigError("a density grid needs at least two edges");
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!std::isfinite(edges[i])) {
            throw ConfigError("density grid edges must be finite");
        }
        if (i > 0 && !(edges[i] > edges[i - 1])) {
            throw ConfigError("density grid edges must be strictly increasing");
        }
    }
}

}  // namespace

EigenSpectrum::EigenSpectrum(std::vector<double> values) : values_(std::move(values)) {
    double max_abs = 0.0;
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw DataError("eigen spectrum contains a non-finite value");
        }
        max_abs = std::max(max_abs, std::abs(v));
    }
    const double tol = 1e-8 * max_abs;
    for (double& v : values_) {
        if (v < 0.0) {
            if (v < -tol) {
                std::ostringstream msg;
                msg << "eigen spectrum has a negative value " << v << " beyond tolerance " << tol;
                throw DataError(msg.str());
            }
            v = 0.0;
        }
    }
    std::sort(values_.begin(), values_.end());
}

void BinningPolicy::validate() const {
    if (bin_count < kMinBins) {
        throw ConfigError("bin_count must be at least " + std::to_string(kMinBins) + ", got " +
                          std::to_string(bin_count));
    }
    if (!(support_lo < support_hi) || !std::isfinite(support_lo) || !std::isfinite(support_hi)) {
        throw ConfigError("binning support must satisfy lo < hi");
    }
}

std::vector<double> BinningPolicy::edges() const {
    validate();
    std::vector<double> e(static_cast<std::size_t>(bin_count) + 1);
    const double w = (support_hi - support_lo) / bin_count;
    for (int i = 0; i <= bin_count; ++i) {
        e[static_cast<std::size_t>(i)] = support_lo + w * i;
    }
    e.back() = support_hi;
    return e;
}

SpectralDensity::SpectralDensity(std::vector<double> edges, std::vector<double> mass)
    : edges_(std::move(edges)), mass_(std::move(mass)) {
    check_edges(edges_);
    if (mass_.size() + 1 != edges_.size()) {
        throw ConfigError("density needs exactly one mass per bin");
    }
    double total = 0.0;
    for (double m : mass_) {
        if (!(m >= 0.0) || !std::isfinite(m)) {
            throw NumericalError("density masses must be finite and nonnegative");
        }
        total += m;
    }
    if (std::abs(total - 1.0) > kMassTolerance) {
        std::ostringstream msg;
        msg << "density masses sum to " << std::setprecision(17) << total << ", expected 1";
        throw NumericalError(msg.str());
    }
}

void SpectralDensity::write_tsv(std::ostream& os) const {
    os << std::setprecision(17);
    for (std::size_t b = 0; b < mass_.size(); ++b) {
        os << midpoint(b) << '\t' << mass_[b] << '\n';
    }
}

SpectralDensity esd(const EigenSpectrum& spectrum, std::span<const double> edges, bool clip) {
    check_edges(edges);
    if (spectrum.empty()) {
        throw DataError("cannot build a spectral density from an empty spectrum");
    }
    const std::size_t bins = edges.size() - 1;
    std::vector<double> counts(bins, 0.0);
    for (double v : spectrum.values()) {
        std::size_t b;
        if (v < edges.front() || v > edges.back()) {
            if (!clip) {
                std::ostringstream msg;
                msg << "eigenvalue " << v << " lies outside the grid [" << edges.front() << ", "
                    << edges.back() << "]";
                throw DataError(msg.str());
            }
            b = v < edges.front() ? 0 : bins - 1;
        } else {
            auto it = std::upper_bound(edges.begin(), edges.end(), v);
            b = static_cast<std::size_t>(it - edges.begin());
            b = b == 0 ? 0 : std::min(b - 1, bins - 1);
        }
        counts[b] += 1.0;
    }
    const double n = static_cast<double>(spectrum.size());
    for (double& c : counts) {
        c /= n;
    }
    return {std::vector<double>(edges.begin(), edges.end()), std::move(counts)};
}

SpectralDensity esd(const EigenSpectrum& spectrum, const BinningPolicy& policy, bool clip) {
    const auto e = policy.edges();
    return esd(spectrum, e, clip);
}

double mp_pdf(double lambda, double c, double sigma2) {
    check_mp_params(c, sigma2);
    const double sc = std::sqrt(c);
    const double a = sigma2 * (1.0 - sc) * (1.0 - sc);
    const double b = sigma2 * (1.0 + sc) * (1.0 + sc);
    if (lambda < a || lambda > b || lambda <= 0.0) {
        return 0.0;
    }
    return std::sqrt((b - lambda) * (lambda - a)) / (2.0 * std::numbers::pi * c * sigma2 * lambda);
}

SpectralDensity mp_density_on_grid(double c, double sigma2, std::span<const double> edges) {
    check_mp_params(c, sigma2);
    check_edges(edges);
    const double sc = std::sqrt(c);
    const double a = sigma2 * (1.0 - sc) * (1.0 - sc);
    const double b = sigma2 * (1.0 + sc) * (1.0 + sc);
    const double centre = 0.5 * (a + b);
    const double radius = 0.5 * (b - a);
    // With lambda = centre + radius*cos(theta) the integrand is smooth in theta, including
    // the lambda^{-1/2} endpoint at c = 1.
    auto integrand = [&](double theta) {
        const double s = std::sin(theta);
        const double lam = centre + radius * std::cos(theta);
        if (lam <= 0.0) {
            return 0.0;
        }
        return radius * radius * s * s / (2.0 * std::numbers::pi * c * sigma2 * lam);
    };
    auto theta_of = [&](double lam) {
        return std::acos(std::clamp((lam - centre) / radius, -1.0, 1.0));
    };
    std::vector<double> mass(edges.size() - 1, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double lo = std::max(edges[i], a);
        const double hi = std::min(edges[i + 1], b);
        if (hi <= lo) {
            continue;
        }
        mass[i] = gauss_legendre(integrand, theta_of(hi), theta_of(lo));
        total += mass[i];
    }
    if (!(total > 0.0)) {
        throw NumericalError("the grid does not overlap the Marchenko-Pastur support");
    }
    for (double& m : mass) {
        m /= total;
    }
    return {std::vector<double>(edges.begin(), edges.end()), std::move(mass)};
}

SpectralDensity mp_density_on_grid(double c, double sigma2, const BinningPolicy& policy) {
    const auto e = policy.edges();
    return mp_density_on_grid(c, sigma2, e);
}

double js_divergence(const SpectralDensity& a, const SpectralDensity& b) {
    if (a.edges() != b.edges()) {
        throw ConfigError("Jensen-Shannon divergence requires densities on identical grids");
    }
    const auto& pa = a.mass();
    const auto& pb = b.mass();
    double d = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const double m = 0.5 * (pa[i] + pb[i]);
        const double ta = pa[i] > 0.0 ? pa[i] * std::log(pa[i] / m) : 0.0;
        const double tb = pb[i] > 0.0 ? pb[i] * std::log(pb[i] / m) : 0.0;
        // ta + tb is commutative in IEEE arithmetic, so D(a, b) == D(b, a) bit-for-bit.
        d += 0.5 * (ta + tb);
    }
    return std::max(d, 0.0);
}

double density_moment(const SpectralDensity& rho, int k) {
    if (k < 1) {
        throw ConfigError("moment order must be >= 1");
    }
    double m = 0.0;
    for (std::size_t b = 0; b < rho.bin_count(); ++b) {
        m += rho.mass()[b] * std::pow(rho.midpoint(b), k);
    }
    return m;
}

std::complex<double> stieltjes_of_density(const SpectralDensity& rho, std::complex<double> z) {
    if (!(z.imag() > 0.0)) {
        throw ConfigError("Stieltjes transform requires Im z > 0");
    }
    std::complex<double> g{0.0, 0.0};
    for (std::size_t b = 0; b < rho.bin_count(); ++b) {
        g += rho.mass()[b] / (z - rho.midpoint(b));
    }
    return g;
}

}  // namespace specfactor
