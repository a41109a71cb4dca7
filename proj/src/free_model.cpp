#include "specfactor/free_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "specfactor/error.hpp"

namespace specfactor {

namespace {

constexpr double kImagTolerance = 1e-14;

void check_phi(double phi) {
    if (!(phi > 0.0 && phi <= 1.0)) {
        throw ConfigError("phi must lie in (0, 1], got " + std::to_string(phi));
    }
}

cplx eval_cubic(const std::array<cplx, 4>& k, cplx x) {
    return ((k[0] * x + k[1]) * x + k[2]) * x + k[3];
}

cplx eval_cubic_derivative(const std::array<cplx, 4>& k, cplx x) {
    return (3.0 * k[0] * x + 2.0 * k[1]) * x + k[2];
}

}  // namespace

void ModelDensityParams::validate() const {
    check_phi(phi);
    grid.validate();
    if (epsilon > (grid.support_hi - grid.support_lo) / grid.bin_count) {
        throw ConfigError("epsilon must not exceed one bin width");
    }
}

cplx s_transform_component(cplx w, double phi) {
    const cplx denom = 1.0 + phi * w;
    if (std::abs(denom) < std::numeric_limits<double>::epsilon()) {
        throw NumericalError("S-transform pole at w = -1/phi");
    }
    return 1.0 / denom;
}

cplx s_transform_product(cplx w, double phi) {
    const cplx s = s_transform_component(w, phi);
    return s * s;
}

std::array<cplx, 4> green_cubic_coefficients(cplx z, double phi) {
    return {phi * phi * z * z, 2.0 * (1.0 - phi) * phi * z, (1.0 - phi) * (1.0 - phi) - z, cplx{1.0, 0.0}};
}

std::array<cplx, 3> solve_cubic(cplx a, cplx b, cplx c, cplx d) {
    if (std::abs(a) < std::numeric_limits<double>::min()) {
        throw NumericalError("degenerate cubic: leading coefficient underflows");
    }
    const cplx B = b / a;
    const cplx C = c / a;
    const cplx D = d / a;
    const cplx d0 = B * B - 3.0 * C;
    const cplx d1 = 2.0 * B * B * B - 9.0 * B * C + 27.0 * D;
    const cplx disc = std::sqrt(d1 * d1 - 4.0 * d0 * d0 * d0);
    // Pick the sign that avoids cancellation.
    cplx w = std::abs(d1 + disc) >= std::abs(d1 - disc) ? 0.5 * (d1 + disc) : 0.5 * (d1 - disc);
    std::array<cplx, 3> roots{};
    if (std::abs(w) == 0.0) {
        roots.fill(-B / 3.0);
    } else {
        const cplx cc = std::pow(w, 1.0 / 3.0);
        const cplx xi{-0.5, std::sqrt(3.0) / 2.0};
        cplx rot{1.0, 0.0};
        for (auto& r : roots) {
            const cplx ck = rot * cc;
            r = -(B + ck + d0 / ck) / 3.0;
            rot *= xi;
        }
    }
    const std::array<cplx, 4> k{a, b, c, d};
    for (auto& r : roots) {
        for (int it = 0; it < 4; ++it) {
            const cplx f = eval_cubic(k, r);
            const cplx df = eval_cubic_derivative(k, r);
            if (std::abs(df) == 0.0) {
                break;
            }
            const cplx next = r - f / df;
            if (!(std::abs(eval_cubic(k, next)) < std::abs(f))) {
                break;
            }
            r = next;
        }
    }
    return roots;
}

double green_residual(cplx z, cplx g, double phi) {
    return std::abs(eval_cubic(green_cubic_coefficients(z, phi), g));
}

ModelSupport model_support(double phi) {
    check_phi(phi);
    auto x_of = [phi](double m) { return (1.0 + m) * (1.0 + phi * m) * (1.0 + phi * m) / m; };
    const double root = std::sqrt(phi * phi + 8.0 * phi);
    const double m_hi = (-phi + root) / (4.0 * phi);
    const double m_lo = (-phi - root) / (4.0 * phi);
    return {std::max(0.0, x_of(m_lo)), x_of(m_hi)};
}

GreenValue green_function(cplx z, double phi, const std::optional<GreenValue>& hint) {
    check_phi(phi);
    if (!(z.imag() > 0.0)) {
        throw ConfigError("green_function requires Im z > 0");
    }
    const auto k = green_cubic_coefficients(z, phi);
    const auto roots = solve_cubic(k[0], k[1], k[2], k[3]);

    std::vector<cplx> candidates;
    for (const auto& r : roots) {
        if (r.imag() < -kImagTolerance) {
            candidates.push_back(r);
        }
    }
    if (candidates.empty()) {
        const auto support = model_support(phi);
        const double margin = 1e-6 * support.upper;
        if (z.real() > support.lower + margin && z.real() < support.upper - margin) {
            std::ostringstream msg;
            msg << "no Green's function root in the lower half-plane at z = " << z << " (phi = " << phi
                << ") inside the support";
            throw NumericalError(msg.str());
        }
        candidates.assign(roots.begin(), roots.end());
    }

    cplx chosen = candidates.front();
    if (candidates.size() > 1) {
        const cplx target = hint ? hint->g : 1.0 / z;
        chosen = *std::min_element(candidates.begin(), candidates.end(), [&](cplx x, cplx y) {
            return std::abs(x - target) < std::abs(y - target);
        });
    }
    return {z, chosen};
}

double default_epsilon(std::span<const double> edges) {
    double narrowest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        narrowest = std::min(narrowest, edges[i + 1] - edges[i]);
    }
    return std::min(1e-6 * (edges.back() - edges.front()), 0.5 * narrowest);
}

ModelCdf::ModelCdf(double phi, double epsilon, int resolution) : phi_(phi), support_(model_support(phi)) {
    if (resolution < 16) {
        throw ConfigError("model cdf resolution must be at least 16");
    }
    const double a = support_.lower;
    const double w = support_.upper - support_.lower;
    if (epsilon <= 0.0) {
        epsilon = 1e-11 * support_.upper;
    }
    // s^3 (10 - 15 s + 6 s^2) has a triple zero at both ends, so the mapped cells
    // shrink like s^2 where the density can blow up like (x - a)^(-2/3). The
    // integrand in s then stays bounded and a midpoint rule in s is accurate.
    auto map = [](double s) { return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); };
    nodes_.resize(resolution + 1);
    for (int i = 0; i <= resolution; ++i) {
        nodes_[i] = a + w * map(static_cast<double>(i) / resolution);
    }
    nodes_.front() = a;
    nodes_.back() = support_.upper;
    cdf_.assign(nodes_.size(), 0.0);
    std::optional<GreenValue> hint;
    for (int i = 0; i < resolution; ++i) {
        const double mid = a + w * map((i + 0.5) / resolution);
        const GreenValue gv = green_function({mid, epsilon}, phi, hint);
        hint = gv;
        const double rho = std::max(0.0, -gv.g.imag() / std::numbers::pi);
        cdf_[i + 1] = cdf_[i] + rho * (nodes_[i + 1] - nodes_[i]);
    }
    const double total = cdf_.back();
    if (!(total > 0.0)) {
        throw NumericalError("model cdf has no mass");
    }
    for (double& c : cdf_) {
        c /= total;
    }
}

double ModelCdf::operator()(double x) const {
    if (x <= nodes_.front()) return 0.0;
    if (x >= nodes_.back()) return 1.0;
    const auto j = static_cast<std::size_t>(std::upper_bound(nodes_.begin(), nodes_.end(), x) - nodes_.begin()) - 1;
    const double f = (x - nodes_[j]) / (nodes_[j + 1] - nodes_[j]);
    return cdf_[j] + f * (cdf_[j + 1] - cdf_[j]);
}

double ModelCdf::quantile(double u) const {
    if (u <= 0.0) return nodes_.front();
    if (u >= 1.0) return nodes_.back();
    const auto j = static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin()) - 1;
    const double span = cdf_[j + 1] - cdf_[j];
    const double f = span > 0.0 ? (u - cdf_[j]) / span : 0.0;
    return nodes_[j] + f * (nodes_[j + 1] - nodes_[j]);
}

SpectralDensity ModelCdf::on(std::span<const double> edges) const {
    if (edges.size() < 2) {
        throw ConfigError("model density needs at least one bin");
    }
    const std::size_t bins = edges.size() - 1;
    std::vector<double> mass(bins, 0.0);
    double total = 0.0;
    double below = (*this)(edges[0]);
    for (std::size_t b = 0; b < bins; ++b) {
        const double above = (*this)(edges[b + 1]);
        mass[b] = std::max(0.0, above - below);
        total += mass[b];
        below = above;
    }
    if (!(total > 0.0)) {
        throw NumericalError("model density is zero on the whole grid; the grid misses the support");
    }
    for (double& m : mass) {
        m /= total;
    }
    return {std::vector<double>(edges.begin(), edges.end()), std::move(mass)};
}

SpectralDensity model_density(double phi, std::span<const double> edges, double epsilon) {
    check_phi(phi);
    return ModelCdf(phi, epsilon).on(edges);
}

SpectralDensity model_density(const ModelDensityParams& params) {
    params.validate();
    const auto e = params.grid.edges();
    return model_density(params.phi, e, params.epsilon);
}

double model_moment(double phi, int k) {
    check_phi(phi);
    switch (k) {
        case 1:
            return 1.0;
        case 2:
            return 1.0 + 2.0 * phi;
        case 3:
            return 1.0 + 6.0 * phi + 5.0 * phi * phi;
        default:
            throw ConfigError("model_moment supports k in {1, 2, 3}, got " + std::to_string(k));
    }
}

}  // namespace specfactor
