#include "specfactor/residual.hpp"

#include <cmath>
#include <sstream>

#include "specfactor/error.hpp"

namespace specfactor {

DataMatrix::DataMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() < 2 || values_.cols() < 2) {
        throw DataError("data matrix must be at least 2 x 2");
    }
    if (!values_.allFinite()) {
        throw DataError("data matrix contains non-finite entries");
    }
    rms_ = std::sqrt(values_.squaredNorm() / static_cast<double>(values_.size()));
}

DataMatrix DataMatrix::window(Eigen::Index first, Eigen::Index count) const {
    if (first < 0 || count < 2 || first + count > cols()) {
        throw ConfigError("window exceeds the data matrix");
    }
    return DataMatrix(values_.middleCols(first, count));
}

ResidualLadder::ResidualLadder(const DataMatrix& data) : data_(data) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(data.values(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    left_ = svd.matrixU();
    singular_values_ = svd.singularValues();
    right_ = svd.matrixV();
}

void ResidualLadder::check_p(int p) const {
    const auto limit = std::min(data_.rows(), data_.cols());
    if (p < 0 || p >= limit) {
        std::ostringstream msg;
        msg << "number of factors p = " << p << " must satisfy 0 <= p < min(N, T) = " << limit;
        throw ConfigError(msg.str());
    }
}

FactorFit ResidualLadder::factor_fit(int p) const {
    check_p(p);
    FactorFit fit;
    fit.factors = right_.leftCols(p).transpose();
    fit.loadings = data_.values() * fit.factors.transpose();
    return fit;
}

ResidualMatrix ResidualLadder::residual(int p) const {
    check_p(p);
    ResidualMatrix out;
    out.p = p;
    out.scale = data_.rms() > 0.0 ? data_.rms() : 1.0;
    if (p == 0) {
        out.values = data_.values();
        return out;
    }
    out.values = data_.values() -
                 left_.leftCols(p) * singular_values_.head(p).asDiagonal() * right_.leftCols(p).transpose();
    return out;
}

EigenSpectrum ResidualLadder::spectrum(int p) const {
    return symmetric_spectrum(residual_covariance(standardize_rows(residual(p))));
}

FactorFit factor_fit(const DataMatrix& data, int p) {
    return ResidualLadder(data).factor_fit(p);
}

ResidualMatrix residual(const DataMatrix& data, int p) {
    return ResidualLadder(data).residual(p);
}

ResidualMatrix standardize_rows(const ResidualMatrix& u) {
    ResidualMatrix out = u;
    const double t = static_cast<double>(u.values.cols());
    const double floor = 1e-12 * u.scale;
    for (Eigen::Index i = 0; i < u.values.rows(); ++i) {
        auto row = out.values.row(i);
        const double mean = row.mean();
        row.array() -= mean;
        const double sd = std::sqrt(row.squaredNorm() / t);
        if (!(sd > floor)) {
            std::ostringstream msg;
            msg << "residual row " << i << " has zero variance (sd = " << sd << ") at p = " << u.p;
            throw DataError(msg.str());
        }
        row /= sd;
    }
    return out;
}

Eigen::MatrixXd residual_covariance(const ResidualMatrix& u) {
    if (!u.values.allFinite()) {
        throw DataError("residual matrix contains non-finite entries");
    }
    const double t = static_cast<double>(u.values.cols());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(u.values.rows(), u.values.rows());
    cov.selfadjointView<Eigen::Lower>().rankUpdate(u.values, 1.0 / t);
    cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
    return cov;
}

EigenSpectrum symmetric_spectrum(const Eigen::MatrixXd& a) {
    const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symmetric eigensolver did not converge");
    }
    const auto& ev = solver.eigenvalues();
    return EigenSpectrum(std::vector<double>(ev.data(), ev.data() + ev.size()));
}

EigenSpectrum residual_spectrum(const DataMatrix& data, int p) {
    return ResidualLadder(data).spectrum(p);
}

SpectralDensity residual_esd(const DataMatrix& data, int p, const BinningPolicy& policy) {
    return esd(residual_spectrum(data, p), policy);
}

}  // namespace specfactor
