#pragma once

#include <Eigen/Dense>

#include "specfactor/spectral.hpp"

namespace specfactor {

/// N x T observations: rows are variables, columns are time samples.
class DataMatrix {
public:
    explicit DataMatrix(Eigen::MatrixXd values);

    const Eigen::MatrixXd& values() const noexcept { return values_; }
    Eigen::Index rows() const noexcept { return values_.rows(); }
    Eigen::Index cols() const noexcept { return values_.cols(); }
    /// Root-mean-square entry; used to make degeneracy thresholds scale-free.
    double rms() const noexcept { return rms_; }

    /// Columns [first, first + count).
    DataMatrix window(Eigen::Index first, Eigen::Index count) const;

private:
    Eigen::MatrixXd values_;
    double rms_ = 0.0;
};

struct ResidualMatrix {
    Eigen::MatrixXd values;
    int p = 0;
    /// Magnitude of the data the residual came from (1 when unknown).
    double scale = 1.0;
};

struct FactorFit {
    Eigen::MatrixXd loadings;  // N x p
    Eigen::MatrixXd factors;   // p x T, orthonormal rows
};

/// Thin SVD of R computed once; yields truncated reconstructions for any p.
class ResidualLadder {
public:
    explicit ResidualLadder(const DataMatrix& data);

    int max_factors() const noexcept { return static_cast<int>(singular_values_.size()) - 1; }
    const Eigen::VectorXd& singular_values() const noexcept { return singular_values_; }

    FactorFit factor_fit(int p) const;
    ResidualMatrix residual(int p) const;
    /// Eigenvalues of the covariance of the row-standardized p-level residual.
    EigenSpectrum spectrum(int p) const;

private:
    void check_p(int p) const;

    DataMatrix data_;
    Eigen::MatrixXd left_;
    Eigen::VectorXd singular_values_;
    Eigen::MatrixXd right_;
};

FactorFit factor_fit(const DataMatrix& data, int p);
ResidualMatrix residual(const DataMatrix& data, int p);

/// Rows to zero mean and unit population variance (divisor T).
/// Throws DataError naming the row when a row's standard deviation is at most 1e-12 * scale.
ResidualMatrix standardize_rows(const ResidualMatrix& u);

/// (1/T) U U^T, explicitly symmetrized.
Eigen::MatrixXd residual_covariance(const ResidualMatrix& u);

/// Eigenvalues of a symmetric matrix via a self-adjoint solver on (A + A^T)/2.
EigenSpectrum symmetric_spectrum(const Eigen::MatrixXd& a);

/// Full pipeline for one p: residual, standardize, covariance, eigenvalues.
EigenSpectrum residual_spectrum(const DataMatrix& data, int p);
SpectralDensity residual_esd(const DataMatrix& data, int p, const BinningPolicy& policy);

}  // namespace specfactor
