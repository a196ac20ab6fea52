#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>

#include "nvne/deformation.hpp"

namespace nvne {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Max elementwise |M - M^dagger| accepted as Hermitian.
inline constexpr double kHermitianTol = 1e-12;
/// Eigenvalues in [-kClipTol, 0) are treated as round-off and clipped to zero.
inline constexpr double kClipTol = 1e-12;

/// Dense Hermitian operator (Hamiltonians, effective Hamiltonians, generators).
/// Always stored exactly Hermitian: the input is symmetrized after the check.
class HermitianOperator {
public:
    HermitianOperator() = default;
    /// Throws NotHermitian if max |M - M^dagger| > tol.
    explicit HermitianOperator(const Matrix& m, double tol = kHermitianTol);

    /// (M + M^dagger)/2 without a tolerance check; for operators assembled
    /// from Hermitian pieces where only round-off separates M from M^dagger.
    static HermitianOperator hermitian_part(const Matrix& m);

    Eigen::Index dim() const noexcept { return m_.rows(); }
    const Matrix& matrix() const noexcept { return m_; }

private:
    Matrix m_;
};

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns).
struct SpectralDecomposition {
    RealVector eigenvalues;
    Matrix eigenvectors;

    Matrix reconstruct() const;
};

class DensityMatrix;

/// Symmetrizes, clips eigenvalues in [-tol, 0) and renormalizes the trace.
/// Throws NotHermitian, NotPositive or ZeroTrace.
DensityMatrix validate_density(const Matrix& m, double tol = kClipTol);

/// Validated state: Hermitian, unit trace, positive semidefinite.
/// Carries its own spectral decomposition, computed during validation.
class DensityMatrix {
public:
    Eigen::Index dim() const noexcept { return m_.rows(); }
    const Matrix& matrix() const noexcept { return m_; }
    const SpectralDecomposition& spectrum() const noexcept { return spectrum_; }
    const RealVector& eigenvalues() const noexcept { return spectrum_.eigenvalues; }
    HermitianOperator as_operator() const { return HermitianOperator::hermitian_part(m_); }

    /// Maximally mixed state 1/dim.
    static DensityMatrix maximally_mixed(Eigen::Index dim);
    /// |psi><psi| for a (not necessarily normalized) vector.
    static DensityMatrix pure(const Eigen::VectorXcd& psi);
    /// Diagonal state with the given populations (must already be a distribution).
    static DensityMatrix diagonal(const RealVector& populations);

private:
    friend DensityMatrix validate_density(const Matrix& m, double tol);
    DensityMatrix(Matrix m, SpectralDecomposition s) : m_(std::move(m)), spectrum_(std::move(s)) {}

    Matrix m_;
    SpectralDecomposition spectrum_;
};

enum class Subsystem { I, II };

/// Eigen-parametrization of a spin-1/2 state:
///   rho = 1/2 + (2 lam - 1)/2 [cos(phi) sz - sin(phi)(cos(psi) sx + sin(psi) sy)]
/// with eigenvalues lam and 1 - lam.
struct BlochParams {
    double lam = 1.0;
    double phi = 0.0;
    double psi = 0.0;
};

/// Throws NumericalFailure if the eigensolver does not converge.
SpectralDecomposition spectral_decompose(const HermitianOperator& a);
SpectralDecomposition spectral_decompose(const Matrix& hermitian);

/// For non-integer powers: DomainError on eigenvalues below -kClipTol, and
/// every |lambda| <= kClipTol becomes an exact zero. Round-off eigenvalues of
/// order 1e-16 would otherwise give lambda^q ~ 1e-8 for q = 1/2.
RealVector clamp_to_domain(const RealVector& eigenvalues, const DeformationFunction& f);

/// V diag(f(lambda)) V^dagger on the clamped spectrum.
HermitianOperator matrix_function(const SpectralDecomposition& s, const DeformationFunction& f);

/// Kronecker product, first factor on the slow (leftmost) index.
Matrix tensor_product(const Matrix& a, const Matrix& b);
HermitianOperator tensor_product(const HermitianOperator& a, const HermitianOperator& b);
DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b);

/// Reduced state of one factor of a dim_I x dim_II bipartite state.
DensityMatrix partial_trace(const DensityMatrix& rho, std::pair<Eigen::Index, Eigen::Index> dims,
                            Subsystem keep);
/// Unvalidated partial trace of an arbitrary square matrix.
Matrix partial_trace(const Matrix& m, std::pair<Eigen::Index, Eigen::Index> dims, Subsystem keep);

DensityMatrix bloch_state(const BlochParams& p);
/// Inverse of bloch_state for 2x2 states, normalized to lam >= 1/2,
/// phi in [0, pi], psi in (-pi, pi]. phi and psi are 0 where undefined.
BlochParams bloch_params(const DensityMatrix& rho);
/// (Tr rho sx, Tr rho sy, Tr rho sz).
Eigen::Vector3d bloch_vector(const DensityMatrix& rho);

Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix identity(Eigen::Index dim);

Matrix commutator(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& m);
/// (1/2) sum |eigenvalues of (a - b)|.
double trace_distance(const Matrix& a, const Matrix& b);
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace nvne
