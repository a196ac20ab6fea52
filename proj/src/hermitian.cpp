#include "nvne/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "nvne/errors.hpp"

namespace nvne {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw DimensionMismatch(std::string(what) + ": expected a non-empty square matrix, got " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

double hermiticity_defect(const Matrix& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

}  // namespace

HermitianOperator::HermitianOperator(const Matrix& m, double tol) {
    require_square(m, "HermitianOperator");
    const double defect = hermiticity_defect(m);
    if (defect > tol) {
        throw NotHermitian("operator deviates from its adjoint by " + fmt(defect) + " > " + fmt(tol));
    }
    m_ = 0.5 * (m + m.adjoint());
}

HermitianOperator HermitianOperator::hermitian_part(const Matrix& m) {
    require_square(m, "HermitianOperator");
    HermitianOperator h;
    h.m_ = 0.5 * (m + m.adjoint());
    return h;
}

Matrix SpectralDecomposition::reconstruct() const {
    return eigenvectors * eigenvalues.cast<cplx>().asDiagonal() * eigenvectors.adjoint();
}

SpectralDecomposition spectral_decompose(const Matrix& hermitian) {
    require_square(hermitian, "spectral_decompose");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian);
    if (solver.info() != Eigen::Success) {
        throw NumericalFailure("Hermitian eigensolver did not converge");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

SpectralDecomposition spectral_decompose(const HermitianOperator& a) {
    return spectral_decompose(a.matrix());
}

DensityMatrix validate_density(const Matrix& m, double tol) {
    require_square(m, "validate_density");
    if (!(tol > 0.0)) throw DomainError("validate_density: tolerance must be positive");

    const double defect = hermiticity_defect(m);
    if (defect > tol) {
        throw NotHermitian("state deviates from its adjoint by " + fmt(defect) + " > " + fmt(tol));
    }
    const Matrix sym = 0.5 * (m + m.adjoint());
    SpectralDecomposition s = spectral_decompose(sym);

    const double lowest = s.eigenvalues.minCoeff();
    if (lowest < -tol) {
        throw NotPositive("state has eigenvalue " + fmt(lowest) + " below -" + fmt(tol));
    }
    const double trace = sym.trace().real();
    if (std::abs(trace) < tol) {
        throw ZeroTrace("state trace " + fmt(trace) + " is below " + fmt(tol));
    }

    if (lowest < 0.0) {
        s.eigenvalues = s.eigenvalues.cwiseMax(0.0);
        const double clipped_trace = s.eigenvalues.sum();
        s.eigenvalues /= clipped_trace;
        Matrix rebuilt = s.reconstruct();
        rebuilt = 0.5 * (rebuilt + rebuilt.adjoint());
        return DensityMatrix(std::move(rebuilt), std::move(s));
    }
    s.eigenvalues /= trace;
    return DensityMatrix(sym / trace, std::move(s));
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
    return validate_density(identity(dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
    const double norm = psi.norm();
    if (norm == 0.0) throw ZeroTrace("pure state from a zero vector");
    const Eigen::VectorXcd v = psi / norm;
    return validate_density(v * v.adjoint());
}

DensityMatrix DensityMatrix::diagonal(const RealVector& populations) {
    return validate_density(populations.cast<cplx>().asDiagonal().toDenseMatrix());
}

RealVector clamp_to_domain(const RealVector& eigenvalues, const DeformationFunction& f) {
    RealVector out = eigenvalues;
    if (!f.needs_nonnegative_domain()) return out;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        if (out(i) < -kClipTol) {
            throw DomainError("eigenvalue " + fmt(out(i)) + " is negative and the power is not an integer");
        }
        if (out(i) <= kClipTol) out(i) = 0.0;
    }
    return out;
}

HermitianOperator matrix_function(const SpectralDecomposition& s, const DeformationFunction& f) {
    const RealVector x = clamp_to_domain(s.eigenvalues, f);
    RealVector values(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) values(i) = f(x(i));
    const Matrix out = s.eigenvectors * values.cast<cplx>().asDiagonal() * s.eigenvectors.adjoint();
    return HermitianOperator::hermitian_part(out);
}

Matrix tensor_product(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

HermitianOperator tensor_product(const HermitianOperator& a, const HermitianOperator& b) {
    return HermitianOperator::hermitian_part(tensor_product(a.matrix(), b.matrix()));
}

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
    return validate_density(tensor_product(a.matrix(), b.matrix()));
}

Matrix partial_trace(const Matrix& m, std::pair<Eigen::Index, Eigen::Index> dims, Subsystem keep) {
    const auto [d1, d2] = dims;
    if (d1 <= 0 || d2 <= 0 || m.rows() != d1 * d2 || m.cols() != d1 * d2) {
        throw DimensionMismatch("partial_trace: matrix of size " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + " does not factor as " +
                                std::to_string(d1) + "*" + std::to_string(d2));
    }
    if (keep == Subsystem::I) {
        Matrix out = Matrix::Zero(d1, d1);
        for (Eigen::Index i = 0; i < d1; ++i)
            for (Eigen::Index j = 0; j < d1; ++j)
                for (Eigen::Index k = 0; k < d2; ++k) out(i, j) += m(i * d2 + k, j * d2 + k);
        return out;
    }
    Matrix out = Matrix::Zero(d2, d2);
    for (Eigen::Index i = 0; i < d2; ++i)
        for (Eigen::Index j = 0; j < d2; ++j)
            for (Eigen::Index k = 0; k < d1; ++k) out(i, j) += m(k * d2 + i, k * d2 + j);
    return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::pair<Eigen::Index, Eigen::Index> dims,
                            Subsystem keep) {
    return validate_density(partial_trace(rho.matrix(), dims, keep));
}

DensityMatrix bloch_state(const BlochParams& p) {
    if (!(p.lam >= 0.0 && p.lam <= 1.0)) {
        throw DomainError("bloch_state: lam must lie in [0, 1], got " + fmt(p.lam));
    }
    const double r = 0.5 * (2.0 * p.lam - 1.0);
    const Matrix m = 0.5 * identity(2) +
                     r * (std::cos(p.phi) * pauli_z() -
                          std::sin(p.phi) * (std::cos(p.psi) * pauli_x() + std::sin(p.psi) * pauli_y()));
    return validate_density(m);
}

Eigen::Vector3d bloch_vector(const DensityMatrix& rho) {
    if (rho.dim() != 2) throw DimensionMismatch("bloch_vector: expected a 2x2 state");
    const Matrix& m = rho.matrix();
    return {2.0 * m(0, 1).real(), -2.0 * m(0, 1).imag(), (m(0, 0) - m(1, 1)).real()};
}

BlochParams bloch_params(const DensityMatrix& rho) {
    const Eigen::Vector3d r = bloch_vector(rho);
    const double len = r.norm();
    BlochParams p{0.5 * (1.0 + len), 0.0, 0.0};
    if (len < 1e-14) return p;
    p.phi = std::acos(std::clamp(r.z() / len, -1.0, 1.0));
    if (std::hypot(r.x(), r.y()) > 1e-14 * len) p.psi = std::atan2(-r.y(), -r.x());
    return p;
}

Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

Matrix pauli_y() {
    Matrix m(2, 2);
    m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
    return m;
}

Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

Matrix identity(Eigen::Index dim) { return Matrix::Identity(dim, dim); }

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double trace_distance(const Matrix& a, const Matrix& b) {
    const Matrix d = a - b;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalFailure("trace_distance: eigensolver failed");
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    return trace_distance(a.matrix(), b.matrix());
}

}  // namespace nvne
