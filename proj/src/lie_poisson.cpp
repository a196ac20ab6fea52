#include "nvne/lie_poisson.hpp"

#include <cmath>
#include <string>

#include "nvne/errors.hpp"

namespace nvne {

namespace {

Matrix to_eigenbasis(const SpectralDecomposition& s, const Matrix& x) {
    return s.eigenvectors.adjoint() * x * s.eigenvectors;
}

Matrix from_eigenbasis(const SpectralDecomposition& s, const Matrix& x) {
    return s.eigenvectors * x * s.eigenvectors.adjoint();
}

HermitianOperator effective_from_normalized(SpectralDecomposition s, const HermitianOperator& h,
                                            const DeformationFunction& f, DivergentSlope policy) {
    if (h.dim() != s.eigenvalues.size()) {
        throw DimensionMismatch("effective_hamiltonian: state and Hamiltonian dimensions differ");
    }
    s.eigenvalues = clamp_to_domain(s.eigenvalues, f);
    const Matrix ht = to_eigenbasis(s, h.matrix());
    const Eigen::MatrixXd loewner = divided_differences(s.eigenvalues, f, policy);
    const Matrix kernel = loewner.cast<cplx>().cwiseProduct(ht);

    double f_term = 0.0;
    double slope_term = 0.0;
    for (Eigen::Index i = 0; i < ht.rows(); ++i) {
        const double lam = s.eigenvalues(i);
        const double hii = ht(i, i).real();
        f_term += f(lam) * hii;
        // lam f'(lam) -> 0 as lam -> 0 for every admissible f.
        if (lam != 0.0) slope_term += lam * f.derivative(lam) * hii;
    }
    Matrix out = from_eigenbasis(s, kernel);
    out.diagonal().array() += cplx(f_term - slope_term, 0.0);
    return HermitianOperator::hermitian_part(out);
}

}  // namespace

Eigen::MatrixXd divided_differences(const RealVector& ev, const DeformationFunction& f,
                                    DivergentSlope policy) {
    const Eigen::Index n = ev.size();
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double gap = ev(i) - ev(j);
            double value;
            if (std::abs(gap) > kDegenerateGap) {
                value = (f(ev(i)) - f(ev(j))) / gap;
            } else {
                value = f.derivative(0.5 * (ev(i) + ev(j)));
                if (!std::isfinite(value)) {
                    if (policy == DivergentSlope::Throw) {
                        throw DomainError("f' diverges at eigenvalue " + std::to_string(ev(i)) +
                                          "; the effective Hamiltonian is undefined on the kernel");
                    }
                    value = 0.0;
                }
            }
            out(i, j) = value;
            out(j, i) = value;
        }
    }
    return out;
}

double hamiltonian_function(const HermitianOperator& state, const HermitianOperator& h,
                            const DeformationFunction& f) {
    if (state.dim() != h.dim()) {
        throw DimensionMismatch("hamiltonian_function: state and Hamiltonian dimensions differ");
    }
    const double trace = state.matrix().trace().real();
    if (std::abs(trace) < kClipTol) throw ZeroTrace("hamiltonian_function: state has zero trace");
    const SpectralDecomposition s = spectral_decompose(Matrix(state.matrix() / trace));
    const HermitianOperator fs = matrix_function(s, f);
    return trace * (fs.matrix() * h.matrix()).trace().real();
}

double hamiltonian_function(const DensityMatrix& rho, const HermitianOperator& h,
                            const DeformationFunction& f) {
    if (rho.dim() != h.dim()) {
        throw DimensionMismatch("hamiltonian_function: state and Hamiltonian dimensions differ");
    }
    const HermitianOperator fs = matrix_function(rho.spectrum(), f);
    return (fs.matrix() * h.matrix()).trace().real();
}

HermitianOperator effective_hamiltonian(const DensityMatrix& rho, const HermitianOperator& h,
                                        const DeformationFunction& f, DivergentSlope policy) {
    return effective_from_normalized(rho.spectrum(), h, f, policy);
}

HermitianOperator effective_hamiltonian(const HermitianOperator& state, const HermitianOperator& h,
                                        const DeformationFunction& f, DivergentSlope policy) {
    const double trace = state.matrix().trace().real();
    if (std::abs(trace) < kClipTol) throw ZeroTrace("effective_hamiltonian: state has zero trace");
    return effective_from_normalized(spectral_decompose(Matrix(state.matrix() / trace)), h, f, policy);
}

HermitianOperator generator(const DensityMatrix& rho, const HermitianOperator& h,
                            const DeformationFunction& f) {
    if (rho.dim() != h.dim()) {
        throw DimensionMismatch("generator: state and Hamiltonian dimensions differ");
    }
    SpectralDecomposition s = rho.spectrum();
    s.eigenvalues = clamp_to_domain(s.eigenvalues, f);
    const Matrix ht = to_eigenbasis(s, h.matrix());
    const Eigen::MatrixXd loewner = divided_differences(s.eigenvalues, f, DivergentSlope::Drop);
    return HermitianOperator::hermitian_part(from_eigenbasis(s, loewner.cast<cplx>().cwiseProduct(ht)));
}

HermitianOperator finite_difference_gradient(const ObservableFunctional& a, const Matrix& at,
                                             double step) {
    const Eigen::Index n = at.rows();
    Matrix grad = Matrix::Zero(n, n);
    const cplx i_unit(0.0, 1.0);
    auto central = [&](const Matrix& direction) {
        return (a.value(at + step * direction) - a.value(at - step * direction)) / (2.0 * step);
    };
    for (Eigen::Index r = 0; r < n; ++r) {
        Matrix e = Matrix::Zero(n, n);
        e(r, r) = 1.0;
        grad(r, r) = central(e);
        for (Eigen::Index c = r + 1; c < n; ++c) {
            Matrix re = Matrix::Zero(n, n);
            re(r, c) = 1.0;
            re(c, r) = 1.0;
            Matrix im = Matrix::Zero(n, n);
            im(r, c) = i_unit;
            im(c, r) = -i_unit;
            // Tr(G re) = 2 Re G_rc and Tr(G im) = 2 Im G_rc for Hermitian G.
            const cplx g = 0.5 * cplx(central(re), central(im));
            grad(r, c) = g;
            grad(c, r) = std::conj(g);
        }
    }
    if (!grad.allFinite()) throw GradientFailure("finite-difference gradient is not finite");
    return HermitianOperator::hermitian_part(grad);
}

HermitianOperator functional_gradient(const ObservableFunctional& a, const Matrix& at) {
    if (!a.gradient) return finite_difference_gradient(a, at);
    const Matrix g = a.gradient(at);
    if (!g.allFinite()) throw GradientFailure("analytic gradient is not finite");
    if (g.rows() != at.rows() || g.cols() != at.cols()) {
        throw GradientFailure("analytic gradient has the wrong shape");
    }
    const double defect = max_abs(g - g.adjoint());
    if (defect > 1e-6) {
        throw GradientFailure("gradient is not Hermitian (defect " + std::to_string(defect) + ")");
    }
    return HermitianOperator::hermitian_part(g);
}

double poisson_bracket(const ObservableFunctional& a, const ObservableFunctional& b,
                       const DensityMatrix& rho) {
    const Matrix ga = functional_gradient(a, rho.matrix()).matrix();
    const Matrix gb = functional_gradient(b, rho.matrix()).matrix();
    const cplx value = cplx(0.0, -1.0) * (rho.matrix() * commutator(ga, gb)).trace();
    return value.real();
}

double casimir(const DensityMatrix& rho, int n) {
    if (n < 1) throw DomainError("casimir: order must be >= 1");
    return rho.eigenvalues().array().pow(static_cast<double>(n)).sum();
}

double q_average(const DensityMatrix& rho, const HermitianOperator& h, double q) {
    return hamiltonian_function(rho, h, DeformationFunction::power_law(q));
}

ObservableFunctional casimir_functional(int n) {
    if (n < 1) throw DomainError("casimir_functional: order must be >= 1");
    ObservableFunctional a;
    a.value = [n](const Matrix& x) {
        Matrix p = x;
        for (int k = 1; k < n; ++k) p = p * x;
        return p.trace().real();
    };
    a.gradient = [n](const Matrix& x) {
        Matrix p = Matrix::Identity(x.rows(), x.cols());
        for (int k = 1; k < n; ++k) p = p * x;
        return Matrix(static_cast<double>(n) * p);
    };
    return a;
}

ObservableFunctional q_average_functional(const HermitianOperator& h, double q) {
    const DeformationFunction f = DeformationFunction::power_law(q);
    ObservableFunctional a;
    a.value = [h, f](const Matrix& x) {
        const HermitianOperator fx = matrix_function(spectral_decompose(x), f);
        return (fx.matrix() * h.matrix()).trace().real();
    };
    a.gradient = [h, f](const Matrix& x) {
        SpectralDecomposition s = spectral_decompose(x);
        s.eigenvalues = clamp_to_domain(s.eigenvalues, f);
        const Matrix ht = to_eigenbasis(s, h.matrix());
        const Eigen::MatrixXd loewner = divided_differences(s.eigenvalues, f, DivergentSlope::Throw);
        return from_eigenbasis(s, loewner.cast<cplx>().cwiseProduct(ht));
    };
    return a;
}

ObservableFunctional hamiltonian_functional(const HermitianOperator& h, const DeformationFunction& f) {
    ObservableFunctional a;
    a.value = [h, f](const Matrix& x) {
        return hamiltonian_function(HermitianOperator::hermitian_part(x), h, f);
    };
    a.gradient = [h, f](const Matrix& x) {
        return effective_hamiltonian(HermitianOperator::hermitian_part(x), h, f).matrix();
    };
    return a;
}

ObservableFunctional linear_functional(const HermitianOperator& op) {
    ObservableFunctional a;
    a.value = [op](const Matrix& x) { return (op.matrix() * x).trace().real(); };
    a.gradient = [op](const Matrix&) { return op.matrix(); };
    return a;
}

ObservableFunctional product(ObservableFunctional a, ObservableFunctional b) {
    ObservableFunctional out;
    out.value = [a, b](const Matrix& x) { return a.value(x) * b.value(x); };
    out.gradient = [a, b](const Matrix& x) {
        return Matrix(a.value(x) * functional_gradient(b, x).matrix() +
                      b.value(x) * functional_gradient(a, x).matrix());
    };
    return out;
}

}  // namespace nvne
