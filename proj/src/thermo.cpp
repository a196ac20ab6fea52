#include "nvne/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nvne/errors.hpp"
#include "nvne/lie_poisson.hpp"

namespace nvne {

bool ThermoParams::is_gibbs() const { return std::abs(q - 1.0) < kQOneThreshold; }

void ThermoParams::validate() const {
    if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("thermo: q must be positive");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("thermo: beta must be positive");
    if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("thermo: mu must be positive");
}

namespace {

void require_positive_q(double q) {
    if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("thermo: q must be positive");
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double power_sum(const RealVector& ev, double q) {
    double s = 0.0;
    for (double l : clamp_to_domain(ev, DeformationFunction::power_law(q))) s += std::pow(std::max(l, 0.0), q);
    return s;
}

// Entropy of a (possibly unnormalized) spectrum: (C_1 - C_q) / (q - 1).
double entropy_of(const RealVector& ev, double c1, double q) {
    if (std::abs(q - 1.0) < kQOneThreshold) {
        double s = 0.0;
        for (double l : ev) s -= xlogx(std::max(l, 0.0));
        return s;
    }
    return (c1 - power_sum(ev, q)) / (q - 1.0);
}

}  // namespace

double tsallis_entropy(const DensityMatrix& rho, double q) {
    require_positive_q(q);
    return entropy_of(rho.eigenvalues(), 1.0, q);
}

double internal_energy(const DensityMatrix& rho, const HermitianOperator& h, double q) {
    require_positive_q(q);
    return q_average(rho, h, q);
}

double free_energy(const DensityMatrix& rho, const HermitianOperator& h, const ThermoParams& p) {
    p.validate();
    return internal_energy(rho, h, p.q) - p.temperature() * tsallis_entropy(rho, p.q);
}

double energy_casimir_function(const DensityMatrix& rho, const HermitianOperator& h,
                               const ThermoParams& p) {
    p.validate();
    const double c1 = rho.matrix().trace().real();
    double phi = 0.0;
    if (p.is_gibbs()) {
        for (double l : rho.eigenvalues()) phi += xlogx(std::max(l, 0.0));
        phi *= p.temperature();
    } else {
        const double cq = power_sum(rho.eigenvalues(), p.q);
        phi = -p.temperature() * (c1 - cq) / (p.q - 1.0);
    }
    return q_average(rho, h, p.q) + phi;
}

double spin_free_energy(const ThermoParams& p, double lam) {
    p.validate();
    if (!(lam >= 0.0 && lam <= 1.0)) throw DomainError("spin_free_energy: lambda outside [0, 1]");
    const double T = p.temperature();
    if (p.is_gibbs()) return -p.mu * (2.0 * lam - 1.0) + T * (xlogx(lam) + xlogx(1.0 - lam));
    const double a = std::pow(lam, p.q);
    const double b = std::pow(1.0 - lam, p.q);
    return -p.mu * (a - b) - T * (1.0 - a - b) / (p.q - 1.0);
}

double spin_free_energy_slope(const ThermoParams& p, double lam) {
    p.validate();
    if (!(lam > 0.0 && lam < 1.0)) throw DomainError("spin_free_energy_slope: lambda outside (0, 1)");
    const double T = p.temperature();
    if (p.is_gibbs()) return -2.0 * p.mu + T * (std::log(lam) - std::log1p(-lam));
    const double a = std::pow(lam, p.q - 1.0);
    const double b = std::pow(1.0 - lam, p.q - 1.0);
    return -p.mu * p.q * (a + b) + T * p.q * (a - b) / (p.q - 1.0);
}

double stability_second_derivative(const ThermoParams& p, double lam) {
    if (!(lam > 0.0 && lam < 1.0)) {
        throw DomainError("stability_second_derivative: lambda outside (0, 1)");
    }
    const double h = std::min({1e-5, 0.5 * lam, 0.5 * (1.0 - lam)});
    return (spin_free_energy(p, lam + h) - 2.0 * spin_free_energy(p, lam) + spin_free_energy(p, lam - h)) /
           (h * h);
}

EquilibriumResult spin_equilibrium(const ThermoParams& p) {
    p.validate();
    const double bmu = p.beta * p.mu;
    double lam = 0.5;
    if (p.is_gibbs()) {
        lam = 1.0 / (1.0 + std::exp(-2.0 * bmu));
    } else {
        const double x = (p.q - 1.0) * bmu;
        if (std::abs(x) >= 1.0) {
            throw OutOfDomain("spin_equilibrium: |q - 1| beta mu = " + std::to_string(std::abs(x)) +
                              " is outside (0, 1)");
        }
        // g(lam) = (q-1) ln(lam/(1-lam)) - ln((1+x)/(1-x)); g(1/2) and g(1-) differ in sign.
        const double rhs = std::log1p(x) - std::log1p(-x);
        const auto g = [&](double l) { return (p.q - 1.0) * (std::log(l) - std::log1p(-l)) - rhs; };
        double lo = 0.5;
        double hi = 1.0;
        const bool rising = p.q > 1.0;
        for (int it = 0; it < 2000; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            const double v = g(mid);
            if (v == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((v < 0.0) == rising) lo = mid; else hi = mid;
        }
        lam = 0.5 * (lo + hi);
        if (lam >= 1.0) lam = lo;
    }
    const double slope = spin_free_energy_slope(p, lam);
    if (!(std::abs(slope) < 1e-8)) {
        throw NumericalFailure("spin_equilibrium: dF/dlambda = " + std::to_string(slope) +
                               " at the solved lambda, not stationary");
    }
    RealVector pops(2);
    pops << lam, 1.0 - lam;
    return EquilibriumResult{lam, spin_free_energy(p, lam), stability_second_derivative(p, lam),
                             DensityMatrix::diagonal(pops)};
}

namespace {

// F over populations in the H eigenbasis and its partial derivatives.
struct PopulationFreeEnergy {
    const RealVector& energies;
    double q;
    double T;
    bool gibbs;

    double term(double p, double e) const {
        if (gibbs) return p * e + T * xlogx(p);
        return std::pow(p, q) * e + T * std::pow(p, q) / (q - 1.0);
    }
    double slope(double p, double e) const {
        if (gibbs) return e + T * (std::log(p) + 1.0);
        return q * std::pow(p, q - 1.0) * (e + T / (q - 1.0));
    }
};

// Minimizes phi(t) = term(t, ei) + term(s - t, ej) on [0, s].
double pair_minimum(const PopulationFreeEnergy& F, double s, double ei, double ej) {
    const auto phi = [&](double t) { return F.term(t, ei) + F.term(s - t, ej); };
    const auto dphi = [&](double t) { return F.slope(t, ei) - F.slope(s - t, ej); };
    constexpr double inv_golden = 0.6180339887498949;
    double a = 0.0, b = s;
    double c = b - inv_golden * (b - a);
    double d = a + inv_golden * (b - a);
    double fc = phi(c), fd = phi(d);
    while (b - a > 1e-7 * s) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_golden * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_golden * (b - a);
            fd = phi(d);
        }
    }
    // Polish with bisection on phi' inside the golden bracket.
    double lo = a, hi = b;
    if (lo > 0.0 && hi < s) {
        const double dlo = dphi(lo), dhi = dphi(hi);
        if (std::isfinite(dlo) && std::isfinite(dhi) && dlo < 0.0 && dhi > 0.0) {
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                if (dphi(mid) < 0.0) lo = mid; else hi = mid;
            }
        }
    }
    const double t = 0.5 * (lo + hi);
    // Endpoints are admissible minima (a population may vanish).
    double best = t, fbest = phi(t);
    for (double e : {0.0, s}) {
        if (phi(e) < fbest) {
            best = e;
            fbest = phi(e);
        }
    }
    return best;
}

}  // namespace

DensityMatrix numeric_equilibrium(const HermitianOperator& h, const ThermoParams& p) {
    require_positive_q(p.q);
    if (!(p.beta > 0.0)) throw DomainError("numeric_equilibrium: beta must be positive");
    const SpectralDecomposition hs = spectral_decompose(h);
    const Eigen::Index n = hs.eigenvalues.size();
    const PopulationFreeEnergy F{hs.eigenvalues, p.q, p.temperature(), p.is_gibbs()};

    RealVector pops = RealVector::Constant(n, 1.0 / static_cast<double>(n));
    for (int sweep = 0; sweep < 1000; ++sweep) {
        double change = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double s = pops(i) + pops(j);
                if (s <= 0.0) continue;
                const double t = pair_minimum(F, s, hs.eigenvalues(i), hs.eigenvalues(j));
                change = std::max(change, std::abs(t - pops(i)));
                pops(i) = t;
                pops(j) = s - t;
            }
        }
        if (change < 1e-14) break;
    }
    return validate_density(hs.eigenvectors * pops.cast<cplx>().asDiagonal() * hs.eigenvectors.adjoint());
}

}  // namespace nvne
