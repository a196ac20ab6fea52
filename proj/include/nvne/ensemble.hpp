#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "nvne/deformation.hpp"
#include "nvne/dynamics.hpp"
#include "nvne/hermitian.hpp"

namespace nvne {

/// Nodes and weights on [a, b].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped to [a, b]; exact for polynomials of
/// degree <= 2n - 1.
QuadratureRule gauss_legendre(int n, double a, double b);

/// Density over spin-1/2 initial conditions in Bloch coordinates, with respect
/// to the measure dlam sin(phi) dphi dpsi.
using WeightFunction = std::function<double(double lam, double phi, double psi)>;

enum class WeightPreset {
    Paper,      ///< w = sin(psi/2) / 8 on lam in [0, 1]
    HalfRange,  ///< w = sin(psi/2) / 4 on lam in [1/2, 1]
};

struct EnsembleSpec {
    WeightFunction weight;
    int n_lam = 32;
    int n_phi = 32;
    int n_psi = 32;
    double lam_min = 0.0;
    double lam_max = 1.0;
    DeformationFunction f = DeformationFunction::identity();
    HermitianOperator h;

    /// Quadrature of the weight over the whole parameter box.
    double normalization() const;
    /// Throws DomainError on bad counts or range, DimensionMismatch unless H is
    /// 2x2, NumericalFailure if the weight is not normalized within 1e-8.
    void validate() const;
};

/// H = -mu sz with the preset weight and lambda range.
EnsembleSpec make_ensemble(WeightPreset preset, const DeformationFunction& f, double mu, int n_lam = 32,
                           int n_phi = 32, int n_psi = 32);

struct EnsembleNode {
    BlochParams params;
    double weight = 0.0;  ///< density x sin(phi) x quadrature weights
};

std::vector<EnsembleNode> ensemble_nodes(const EnsembleSpec& spec);

/// True when H is diagonal, so every node precesses about z in closed form.
bool has_closed_form(const EnsembleSpec& spec);

/// Closed-form spin solution: phi fixed, psi(t) = psi0 - omega t with
/// omega = 2 mu (f(lam) - f(1 - lam)) / (2 lam - 1), mu = (H_11 - H_00) / 2.
DensityMatrix node_state(const EnsembleSpec& spec, const BlochParams& p0, double t);

/// Sum over nodes of weight x rho_node(t). Nodes use the closed form when
/// available and the integrator (cfg.dt, cfg.scheme) otherwise.
DensityMatrix ensemble_average(const EnsembleSpec& spec, double t, const IntegratorConfig& cfg);

/// Finite mixture: sum_k w_k rho_k(t), each state evolved by the integrator.
DensityMatrix ensemble_average(const std::vector<std::pair<double, DensityMatrix>>& mixture,
                               const HermitianOperator& h, const DeformationFunction& f, double t,
                               const IntegratorConfig& cfg);

/// 1/2 + c int dlam (2 lam - 1) [cos(omega t) sx - sin(omega t) sy] with
/// c = pi/24 (Paper) or pi/12 (HalfRange), by n_lam-point Gauss-Legendre.
/// Requires n_lam >= 16.
DensityMatrix dephasing_analytic(double t, const DeformationFunction& f, double mu, int n_lam,
                                 WeightPreset preset = WeightPreset::Paper);

struct NodeCheck {
    double max_closed_form_deviation = 0.0;  ///< integrator vs closed form, max-norm, at t_final
    double max_eigenvalue_drift = 0.0;       ///< over every recorded integrator step
    std::size_t nodes_checked = 0;
};

/// Integrates every `stride`-th node with `cfg` and compares with node_state
/// at cfg.t_final. Requires a closed form.
NodeCheck cross_check_nodes(const EnsembleSpec& spec, const IntegratorConfig& cfg, std::size_t stride);

}  // namespace nvne
