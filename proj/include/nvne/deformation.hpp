#pragma once

#include <optional>
#include <vector>

namespace nvne {

/// The nonlinearity f in i d(rho)/dt = [H, f(rho)].
///
/// Either a power law f(x) = x^q (q > 0) or a finite series
/// f(x) = sum_{k>=1} f_k x^k. Construction enforces f(0) = 0 and f(1) = 1,
/// which is what keeps pure-state dynamics linear.
class DeformationFunction {
public:
    static DeformationFunction power_law(double q);
    /// coefficients[k-1] multiplies x^k.
    static DeformationFunction series(std::vector<double> coefficients);
    static DeformationFunction identity() { return power_law(1.0); }

    double operator()(double x) const;
    /// f'(x); +infinity where the derivative diverges (x = 0, q < 1).
    double derivative(double x) const;

    bool is_power_law() const noexcept { return exponent_.has_value(); }
    /// Exponent q for power laws, empty for series.
    std::optional<double> exponent() const noexcept { return exponent_; }
    const std::vector<double>& coefficients() const noexcept { return coefficients_; }

    /// True when f is only defined for x >= 0 (non-integer power).
    bool needs_nonnegative_domain() const noexcept;

private:
    DeformationFunction() = default;

    std::optional<double> exponent_;
    std::vector<double> coefficients_;
};

}  // namespace nvne
