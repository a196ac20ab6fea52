#include "nvne/deformation.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "nvne/errors.hpp"

namespace nvne {

namespace {

constexpr double kEndpointTol = 1e-12;

bool is_integer(double q) { return std::floor(q) == q; }

}  // namespace

DeformationFunction DeformationFunction::power_law(double q) {
    if (!(q > 0.0) || !std::isfinite(q)) {
        throw DomainError("power-law deformation requires q > 0, got " + std::to_string(q));
    }
    DeformationFunction f;
    f.exponent_ = q;
    return f;
}

DeformationFunction DeformationFunction::series(std::vector<double> coefficients) {
    if (coefficients.empty()) {
        throw DomainError("deformation series needs at least one coefficient");
    }
    double at_one = 0.0;
    for (double c : coefficients) at_one += c;
    if (std::abs(at_one - 1.0) > kEndpointTol) {
        throw DomainError("deformation series must satisfy f(1) = 1, got " + std::to_string(at_one));
    }
    DeformationFunction f;
    f.coefficients_ = std::move(coefficients);
    return f;
}

double DeformationFunction::operator()(double x) const {
    if (exponent_) {
        const double q = *exponent_;
        if (q == 1.0) return x;
        if (x == 0.0) return 0.0;
        return std::pow(x, q);
    }
    // Horner, lowest power is x^1.
    double acc = 0.0;
    for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc * x;
}

double DeformationFunction::derivative(double x) const {
    if (exponent_) {
        const double q = *exponent_;
        if (q == 1.0) return 1.0;
        if (x == 0.0) {
            return q > 1.0 ? 0.0 : std::numeric_limits<double>::infinity();
        }
        return q * std::pow(x, q - 1.0);
    }
    double acc = 0.0;
    const auto n = coefficients_.size();
    for (std::size_t k = n; k >= 1; --k) {
        acc = acc * x + static_cast<double>(k) * coefficients_[k - 1];
    }
    return acc;
}

bool DeformationFunction::needs_nonnegative_domain() const noexcept {
    return exponent_.has_value() && !is_integer(*exponent_);
}

}  // namespace nvne
