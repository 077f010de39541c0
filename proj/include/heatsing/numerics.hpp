#pragma once

#include <cstddef>
#include <functional>

#include "heatsing/errors.hpp"

namespace heatsing {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
};

/// Stopping rule for the adaptive integrators: stop once the summed panel
/// error is below max(abs_tol, rel_tol * |value|).
struct QuadratureOptions {
    double abs_tol = 1e-10;
    double rel_tol = 0.0;
    std::size_t max_panels = 10000;
};

/// Thrown when the panel budget runs out; carries what was computed so far.
class QuadratureBudgetExceeded : public Error {
public:
    QuadratureBudgetExceeded(const std::string& what, QuadratureResult partial)
        : Error(what), partial_(partial) {}

    const QuadratureResult& partial() const { return partial_; }

private:
    QuadratureResult partial_;
};

using ScalarFunction = std::function<double(double)>;

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature on [a, b].
///
/// The worst panel is bisected until the error target is met, which
/// refines geometrically toward integrable endpoint singularities such as
/// x^{-1/2} or log(1/x). The rule never samples the endpoints.
QuadratureResult integrate_adaptive(const ScalarFunction& f, double a, double b, double tol = 1e-10);
QuadratureResult integrate_adaptive(const ScalarFunction& f, double a, double b,
                                    const QuadratureOptions& options);

/// Integral over [a, inf) through sigma = a + u / (1 - u), u in [0, 1).
QuadratureResult integrate_semi_infinite(const ScalarFunction& f, double a, double tol = 1e-10);
QuadratureResult integrate_semi_infinite(const ScalarFunction& f, double a,
                                         const QuadratureOptions& options);

double gamma_fn(double x);

/// Volume of the unit ball in R^N.
double unit_ball_volume(int dim);

double erfc_fn(double x);

}  // namespace heatsing
