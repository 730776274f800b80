#pragma once

#include <functional>
#include <vector>

namespace mwvar {

double normal_cdf(double x);
double normal_pdf(double x);

/// Inverse standard normal CDF, p in (0,1). Acklam's rational approximation
/// refined with one Halley step; relative error well below 1e-14.
double normal_quantile(double p);

/// Regularized incomplete beta function I_x(a, b), x in [0,1], a,b > 0.
double reg_inc_beta(double a, double b, double x);

/// Adaptive Gauss-Kronrod (G7,K15) integration of f over [a,b] to an
/// absolute tolerance. Breakpoints force subdivision at known kinks.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol);
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, const std::vector<double>& breakpoints);

}  // namespace mwvar
