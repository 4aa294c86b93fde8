#pragma once

#include <functional>

namespace orgdyn::quad {

/// Composite Simpson rule on [a, b] with `intervals` subintervals (rounded up to even).
double simpson(const std::function<double(double)>& f, double a, double b, int intervals);

/// Adaptive Simpson with absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 40);

}  // namespace orgdyn::quad
