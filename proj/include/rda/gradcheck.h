#pragma once

#include <functional>
#include <span>
#include <vector>

namespace rda {

using ScalarFunction = std::function<double(std::span<const double>)>;

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate.
std::vector<double> central_difference(const ScalarFunction& f, std::span<const double> x,
                                       double step = 1e-6);

// ||a - b|| / max(||a||, ||b||), or 0 when both vanish.
double relative_error(std::span<const double> a, std::span<const double> b);

}  // namespace rda
