#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace knudsen {

enum class Parity { odd, even, none };

/// Function on the direction-cosine space (-1, 1). Breakpoints mark interior
/// points where the evaluator is continuous but not smooth; quadrature splits
/// there.
struct Observable {
    std::function<double(double)> eval;
    std::optional<double> cutoff;
    double channel_radius = 1.0;
    Parity parity = Parity::none;
    std::vector<double> breakpoints;
    std::string tag;

    double operator()(double x) const { return eval(x); }
};

/// Axial flight distance per bounce, 2 r x (1-x^2)^{-1/2}, saturated at
/// sign-correct +-a so the variance stays finite.
Observable displacement_observable(double a, double r_ch = 1.0);

} // namespace knudsen
