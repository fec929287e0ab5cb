#include "knudsen/observable.hpp"

#include <cmath>

#include "knudsen/errors.hpp"

namespace knudsen {

Observable displacement_observable(double a, double r_ch) {
    if (!(a > 0.0)) throw ParameterError("displacement_observable: cutoff must be positive");
    if (!(r_ch > 0.0)) throw ParameterError("displacement_observable: radius must be positive");

    Observable f;
    f.cutoff = a;
    f.channel_radius = r_ch;
    f.parity = Parity::odd;
    f.tag = "axial_displacement";
    const double x_a = a / std::sqrt(a * a + 4.0 * r_ch * r_ch);
    f.breakpoints = {-x_a, x_a};
    f.eval = [a, r_ch, x_a](double x) {
        if (x >= x_a) return a;
        if (x <= -x_a) return -a;
        return 2.0 * r_ch * x / std::sqrt((1.0 - x) * (1.0 + x));
    };
    return f;
}

} // namespace knudsen
