#include "knudsen/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "knudsen/errors.hpp"

namespace knudsen {

namespace {

// Panels of a composite rule: [a, b] split at interior breakpoints, each
// subinterval then graded geometrically toward its endpoints so integrands
// with thin boundary layers at the breakpoints stay resolved.
std::vector<std::pair<double, double>> graded_panels(double a, double b,
                                                     const std::vector<double>& breakpoints) {
    std::vector<double> cuts{a, b};
    for (double c : breakpoints) {
        if (c > a && c < b) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<std::pair<double, double>> panels;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i];
        const double hi = cuts[i + 1];
        const double width = hi - lo;
        if (width < 1e-13) {
            panels.emplace_back(lo, hi);
            continue;
        }
        // Geometric refinement from both ends toward the middle.
        const double mid_lo = lo + width / 2.0;
        double left = lo;
        double step = width * 1e-13;
        while (left + step < mid_lo) {
            panels.emplace_back(left, left + step);
            left += step;
            step *= 8.0;
        }
        panels.emplace_back(left, mid_lo);
        std::vector<std::pair<double, double>> right_half;
        double right = hi;
        step = width * 1e-13;
        while (right - step > mid_lo) {
            right_half.emplace_back(right - step, right);
            right -= step;
            step *= 8.0;
        }
        right_half.emplace_back(mid_lo, right);
        for (auto it = right_half.rbegin(); it != right_half.rend(); ++it) panels.push_back(*it);
    }
    return panels;
}

struct AdaptiveState {
    double tol;
    const QuadratureRule* coarse;
    const QuadratureRule* fine;
};

double adaptive_rec(const RealFunction& f, double a, double b, const AdaptiveState& st,
                    int depth) {
    const double coarse = integrate(f, a, b, *st.coarse);
    const double fine = integrate(f, a, b, *st.fine);
    // Floor the acceptance threshold at the roundoff level of the panel value
    // so steep integrands cannot drive the tolerance below what is achievable.
    const double accept = std::max(st.tol, 1e-14 * std::abs(fine));
    if (depth <= 0 || std::abs(fine - coarse) <= accept) return fine;
    const double m = 0.5 * (a + b);
    AdaptiveState half = st;
    half.tol = std::max(st.tol / 2.0, 1e-16 * std::abs(fine));
    return adaptive_rec(f, a, m, half, depth - 1) + adaptive_rec(f, m, b, half, depth - 1);
}

} // namespace

double legendre_eval(int l, double x) {
    if (l < 0) throw ParameterError("legendre_eval: degree must be >= 0");
    if (l == 0) return 1.0;
    double pm1 = 1.0;
    double p = x;
    for (int k = 1; k < l; ++k) {
        const double next = ((2.0 * k + 1.0) * x * p - k * pm1) / (k + 1.0);
        pm1 = p;
        p = next;
    }
    return p;
}

const QuadratureRule& QuadratureRule::gauss_legendre(int order) {
    if (order < 1) throw ParameterError("gauss_legendre: order must be >= 1");
    static std::map<int, QuadratureRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    QuadratureRule rule;
    rule.order = order;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Newton iteration from the Chebyshev-like initial guess.
        double z = std::cos(M_PI * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= order; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = order * (z * p1 - p2) / (z * z - 1.0);
            const double dz = -p1 / pp;
            z += dz;
            if (std::abs(dz) < std::numeric_limits<double>::epsilon()) break;
        }
        const double w = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.nodes[static_cast<std::size_t>(i)] = -z;
        rule.nodes[static_cast<std::size_t>(order - 1 - i)] = z;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(order - 1 - i)] = w;
    }
    return cache.emplace(order, std::move(rule)).first->second;
}

double integrate(const RealFunction& f, double a, double b, const QuadratureRule& rule) {
    const double mid = 0.5 * (a + b);
    const double halfw = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(mid + halfw * rule.nodes[i]);
    }
    return halfw * sum;
}

double integrate_adaptive(const RealFunction& f, double a, double b, double tol,
                          const std::vector<double>& breakpoints) {
    std::vector<double> cuts{a, b};
    for (double c : breakpoints) {
        if (c > a && c < b) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    AdaptiveState st{tol / static_cast<double>(cuts.size() - 1),
                     &QuadratureRule::gauss_legendre(15), &QuadratureRule::gauss_legendre(31)};
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        total += adaptive_rec(f, cuts[i], cuts[i + 1], st, 52);
    }
    return total;
}

double inner_product_pi(const RealFunction& f, const RealFunction& g,
                        const std::vector<double>& breakpoints, int order) {
    const auto integrand = [&](double x) { return f(x) * g(x); };
    if (breakpoints.empty()) {
        return 0.5 * integrate(integrand, -1.0, 1.0, QuadratureRule::gauss_legendre(order));
    }
    const auto panels = graded_panels(-1.0, 1.0, breakpoints);
    const auto& rule = QuadratureRule::gauss_legendre(std::clamp(order / 8, 16, 128));
    double total = 0.0;
    for (const auto& [a, b] : panels) total += integrate(integrand, a, b, rule);
    if (!std::isfinite(total)) throw NumericError("inner_product_pi: non-finite integrand");
    return 0.5 * total;
}

double LegendreSeries::eval(double x) const {
    double sum = 0.0;
    double pm1 = 1.0;
    double p = x;
    const int n = degree();
    for (int l = 0; l <= n; ++l) {
        const double phi = (l == 0) ? 1.0 : p;
        sum += coefficients[static_cast<std::size_t>(l)] * phi;
        if (l >= 1) {
            const double next = ((2.0 * l + 1.0) * x * p - l * pm1) / (l + 1.0);
            pm1 = p;
            p = next;
        }
    }
    return sum;
}

LegendreSeries expand(const RealFunction& f, int n, const std::vector<double>& breakpoints,
                      int order) {
    if (n < 0) throw ParameterError("expand: degree must be >= 0");
    LegendreSeries series;
    series.coefficients.assign(static_cast<std::size_t>(n) + 1, 0.0);

    // Single pass over the composite rule, running the recurrence in l at
    // each node so all coefficients accumulate together.
    std::vector<std::pair<double, double>> panels;
    const QuadratureRule* rule;
    if (breakpoints.empty()) {
        panels.emplace_back(-1.0, 1.0);
        rule = &QuadratureRule::gauss_legendre(order);
    } else {
        panels = graded_panels(-1.0, 1.0, breakpoints);
        rule = &QuadratureRule::gauss_legendre(std::clamp(order / 8, 16, 128));
    }
    for (const auto& [a, b] : panels) {
        const double mid = 0.5 * (a + b);
        const double halfw = 0.5 * (b - a);
        for (std::size_t i = 0; i < rule->nodes.size(); ++i) {
            const double x = mid + halfw * rule->nodes[i];
            const double wf = 0.5 * halfw * rule->weights[i] * f(x);
            double pm1 = 1.0;
            double p = x;
            series.coefficients[0] += wf;
            for (int l = 1; l <= n; ++l) {
                series.coefficients[static_cast<std::size_t>(l)] += wf * p;
                const double next = ((2.0 * l + 1.0) * x * p - l * pm1) / (l + 1.0);
                pm1 = p;
                p = next;
            }
        }
    }
    for (int l = 0; l <= n; ++l) {
        series.coefficients[static_cast<std::size_t>(l)] *= 2.0 * l + 1.0;
    }
    return series;
}

LegendreSeries legendre_operator_apply(const LegendreSeries& series) {
    LegendreSeries out = series;
    for (int l = 0; l <= out.degree(); ++l) {
        out.coefficients[static_cast<std::size_t>(l)] *= -static_cast<double>(l) * (l + 1.0);
    }
    return out;
}

LegendreSeries poisson_solve_series(const RealFunction& f, int n, std::optional<double> scale,
                                    const std::vector<double>& breakpoints, int order) {
    LegendreSeries series = expand(f, n, breakpoints, order);
    const double mean = series.coefficients[0];
    if (std::abs(mean) > 1e-8) {
        throw ParameterError("poisson_solve_series: f must be mean-zero under pi");
    }
    series.coefficients[0] = 0.0;
    const double factor = scale ? 1.0 / (2.0 * *scale) : 1.0;
    for (int l = 1; l <= n; ++l) {
        series.coefficients[static_cast<std::size_t>(l)] *=
            factor / (static_cast<double>(l) * (l + 1.0));
    }
    return series;
}

} // namespace knudsen
