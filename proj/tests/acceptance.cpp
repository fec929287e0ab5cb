// End-to-end acceptance checks for the library. Each check prints one
// [PASS]/[FAIL] line; the process exits nonzero if any check fails.

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "knudsen/billiard.hpp"
#include "knudsen/diffusivity.hpp"
#include "knudsen/errors.hpp"
#include "knudsen/geometry.hpp"
#include "knudsen/legendre.hpp"
#include "knudsen/markov.hpp"

using namespace knudsen;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("[%s] %2d %s%s%s\n", ok ? "PASS" : "FAIL", index, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++g_failures;
}

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(xs[i]);
        const double ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = static_cast<double>(k);
    return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double n = static_cast<double>(a.size());
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
    return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

constexpr int kM = 400;
constexpr int kN = 4000;

std::map<double, TransitionMatrix> g_bump_cache;

const TransitionMatrix& bump_matrix(double K, int M = kM, int N = kN) {
    const double key = K + M * 1000.0;
    auto it = g_bump_cache.find(key);
    if (it == g_bump_cache.end()) {
        it = g_bump_cache.emplace(key, build_matrix(make_bumps(K), M, N)).first;
    }
    return it->second;
}

void criterion_1() {
    bool ok = true;
    std::string detail;
    for (double K : {0.1, 0.5, 1.0, 2.0}) {
        const double h = flatness_h(make_bumps(K)).h;
        if (std::abs(h - K * K / 12.0) > 1e-8) {
            ok = false;
            detail = "bumps K=" + std::to_string(K);
        }
    }
    for (double a : {0.25, 0.5, 1.0}) {
        const double h = flatness_h(make_mixture(a)).h;
        if (std::abs(h - a / 3.0) > 1e-8) {
            ok = false;
            detail = "mixture alpha=" + std::to_string(a);
        }
    }
    report(1, "flatness closed forms h = K^2/12 and h = alpha/3", ok, detail);
}

void criterion_2() {
    const auto P = build_matrix(make_flat(), kM, 100);
    bool ok = P.entries == Eigen::MatrixXd::Identity(kM, kM);
    const auto f = displacement_observable(50000.0);
    int rejected = 0;
    try {
        direct_sigma2(P, f);
    } catch (const NumericError&) {
        ++rejected;
    }
    try {
        spectral_sigma2(P, f);
    } catch (const NumericError&) {
        ++rejected;
    }
    try {
        galerkin_sigma2(P, f, 50);
    } catch (const NumericError&) {
        ++rejected;
    }
    ok = ok && rejected == 3;
    report(2, "flat cell: exact identity matrix, estimators raise reliability errors", ok,
           "rejected " + std::to_string(rejected) + "/3");
}

void criterion_3() {
    const auto P = diffuse_reference(kM);
    const auto f = displacement_observable(50000.0);
    const double e1 = direct_sigma2(P, f).eta;
    const double e2 = spectral_sigma2(P, f).eta;
    const bool ok = std::abs(e1 - 1.0) < 1e-6 && std::abs(e2 - 1.0) < 1e-6;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "direct %.2e, spectral %.2e", e1 - 1.0, e2 - 1.0);
    report(3, "diffuse baseline eta = 1 within 1e-6", ok, buf);
}

void criterion_4() {
    std::vector<double> Ks{0.15, 0.2, 0.3}, gaps;
    bool ok = true;
    for (double K : Ks) {
        const double gamma = spectral_summary(bump_matrix(K)).gap;
        gaps.push_back(gamma);
        const double pred = K * K / 3.0;
        if (std::abs(gamma - pred) / pred > 0.2) ok = false;
    }
    const double slope = loglog_slope(Ks, gaps);
    ok = ok && std::abs(slope - 2.0) <= 0.2;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "slope %.3f", slope);
    report(4, "spectral gap follows K^2/3 within 20%, log-log slope 2 +- 0.2", ok, buf);
}

void criterion_5() {
    // Binning error floors the residual at K = 0.1 for M = 400, masking the
    // decay; run at M = 1000 where the asymptotic regime is resolved.
    std::vector<double> hs, residuals;
    for (double K : {0.1, 0.2, 0.4}) {
        const auto& P = bump_matrix(K, 1000);
        const double h = K * K / 12.0;
        const int M = P.grid.M;
        Eigen::VectorXd phi(M);
        for (int i = 0; i < M; ++i) phi(i) = P.grid.midpoints[static_cast<std::size_t>(i)];
        const Eigen::VectorXd res = (P.entries * phi - phi) + 4.0 * h * phi;
        hs.push_back(h);
        residuals.push_back(std::sqrt(pi_dot(res, res) / pi_dot(phi, phi)));
    }
    const double slope = loglog_slope(hs, residuals);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "slope %.3f", slope);
    report(5, "diffusion-approximation residual decays with slope >= 1.3 in h", slope >= 1.3,
           buf);
}

void criterion_6() {
    const auto f = displacement_observable(50000.0);
    bool ok = true;
    std::string detail;
    for (double K : {0.4, 0.7, 1.0}) {
        const auto& P = bump_matrix(K);
        const double g = galerkin_sigma2(P, f, 100).sigma2;
        const double d = direct_sigma2(P, f).sigma2;
        const double s = spectral_sigma2(P, f).sigma2;
        const double worst = std::max({std::abs(g - d) / d, std::abs(g - s) / s,
                                       std::abs(d - s) / s});
        if (worst > 0.05) {
            ok = false;
            detail += " K=" + std::to_string(K);
        }
    }
    // The small-K comparison needs M = 1000 bins: at M = 400 the discrete
    // Galerkin value still carries ~10% binning bias at K = 0.1.
    for (double K : {0.1, 0.2}) {
        const double h = K * K / 12.0;
        const double l = lser_sigma2(f, h, 500).sigma2;
        const double g = galerkin_sigma2(bump_matrix(K, 1000), f, 100).sigma2;
        if (std::abs(l - g) / g > 0.10) {
            ok = false;
            detail += " lser K=" + std::to_string(K);
        }
    }
    report(6, "estimator concordance (5% pairwise; 10% series vs Galerkin at small K)", ok,
           detail);
}

void criterion_7() {
    // Degree-512 polynomials alias on 400 bins, so this check runs at M = 1000.
    const auto P = build_matrix(make_bumps(0.5), 1000, kN);
    const auto f = displacement_observable(50000.0);
    const double ref = galerkin_sigma2(P, f, 512).sigma2;
    std::vector<double> ns, errs;
    for (int n : {8, 16, 32, 64, 128, 256}) {
        ns.push_back(n);
        errs.push_back(std::abs(galerkin_sigma2(P, f, n).sigma2 - ref));
    }
    const double slope = loglog_slope(ns, errs);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "slope %.3f", slope);
    report(7, "Galerkin convergence rate: log-log slope <= -1", slope <= -1.0, buf);
}

void criterion_8() {
    const auto& P = bump_matrix(2.0);
    const double alpha = 0.5;
    const auto mixed = mixture_operator(P, alpha);
    const auto s1 = spectral_summary(P).eigenvalues;
    const auto s2 = spectral_summary(mixed).eigenvalues;
    bool ok = true;
    for (std::size_t k = 0; k < s1.size(); ++k) {
        if (std::abs(s2[k] - (alpha * s1[k] + 1.0 - alpha)) > 1e-10) ok = false;
    }
    const auto f = displacement_observable(50000.0);
    const double eta1 = direct_sigma2(P, f).eta;
    const double eta_mixed = direct_sigma2(mixed, f).eta;
    const double closed = eta1 + mixture_eta_shift(P, f, alpha);
    const double rel = std::abs(eta_mixed - closed) / eta_mixed;
    ok = ok && rel < 0.02;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "shift mismatch %.2e", rel);
    report(8, "mixture spectrum is affine; closed-form eta shift matches within 2%", ok, buf);
}

void criterion_9() {
    const auto f = displacement_observable(50000.0);
    const double h = 0.2 * 0.2 / 12.0;
    bool ok = true;
    std::string detail;
    for (int n : {50, 100, 250}) {
        const auto a = lser_sigma2(f, h, n);
        const auto b = lser_sigma2(f, h, 2 * n);
        if (std::abs(a.sigma2 - b.sigma2) > *a.error_bound) {
            ok = false;
            detail += " n=" + std::to_string(n);
        }
    }
    report(9, "series tail bound ||f||^2/(h(n+1)) dominates truncation changes", ok, detail);
}

void criterion_10() {
    const auto f = displacement_observable(50000.0);
    // Offsets d are swept on the scale of the bump sagittas; far beyond that
    // the deep wells between the shifted arcs dominate scattering and the gap
    // saturates, washing out the curvature competition.
    std::vector<double> gaps, etas;
    for (double d : {-0.09, -0.06, -0.03, 0.0, 0.03, 0.06, 0.09}) {
        const auto P = build_matrix(make_two_bumps(d, 1.0, 0.3), 200, 2000);
        gaps.push_back(spectral_summary(P).gap);
        etas.push_back(direct_sigma2(P, f).eta);
    }
    const double rho = spearman(gaps, etas);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "spearman %.3f", rho);
    report(10, "gap and diffusivity mirror each other over the two-bump sweep", rho <= -0.9,
           buf);
}

void criterion_11() {
    bool ok = true;
    for (int l = 0; l <= 50 && ok; ++l) {
        for (int m = l; m <= 50; ++m) {
            const double ip = inner_product_pi([l](double x) { return legendre_eval(l, x); },
                                               [m](double x) { return legendre_eval(m, x); });
            const double expect = (l == m) ? 1.0 / (2.0 * l + 1.0) : 0.0;
            if (std::abs(ip - expect) > 1e-10) {
                ok = false;
                break;
            }
        }
    }
    // Ten mean-zero test functions; residual of the series Poisson solve.
    std::vector<RealFunction> family;
    for (int l = 1; l <= 6; ++l) {
        family.push_back([l](double x) { return legendre_eval(l, x); });
    }
    family.push_back([](double x) { return x * x * x - 0.2 * x; });
    family.push_back([](double x) { return std::sin(M_PI * x); });
    family.push_back([](double x) { return x * std::cos(x); });
    family.push_back([](double x) { return x * x - 1.0 / 3.0; });
    double worst = 0.0;
    for (const auto& f : family) {
        const auto g = poisson_solve_series(f, 60);
        const auto lg = legendre_operator_apply(g);
        double res2 = 0.0;
        const auto fs = expand(f, 60);
        for (int l = 0; l <= 60; ++l) {
            const double d = lg.coeff(l) + fs.coeff(l);
            res2 += d * d / (2.0 * l + 1.0);
        }
        worst = std::max(worst, std::sqrt(res2));
    }
    ok = ok && worst <= 1e-9;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "worst residual %.2e", worst);
    report(11, "orthogonality to 1e-10 and Poisson residual <= 1e-9", ok, buf);
}

} // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    if (g_failures == 0) {
        std::printf("all acceptance checks passed\n");
        return 0;
    }
    std::printf("%d acceptance check(s) failed\n", g_failures);
    return 1;
}
