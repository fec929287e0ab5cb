#pragma once

#include <optional>
#include <string>

#include "knudsen/markov.hpp"
#include "knudsen/observable.hpp"

namespace knudsen {

/// Gap below which the (I - P) solve is too ill-conditioned to trust.
inline constexpr double kGapReliabilityThreshold = 0.02;

struct DiffusivityReport {
    double sigma2 = 0.0;   // variance of the limiting Gaussian
    double sigma0_2 = 0.0; // fully diffuse baseline ||f||_pi^2
    double eta = 0.0;      // sigma2 / sigma0_2
    std::string estimator; // lser | galerkin | direct | spectral
    int n = 0;
    int M = 0;
    int N = 0;
    double h = 0.0;
    std::optional<double> error_bound;
    std::optional<double> gap;
    std::string family; // profile provenance, filled by callers
    std::string params;

    std::string csv_row() const;
    static std::string csv_header();
};

/// Legendre-series estimator, valid for small h:
/// sigma2 = -<f,f> + (1/h) sum_{l=1}^{n} (2l+1)/(l(l+1)) <phi_l,f>^2,
/// with tail bound ||f||^2 / (h (n+1)).
DiffusivityReport lser_sigma2(const Observable& f, double h, int n = 500, int order = 512);

/// Galerkin projection of (I - P)g = f onto the first n non-constant Legendre
/// polynomials, with <P phi_j, phi_i> evaluated through the matrix backend on
/// bin midpoints.
DiffusivityReport galerkin_sigma2(const TransitionMatrix& P, const Observable& f, int n = 200);

/// Conjugate-gradient solve of (I - P)g = f on the mean-zero bin subspace.
/// Requires gap >= threshold; below it throws NumericError.
DiffusivityReport direct_sigma2(const TransitionMatrix& P, const Observable& f,
                                double gap_threshold = kGapReliabilityThreshold);

/// Spectral-integral estimator: sum w_k (1+lambda_k)/(1-lambda_k) over the
/// discrete spectral measure, excluding the top eigenpair.
DiffusivityReport spectral_sigma2(const TransitionMatrix& P, const Observable& f);

/// Small-h closed form eta ~ (C_f - h)/h with
/// C_f = sum (2l+1)/(l(l+1)) <phi_l, f/||f||>^2.
double eta_asymptotic(const Observable& f, double h, int n = 500, int order = 512);

/// Spectral-gap asymptotic gamma ~ 4h.
double gap_asymptotic(double h);

/// Maxwell-Smoluchowski equivalent accommodation coefficient theta = 2/(eta+1).
double accommodation_equivalent(double eta);

/// Closed-form shift of eta under the specular mixture P_alpha:
/// eta_alpha = eta_1 + (2(1-alpha)/alpha) <f,(I-P1)^{-1}f> / ||f||^2.
double mixture_eta_shift(const TransitionMatrix& P1, const Observable& f, double alpha);

/// Mean-zero solve of (I - P)g = f by conjugate gradients on the symmetrized
/// matrix (building block shared by direct_sigma2 and mixture_eta_shift).
Eigen::VectorXd solve_markov_poisson(const TransitionMatrix& P, const Eigen::VectorXd& f,
                                     double tol = 1e-12, int max_iter = 100000);

} // namespace knudsen
