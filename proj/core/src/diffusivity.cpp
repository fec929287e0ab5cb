#include "knudsen/diffusivity.hpp"

#include <cmath>
#include <sstream>

#include "knudsen/errors.hpp"
#include "knudsen/legendre.hpp"

namespace knudsen {

namespace {

void project_mean_out(Eigen::VectorXd& v) {
    v.array() -= v.mean();
}

} // namespace

std::string DiffusivityReport::csv_header() {
    return "family,params,h,gap,sigma2,eta,theta_equiv,estimator,n,M,N,error_bound";
}

std::string DiffusivityReport::csv_row() const {
    std::ostringstream out;
    out.precision(12);
    out << family << "," << params << "," << h << ",";
    if (gap) out << *gap;
    out << "," << sigma2 << "," << eta << "," << accommodation_equivalent(eta) << ","
        << estimator << "," << n << "," << M << "," << N << ",";
    if (error_bound) out << *error_bound;
    return out.str();
}

DiffusivityReport lser_sigma2(const Observable& f, double h, int n, int order) {
    if (!(h > 0.0)) throw ParameterError("lser_sigma2: flatness h must be positive");
    if (n < 1) throw ParameterError("lser_sigma2: series order must be >= 1");

    const LegendreSeries series = expand(f.eval, n, f.breakpoints, order);
    const double norm2 = inner_product_pi(f.eval, f.eval, f.breakpoints, order);
    double sum = 0.0;
    for (int l = 1; l <= n; ++l) {
        const double b = series.coeff(l); // b_l = (2l+1) <phi_l, f>
        sum += b * b / ((2.0 * l + 1.0) * l * (l + 1.0));
    }
    DiffusivityReport rep;
    rep.estimator = "lser";
    rep.n = n;
    rep.h = h;
    rep.sigma0_2 = norm2;
    rep.sigma2 = -norm2 + sum / h;
    rep.eta = rep.sigma2 / rep.sigma0_2;
    rep.error_bound = norm2 / (h * (n + 1));
    return rep;
}

DiffusivityReport galerkin_sigma2(const TransitionMatrix& P, const Observable& f, int n) {
    const int M = P.grid.M;
    if (n < 1) throw ParameterError("galerkin_sigma2: subspace dimension must be >= 1");
    if (n >= M) throw ParameterError("galerkin_sigma2: subspace dimension must be < M");

    const Eigen::VectorXd fv = bin_values_centered(f, P.grid);

    // Columns: phi_1..phi_n sampled at bin midpoints, centered to the discrete
    // mean-zero subspace.
    Eigen::MatrixXd Phi(M, n);
    for (int i = 0; i < M; ++i) {
        const double x = P.grid.midpoints[static_cast<std::size_t>(i)];
        double pm1 = 1.0;
        double p = x;
        for (int l = 1; l <= n; ++l) {
            Phi(i, l - 1) = p;
            const double next = ((2.0 * l + 1.0) * x * p - l * pm1) / (l + 1.0);
            pm1 = p;
            p = next;
        }
    }
    for (int j = 0; j < n; ++j) Phi.col(j).array() -= Phi.col(j).mean();

    // High-degree Legendre columns lose independence on the bin grid, so work
    // in a discretely orthonormal basis B of the same subspace (QR).
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Phi);
    const Eigen::MatrixXd B =
        qr.householderQ() * Eigen::MatrixXd::Identity(M, n) * std::sqrt(static_cast<double>(M));
    const Eigen::MatrixXd G =
        Eigen::MatrixXd::Identity(n, n) - B.transpose() * (P.entries * B) / M;
    const Eigen::VectorXd y = B.transpose() * fv / M;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    // smax is of order the largest 1 - lambda (O(1) for any mixing operator);
    // near-zero smax means I - P vanishes on the subspace (identity-like P).
    if (smax < 1e-8 || smin / smax < 1e-12) {
        throw NumericError("galerkin_sigma2: projected system is numerically singular");
    }
    const Eigen::VectorXd x = svd.solve(y);

    const Eigen::VectorXd g_n = B * x;
    const Eigen::VectorXd Pf = P.entries * fv;

    DiffusivityReport rep;
    rep.estimator = "galerkin";
    rep.n = n;
    rep.M = M;
    rep.N = P.positions_per_row;
    rep.sigma0_2 = pi_dot(fv, fv);
    // <T_n f, T_n f> = |y|^2 in the orthonormal basis.
    rep.sigma2 = y.squaredNorm() + 2.0 * pi_dot(Pf, g_n);
    rep.eta = rep.sigma2 / rep.sigma0_2;
    return rep;
}

Eigen::VectorXd solve_markov_poisson(const TransitionMatrix& P, const Eigen::VectorXd& f,
                                     double tol, int max_iter) {
    const int M = P.grid.M;
    const Eigen::MatrixXd S = 0.5 * (P.entries + P.entries.transpose());
    Eigen::VectorXd b = f;
    project_mean_out(b);

    const auto apply = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd out = v - S * v;
        project_mean_out(out);
        return out;
    };

    Eigen::VectorXd x = Eigen::VectorXd::Zero(M);
    Eigen::VectorXd r = b;
    Eigen::VectorXd p = r;
    double rs = r.squaredNorm();
    const double target = tol * tol * std::max(b.squaredNorm(), 1e-300);
    for (int it = 0; it < max_iter && rs > target; ++it) {
        const Eigen::VectorXd Ap = apply(p);
        const double pAp = p.dot(Ap);
        if (!(pAp > 0.0)) {
            throw NumericError("solve_markov_poisson: operator not positive definite");
        }
        const double alpha = rs / pAp;
        x += alpha * p;
        r -= alpha * Ap;
        const double rs_new = r.squaredNorm();
        p = r + (rs_new / rs) * p;
        rs = rs_new;
    }
    if (rs > target) {
        throw NumericError("solve_markov_poisson: conjugate gradients did not converge");
    }
    project_mean_out(x);
    return x;
}

DiffusivityReport direct_sigma2(const TransitionMatrix& P, const Observable& f,
                                double gap_threshold) {
    const SpectralSummary spec = spectral_summary(P);
    if (spec.gap < gap_threshold) {
        throw NumericError("direct_sigma2: spectral gap below reliability threshold");
    }
    const Eigen::VectorXd fv = bin_values_centered(f, P.grid);
    const Eigen::VectorXd g = solve_markov_poisson(P, fv);
    const Eigen::VectorXd Pf = 0.5 * (P.entries + P.entries.transpose()) * fv;

    DiffusivityReport rep;
    rep.estimator = "direct";
    rep.M = P.grid.M;
    rep.N = P.positions_per_row;
    rep.sigma0_2 = pi_dot(fv, fv);
    rep.sigma2 = rep.sigma0_2 + 2.0 * pi_dot(Pf, g);
    rep.eta = rep.sigma2 / rep.sigma0_2;
    rep.gap = spec.gap;
    return rep;
}

DiffusivityReport spectral_sigma2(const TransitionMatrix& P, const Observable& f) {
    std::vector<SpectralAtom> atoms = spectral_measure(P, f);
    // Drop the atom at the top eigenvalue (the stationary direction).
    std::size_t top = 0;
    for (std::size_t k = 1; k < atoms.size(); ++k) {
        if (atoms[k].lambda > atoms[top].lambda) top = k;
    }
    double sigma2 = 0.0;
    double mass = 0.0;
    double rho = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        if (k == top) continue;
        const double lam = atoms[k].lambda;
        if (1.0 - lam < 1e-12 && atoms[k].weight > 1e-12) {
            throw NumericError("spectral_sigma2: spectral mass at eigenvalue 1");
        }
        sigma2 += atoms[k].weight * (1.0 + lam) / (1.0 - lam);
        mass += atoms[k].weight;
        rho = std::max(rho, std::abs(lam));
    }
    DiffusivityReport rep;
    rep.estimator = "spectral";
    rep.M = P.grid.M;
    rep.N = P.positions_per_row;
    rep.sigma0_2 = mass + atoms[top].weight;
    rep.sigma2 = sigma2;
    rep.eta = rep.sigma2 / rep.sigma0_2;
    rep.gap = 1.0 - rho;
    return rep;
}

double eta_asymptotic(const Observable& f, double h, int n, int order) {
    if (!(h > 0.0)) throw ParameterError("eta_asymptotic: flatness h must be positive");
    const LegendreSeries series = expand(f.eval, n, f.breakpoints, order);
    const double norm2 = inner_product_pi(f.eval, f.eval, f.breakpoints, order);
    double c_f = 0.0;
    for (int l = 1; l <= n; ++l) {
        const double b = series.coeff(l);
        c_f += b * b / ((2.0 * l + 1.0) * l * (l + 1.0));
    }
    c_f /= norm2;
    return (c_f - h) / h;
}

double gap_asymptotic(double h) {
    if (!(h >= 0.0)) throw ParameterError("gap_asymptotic: flatness h must be nonnegative");
    return 4.0 * h;
}

double accommodation_equivalent(double eta) {
    if (!(eta > -1.0)) throw ParameterError("accommodation_equivalent: eta must exceed -1");
    return 2.0 / (eta + 1.0);
}

double mixture_eta_shift(const TransitionMatrix& P1, const Observable& f, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw ParameterError("mixture_eta_shift: alpha must lie in (0, 1]");
    }
    const Eigen::VectorXd fv = bin_values_centered(f, P1.grid);
    const Eigen::VectorXd g = solve_markov_poisson(P1, fv);
    return 2.0 * (1.0 - alpha) / alpha * pi_dot(fv, g) / pi_dot(fv, fv);
}

} // namespace knudsen
