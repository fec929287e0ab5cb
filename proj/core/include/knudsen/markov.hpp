#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "knudsen/geometry.hpp"
#include "knudsen/observable.hpp"

namespace knudsen {

struct VelocityGrid {
    int M = 0;
    std::vector<double> edges;     // M+1 points partitioning (-1, 1)
    std::vector<double> midpoints; // bin representatives

    static VelocityGrid uniform(int M);
    int bin_of(double x) const;
};

enum class SamplingMode { grid, stratified_random };

/// Finite-rank row-stochastic approximation P_M of the transition operator.
struct TransitionMatrix {
    VelocityGrid grid;
    Eigen::MatrixXd entries;
    int positions_per_row = 0;
    std::string profile_tag;
    SamplingMode mode = SamplingMode::grid;
    std::uint64_t seed = 0;
    long rejections = 0;
    bool quality_warning = false;

    int size() const { return grid.M; }
};

/// Exit cosine of one cell excursion from the given entry position. Rejected
/// trajectories are retried at a perturbed position.
double sample_transition(const Profile& profile, double x, double r_position);
double sample_transition(const Profile& profile, double x, std::mt19937_64& rng);

/// Row i of P_M is the exit-bin histogram of N traces started at the bin
/// midpoint x_i. Grid mode uses N evenly spaced torus positions; random mode
/// one stratified uniform draw per stratum. Rows are built in parallel.
TransitionMatrix build_matrix(const Profile& profile, int M, int N,
                              SamplingMode mode = SamplingMode::grid,
                              std::uint64_t seed = 0, int threads = 0);

/// Rank-one matrix whose rows are the bin masses of the stationary measure.
TransitionMatrix diffuse_reference(int M);

/// l1 defect of the uniform row vector under P: ||uP - u||_1.
double stationarity_defect(const TransitionMatrix& P);

struct SpectralSummary {
    std::vector<double> eigenvalues; // ascending
    double gap = 0.0;                // 1 - max |lambda| below the top
    double second_eigenvalue = 0.0;
    double symmetrization_defect = 0.0;
};

/// Eigendecomposition of the symmetrized matrix (P + P^T)/2.
SpectralSummary spectral_summary(const TransitionMatrix& P);

struct SpectralAtom {
    double lambda = 0.0;
    double weight = 0.0;
};

/// Discrete spectral measure of f: weights <f, u_k>_pi^2 over pi-orthonormal
/// eigenpairs of the symmetrized matrix. f is centered first; the weights sum
/// to ||f||_pi^2 (Parseval).
std::vector<SpectralAtom> spectral_measure(const TransitionMatrix& P, const Observable& f);

/// Convex combination alpha * P + (1 - alpha) * I.
TransitionMatrix mixture_operator(const TransitionMatrix& P1, double alpha);

/// Persistence: JSON metadata header line followed by CSV entries.
void save_matrix(const TransitionMatrix& P, const std::string& path);
TransitionMatrix load_matrix(const std::string& path);

/// Observable sampled at bin midpoints and centered to pi-mean zero.
Eigen::VectorXd bin_values_centered(const Observable& f, const VelocityGrid& grid);

/// Discrete pi-weighted inner product (uniform bin weights 1/M).
double pi_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

} // namespace knudsen
