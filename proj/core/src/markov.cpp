#include "knudsen/markov.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "knudsen/billiard.hpp"
#include "knudsen/errors.hpp"
#include "knudsen/geometry.hpp"

namespace knudsen {

namespace {

constexpr int kResampleAttempts = 64;
constexpr double kResampleStep = 3e-9;

double trace_exit_resampled(const Profile& profile, double r, double x, long& rejections) {
    for (int attempt = 0; attempt < kResampleAttempts; ++attempt) {
        const CellTrajectory traj = trace_cell(profile, r + attempt * kResampleStep, x);
        if (traj.status == TraceStatus::ok) return traj.exit.x;
        ++rejections;
    }
    throw NumericError("sample_transition: persistent trajectory rejection");
}

void run_rows(const Profile& profile, TransitionMatrix& P, int N, int row_begin, int row_end,
              std::atomic<long>& rejections) {
    const int M = P.grid.M;
    std::mt19937_64 rng;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = row_begin; i < row_end; ++i) {
        const double x = P.grid.midpoints[static_cast<std::size_t>(i)];
        if (P.mode == SamplingMode::stratified_random) {
            rng.seed(P.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(i + 1));
        }
        long rej = 0;
        std::vector<long> counts(static_cast<std::size_t>(M), 0);
        for (int k = 0; k < N; ++k) {
            double r;
            if (P.mode == SamplingMode::grid) {
                r = (k + 0.5) / N * profile.period;
            } else {
                r = (k + unit(rng)) / N * profile.period;
            }
            const double x_out = trace_exit_resampled(profile, r, x, rej);
            counts[static_cast<std::size_t>(P.grid.bin_of(x_out))]++;
        }
        for (int j = 0; j < M; ++j) {
            P.entries(i, j) = static_cast<double>(counts[static_cast<std::size_t>(j)]) / N;
        }
        rejections += rej;
    }
}

} // namespace

VelocityGrid VelocityGrid::uniform(int M) {
    if (M < 2) throw ParameterError("velocity grid needs M >= 2 bins");
    VelocityGrid g;
    g.M = M;
    g.edges.resize(static_cast<std::size_t>(M) + 1);
    g.midpoints.resize(static_cast<std::size_t>(M));
    for (int i = 0; i <= M; ++i) g.edges[static_cast<std::size_t>(i)] = -1.0 + 2.0 * i / M;
    for (int i = 0; i < M; ++i) {
        g.midpoints[static_cast<std::size_t>(i)] = -1.0 + (2.0 * i + 1.0) / M;
    }
    return g;
}

int VelocityGrid::bin_of(double x) const {
    const int j = static_cast<int>(std::floor((x + 1.0) / 2.0 * M));
    return std::clamp(j, 0, M - 1);
}

double sample_transition(const Profile& profile, double x, double r_position) {
    long rejections = 0;
    return trace_exit_resampled(profile, r_position, x, rejections);
}

double sample_transition(const Profile& profile, double x, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    long rejections = 0;
    return trace_exit_resampled(profile, unit(rng) * profile.period, x, rejections);
}

TransitionMatrix build_matrix(const Profile& profile, int M, int N, SamplingMode mode,
                              std::uint64_t seed, int threads) {
    if (N < 1) throw ParameterError("build_matrix: N must be >= 1");
    TransitionMatrix P;
    P.grid = VelocityGrid::uniform(M);
    P.entries = Eigen::MatrixXd::Zero(M, M);
    P.positions_per_row = N;
    P.profile_tag = profile.family_tag;
    P.mode = mode;
    P.seed = seed;

    if (threads <= 0) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
        if (threads <= 0) threads = 1;
    }
    threads = std::min(threads, M);

    std::atomic<long> rejections{0};
    if (threads == 1) {
        run_rows(profile, P, N, 0, M, rejections);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        const int chunk = (M + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int begin = t * chunk;
            const int end = std::min(M, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(
                [&, begin, end] { run_rows(profile, P, N, begin, end, rejections); });
        }
        for (auto& th : pool) th.join();
    }
    P.rejections = rejections.load();
    P.quality_warning =
        P.rejections > static_cast<long>(0.01 * static_cast<double>(M) * N);
    return P;
}

TransitionMatrix diffuse_reference(int M) {
    TransitionMatrix P;
    P.grid = VelocityGrid::uniform(M);
    P.entries = Eigen::MatrixXd::Constant(M, M, 1.0 / M);
    P.positions_per_row = 0;
    P.profile_tag = "diffuse_reference";
    return P;
}

double stationarity_defect(const TransitionMatrix& P) {
    const int M = P.grid.M;
    const Eigen::RowVectorXd u = Eigen::RowVectorXd::Constant(M, 1.0 / M);
    return (u * P.entries - u).cwiseAbs().sum();
}

SpectralSummary spectral_summary(const TransitionMatrix& P) {
    const Eigen::MatrixXd sym = 0.5 * (P.entries + P.entries.transpose());
    SpectralSummary s;
    s.symmetrization_defect = (P.entries - P.entries.transpose()).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericError("spectral_summary: eigensolver failed to converge");
    }
    const auto& ev = solver.eigenvalues();
    s.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    const int M = static_cast<int>(ev.size());
    double rho = 0.0;
    for (int i = 0; i < M - 1; ++i) rho = std::max(rho, std::abs(ev(i)));
    s.second_eigenvalue = rho;
    s.gap = 1.0 - rho;
    return s;
}

Eigen::VectorXd bin_values_centered(const Observable& f, const VelocityGrid& grid) {
    Eigen::VectorXd v(grid.M);
    for (int i = 0; i < grid.M; ++i) v(i) = f(grid.midpoints[static_cast<std::size_t>(i)]);
    v.array() -= v.mean();
    return v;
}

double pi_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return a.dot(b) / static_cast<double>(a.size());
}

std::vector<SpectralAtom> spectral_measure(const TransitionMatrix& P, const Observable& f) {
    const Eigen::MatrixXd sym = 0.5 * (P.entries + P.entries.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw NumericError("spectral_measure: eigensolver failed to converge");
    }
    const Eigen::VectorXd fv = bin_values_centered(f, P.grid);
    const int M = P.grid.M;
    std::vector<SpectralAtom> atoms(static_cast<std::size_t>(M));
    for (int k = 0; k < M; ++k) {
        const double c = solver.eigenvectors().col(k).dot(fv);
        atoms[static_cast<std::size_t>(k)] = {solver.eigenvalues()(k), c * c / M};
    }
    return atoms;
}

TransitionMatrix mixture_operator(const TransitionMatrix& P1, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw ParameterError("mixture_operator: alpha must lie in (0, 1]");
    }
    TransitionMatrix P = P1;
    P.entries = alpha * P1.entries +
                (1.0 - alpha) * Eigen::MatrixXd::Identity(P1.grid.M, P1.grid.M);
    P.profile_tag = P1.profile_tag + "+specular(alpha=" + std::to_string(alpha) + ")";
    return P;
}

void save_matrix(const TransitionMatrix& P, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_matrix: cannot open " + path);
    nlohmann::json meta;
    meta["M"] = P.grid.M;
    meta["N"] = P.positions_per_row;
    meta["profile"] = P.profile_tag;
    meta["mode"] = P.mode == SamplingMode::grid ? "grid" : "stratified_random";
    meta["seed"] = P.seed;
    meta["rejections"] = P.rejections;
    out << "# " << meta.dump() << "\n";
    out.precision(17);
    for (int i = 0; i < P.grid.M; ++i) {
        for (int j = 0; j < P.grid.M; ++j) {
            if (j) out << ",";
            out << P.entries(i, j);
        }
        out << "\n";
    }
    if (!out) throw IoError("save_matrix: write failed for " + path);
}

TransitionMatrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_matrix: cannot open " + path);
    std::string header;
    std::getline(in, header);
    if (header.size() < 2 || header[0] != '#') {
        throw IoError("load_matrix: missing metadata header in " + path);
    }
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(header.substr(1));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("load_matrix: bad metadata: ") + e.what());
    }
    TransitionMatrix P;
    const int M = meta.at("M").get<int>();
    P.grid = VelocityGrid::uniform(M);
    P.entries = Eigen::MatrixXd::Zero(M, M);
    P.positions_per_row = meta.at("N").get<int>();
    P.profile_tag = meta.at("profile").get<std::string>();
    P.mode = meta.at("mode").get<std::string>() == "grid" ? SamplingMode::grid
                                                          : SamplingMode::stratified_random;
    P.seed = meta.at("seed").get<std::uint64_t>();
    P.rejections = meta.at("rejections").get<long>();
    std::string line;
    for (int i = 0; i < M; ++i) {
        if (!std::getline(in, line)) throw IoError("load_matrix: truncated file " + path);
        std::size_t pos = 0;
        for (int j = 0; j < M; ++j) {
            std::size_t used = 0;
            P.entries(i, j) = std::stod(line.substr(pos), &used);
            pos += used;
            if (j + 1 < M) {
                if (pos >= line.size() || line[pos] != ',') {
                    throw IoError("load_matrix: malformed row in " + path);
                }
                ++pos;
            }
        }
    }
    return P;
}

} // namespace knudsen
