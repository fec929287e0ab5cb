// Command-line front end: profile inspection, matrix construction with
// on-disk caching, diffusivity estimation, and parameter sweeps with CSV/SVG
// output.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "knudsen/billiard.hpp"
#include "knudsen/diffusivity.hpp"
#include "knudsen/errors.hpp"
#include "knudsen/geometry.hpp"
#include "knudsen/markov.hpp"

using namespace knudsen;

namespace {

constexpr const char* kCacheEnvVar = "KNUDSEN_CACHE_DIR";

struct ProfileFlags {
    std::string family;
    std::string profile_file;
    std::map<std::string, double> params;
};

void add_profile_flags(CLI::App* cmd, ProfileFlags& flags) {
    cmd->add_option("--family", flags.family,
                    "profile family: flat | bumps | mixture | two_bumps | bumps_with_wall");
    cmd->add_option("--profile-file", flags.profile_file, "profile description file");
    for (const char* name : {"K", "alpha", "d", "K_big", "K_small", "w", "R"}) {
        cmd->add_option_function<double>(
            std::string("--") + name,
            [&flags, name](double v) { flags.params[name] = v; },
            std::string("family parameter ") + name);
    }
}

Profile resolve_profile(const ProfileFlags& flags) {
    if (!flags.profile_file.empty()) {
        std::ifstream in(flags.profile_file);
        if (!in) throw IoError("cannot open profile file " + flags.profile_file);
        std::stringstream buf;
        buf << in.rdbuf();
        return profile_from_text(buf.str());
    }
    if (flags.family.empty()) {
        throw ParameterError("either --family or --profile-file is required");
    }
    return profile_from_params(flags.family, flags.params);
}

std::string params_string(const Profile& p) {
    std::string out;
    for (const auto& [k, v] : p.parameters) {
        if (!out.empty()) out += ";";
        std::ostringstream s;
        s.precision(12);
        s << k << "=" << v;
        out += s.str();
    }
    return out;
}

std::string cache_key(const Profile& p, int M, int N, SamplingMode mode, std::uint64_t seed) {
    std::ostringstream s;
    s << profile_to_text(p) << "|M=" << M << "|N=" << N
      << "|mode=" << (mode == SamplingMode::grid ? "grid" : "random") << "|seed=" << seed;
    std::ostringstream hex;
    hex << std::hex << std::hash<std::string>{}(s.str());
    return hex.str();
}

TransitionMatrix cached_matrix(const Profile& p, int M, int N, SamplingMode mode,
                               std::uint64_t seed, int threads) {
    const char* dir = std::getenv(kCacheEnvVar);
    if (dir == nullptr || *dir == '\0') return build_matrix(p, M, N, mode, seed, threads);
    std::filesystem::create_directories(dir);
    const auto path =
        std::filesystem::path(dir) / (cache_key(p, M, N, mode, seed) + ".matrix.csv");
    if (std::filesystem::exists(path)) return load_matrix(path.string());
    auto P = build_matrix(p, M, N, mode, seed, threads);
    save_matrix(P, path.string());
    return P;
}

SamplingMode parse_mode(const std::string& mode) {
    if (mode == "grid") return SamplingMode::grid;
    if (mode == "random") return SamplingMode::stratified_random;
    throw ParameterError("sampling mode must be 'grid' or 'random', got '" + mode + "'");
}

// ---------------------------------------------------------------------------
// sweep

struct SweepConfig {
    std::string family;
    std::string param;
    std::vector<double> grid;
    std::vector<std::string> estimators;
    std::map<std::string, double> fixed;
    int M = 400;
    int N = 4000;
    int n = 200;
    int lser_n = 500;
    double a = 50000.0;
    std::uint64_t seed = 0;
    SamplingMode mode = SamplingMode::grid;
    int threads = 0;
    std::string out_csv;
    std::string out_svg;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

SweepConfig parse_sweep_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    SweepConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParameterError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r\n");
            const auto b = s.find_last_not_of(" \t\r\n");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "family") {
            cfg.family = value;
        } else if (key == "param") {
            cfg.param = value;
        } else if (key == "grid") {
            for (const auto& v : split_list(value)) cfg.grid.push_back(std::stod(v));
        } else if (key == "estimators") {
            cfg.estimators = split_list(value);
        } else if (key == "M") {
            cfg.M = std::stoi(value);
        } else if (key == "N") {
            cfg.N = std::stoi(value);
        } else if (key == "n") {
            cfg.n = std::stoi(value);
        } else if (key == "lser_n") {
            cfg.lser_n = std::stoi(value);
        } else if (key == "a") {
            cfg.a = std::stod(value);
        } else if (key == "seed") {
            cfg.seed = std::stoull(value);
        } else if (key == "mode") {
            cfg.mode = parse_mode(value);
        } else if (key == "threads") {
            cfg.threads = std::stoi(value);
        } else if (key == "out_csv") {
            cfg.out_csv = value;
        } else if (key == "out_svg") {
            cfg.out_svg = value;
        } else if (key.rfind("fix_", 0) == 0) {
            cfg.fixed[key.substr(4)] = std::stod(value);
        } else {
            throw ParameterError("config line " + std::to_string(lineno) + ": unknown key '" +
                                 key + "'");
        }
    }
    if (cfg.family.empty()) throw ParameterError("config is missing 'family'");
    if (cfg.param.empty()) throw ParameterError("config is missing 'param'");
    if (cfg.grid.empty()) throw ParameterError("config grid is empty");
    if (cfg.estimators.empty()) throw ParameterError("config lists no estimators");
    for (const auto& e : cfg.estimators) {
        if (e != "lser" && e != "galerkin" && e != "direct" && e != "spectral") {
            throw ParameterError("unknown estimator '" + e + "'");
        }
    }
    return cfg;
}

struct SweepRow {
    double value = 0.0;
    double h = 0.0;
    double gap = 0.0;
    std::map<std::string, DiffusivityReport> reports;
    std::string status = "ok";
    double time_ms = 0.0;
};

SweepRow run_sweep_point(const SweepConfig& cfg, double value) {
    SweepRow row;
    row.value = value;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        auto params = cfg.fixed;
        params[cfg.param] = value;
        const Profile profile = profile_from_params(cfg.family, params);
        row.h = flatness_h(profile).h;
        const bool needs_matrix =
            std::any_of(cfg.estimators.begin(), cfg.estimators.end(),
                        [](const std::string& e) { return e != "lser"; });
        const auto f = displacement_observable(cfg.a);
        std::optional<TransitionMatrix> P;
        if (needs_matrix) {
            P = cached_matrix(profile, cfg.M, cfg.N, cfg.mode, cfg.seed, 1);
            row.gap = spectral_summary(*P).gap;
        }
        for (const auto& est : cfg.estimators) {
            DiffusivityReport rep;
            try {
                if (est == "lser") {
                    rep = lser_sigma2(f, row.h, cfg.lser_n);
                } else if (est == "galerkin") {
                    rep = galerkin_sigma2(*P, f, cfg.n);
                } else if (est == "direct") {
                    rep = direct_sigma2(*P, f);
                } else {
                    rep = spectral_sigma2(*P, f);
                }
                rep.family = cfg.family;
                rep.params = params_string(profile);
                rep.h = row.h;
                row.reports[est] = rep;
            } catch (const std::exception& e) {
                row.status = est + ": " + e.what();
            }
        }
    } catch (const std::exception& e) {
        row.status = e.what();
    }
    row.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                            t0)
                      .count();
    return row;
}

void write_sweep_csv(const SweepConfig& cfg, const std::vector<SweepRow>& rows,
                     std::ostream& out) {
    out << "index," << cfg.param << ",h,gap";
    for (const auto& est : cfg.estimators) {
        out << ",sigma2_" << est << ",eta_" << est << ",theta_" << est;
    }
    out << ",status,time_ms\n";
    out.precision(12);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        out << i << "," << row.value << "," << row.h << "," << row.gap;
        for (const auto& est : cfg.estimators) {
            const auto it = row.reports.find(est);
            if (it == row.reports.end()) {
                out << ",,,";
            } else {
                out << "," << it->second.sigma2 << "," << it->second.eta << ","
                    << accommodation_equivalent(it->second.eta);
            }
        }
        out << "," << (row.status == "ok" ? "ok" : "error") << "," << row.time_ms << "\n";
    }
}

void write_sweep_svg(const SweepConfig& cfg, const std::vector<SweepRow>& rows,
                     const std::string& path) {
    // Minimal multi-line chart: gap plus eta per estimator vs the swept
    // parameter, each curve min-max normalized.
    const int W = 640, H = 400, pad = 40;
    std::ofstream out(path);
    if (!out) throw IoError("cannot open SVG output " + path);
    double x_lo = rows.front().value, x_hi = rows.back().value;
    if (x_hi == x_lo) x_hi = x_lo + 1.0;
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    std::vector<std::pair<std::string, std::function<std::optional<double>(const SweepRow&)>>>
        series;
    series.emplace_back("gap", [](const SweepRow& r) -> std::optional<double> { return r.gap; });
    for (const auto& est : cfg.estimators) {
        series.emplace_back("eta_" + est,
                            [est](const SweepRow& r) -> std::optional<double> {
                                const auto it = r.reports.find(est);
                                if (it == r.reports.end()) return std::nullopt;
                                return it->second.eta;
                            });
    }
    int color = 0;
    int legend_y = pad;
    for (const auto& [name, getter] : series) {
        double lo = 1e300, hi = -1e300;
        for (const auto& r : rows) {
            if (auto v = getter(r)) {
                lo = std::min(lo, *v);
                hi = std::max(hi, *v);
            }
        }
        if (hi <= lo) hi = lo + 1.0;
        std::ostringstream pts;
        for (const auto& r : rows) {
            const auto v = getter(r);
            if (!v) continue;
            const double px = pad + (r.value - x_lo) / (x_hi - x_lo) * (W - 2 * pad);
            const double py = H - pad - (*v - lo) / (hi - lo) * (H - 2 * pad);
            pts << px << "," << py << " ";
        }
        const char* c = colors[color % 5];
        out << "<polyline fill='none' stroke='" << c << "' stroke-width='1.5' points='"
            << pts.str() << "'/>\n";
        out << "<text x='" << W - pad - 150 << "' y='" << legend_y << "' fill='" << c
            << "' font-size='12'>" << name << " [" << lo << ", " << hi << "]</text>\n";
        legend_y += 16;
        ++color;
    }
    out << "<line x1='" << pad << "' y1='" << H - pad << "' x2='" << W - pad << "' y2='"
        << H - pad << "' stroke='black'/>\n";
    out << "<line x1='" << pad << "' y1='" << pad << "' x2='" << pad << "' y2='" << H - pad
        << "' stroke='black'/>\n";
    out << "<text x='" << W / 2 << "' y='" << H - 10 << "' font-size='12'>" << cfg.param
        << " in [" << x_lo << ", " << x_hi << "]</text>\n";
    out << "</svg>\n";
}

int run_sweep(const std::string& config_path) {
    const SweepConfig cfg = parse_sweep_config(config_path);
    std::vector<SweepRow> rows(cfg.grid.size());
    int workers = cfg.threads > 0 ? cfg.threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, static_cast<int>(cfg.grid.size())));
    std::mutex next_mutex;
    std::size_t next = 0;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(next_mutex);
                if (next >= cfg.grid.size()) return;
                i = next++;
            }
            rows[i] = run_sweep_point(cfg, cfg.grid[i]);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    if (cfg.out_csv.empty()) {
        write_sweep_csv(cfg, rows, std::cout);
    } else {
        std::ofstream out(cfg.out_csv);
        if (!out) throw IoError("cannot open CSV output " + cfg.out_csv);
        write_sweep_csv(cfg, rows, out);
    }
    if (!cfg.out_svg.empty()) write_sweep_svg(cfg, rows, cfg.out_svg);
    return 0;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Knudsen self-diffusivity of a gas in a channel with periodic wall "
                 "microstructure"};
    app.require_subcommand(1);

    // ---- h
    auto* cmd_h = app.add_subcommand("h", "print the flatness parameter of a profile");
    ProfileFlags h_flags;
    add_profile_flags(cmd_h, h_flags);

    // ---- matrix
    auto* cmd_matrix = app.add_subcommand("matrix", "build and persist a transition matrix");
    ProfileFlags m_flags;
    add_profile_flags(cmd_matrix, m_flags);
    int m_M = 400, m_N = 4000, m_threads = 0;
    std::string m_mode = "grid", m_out;
    std::uint64_t m_seed = 0;
    cmd_matrix->add_option("--M", m_M, "number of velocity bins");
    cmd_matrix->add_option("--N", m_N, "entry positions per row");
    cmd_matrix->add_option("--mode", m_mode, "grid | random");
    cmd_matrix->add_option("--seed", m_seed, "seed for random mode");
    cmd_matrix->add_option("--threads", m_threads, "worker threads (0 = all cores)");
    cmd_matrix->add_option("--out", m_out, "output path")->required();

    // ---- gap
    auto* cmd_gap = app.add_subcommand("gap", "print the spectral gap of a profile's operator");
    ProfileFlags g_flags;
    add_profile_flags(cmd_gap, g_flags);
    int g_M = 400, g_N = 4000, g_threads = 0;
    std::string g_mode = "grid", g_matrix;
    std::uint64_t g_seed = 0;
    cmd_gap->add_option("--M", g_M, "number of velocity bins");
    cmd_gap->add_option("--N", g_N, "entry positions per row");
    cmd_gap->add_option("--mode", g_mode, "grid | random");
    cmd_gap->add_option("--seed", g_seed, "seed for random mode");
    cmd_gap->add_option("--threads", g_threads, "worker threads");
    cmd_gap->add_option("--matrix", g_matrix, "use a previously saved matrix file");

    // ---- diffusivity
    auto* cmd_diff = app.add_subcommand("diffusivity", "estimate sigma^2 and eta");
    ProfileFlags d_flags;
    add_profile_flags(cmd_diff, d_flags);
    int d_M = 400, d_N = 4000, d_n = 200, d_lser_n = 500, d_threads = 0;
    double d_a = 50000.0;
    std::string d_mode = "grid", d_est = "direct";
    std::uint64_t d_seed = 0;
    cmd_diff->add_option("--M", d_M, "number of velocity bins");
    cmd_diff->add_option("--N", d_N, "entry positions per row");
    cmd_diff->add_option("--n", d_n, "Galerkin subspace dimension");
    cmd_diff->add_option("--lser-n", d_lser_n, "series truncation order");
    cmd_diff->add_option("--a", d_a, "observable cutoff");
    cmd_diff->add_option("--mode", d_mode, "grid | random");
    cmd_diff->add_option("--seed", d_seed, "seed for random mode");
    cmd_diff->add_option("--threads", d_threads, "worker threads");
    cmd_diff->add_option("--estimator", d_est, "lser | galerkin | direct | spectral | all");

    // ---- sweep
    auto* cmd_sweep = app.add_subcommand("sweep", "run a parameter sweep from a config file");
    std::string sweep_config;
    cmd_sweep->add_option("--config", sweep_config, "key = value config file")->required();

    // ---- trace-dump
    auto* cmd_trace = app.add_subcommand("trace-dump", "dump one cell trajectory as CSV");
    ProfileFlags t_flags;
    add_profile_flags(cmd_trace, t_flags);
    double t_r = 0.5, t_x = 0.3;
    cmd_trace->add_option("--r", t_r, "entry position on the reference line");
    cmd_trace->add_option("--x", t_x, "entry direction cosine in (-1, 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (cmd_h->parsed()) {
        std::printf("%.12g\n", flatness_h(resolve_profile(h_flags)).h);
        return 0;
    }
    if (cmd_matrix->parsed()) {
        const auto P = build_matrix(resolve_profile(m_flags), m_M, m_N, parse_mode(m_mode),
                                    m_seed, m_threads);
        save_matrix(P, m_out);
        if (P.quality_warning) {
            std::fprintf(stderr, "warning: %ld rejected trajectories\n", P.rejections);
        }
        std::printf("wrote %s (M=%d, N=%d)\n", m_out.c_str(), m_M, m_N);
        return 0;
    }
    if (cmd_gap->parsed()) {
        TransitionMatrix P = g_matrix.empty()
                                 ? cached_matrix(resolve_profile(g_flags), g_M, g_N,
                                                 parse_mode(g_mode), g_seed, g_threads)
                                 : load_matrix(g_matrix);
        const auto s = spectral_summary(P);
        std::printf("gap %.12g\nsecond_eigenvalue %.12g\nsymmetrization_defect %.3g\n", s.gap,
                    s.second_eigenvalue, s.symmetrization_defect);
        return 0;
    }
    if (cmd_diff->parsed()) {
        const Profile profile = resolve_profile(d_flags);
        const double h = flatness_h(profile).h;
        const auto f = displacement_observable(d_a);
        std::vector<std::string> ests;
        if (d_est == "all") {
            ests = {"lser", "galerkin", "direct", "spectral"};
        } else {
            ests = {d_est};
        }
        std::optional<TransitionMatrix> P;
        for (const auto& e : ests) {
            if (e != "lser") {
                P = cached_matrix(profile, d_M, d_N, parse_mode(d_mode), d_seed, d_threads);
                break;
            }
        }
        std::cout << DiffusivityReport::csv_header() << "\n";
        for (const auto& e : ests) {
            DiffusivityReport rep;
            if (e == "lser") {
                rep = lser_sigma2(f, h, d_lser_n);
            } else if (e == "galerkin") {
                rep = galerkin_sigma2(*P, f, d_n);
            } else if (e == "direct") {
                rep = direct_sigma2(*P, f);
            } else if (e == "spectral") {
                rep = spectral_sigma2(*P, f);
            } else {
                throw ParameterError("unknown estimator '" + e + "'");
            }
            rep.family = profile.family_tag;
            rep.params = params_string(profile);
            rep.h = h;
            std::cout << rep.csv_row() << "\n";
        }
        return 0;
    }
    if (cmd_sweep->parsed()) return run_sweep(sweep_config);
    if (cmd_trace->parsed()) {
        const auto traj = trace_cell(resolve_profile(t_flags), t_r, t_x);
        if (traj.status != TraceStatus::ok) {
            throw NumericError("trajectory rejected (tangency or corner); try a nearby entry");
        }
        std::cout << trajectory_to_csv(traj);
        return 0;
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const ParameterError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const GeometryError& e) {
        std::fprintf(stderr, "geometry error: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
