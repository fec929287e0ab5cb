#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>

#include "knudsen/errors.hpp"
#include "knudsen/geometry.hpp"
#include "knudsen/markov.hpp"

using namespace knudsen;

namespace {

TransitionMatrix two_state(double p, double q) {
    TransitionMatrix P;
    P.grid = VelocityGrid::uniform(2);
    P.entries = Eigen::MatrixXd(2, 2);
    P.entries << 1.0 - p, p, q, 1.0 - q;
    P.profile_tag = "toy";
    return P;
}

} // namespace

TEST_CASE("uniform grid partitions (-1, 1) with centered midpoints") {
    const auto g = VelocityGrid::uniform(5);
    CHECK(g.edges.front() == doctest::Approx(-1.0));
    CHECK(g.edges.back() == doctest::Approx(1.0));
    CHECK(g.midpoints[2] == doctest::Approx(0.0));
    CHECK(g.bin_of(-0.999) == 0);
    CHECK(g.bin_of(0.999) == 4);
    CHECK(g.bin_of(0.0) == 2);
    CHECK_THROWS_AS(VelocityGrid::uniform(1), ParameterError);
}

TEST_CASE("flat profile yields exactly the identity matrix") {
    const auto P = build_matrix(make_flat(), 20, 50);
    CHECK(P.entries == Eigen::MatrixXd::Identity(20, 20));
    CHECK(P.rejections == 0);
}

TEST_CASE("rows are probability distributions") {
    const auto P = build_matrix(make_bumps(0.5), 40, 400);
    for (int i = 0; i < 40; ++i) {
        CHECK(P.entries.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(P.entries.row(i).minCoeff() >= 0.0);
    }
}

TEST_CASE("uniform measure is nearly stationary and the matrix nearly symmetric") {
    const auto P = build_matrix(make_bumps(1.0), 40, 4000);
    CHECK(stationarity_defect(P) < 0.1);
    const auto s = spectral_summary(P);
    CHECK(s.symmetrization_defect < 0.05);
}

TEST_CASE("deterministic grid sampling reproduces itself; seeds differ slightly") {
    const auto A = build_matrix(make_bumps(0.7), 16, 500);
    const auto B = build_matrix(make_bumps(0.7), 16, 500);
    CHECK((A.entries - B.entries).cwiseAbs().maxCoeff() == 0.0);

    const auto C =
        build_matrix(make_bumps(0.7), 16, 1000, SamplingMode::stratified_random, 1);
    const auto D =
        build_matrix(make_bumps(0.7), 16, 1000, SamplingMode::stratified_random, 1);
    const auto E =
        build_matrix(make_bumps(0.7), 16, 1000, SamplingMode::stratified_random, 2);
    CHECK((C.entries - D.entries).cwiseAbs().maxCoeff() == 0.0);
    CHECK((C.entries - E.entries).cwiseAbs().maxCoeff() > 0.0);
    CHECK((C.entries - E.entries).cwiseAbs().maxCoeff() < 3.0 / std::sqrt(1000.0));
}

TEST_CASE("diffuse reference is rank one with unit gap") {
    const auto P = diffuse_reference(30);
    CHECK(P.entries(3, 17) == doctest::Approx(1.0 / 30.0));
    const auto s = spectral_summary(P);
    CHECK(s.gap == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.eigenvalues.back() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-state closed form: top eigenvalue 1, second 1 - p - q") {
    const double p = 0.3, q = 0.3;
    const auto s = spectral_summary(two_state(p, q));
    CHECK(s.eigenvalues.back() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.second_eigenvalue == doctest::Approx(std::abs(1.0 - p - q)).epsilon(1e-12));
    CHECK(s.gap == doctest::Approx(p + q).epsilon(1e-12));
}

TEST_CASE("spectral measure satisfies Parseval's identity") {
    const auto P = build_matrix(make_bumps(1.2), 50, 500);
    Observable f;
    f.eval = [](double x) { return x * x * x; };
    const auto atoms = spectral_measure(P, f);
    const Eigen::VectorXd fv = bin_values_centered(f, P.grid);
    double mass = 0.0;
    for (const auto& a : atoms) mass += a.weight;
    CHECK(mass == doctest::Approx(pi_dot(fv, fv)).epsilon(1e-10));
}

TEST_CASE("specular mixture shifts the spectrum affinely") {
    const auto P = build_matrix(make_bumps(2.0), 30, 1000);
    const double alpha = 0.4;
    const auto mixed = mixture_operator(P, alpha);
    const auto s1 = spectral_summary(P);
    const auto s2 = spectral_summary(mixed);
    for (std::size_t k = 0; k < s1.eigenvalues.size(); ++k) {
        CHECK(s2.eigenvalues[k] ==
              doctest::Approx(alpha * s1.eigenvalues[k] + 1.0 - alpha).epsilon(1e-10));
    }
    CHECK_THROWS_AS(mixture_operator(P, 0.0), ParameterError);
    CHECK_THROWS_AS(mixture_operator(P, 1.2), ParameterError);
}

TEST_CASE("matrix files round-trip bit-exactly") {
    const auto P = build_matrix(make_mixture(0.5), 12, 300, SamplingMode::stratified_random, 9);
    const std::string path = "matrix_roundtrip_test.csv";
    save_matrix(P, path);
    const auto Q = load_matrix(path);
    CHECK((P.entries - Q.entries).cwiseAbs().maxCoeff() == 0.0);
    CHECK(Q.positions_per_row == 300);
    CHECK(Q.seed == 9);
    CHECK(Q.mode == SamplingMode::stratified_random);
    CHECK(Q.profile_tag == P.profile_tag);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_matrix("does_not_exist.csv"), IoError);
}

TEST_CASE("near-diffuse semicircle rows approximate the uniform law") {
    // Kolmogorov-style distance between one row and the uniform distribution.
    const int M = 40;
    const auto P = build_matrix(make_bumps(2.0), M, 5000);
    const int mid = M / 2;
    double cdf = 0.0, worst = 0.0;
    for (int j = 0; j < M; ++j) {
        cdf += P.entries(mid, j);
        worst = std::max(worst, std::abs(cdf - static_cast<double>(j + 1) / M));
    }
    CHECK(worst < 0.1);
}
