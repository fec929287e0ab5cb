#include <doctest.h>

#include <cmath>

#include "knudsen/errors.hpp"
#include "knudsen/geometry.hpp"

using namespace knudsen;

TEST_CASE("flatness closed form for circular bumps: h = K^2/12") {
    for (double K : {0.1, 0.5, 1.0, 2.0}) {
        const auto res = flatness_h(make_bumps(K));
        CHECK(res.h == doctest::Approx(K * K / 12.0).epsilon(1e-9));
        CHECK(res.quadrature_error_estimate < 1e-10);
    }
}

TEST_CASE("flatness closed form for flat/semicircle mixture: h = alpha/3") {
    for (double alpha : {0.25, 0.5, 1.0}) {
        const auto res = flatness_h(make_mixture(alpha));
        CHECK(res.h == doctest::Approx(alpha / 3.0).epsilon(1e-9));
    }
}

TEST_CASE("flat profile has zero flatness") {
    CHECK(flatness_h(make_flat()).h == 0.0);
}

TEST_CASE("two-bump flatness: four quarter-width arcs give (K_big^2 + K_small^2)/24") {
    // Each arc of chord w and radius R contributes w^3/(12 R^2) = w K^2/12
    // with K = w/R; two big and two small arcs of w = 1/4 each.
    for (double d : {0.0, 0.2, -0.2}) {
        const auto res = flatness_h(make_two_bumps(d, 2.0, 1.0));
        CHECK(res.h == doctest::Approx((4.0 + 1.0) / 24.0).epsilon(1e-9));
    }
}

TEST_CASE("wall profile reduces to plain bumps at zero wall width") {
    const auto wall = make_bumps_with_wall(0.0, 0.0, 2.0); // chord 1, K = 1/2
    const auto bumps = make_bumps(0.5);
    REQUIRE(wall.pieces.size() == 1);
    CHECK(flatness_h(wall).h == doctest::Approx(flatness_h(bumps).h).epsilon(1e-12));
}

TEST_CASE("wall profile flatness: only the arc contributes, h = chord^3/(12 R^2)") {
    const double w = 0.5, d = 0.2, R = 0.5;
    const double chord = 1.0 - w;
    const auto res = flatness_h(make_bumps_with_wall(w, d, R));
    CHECK(res.h == doctest::Approx(chord * chord * chord / (12.0 * R * R)).epsilon(1e-9));
    CHECK(make_bumps_with_wall(w, d, R).y_max == doctest::Approx(d));
}

TEST_CASE("inward normal on an arc points toward the center") {
    const auto p = make_bumps(1.0);
    const auto& arc = std::get<Arc>(p.pieces[0]);
    for (double frac : {0.2, 0.5, 0.8}) {
        const double a = arc.angle0 + frac * (arc.angle1 - arc.angle0);
        const Vec2 pt = arc.point_at(a);
        const Vec2 n = normal_at(p, pt);
        const Vec2 expect = (arc.center - pt).normalized();
        CHECK(n.x == doctest::Approx(expect.x).epsilon(1e-12));
        CHECK(n.y == doctest::Approx(expect.y).epsilon(1e-12));
    }
}

TEST_CASE("inward normal of the flat profile is vertical") {
    const auto p = make_flat();
    const Vec2 n = normal_at(p, {0.5, 0.0});
    CHECK(n.x == doctest::Approx(0.0));
    CHECK(n.y == doctest::Approx(1.0));
}

TEST_CASE("normal at a junction or off the boundary raises a geometry error") {
    const auto p = make_mixture(0.5);
    CHECK_THROWS_AS(normal_at(p, {0.25, 0.0}), GeometryError); // segment/arc junction
    CHECK_THROWS_AS(normal_at(p, {0.5, 0.7}), GeometryError);  // interior point
}

TEST_CASE("family constructors reject out-of-range parameters") {
    CHECK_THROWS_AS(make_bumps(0.0), ParameterError);
    CHECK_THROWS_AS(make_bumps(2.5), ParameterError);
    CHECK_THROWS_AS(make_bumps(-1.0), ParameterError);
    CHECK_THROWS_AS(make_mixture(0.0), ParameterError);
    CHECK_THROWS_AS(make_mixture(1.5), ParameterError);
    CHECK_THROWS_AS(make_two_bumps(0.6), GeometryError);
    CHECK_THROWS_AS(make_bumps_with_wall(0.5, 0.1, 0.1), ParameterError); // R < chord/2
    CHECK_THROWS_AS(make_bumps_with_wall(0.5, 1.5, 0.5), GeometryError);
}

TEST_CASE("validation rejects broken chains and self-intersections") {
    Profile broken;
    broken.pieces.push_back(Segment{{0.0, 0.0}, {0.4, 0.0}});
    broken.pieces.push_back(Segment{{0.5, 0.0}, {1.0, 0.0}});
    CHECK_THROWS_AS(validate_profile(broken), GeometryError);

    // Zigzag whose first and third pieces cross each other.
    Profile crossing;
    crossing.pieces.push_back(Segment{{0.0, 0.0}, {0.5, -0.5}});
    crossing.pieces.push_back(Segment{{0.5, -0.5}, {0.1, -0.4}});
    crossing.pieces.push_back(Segment{{0.1, -0.4}, {0.6, 0.0}});
    crossing.pieces.push_back(Segment{{0.6, 0.0}, {1.0, 0.0}});
    CHECK_THROWS_AS(validate_profile(crossing), GeometryError);
}

TEST_CASE("all families pass validation") {
    CHECK_NOTHROW(validate_profile(make_flat()));
    CHECK_NOTHROW(validate_profile(make_bumps(1.3)));
    CHECK_NOTHROW(validate_profile(make_mixture(0.7)));
    CHECK_NOTHROW(validate_profile(make_two_bumps(0.25)));
    CHECK_NOTHROW(validate_profile(make_bumps_with_wall(0.3, -0.1, 0.6)));
}

TEST_CASE("text serialization round-trips family profiles") {
    for (const Profile& p :
         {make_bumps(0.7), make_mixture(0.4), make_two_bumps(0.1, 1.5, 0.5),
          make_bumps_with_wall(0.2, 0.15, 0.8)}) {
        const Profile q = profile_from_text(profile_to_text(p));
        CHECK(q.family_tag == p.family_tag);
        CHECK(q.pieces.size() == p.pieces.size());
        CHECK(flatness_h(q).h == doctest::Approx(flatness_h(p).h).epsilon(1e-14));
    }
}

TEST_CASE("text serialization round-trips explicit piece lists") {
    Profile p = make_bumps(1.0);
    p.family_tag = "custom";
    p.parameters.clear();
    const Profile q = profile_from_text(profile_to_text(p));
    CHECK(q.pieces.size() == 1);
    CHECK(flatness_h(q).h == doctest::Approx(1.0 / 12.0).epsilon(1e-9));
}

TEST_CASE("parameter dispatch rejects unknown keys and families") {
    CHECK_THROWS_AS(profile_from_params("bumps", {{"K", 0.5}, {"extra", 1.0}}), ParameterError);
    CHECK_THROWS_AS(profile_from_params("bumps", {}), ParameterError);
    CHECK_THROWS_AS(profile_from_params("nonsense", {{"K", 0.5}}), ParameterError);
    CHECK(profile_from_params("two_bumps", {{"d", 0.0}}).parameters.at("K_big") == 2.0);
}

TEST_CASE("reference line sits at the top of the boundary") {
    CHECK(make_flat().y_max == 0.0);
    CHECK(make_bumps(2.0).y_max == doctest::Approx(0.0));
    CHECK(make_two_bumps(0.2).y_max == doctest::Approx(0.2));
    CHECK(make_two_bumps(-0.2).y_max == doctest::Approx(0.0));
}
