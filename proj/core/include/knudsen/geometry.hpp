#pragma once

#include <cmath>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace knudsen {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    Vec2 normalized() const {
        const double n = norm();
        return {x / n, y / n};
    }
};

/// Circular arc traversed from angle0 to angle1 around `center`.
/// Angles are in radians; the traversal may be increasing or decreasing.
struct Arc {
    Vec2 center;
    double radius = 0.0;
    double angle0 = 0.0;
    double angle1 = 0.0;

    Vec2 point_at(double angle) const {
        return {center.x + radius * std::cos(angle), center.y + radius * std::sin(angle)};
    }
    Vec2 start() const { return point_at(angle0); }
    Vec2 end() const { return point_at(angle1); }
};

struct Segment {
    Vec2 p0;
    Vec2 p1;

    Vec2 start() const { return p0; }
    Vec2 end() const { return p1; }
    bool vertical() const { return p0.x == p1.x; }
};

using BoundaryPiece = std::variant<Arc, Segment>;

Vec2 piece_start(const BoundaryPiece& p);
Vec2 piece_end(const BoundaryPiece& p);

/// One periodic cell of the wall microstructure. Pieces chain continuously
/// in order of increasing horizontal position; the last endpoint sits one
/// period to the right of the first. The gas occupies the region above the
/// boundary, and the reference line is placed at y = y_max.
struct Profile {
    std::vector<BoundaryPiece> pieces;
    double period = 1.0;
    bool symmetric = false;
    double y_max = 0.0;
    std::string family_tag;
    std::map<std::string, double> parameters;
};

struct FlatnessResult {
    double h = 0.0;
    double quadrature_error_estimate = 0.0;
};

/// Single horizontal segment; the degenerate all-specular baseline.
Profile make_flat();

/// One circular bump per period with dimensionless curvature K = period/R,
/// 0 < K <= 2 (K = 2 is a full semicircle).
Profile make_bumps(double K);

/// Semicircular bump occupying fraction `alpha` of the opening, the rest flat.
Profile make_mixture(double alpha);

/// Two competing curvatures per period (mirror-duplicated so the cell stays
/// bilaterally symmetric); the lower-curvature pair is shifted by `d`.
Profile make_two_bumps(double d, double K_big = 2.0, double K_small = 1.0);

/// Bumps flanking a flat-top wall of relative width `w` and height `d` with
/// vertical sides; the curved parts have radius R.
Profile make_bumps_with_wall(double w, double d, double R);

/// Flatness parameter h = integral of the squared horizontal normal component
/// over one period, in the graph parametrization. Vertical segments carry zero
/// horizontal measure and are skipped.
FlatnessResult flatness_h(const Profile& profile);

/// Inward unit normal (pointing into the gas region) at a boundary point.
/// Throws GeometryError if the point is at (or within tolerance of) a corner.
Vec2 normal_at(const Profile& profile, Vec2 point);

/// Checks piece chaining, periodic closure and simplicity; throws GeometryError.
void validate_profile(const Profile& profile);

/// Key-value text serialization (family + parameters, or explicit piece list).
std::string profile_to_text(const Profile& profile);
Profile profile_from_text(const std::string& text);

/// Builds a profile from parsed key-value pairs (family dispatch).
Profile profile_from_params(const std::string& family,
                            const std::map<std::string, double>& params);

inline constexpr double kCornerTol = 1e-12;

} // namespace knudsen
