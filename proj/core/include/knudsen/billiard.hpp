#pragma once

#include <vector>

#include "knudsen/geometry.hpp"

namespace knudsen {

inline constexpr double kTangencyTol = 1e-12;
inline constexpr double kTravelEps = 1e-12;
inline constexpr int kMaxCollisions = 10000;

enum class TraceStatus { ok, tangency, corner, nonterminating };

struct ParticleState {
    double r = 0.0; // position on the torus [0, period)
    double x = 0.0; // direction cosine in (-1, 1)
};

struct CollisionEvent {
    Vec2 point;
    int piece_index = -1;
};

struct CellTrajectory {
    ParticleState entry;
    ParticleState exit;
    std::vector<CollisionEvent> collisions;
    int wraps = 0;
    TraceStatus status = TraceStatus::ok;
};

/// Specular reflection v - 2<v,n>n. Throws NumericError on near-tangent input.
Vec2 reflect(Vec2 direction, Vec2 normal);

struct HitResult {
    enum class Kind { boundary, side_wrap, reference_exit, corner, leak };
    Kind kind = Kind::leak;
    Vec2 point;
    int piece_index = -1;
    double t = 0.0;
    int wrap_direction = 0; // -1 crossed r = 0, +1 crossed r = period
};

/// Earliest intersection (t > kTravelEps) of the ray with the boundary pieces,
/// the two vertical cell sides, or the reference line y = y_max. Closed-form
/// quadratic solve for arcs, linear for segments.
HitResult first_hit(const Profile& profile, Vec2 origin, Vec2 direction);

/// Traces one reference-line-to-reference-line excursion through the cell.
/// Rejected (corner/tangency) trajectories are reported via `status`;
/// callers resample. Exceeding the collision cap throws GeometryError.
CellTrajectory trace_cell(const Profile& profile, double r, double x,
                          int max_collisions = kMaxCollisions);

/// Fraction of N uniform-grid entry positions whose trace collides exactly
/// once with the cell boundary. Rejected trajectories are resampled nearby.
double single_collision_fraction(const Profile& profile, double x, int N);

/// Writes one CSV row per trajectory event (for debugging / inspection).
std::string trajectory_to_csv(const CellTrajectory& trajectory);

} // namespace knudsen
