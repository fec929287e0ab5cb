#include "knudsen/billiard.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "knudsen/errors.hpp"

namespace knudsen {

namespace {

struct PieceHit {
    double t = std::numeric_limits<double>::infinity();
    Vec2 point;
    int piece_index = -1;
    bool near_corner = false;
};

Vec2 segment_normal(const Segment& seg) {
    const Vec2 u = (seg.p1 - seg.p0).normalized();
    return {-u.y, u.x};
}

Vec2 arc_normal(const Arc& arc, double angle) {
    Vec2 tangent{-std::sin(angle), std::cos(angle)};
    if (arc.angle1 < arc.angle0) tangent = tangent * -1.0;
    return {-tangent.y, tangent.x};
}

// Intersection parameter of the ray with one piece, if any, with the corner
// flag set when the hit lands within kCornerTol arc-length of a junction.
void hit_segment(const Segment& seg, Vec2 o, Vec2 v, int index, PieceHit& best) {
    const Vec2 d = seg.p1 - seg.p0;
    const double denom = v.x * d.y - v.y * d.x;
    if (std::abs(denom) < 1e-15) return; // parallel; grazing handled by tangency check
    const Vec2 w = seg.p0 - o;
    const double t = (w.x * d.y - w.y * d.x) / denom;
    const double s = (w.x * v.y - w.y * v.x) / denom;
    if (t <= kTravelEps || s < 0.0 || s > 1.0) return;
    if (t >= best.t) return;
    const double len = d.norm();
    best.t = t;
    best.point = {seg.p0.x + s * d.x, seg.p0.y + s * d.y};
    best.piece_index = index;
    best.near_corner = (s * len < kCornerTol) || ((1.0 - s) * len < kCornerTol);
}

void hit_arc(const Arc& arc, Vec2 o, Vec2 v, int index, PieceHit& best) {
    const Vec2 w = o - arc.center;
    const double b = w.dot(v);
    double disc = b * b - (w.dot(w) - arc.radius * arc.radius);
    if (disc < -1e-14) return;
    disc = std::max(disc, 0.0);
    const double sq = std::sqrt(disc);
    const double lo = std::min(arc.angle0, arc.angle1);
    const double hi = std::max(arc.angle0, arc.angle1);
    for (double t : {-b - sq, -b + sq}) {
        if (t <= kTravelEps || t >= best.t) continue;
        const Vec2 p{o.x + t * v.x, o.y + t * v.y};
        double a = std::atan2(p.y - arc.center.y, p.x - arc.center.x);
        while (a < lo - 1e-12) a += 2.0 * M_PI;
        if (a > hi + 1e-12) continue;
        best.t = t;
        best.point = p;
        best.piece_index = index;
        best.near_corner = ((a - lo) * arc.radius < kCornerTol) ||
                           ((hi - a) * arc.radius < kCornerTol);
    }
}

Vec2 normal_of_piece(const BoundaryPiece& piece, Vec2 point) {
    if (const auto* seg = std::get_if<Segment>(&piece)) return segment_normal(*seg);
    const auto& arc = std::get<Arc>(piece);
    const double a = std::atan2(point.y - arc.center.y, point.x - arc.center.x);
    return arc_normal(arc, a);
}

// Piece under the entry point, for profiles whose boundary touches the
// reference line over positive measure (flat cell, raised wall tops).
std::optional<int> piece_at_point(const Profile& profile, Vec2 p) {
    for (std::size_t i = 0; i < profile.pieces.size(); ++i) {
        if (const auto* seg = std::get_if<Segment>(&profile.pieces[i])) {
            const Vec2 d = seg->p1 - seg->p0;
            const double len = d.norm();
            const Vec2 u{d.x / len, d.y / len};
            const Vec2 rel = p - seg->p0;
            const double along = rel.dot(u);
            const double off = std::abs(rel.x * u.y - rel.y * u.x);
            if (off < 1e-12 && along > kCornerTol && along < len - kCornerTol) {
                return static_cast<int>(i);
            }
        } else {
            const auto& arc = std::get<Arc>(profile.pieces[i]);
            const Vec2 rel = p - arc.center;
            if (std::abs(rel.norm() - arc.radius) > 1e-12) continue;
            double a = std::atan2(rel.y, rel.x);
            const double lo = std::min(arc.angle0, arc.angle1);
            const double hi = std::max(arc.angle0, arc.angle1);
            while (a < lo - 1e-12) a += 2.0 * M_PI;
            if (a > hi + 1e-12) continue;
            if ((a - lo) * arc.radius > kCornerTol && (hi - a) * arc.radius > kCornerTol) {
                return static_cast<int>(i);
            }
        }
    }
    return std::nullopt;
}

} // namespace

Vec2 reflect(Vec2 direction, Vec2 normal) {
    const double d = direction.dot(normal);
    if (std::abs(d) < kTangencyTol) {
        throw NumericError("reflect: near-tangent incidence");
    }
    return direction - normal * (2.0 * d);
}

HitResult first_hit(const Profile& profile, Vec2 origin, Vec2 direction) {
    HitResult result;
    double best_t = std::numeric_limits<double>::infinity();

    // Reference line: upward crossings only; t = 0 allowed so a reflection at
    // a boundary point touching the line exits immediately.
    if (direction.y > 0.0) {
        const double t = (profile.y_max - origin.y) / direction.y;
        if (t >= 0.0 && t < best_t) {
            best_t = t;
            result.kind = HitResult::Kind::reference_exit;
            result.t = t;
            result.point = {origin.x + t * direction.x, profile.y_max};
        }
    }
    // Vertical side lines r = 0 and r = period.
    if (direction.x != 0.0) {
        const double side = direction.x > 0.0 ? profile.period : 0.0;
        const double t = (side - origin.x) / direction.x;
        if (t > kTravelEps && t < best_t) {
            best_t = t;
            result.kind = HitResult::Kind::side_wrap;
            result.t = t;
            result.point = {side, origin.y + t * direction.y};
            result.wrap_direction = direction.x > 0.0 ? 1 : -1;
        }
    }
    PieceHit hit;
    hit.t = best_t;
    for (std::size_t i = 0; i < profile.pieces.size(); ++i) {
        if (const auto* seg = std::get_if<Segment>(&profile.pieces[i])) {
            hit_segment(*seg, origin, direction, static_cast<int>(i), hit);
        } else {
            hit_arc(std::get<Arc>(profile.pieces[i]), origin, direction, static_cast<int>(i), hit);
        }
    }
    if (hit.piece_index >= 0 && hit.t < best_t) {
        if (hit.near_corner) {
            result.kind = HitResult::Kind::corner;
        } else {
            result.kind = HitResult::Kind::boundary;
        }
        result.t = hit.t;
        result.point = hit.point;
        result.piece_index = hit.piece_index;
        result.wrap_direction = 0;
    }
    if (result.kind == HitResult::Kind::leak && best_t == std::numeric_limits<double>::infinity()) {
        return result; // leak; caller raises
    }
    return result;
}

CellTrajectory trace_cell(const Profile& profile, double r, double x, int max_collisions) {
    if (!(x > -1.0 && x < 1.0)) {
        throw ParameterError("trace_cell: direction cosine must lie in (-1, 1)");
    }
    r = r - profile.period * std::floor(r / profile.period);

    CellTrajectory traj;
    traj.entry = {r, x};
    Vec2 origin{r, profile.y_max};
    Vec2 v{x, -std::sqrt((1.0 - x) * (1.0 + x))};

    // Entry point sitting on a boundary piece: collide at t = 0.
    if (auto idx = piece_at_point(profile, origin)) {
        const Vec2 n = normal_of_piece(profile.pieces[static_cast<std::size_t>(*idx)], origin);
        const double d = v.dot(n);
        if (std::abs(d) < kTangencyTol) {
            traj.status = TraceStatus::tangency;
            return traj;
        }
        if (d < 0.0) {
            v = v - n * (2.0 * d);
            traj.collisions.push_back({origin, *idx});
        }
    }

    for (int events = 0; events < max_collisions; ++events) {
        const HitResult hit = first_hit(profile, origin, v);
        switch (hit.kind) {
        case HitResult::Kind::reference_exit: {
            double r_out = hit.point.x;
            r_out -= profile.period * std::floor(r_out / profile.period);
            traj.exit = {r_out, v.x};
            if (traj.collisions.empty()) {
                // A trajectory that never met the wall re-crossed the line at
                // its start point; treat as degenerate.
                traj.status = TraceStatus::tangency;
            }
            return traj;
        }
        case HitResult::Kind::side_wrap:
            origin = hit.point;
            origin.x -= hit.wrap_direction * profile.period;
            ++traj.wraps;
            break;
        case HitResult::Kind::boundary: {
            const Vec2 n =
                normal_of_piece(profile.pieces[static_cast<std::size_t>(hit.piece_index)],
                                hit.point);
            const double d = v.dot(n);
            if (std::abs(d) < kTangencyTol) {
                traj.status = TraceStatus::tangency;
                return traj;
            }
            if (d > 0.0) {
                // Back-face hit: numerically degenerate near a junction.
                traj.status = TraceStatus::corner;
                return traj;
            }
            v = v - n * (2.0 * d);
            origin = hit.point;
            traj.collisions.push_back({hit.point, hit.piece_index});
            break;
        }
        case HitResult::Kind::corner:
            traj.status = TraceStatus::corner;
            return traj;
        case HitResult::Kind::leak:
            throw GeometryError("trace_cell: ray escaped the cell (geometry leak)");
        }
    }
    traj.status = TraceStatus::nonterminating;
    throw GeometryError("trace_cell: collision cap exceeded (nonterminating trajectory)");
}

double single_collision_fraction(const Profile& profile, double x, int N) {
    if (N < 1) throw ParameterError("single_collision_fraction: N must be >= 1");
    int single = 0;
    for (int i = 0; i < N; ++i) {
        const double r = (i + 0.5) / N * profile.period;
        CellTrajectory traj;
        bool ok = false;
        for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
            traj = trace_cell(profile, r + attempt * 3e-9, x);
            ok = traj.status == TraceStatus::ok;
        }
        if (!ok) throw NumericError("single_collision_fraction: persistent rejection");
        if (traj.collisions.size() == 1) ++single;
    }
    return static_cast<double>(single) / N;
}

std::string trajectory_to_csv(const CellTrajectory& trajectory) {
    std::ostringstream out;
    out << "event,kind,x,y,piece\n";
    out << "0,entry," << trajectory.entry.r << "," << "" << ",\n";
    int k = 1;
    for (const auto& c : trajectory.collisions) {
        out << k++ << ",collision," << c.point.x << "," << c.point.y << "," << c.piece_index
            << "\n";
    }
    out << k << ",exit," << trajectory.exit.r << ",," << "\n";
    return out.str();
}

} // namespace knudsen
