#include "knudsen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "knudsen/errors.hpp"

namespace knudsen {

namespace {

constexpr double kChainTol = 1e-12;

// Bump arc over the chord [r0, r0 + w] at height y0, bulging downward into
// the wall. The center sits above the chord; the traversal angle increases
// left to right along the lower part of the circle.
Arc make_bump_arc(double r0, double w, double R, double y0) {
    const double half = w / 2.0;
    const double q = std::sqrt(std::max(R * R - half * half, 0.0));
    const double t = std::atan2(q, half);
    Arc arc;
    arc.center = {r0 + half, y0 + q};
    arc.radius = R;
    arc.angle0 = t - M_PI;
    arc.angle1 = -t;
    return arc;
}

double piece_y_max(const BoundaryPiece& p) {
    if (const auto* seg = std::get_if<Segment>(&p)) {
        return std::max(seg->p0.y, seg->p1.y);
    }
    const auto& arc = std::get<Arc>(p);
    double top = std::max(arc.start().y, arc.end().y);
    // Interior extremum at angle pi/2 (mod 2pi) if the span contains it.
    const double lo = std::min(arc.angle0, arc.angle1);
    const double hi = std::max(arc.angle0, arc.angle1);
    for (double a = M_PI / 2.0 - 4.0 * M_PI; a <= hi; a += 2.0 * M_PI) {
        if (a >= lo && a <= hi) top = std::max(top, arc.center.y + arc.radius);
    }
    return top;
}

void finalize(Profile& p) {
    double top = -1e300;
    for (const auto& piece : p.pieces) top = std::max(top, piece_y_max(piece));
    p.y_max = top;
    validate_profile(p);
}

// Squared horizontal component of the unit normal, as a function of the
// horizontal position r, for a piece parametrized as a graph.
double nbar_sq_arc(const Arc& arc, double r) {
    const double u = (r - arc.center.x) / arc.radius;
    return u * u;
}

struct AdaptiveResult {
    double value = 0.0;
    double error = 0.0;
};

template <typename F>
AdaptiveResult simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                           double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double fl = f(0.5 * (a + m));
    const double fr = f(0.5 * (m + b));
    const double left = (m - a) / 6.0 * (fa + 4.0 * fl + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * fr + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return {left + right + delta / 15.0, std::abs(delta) / 15.0};
    }
    auto rl = simpson_rec(f, a, m, fa, fl, fm, left, tol / 2.0, depth - 1);
    auto rr = simpson_rec(f, m, b, fm, fr, fb, right, tol / 2.0, depth - 1);
    return {rl.value + rr.value, rl.error + rr.error};
}

template <typename F>
AdaptiveResult adaptive_simpson(const F& f, double a, double b, double tol) {
    if (b <= a) return {0.0, 0.0};
    const double fa = f(a);
    const double fm = f(0.5 * (a + b));
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    auto orient = [](Vec2 p, Vec2 q, Vec2 r) {
        return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    };
    const double o1 = orient(a, b, c);
    const double o2 = orient(a, b, d);
    const double o3 = orient(c, d, a);
    const double o4 = orient(c, d, b);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
}

std::vector<Vec2> sample_piece(const BoundaryPiece& p, int n) {
    std::vector<Vec2> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    if (const auto* seg = std::get_if<Segment>(&p)) {
        for (int i = 0; i <= n; ++i) {
            const double t = static_cast<double>(i) / n;
            out.push_back({seg->p0.x + t * (seg->p1.x - seg->p0.x),
                           seg->p0.y + t * (seg->p1.y - seg->p0.y)});
        }
    } else {
        const auto& arc = std::get<Arc>(p);
        for (int i = 0; i <= n; ++i) {
            const double t = static_cast<double>(i) / n;
            out.push_back(arc.point_at(arc.angle0 + t * (arc.angle1 - arc.angle0)));
        }
    }
    return out;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

Vec2 piece_start(const BoundaryPiece& p) {
    return std::visit([](const auto& q) { return q.start(); }, p);
}

Vec2 piece_end(const BoundaryPiece& p) {
    return std::visit([](const auto& q) { return q.end(); }, p);
}

Profile make_flat() {
    Profile p;
    p.pieces.push_back(Segment{{0.0, 0.0}, {1.0, 0.0}});
    p.symmetric = true;
    p.family_tag = "flat";
    finalize(p);
    return p;
}

Profile make_bumps(double K) {
    if (!(K > 0.0 && K <= 2.0)) {
        throw ParameterError("bumps: curvature K must satisfy 0 < K <= 2, got " +
                             std::to_string(K));
    }
    Profile p;
    p.pieces.push_back(make_bump_arc(0.0, 1.0, 1.0 / K, 0.0));
    p.symmetric = true;
    p.family_tag = "bumps";
    p.parameters["K"] = K;
    finalize(p);
    return p;
}

Profile make_mixture(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw ParameterError("mixture: alpha must satisfy 0 < alpha <= 1, got " +
                             std::to_string(alpha));
    }
    Profile p;
    const double flat = (1.0 - alpha) / 2.0;
    if (flat > 0.0) p.pieces.push_back(Segment{{0.0, 0.0}, {flat, 0.0}});
    p.pieces.push_back(make_bump_arc(flat, alpha, alpha / 2.0, 0.0));
    if (flat > 0.0) p.pieces.push_back(Segment{{flat + alpha, 0.0}, {1.0, 0.0}});
    p.symmetric = true;
    p.family_tag = "mixture";
    p.parameters["alpha"] = alpha;
    finalize(p);
    return p;
}

Profile make_two_bumps(double d, double K_big, double K_small) {
    for (double K : {K_big, K_small}) {
        if (!(K > 0.0 && K <= 2.0)) {
            throw ParameterError("two_bumps: curvature must satisfy 0 < K <= 2, got " +
                                 std::to_string(K));
        }
    }
    if (std::abs(d) > 0.5) {
        throw GeometryError("two_bumps: |d| > 0.5 makes the boundary self-overlapping");
    }
    const double w = 0.25;
    Profile p;
    p.pieces.push_back(make_bump_arc(0.0, w, w / K_big, 0.0));
    if (d != 0.0) p.pieces.push_back(Segment{{w, 0.0}, {w, d}});
    p.pieces.push_back(make_bump_arc(w, w, w / K_small, d));
    p.pieces.push_back(make_bump_arc(2.0 * w, w, w / K_small, d));
    if (d != 0.0) p.pieces.push_back(Segment{{3.0 * w, d}, {3.0 * w, 0.0}});
    p.pieces.push_back(make_bump_arc(3.0 * w, w, w / K_big, 0.0));
    p.symmetric = true;
    p.family_tag = "two_bumps";
    p.parameters["d"] = d;
    p.parameters["K_big"] = K_big;
    p.parameters["K_small"] = K_small;
    finalize(p);
    return p;
}

Profile make_bumps_with_wall(double w, double d, double R) {
    if (!(w >= 0.0 && w < 1.0)) {
        throw ParameterError("bumps_with_wall: width w must be in [0, 1), got " +
                             std::to_string(w));
    }
    const double chord = 1.0 - w;
    if (!(R >= chord / 2.0)) {
        throw ParameterError("bumps_with_wall: radius R smaller than half the arc chord");
    }
    if (std::abs(d) > 1.0) {
        throw GeometryError("bumps_with_wall: wall height |d| > 1 leaves the cell");
    }
    // Wall centered on the period boundary r = 0, arc spanning the middle.
    Profile p;
    const double half = w / 2.0;
    if (w > 0.0) {
        p.pieces.push_back(Segment{{0.0, d}, {half, d}});
        if (d != 0.0) p.pieces.push_back(Segment{{half, d}, {half, 0.0}});
    }
    p.pieces.push_back(make_bump_arc(half, chord, R, 0.0));
    if (w > 0.0) {
        if (d != 0.0) p.pieces.push_back(Segment{{1.0 - half, 0.0}, {1.0 - half, d}});
        p.pieces.push_back(Segment{{1.0 - half, d}, {1.0, d}});
    }
    p.symmetric = true;
    p.family_tag = "bumps_with_wall";
    p.parameters["w"] = w;
    p.parameters["d"] = d;
    p.parameters["R"] = R;
    finalize(p);
    return p;
}

FlatnessResult flatness_h(const Profile& profile) {
    double total = 0.0;
    double err = 0.0;
    for (const auto& piece : profile.pieces) {
        if (const auto* seg = std::get_if<Segment>(&piece)) {
            if (seg->vertical()) continue; // zero r-measure in the graph parametrization
            const double dx = seg->p1.x - seg->p0.x;
            const double dy = seg->p1.y - seg->p0.y;
            total += std::abs(dx) * (dy * dy) / (dx * dx + dy * dy);
        } else {
            const auto& arc = std::get<Arc>(piece);
            const double r0 = std::min(arc.start().x, arc.end().x);
            const double r1 = std::max(arc.start().x, arc.end().x);
            auto res = adaptive_simpson([&](double r) { return nbar_sq_arc(arc, r); }, r0, r1,
                                        1e-13);
            total += res.value;
            err += res.error;
        }
    }
    return {total / profile.period, err / profile.period};
}

Vec2 normal_at(const Profile& profile, Vec2 point) {
    constexpr double kOnPieceTol = 1e-9;
    for (const auto& piece : profile.pieces) {
        if (const auto* seg = std::get_if<Segment>(&piece)) {
            const Vec2 d = seg->p1 - seg->p0;
            const double len = d.norm();
            const Vec2 u = {d.x / len, d.y / len};
            const Vec2 rel = point - seg->p0;
            const double along = rel.dot(u);
            const double off = std::abs(rel.x * u.y - rel.y * u.x);
            if (off > kOnPieceTol || along < -kOnPieceTol || along > len + kOnPieceTol) continue;
            if (along < kCornerTol || along > len - kCornerTol) {
                throw GeometryError("normal_at: point lies at a piece junction");
            }
            return {-u.y, u.x}; // left normal of the traversal; interior on the left
        }
        const auto& arc = std::get<Arc>(piece);
        const Vec2 rel = point - arc.center;
        if (std::abs(rel.norm() - arc.radius) > kOnPieceTol) continue;
        double a = std::atan2(rel.y, rel.x);
        const double lo = std::min(arc.angle0, arc.angle1);
        const double hi = std::max(arc.angle0, arc.angle1);
        while (a < lo - kOnPieceTol) a += 2.0 * M_PI;
        if (a > hi + kOnPieceTol) continue;
        if ((a - lo) * arc.radius < kCornerTol || (hi - a) * arc.radius < kCornerTol) {
            throw GeometryError("normal_at: point lies at a piece junction");
        }
        Vec2 tangent{-std::sin(a), std::cos(a)};
        if (arc.angle1 < arc.angle0) tangent = tangent * -1.0;
        return {-tangent.y, tangent.x};
    }
    throw GeometryError("normal_at: point is not on the boundary");
}

void validate_profile(const Profile& profile) {
    if (profile.pieces.empty()) throw GeometryError("profile has no pieces");
    if (!(profile.period > 0.0)) throw GeometryError("profile period must be positive");
    for (const auto& piece : profile.pieces) {
        if (const auto* arc = std::get_if<Arc>(&piece)) {
            if (!(arc->radius > 0.0)) throw GeometryError("arc radius must be positive");
            if (arc->angle0 == arc->angle1) throw GeometryError("arc span must be nonzero");
        } else {
            const auto& seg = std::get<Segment>(piece);
            if ((seg.p1 - seg.p0).norm() == 0.0) {
                throw GeometryError("segment endpoints must be distinct");
            }
        }
    }
    for (std::size_t i = 0; i + 1 < profile.pieces.size(); ++i) {
        const Vec2 gap = piece_start(profile.pieces[i + 1]) - piece_end(profile.pieces[i]);
        if (gap.norm() > kChainTol) throw GeometryError("pieces do not chain continuously");
    }
    const Vec2 wrap = piece_end(profile.pieces.back()) - piece_start(profile.pieces.front());
    if (std::abs(wrap.x - profile.period) > kChainTol || std::abs(wrap.y) > kChainTol) {
        throw GeometryError("boundary does not close over one period");
    }
    // Simplicity check on a polyline approximation, skipping adjacent pieces.
    std::vector<std::vector<Vec2>> polys;
    polys.reserve(profile.pieces.size());
    for (const auto& piece : profile.pieces) polys.push_back(sample_piece(piece, 32));
    const auto n = polys.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue; // periodic neighbors
            for (std::size_t a = 0; a + 1 < polys[i].size(); ++a) {
                for (std::size_t b = 0; b + 1 < polys[j].size(); ++b) {
                    if (segments_cross(polys[i][a], polys[i][a + 1], polys[j][b],
                                       polys[j][b + 1])) {
                        throw GeometryError("boundary is self-intersecting");
                    }
                }
            }
        }
    }
}

std::string profile_to_text(const Profile& profile) {
    std::ostringstream out;
    if (!profile.family_tag.empty() && profile.family_tag != "custom") {
        out << "family = " << profile.family_tag << "\n";
        for (const auto& [key, value] : profile.parameters) {
            out << key << " = " << format_double(value) << "\n";
        }
        return out.str();
    }
    out << "family = custom\n";
    out << "period = " << format_double(profile.period) << "\n";
    out << "symmetric = " << (profile.symmetric ? 1 : 0) << "\n";
    for (const auto& piece : profile.pieces) {
        if (const auto* arc = std::get_if<Arc>(&piece)) {
            out << "piece = arc " << format_double(arc->center.x) << " "
                << format_double(arc->center.y) << " " << format_double(arc->radius) << " "
                << format_double(arc->angle0) << " " << format_double(arc->angle1) << "\n";
        } else {
            const auto& seg = std::get<Segment>(piece);
            out << "piece = segment " << format_double(seg.p0.x) << " " << format_double(seg.p0.y)
                << " " << format_double(seg.p1.x) << " " << format_double(seg.p1.y) << "\n";
        }
    }
    return out.str();
}

Profile profile_from_params(const std::string& family,
                            const std::map<std::string, double>& params) {
    auto get = [&](const std::string& key) {
        auto it = params.find(key);
        if (it == params.end()) throw ParameterError("missing parameter '" + key + "'");
        return it->second;
    };
    auto get_or = [&](const std::string& key, double fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    auto reject_unknown = [&](std::initializer_list<const char*> allowed) {
        for (const auto& [key, value] : params) {
            (void)value;
            if (std::find_if(allowed.begin(), allowed.end(),
                             [&](const char* a) { return key == a; }) == allowed.end()) {
                throw ParameterError("unknown parameter '" + key + "' for family " + family);
            }
        }
    };
    if (family == "flat") {
        reject_unknown({});
        return make_flat();
    }
    if (family == "bumps") {
        reject_unknown({"K"});
        return make_bumps(get("K"));
    }
    if (family == "mixture") {
        reject_unknown({"alpha"});
        return make_mixture(get("alpha"));
    }
    if (family == "two_bumps") {
        reject_unknown({"d", "K_big", "K_small"});
        return make_two_bumps(get("d"), get_or("K_big", 2.0), get_or("K_small", 1.0));
    }
    if (family == "bumps_with_wall") {
        reject_unknown({"w", "d", "R"});
        return make_bumps_with_wall(get("w"), get("d"), get("R"));
    }
    throw ParameterError("unknown profile family '" + family + "'");
}

Profile profile_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::string family;
    std::map<std::string, double> params;
    Profile custom;
    custom.family_tag = "custom";
    bool has_pieces = false;
    bool has_symmetric = false;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        if (eq == std::string::npos) throw ParameterError("malformed profile line: " + line);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r\n");
            const auto b = s.find_last_not_of(" \t\r\n");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "family") {
            family = value;
        } else if (key == "piece") {
            std::istringstream ps(value);
            std::string kind;
            ps >> kind;
            if (kind == "arc") {
                Arc arc;
                ps >> arc.center.x >> arc.center.y >> arc.radius >> arc.angle0 >> arc.angle1;
                if (!ps) throw ParameterError("malformed arc piece: " + value);
                custom.pieces.push_back(arc);
            } else if (kind == "segment") {
                Segment seg;
                ps >> seg.p0.x >> seg.p0.y >> seg.p1.x >> seg.p1.y;
                if (!ps) throw ParameterError("malformed segment piece: " + value);
                custom.pieces.push_back(seg);
            } else {
                throw ParameterError("unknown piece kind '" + kind + "'");
            }
            has_pieces = true;
        } else if (key == "period") {
            custom.period = std::stod(value);
        } else if (key == "symmetric") {
            custom.symmetric = std::stod(value) != 0.0;
            has_symmetric = true;
        } else {
            params[key] = std::stod(value);
        }
    }
    if (family.empty()) throw ParameterError("profile text is missing 'family'");
    if (family == "custom") {
        if (!has_pieces) throw ParameterError("custom profile needs at least one piece");
        if (!params.empty()) throw ParameterError("custom profile takes no family parameters");
        (void)has_symmetric;
        double top = -1e300;
        for (const auto& piece : custom.pieces) top = std::max(top, piece_y_max(piece));
        custom.y_max = top;
        validate_profile(custom);
        return custom;
    }
    return profile_from_params(family, params);
}

} // namespace knudsen
