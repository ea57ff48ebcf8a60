#include "parksun/solar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "parksun/parallel.hpp"
#include "parksun/raster_ops.hpp"

namespace parksun {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
// A node is near a shadow edge when scaling the ray's climb by 1 -+ kEdgeBand
// flips its state; steps touching such nodes are resampled every kRefineStep hours.
constexpr double kRefineStep = 1.0 / 60.0;
constexpr double kEdgeBand = 0.25;

// Horizontal clear-sky state for one sun position; shared by the single
// sample API and the raster integrator so both evaluate identical arithmetic.
struct HorizontalState {
    double sin_alt = 0.0;
    double cos_alt = 0.0;
    double beam_normal = 0.0;
    double diffuse_horizontal = 0.0;
    double global_horizontal = 0.0;
};

HorizontalState horizontal_state(const SunPosition& sun, const SolarConfig& cfg) {
    HorizontalState s;
    if (!(sun.altitude > 0.0)) return s;
    s.sin_alt = std::sin(sun.altitude * kDeg);
    s.cos_alt = std::cos(sun.altitude * kDeg);

    const double tl = cfg.linke_turbidity;
    const double g0 = kSolarConstant * earth_orbit_eccentricity(cfg.day_of_year);
    const double m = relative_air_mass(sun.altitude);
    s.beam_normal = g0 * std::exp(-0.8662 * tl * m * rayleigh_optical_thickness(m));

    // ESRA diffuse: transmission at zenith times a solar-altitude function.
    const double tn = -0.015843 + 0.030543 * tl + 0.0003797 * tl * tl;
    double a1 = 0.26463 - 0.061581 * tl + 0.0031408 * tl * tl;
    if (a1 * tn < 0.0022) a1 = 0.0022 / tn;
    const double a2 = 2.04020 + 0.018945 * tl - 0.011161 * tl * tl;
    const double a3 = -1.3025 + 0.039231 * tl + 0.0085079 * tl * tl;
    const double fd = a1 + a2 * s.sin_alt + a3 * s.sin_alt * s.sin_alt;
    s.diffuse_horizontal = std::max(0.0, g0 * tn * fd);

    s.global_horizontal = s.beam_normal * s.sin_alt + s.diffuse_horizontal;
    return s;
}

struct Plane {
    double cos_slope = 1.0;
    double sin_slope = 0.0;
    double aspect = 0.0;  // degrees
};

double cos_incidence(const HorizontalState& s, double sun_azimuth, const Plane& p) {
    return p.cos_slope * s.sin_alt + p.sin_slope * s.cos_alt * std::cos((sun_azimuth - p.aspect) * kDeg);
}

IrradianceSample on_plane(const HorizontalState& s, double cos_inc, const Plane& p, double albedo, bool shadowed) {
    IrradianceSample out;
    if (s.sin_alt <= 0.0) return out;
    out.beam = shadowed ? 0.0 : s.beam_normal * std::max(0.0, cos_inc);
    out.diffuse = s.diffuse_horizontal * (1.0 + p.cos_slope) / 2.0;
    out.reflected = albedo * s.global_horizontal * (1.0 - p.cos_slope) / 2.0;
    return out;
}

Plane make_plane(double slope_deg, double aspect_deg) {
    return {std::cos(slope_deg * kDeg), std::sin(slope_deg * kDeg), aspect_deg};
}

}  // namespace

void SolarConfig::validate() const {
    if (!(std::abs(latitude) <= 90.0)) throw ValidationError("latitude must be within [-90, 90]");
    if (day_of_year < 1 || day_of_year > 365) throw ValidationError("day_of_year must be within 1..365");
    if (!(linke_turbidity > 0.0)) throw ValidationError("linke_turbidity must be positive");
    if (!(albedo >= 0.0 && albedo <= 1.0)) throw ValidationError("albedo must be within [0, 1]");
    if (!(time_step > 0.0)) throw ValidationError("time_step must be positive");
    if (!(shadow_max_distance > 0.0)) throw ValidationError("shadow_max_distance must be positive");
}

double solar_declination(int day_of_year) {
    return 23.45 * std::sin(2.0 * std::numbers::pi * (284.0 + day_of_year) / 365.0);
}

double earth_orbit_eccentricity(int day_of_year) {
    return 1.0 + 0.033 * std::cos(2.0 * std::numbers::pi * day_of_year / 365.0);
}

double relative_air_mass(double altitude_deg) {
    return 1.0 / (std::sin(altitude_deg * kDeg) + 0.50572 * std::pow(altitude_deg + 6.07995, -1.6364));
}

double rayleigh_optical_thickness(double m) {
    if (m <= 20.0) return 1.0 / (6.6296 + m * (1.7513 + m * (-0.1202 + m * (0.0065 - m * 0.00013))));
    return 1.0 / (10.4 + 0.718 * m);
}

SunPosition solar_position(const SolarConfig& cfg, double solar_time_hours) {
    const double phi = cfg.latitude * kDeg;
    const double delta = solar_declination(cfg.day_of_year) * kDeg;
    const double omega = 15.0 * (solar_time_hours - 12.0) * kDeg;

    const double sin_alt = std::sin(phi) * std::sin(delta) + std::cos(phi) * std::cos(delta) * std::cos(omega);
    SunPosition sun;
    sun.altitude = std::asin(std::clamp(sin_alt, -1.0, 1.0)) / kDeg;

    // East and north components of the horizontal direction to the sun.
    const double east = -std::cos(delta) * std::sin(omega);
    const double north = std::sin(delta) * std::cos(phi) - std::cos(delta) * std::sin(phi) * std::cos(omega);
    double az = std::atan2(east, north) / kDeg;
    if (az < 0.0) az += 360.0;
    if (az >= 360.0) az -= 360.0;
    sun.azimuth = az;
    return sun;
}

IrradianceSample clearsky_components(const SunPosition& sun, const SolarConfig& cfg, double slope, double aspect,
                                     bool shadowed) {
    const HorizontalState s = horizontal_state(sun, cfg);
    const Plane p = make_plane(slope, aspect);
    return on_plane(s, cos_incidence(s, sun.azimuth, p), p, cfg.albedo, shadowed);
}

// ---------------------------------------------------------------------------
// Shadows

ShadowCaster::ShadowCaster(const Raster& surface, double shadow_max_distance)
    : surface_(&surface), max_distance_(shadow_max_distance) {
    if (!(shadow_max_distance > 0.0)) throw ArgumentError("shadow_max_distance must be positive");
    global_max_ = min_max(surface).max;

    // Finest level: a sample whose upper-left corner lies in a block may also
    // read one row and one column past it.
    const Index nr = surface.rows(), nc = surface.cols();
    constexpr double kLow = -std::numeric_limits<double>::infinity();
    constexpr int kShift = 3;
    static_assert(Index{1} << kShift == kShadowBlock);
    Level fine{kShift, (nr + kShadowBlock - 1) >> kShift, (nc + kShadowBlock - 1) >> kShift, {}};
    fine.max.assign(static_cast<std::size_t>(fine.rows * fine.cols), kLow);
    for (Index br = 0; br < fine.rows; ++br)
        for (Index bc = 0; bc < fine.cols; ++bc) {
            double m = kLow;
            const Index r_end = std::min(nr, (br + 1) * kShadowBlock + 1);
            const Index c_end = std::min(nc, (bc + 1) * kShadowBlock + 1);
            for (Index r = br * kShadowBlock; r < r_end; ++r)
                for (Index c = bc * kShadowBlock; c < c_end; ++c)
                    if (!surface.is_nodata(r, c)) m = std::max(m, surface(r, c));
            fine.max[static_cast<std::size_t>(br * fine.cols + bc)] = m;
        }

    // Coarser levels aggregate 8 x 8 blocks of the level below, while that
    // still leaves more than one block per side.
    std::vector<Level> up{std::move(fine)};
    while (up.size() < 3 && (up.back().rows > kShadowBlock || up.back().cols > kShadowBlock)) {
        const Level& below = up.back();
        Level next{below.shift + kShift, (below.rows + kShadowBlock - 1) >> kShift,
                   (below.cols + kShadowBlock - 1) >> kShift, {}};
        next.max.assign(static_cast<std::size_t>(next.rows * next.cols), kLow);
        for (Index br = 0; br < below.rows; ++br)
            for (Index bc = 0; bc < below.cols; ++bc) {
                double& m = next.max[static_cast<std::size_t>((br >> kShift) * next.cols + (bc >> kShift))];
                m = std::max(m, below.max[static_cast<std::size_t>(br * below.cols + bc)]);
            }
        up.push_back(std::move(next));
    }
    levels_.assign(up.rbegin(), up.rend());
}

// Bilinear sample at fractional (column, row) in pixel-center coordinates.
// Nodata corners are ignored in favour of the highest valid corner.
double ShadowCaster::sample(double u, double v) const {
    const Raster& s = *surface_;
    const Index nc = s.cols(), nr = s.rows();
    u = std::clamp(u, 0.0, static_cast<double>(nc - 1));
    v = std::clamp(v, 0.0, static_cast<double>(nr - 1));
    const Index c0 = static_cast<Index>(u), r0 = static_cast<Index>(v);
    const Index c1 = std::min(c0 + 1, nc - 1), r1 = std::min(r0 + 1, nr - 1);
    const double fu = u - static_cast<double>(c0), fv = v - static_cast<double>(r0);
    const double z00 = s(r0, c0), z01 = s(r0, c1), z10 = s(r1, c0), z11 = s(r1, c1);
    const double nd = s.nodata();
    if (z00 == nd || z01 == nd || z10 == nd || z11 == nd) {
        double m = -std::numeric_limits<double>::infinity();
        for (double z : {z00, z01, z10, z11})
            if (z != nd) m = std::max(m, z);
        return m;
    }
    const double top = z00 + fu * (z01 - z00);
    const double bottom = z10 + fu * (z11 - z10);
    return top + fv * (bottom - top);
}

ShadowCaster::Ray ShadowCaster::ray_for(const SunPosition& sun, double cell_size) {
    Ray r;
    r.up = sun.altitude > 0.0;
    if (!r.up) return r;
    r.rise = 0.5 * cell_size * std::tan(sun.altitude * kDeg);
    r.du = 0.5 * std::sin(sun.azimuth * kDeg);
    r.dv = -0.5 * std::cos(sun.azimuth * kDeg);
    r.inv_du = std::abs(r.du) > 1e-12 ? 1.0 / r.du : 0.0;
    r.inv_dv = std::abs(r.dv) > 1e-12 ? 1.0 / r.dv : 0.0;
    return r;
}

bool ShadowCaster::shadowed(Index row, Index col, const Ray& ray) const {
    const Raster& s = *surface_;
    if (!s.spec().in_bounds(row, col))
        throw IndexError("pixel (" + std::to_string(row) + ", " + std::to_string(col) + ") outside grid");
    if (!ray.up) return true;
    const double z0 = s(row, col);
    if (s.is_nodata(z0)) return false;

    const double step_m = s.spec().cell_size / 2.0;
    const double du = ray.du, dv = ray.dv;
    const double u_lo = -0.5, u_hi = static_cast<double>(s.cols()) - 0.5;
    const double v_lo = -0.5, v_hi = static_cast<double>(s.rows()) - 0.5;
    const double max_steps = std::floor(max_distance_ / step_m + 1e-9);
    const double nc1 = static_cast<double>(s.cols() - 1), nr1 = static_cast<double>(s.rows() - 1);
    const double c = static_cast<double>(col), r = static_cast<double>(row);
    auto block_of = [&](double k, int shift, Index& bc, Index& br) {
        bc = static_cast<Index>(std::clamp(c + k * du, 0.0, nc1)) >> shift;
        br = static_cast<Index>(std::clamp(r + k * dv, 0.0, nr1)) >> shift;
    };

    double k = 1.0;
    while (k <= max_steps) {
        const double u = c + k * du;
        const double v = r + k * dv;
        if (u < u_lo || u >= u_hi || v < v_lo || v >= v_hi) return false;
        const double height = z0 + k * ray.rise;
        if (height > global_max_) return false;

        bool skipped = false;
        for (const Level& lv : levels_) {
            Index bc, br;
            block_of(k, lv.shift, bc, br);
            if (!(height > lv.max[static_cast<std::size_t>(br * lv.cols + bc)])) continue;
            // The ray only rises, so every step still inside this block is
            // clear too. Estimate the first step that leaves it, then back
            // off until the step before is confirmed inside.
            const double lo_u = double(bc << lv.shift), lo_v = double(br << lv.shift);
            const double size = double(Index{1} << lv.shift);
            double exit = std::numeric_limits<double>::infinity();
            if (du > 1e-12) exit = std::min(exit, std::ceil((lo_u + size - c) * ray.inv_du));
            else if (du < -1e-12) exit = std::min(exit, std::floor((lo_u - c) * ray.inv_du) + 1.0);
            if (dv > 1e-12) exit = std::min(exit, std::ceil((lo_v + size - r) * ray.inv_dv));
            else if (dv < -1e-12) exit = std::min(exit, std::floor((lo_v - r) * ray.inv_dv) + 1.0);
            double next = std::max(k + 1.0, exit);
            while (next > k + 1.0) {
                Index bc2, br2;
                block_of(next - 1.0, lv.shift, bc2, br2);
                if (bc2 == bc && br2 == br) break;
                next -= 1.0;
            }
            k = next;
            skipped = true;
            break;
        }
        if (skipped) continue;
        if (sample(u, v) > height) return true;
        k += 1.0;
    }
    return false;
}

bool ShadowCaster::shadowed(Index row, Index col, const SunPosition& sun) const {
    return shadowed(row, col, ray_for(sun, surface_->spec().cell_size));
}

bool is_shadowed(const Raster& surface, Index col, Index row, const SunPosition& sun, const SolarConfig& cfg) {
    if (!surface.spec().in_bounds(row, col))
        throw IndexError("pixel (" + std::to_string(row) + ", " + std::to_string(col) + ") outside grid");
    return ShadowCaster(surface, cfg.shadow_max_distance).shadowed(row, col, sun);
}

// ---------------------------------------------------------------------------
// Daily integration

DaylightSchedule daylight_schedule(const SolarConfig& cfg) {
    cfg.validate();
    DaylightSchedule out;
    auto up = [&](double t) { return solar_position(cfg, t).altitude > 0.0; };
    constexpr double kSecond = 1.0 / 3600.0;

    if (!up(12.0)) {
        out.sunrise = out.sunset = 12.0;
        return out;  // polar night
    }
    if (up(0.0)) {
        out.sunrise = 0.0;
        out.sunset = 24.0;  // polar day
    } else {
        double lo = 0.0, hi = 12.0;  // down at lo, up at hi
        while (hi - lo > kSecond) {
            const double mid = 0.5 * (lo + hi);
            (up(mid) ? hi : lo) = mid;
        }
        out.sunrise = 0.5 * (lo + hi);
        lo = 12.0, hi = 24.0;  // up at lo, down at hi
        while (hi - lo > kSecond) {
            const double mid = 0.5 * (lo + hi);
            (up(mid) ? lo : hi) = mid;
        }
        out.sunset = 0.5 * (lo + hi);
    }

    const double span = out.sunset - out.sunrise;
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(span / cfg.time_step - 1e-9)));
    const double h = span / static_cast<double>(n);
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = out.sunrise + h * static_cast<double>(i);
        out.hours.push_back(t);
        out.weights.push_back((i == 0 || i == n) ? h / 2.0 : h);
        out.sun.push_back(solar_position(cfg, t));
    }
    return out;
}

SlopeAspect horn_slope_aspect(const Raster& surface) {
    const GridSpec& g = surface.spec();
    Raster slope(g, surface.nodata(), surface.nodata());
    Raster aspect(g, surface.nodata(), surface.nodata());
    const double cs = g.cell_size;
    parallel_rows(g.nrows, [&](Index r0, Index r1) {
        for (Index r = r0; r < r1; ++r)
            for (Index c = 0; c < g.ncols; ++c) {
                const double z = surface(r, c);
                if (surface.is_nodata(z)) continue;
                auto at = [&](Index dr, Index dc) {
                    const Index rr = r + dr, cc = c + dc;
                    if (!g.in_bounds(rr, cc) || surface.is_nodata(rr, cc)) return z;
                    return surface(rr, cc);
                };
                const double a = at(-1, -1), b = at(-1, 0), cc = at(-1, 1);
                const double d = at(0, -1), f = at(0, 1);
                const double gg = at(1, -1), h = at(1, 0), i = at(1, 1);
                const double dz_east = ((cc + 2 * f + i) - (a + 2 * d + gg)) / (8.0 * cs);
                const double dz_north = ((a + 2 * b + cc) - (gg + 2 * h + i)) / (8.0 * cs);
                slope(r, c) = std::atan(std::hypot(dz_east, dz_north)) / kDeg;
                double asp = 0.0;
                if (dz_east != 0.0 || dz_north != 0.0) {
                    asp = std::atan2(-dz_east, -dz_north) / kDeg;
                    if (asp < 0.0) asp += 360.0;
                    if (asp >= 360.0) asp -= 360.0;
                }
                aspect(r, c) = asp;
            }
    });
    return {std::move(slope), std::move(aspect)};
}

Raster daily_irradiation(const Raster& surface, const SolarConfig& cfg) {
    cfg.validate();
    if (surface.count_valid() == 0) throw EmptyRasterError("daily_irradiation: surface has no valid pixels");

    const DaylightSchedule sched = daylight_schedule(cfg);
    const std::size_t nodes = sched.sun.size();
    const double cs = surface.spec().cell_size;
    std::vector<HorizontalState> states;
    std::vector<ShadowCaster::Ray> rays;
    for (const auto& sun : sched.sun) {
        states.push_back(horizontal_state(sun, cfg));
        rays.push_back(ShadowCaster::ray_for(sun, cs));
    }

    const int sub = std::max(1, static_cast<int>(std::ceil(cfg.time_step / kRefineStep - 1e-9)));
    std::vector<ShadowCaster::Ray> sub_rays;  // interior sub-nodes, `sub - 1` per step
    for (std::size_t i = 0; i + 1 < nodes; ++i)
        for (int j = 1; j < sub; ++j) {
            const double t = sched.hours[i] + (sched.hours[i + 1] - sched.hours[i]) * j / sub;
            sub_rays.push_back(ShadowCaster::ray_for(solar_position(cfg, t), cs));
        }

    const bool terrain = cfg.terrain_mode == TerrainMode::terrain_following;
    std::optional<SlopeAspect> sa;
    if (terrain) sa = horn_slope_aspect(surface);

    const ShadowCaster caster(surface, cfg.shadow_max_distance);
    const GridSpec& g = surface.spec();
    Raster out(g, surface.nodata(), surface.nodata());

    struct NodeState {
        bool shadowed = true;
        bool uncertain = false;  // the state flips within the tilt band
    };

    parallel_rows(g.nrows, [&](Index r0, Index r1) {
        std::vector<double> sky(nodes), beam(nodes);
        std::vector<NodeState> st(nodes);
        for (Index r = r0; r < r1; ++r)
            for (Index c = 0; c < g.ncols; ++c) {
                if (surface.is_nodata(r, c)) continue;
                const Plane plane = terrain ? make_plane(sa->slope(r, c), sa->aspect(r, c)) : Plane{};
                bool guess_shadowed = false;
                for (std::size_t i = 0; i < nodes; ++i) {
                    const HorizontalState& s = states[i];
                    sky[i] = beam[i] = 0.0;
                    st[i] = {};
                    if (s.sin_alt <= 0.0) continue;
                    const double ci = cos_incidence(s, sched.sun[i].azimuth, plane);
                    const IrradianceSample lit = on_plane(s, ci, plane, cfg.albedo, false);
                    sky[i] = lit.diffuse + lit.reflected;
                    beam[i] = lit.beam;

                    // A lower ray is blocked whenever the true one is and a
                    // higher one only when it is, so each probe narrows the
                    // answer; the guess picks the probe likeliest to settle it.
                    const ShadowCaster::Ray& ray = rays[i];
                    if (!guess_shadowed && !caster.shadowed(r, c, ray.tilted(1.0 - kEdgeBand))) {
                        st[i] = {false, false};
                    } else if (guess_shadowed && caster.shadowed(r, c, ray.tilted(1.0 + kEdgeBand))) {
                        st[i] = {true, false};
                    } else if (caster.shadowed(r, c, ray)) {
                        st[i] = {true, guess_shadowed || !caster.shadowed(r, c, ray.tilted(1.0 + kEdgeBand))};
                    } else {
                        st[i] = {false, !guess_shadowed || caster.shadowed(r, c, ray.tilted(1.0 - kEdgeBand))};
                    }
                    guess_shadowed = st[i].shadowed;
                }

                double total = 0.0;
                for (std::size_t i = 0; i + 1 < nodes; ++i) {
                    const double h = sched.hours[i + 1] - sched.hours[i];
                    total += 0.5 * h * (sky[i] + sky[i + 1]);
                    const NodeState a = st[i], b = st[i + 1];
                    const bool refine = a.shadowed != b.shadowed || a.uncertain || b.uncertain;
                    if (!refine || sub == 1) {
                        if (!a.shadowed || !b.shadowed)
                            total += 0.5 * h * ((a.shadowed ? 0.0 : beam[i]) + (b.shadowed ? 0.0 : beam[i + 1]));
                        continue;
                    }
                    // Resample the shadow state inside the step and remove the
                    // beam (linear between the nodes) wherever it is blocked.
                    const double w = h / sub;
                    double blocked = 0.0;
                    for (int j = 0; j <= sub; ++j) {
                        const bool shaded = j == 0     ? a.shadowed
                                            : j == sub ? b.shadowed
                                                       : caster.shadowed(r, c, sub_rays[i * (sub - 1) + j - 1]);
                        if (!shaded) continue;
                        const double bj = beam[i] + (beam[i + 1] - beam[i]) * j / sub;
                        blocked += (j == 0 || j == sub ? 0.5 * w : w) * bj;
                    }
                    total += std::max(0.0, 0.5 * h * (beam[i] + beam[i + 1]) - blocked);
                }
                out(r, c) = total;
            }
    });
    return out;
}

}  // namespace parksun
