#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "parksun/raster_ops.hpp"
#include "parksun/solar.hpp"
#include "scenes.hpp"

using namespace parksun;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRad = kPi / 180.0;

// Independent restatement of the ESRA beam expression, written out term by
// term from the published coefficients.
double esra_beam_normal(double altitude_deg, int day, double tl) {
    const double h = altitude_deg;
    const double m = 1.0 / (std::sin(h * kRad) + 0.50572 * std::pow(h + 6.07995, -1.6364));
    const double rayleigh = m <= 20.0 ? 1.0 / (6.6296 + 1.7513 * m - 0.1202 * m * m + 0.0065 * std::pow(m, 3) -
                                               0.00013 * std::pow(m, 4))
                                     : 1.0 / (10.4 + 0.718 * m);
    const double eps = 1.0 + 0.033 * std::cos(2.0 * kPi * day / 365.0);
    return 1367.0 * eps * std::exp(-0.8662 * tl * m * rayleigh);
}

// Brute-force shadow test: every half-cell step, no acceleration.
bool brute_shadowed(const Raster& s, Index row, Index col, const SunPosition& sun, double max_dist) {
    if (sun.altitude <= 0) return true;
    const double z0 = s(row, col);
    const double tan_alt = std::tan(sun.altitude * kRad);
    const double du = 0.5 * std::sin(sun.azimuth * kRad), dv = -0.5 * std::cos(sun.azimuth * kRad);
    const double step = s.spec().cell_size / 2;
    for (int k = 1; k * step <= max_dist + 1e-9; ++k) {
        const double u = col + k * du, v = row + k * dv;
        if (u < -0.5 || u >= s.cols() - 0.5 || v < -0.5 || v >= s.rows() - 0.5) return false;
        const double uc = std::clamp(u, 0.0, double(s.cols() - 1)), vc = std::clamp(v, 0.0, double(s.rows() - 1));
        const Index c0 = Index(uc), r0 = Index(vc);
        const Index c1 = std::min(c0 + 1, s.cols() - 1), r1 = std::min(r0 + 1, s.rows() - 1);
        const double fu = uc - c0, fv = vc - r0;
        const double top = s(r0, c0) + fu * (s(r0, c1) - s(r0, c0));
        const double bottom = s(r1, c0) + fu * (s(r1, c1) - s(r1, c0));
        if (top + fv * (bottom - top) > z0 + k * step * tan_alt) return true;
    }
    return false;
}

// Shadow length north of an east-west wall for a sun due south.
double shadow_length(double altitude) {
    const Index n = 120, wall = 100;
    const Raster scene = parksun::testing::wall_scene(n, 0.5, wall, 100.0, 10.0);
    const ShadowCaster caster(scene, 1000.0);
    const SunPosition sun{altitude, 180.0};
    Index shadowed = 0;
    for (Index r = wall - 1; r >= 0 && caster.shadowed(r, 60, sun); --r) ++shadowed;
    return static_cast<double>(shadowed) * 0.5;
}

SolarConfig config(double lat, int day) {
    SolarConfig c;
    c.latitude = lat;
    c.day_of_year = day;
    return c;
}

}  // namespace

TEST(SolarPosition, SubsolarPointAtEquinox) {
    const SunPosition s = solar_position(config(0.0, 81), 12.0);
    EXPECT_NEAR(s.altitude, 90.0, 1e-6);
}

TEST(SolarPosition, NoonAltitudeMatchesClosedForm) {
    for (int day : {172, 1}) {
        const double decl = 23.45 * std::sin(2 * kPi * (284 + day) / 365.0);
        const double expected = 90.0 - std::abs(35.78 - decl);
        EXPECT_NEAR(solar_position(config(35.78, day), 12.0).altitude, expected, 0.3) << "day " << day;
    }
    EXPECT_NEAR(solar_position(config(35.78, 172), 12.0).altitude, 77.67, 0.3);
    EXPECT_NEAR(solar_position(config(35.78, 1), 12.0).altitude, 31.21, 0.3);
}

TEST(SolarPosition, AzimuthConvention) {
    const SolarConfig c = config(35.78, 172);
    EXPECT_NEAR(solar_position(c, 12.0).azimuth, 180.0, 1e-9);
    const SunPosition am = solar_position(c, 9.0), pm = solar_position(c, 15.0);
    EXPECT_GT(am.azimuth, 0.0);
    EXPECT_LT(am.azimuth, 180.0);
    EXPECT_NEAR(am.azimuth + pm.azimuth, 360.0, 1e-9);
    EXPECT_NEAR(am.altitude, pm.altitude, 1e-9);
    // Southern hemisphere: noon sun due north.
    EXPECT_NEAR(solar_position(config(-35.0, 172), 12.0).azimuth, 0.0, 1e-9);
}

TEST(SolarPosition, RangesHold) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> lat(-90, 90), t(0, 24);
    std::uniform_int_distribution<int> day(1, 365);
    for (int i = 0; i < 500; ++i) {
        const SunPosition s = solar_position(config(lat(rng), day(rng)), t(rng));
        EXPECT_GE(s.altitude, -90.0);
        EXPECT_LE(s.altitude, 90.0);
        EXPECT_GE(s.azimuth, 0.0);
        EXPECT_LT(s.azimuth, 360.0);
    }
}

TEST(ClearSky, NightIsZero) {
    const auto s = clearsky_components({-5.0, 100.0}, config(35.78, 172), 0.0, 0.0, false);
    EXPECT_EQ(s.beam, 0.0);
    EXPECT_EQ(s.diffuse, 0.0);
    EXPECT_EQ(s.reflected, 0.0);
}

TEST(ClearSky, ShadowKillsBeamOnly) {
    const auto s = clearsky_components({45.0, 180.0}, config(35.78, 172), 0.0, 0.0, true);
    EXPECT_EQ(s.beam, 0.0);
    EXPECT_GT(s.diffuse, 0.0);
    EXPECT_EQ(s.reflected, 0.0);
}

TEST(ClearSky, ZenithBeamGolden) {
    const SolarConfig c = config(35.78, 172);
    const auto s = clearsky_components({90.0, 180.0}, c, 0.0, 0.0, false);
    const double oracle = esra_beam_normal(90.0, 172, 3.0);
    EXPECT_NEAR(s.beam, oracle, 1e-9 * oracle);
    EXPECT_NEAR(s.beam, 965.9530017, 1e-6);  // frozen from the oracle above
    EXPECT_GE(s.beam, 700.0);
    EXPECT_LE(s.beam, 1100.0);
}

TEST(ClearSky, BeamDecreasesWithTurbidity) {
    double previous = std::numeric_limits<double>::infinity();
    for (double tl = 1.5; tl <= 7.0; tl += 0.5) {
        SolarConfig c = config(35.78, 172);
        c.linke_turbidity = tl;
        const double beam = clearsky_components({90.0, 0.0}, c, 0.0, 0.0, false).beam;
        EXPECT_LT(beam, previous) << "TL " << tl;
        previous = beam;
    }
}

TEST(ClearSky, BeamMatchesOracleAcrossAltitudes) {
    const SolarConfig c = config(35.78, 1);
    for (double alt : {0.5, 2.0, 5.0, 15.0, 31.2, 60.0}) {
        const double oracle = esra_beam_normal(alt, 1, 3.0) * std::sin(alt * kRad);
        EXPECT_NEAR(clearsky_components({alt, 180.0}, c, 0.0, 0.0, false).beam, oracle, 1e-9 * oracle);
    }
}

TEST(ClearSky, ComponentsNonNegative) {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> alt(-10, 90), az(0, 360), slope(0, 89), tl(1, 8), alb(0, 1);
    for (int i = 0; i < 1000; ++i) {
        SolarConfig c = config(35.78, 172);
        c.linke_turbidity = tl(rng);
        c.albedo = alb(rng);
        const auto s = clearsky_components({alt(rng), az(rng)}, c, slope(rng), az(rng), i % 3 == 0);
        EXPECT_GE(s.beam, 0.0);
        EXPECT_GE(s.diffuse, 0.0);
        EXPECT_GE(s.reflected, 0.0);
        EXPECT_DOUBLE_EQ(s.total(), s.beam + s.diffuse + s.reflected);
    }
}

TEST(ClearSky, TiltedPlaneFacingSun) {
    // A plane tilted toward the sun by (90 - altitude) sees the full beam normal.
    const SolarConfig c = config(35.78, 172);
    const double alt = 40.0;
    const auto s = clearsky_components({alt, 180.0}, c, 90.0 - alt, 180.0, false);
    EXPECT_NEAR(s.beam, esra_beam_normal(alt, 172, 3.0), 1e-6);
    EXPECT_GT(s.reflected, 0.0);
}

TEST(Shadow, FlatPlaneNeverShadowed) {
    const Raster flat(GridSpec{40, 40, 0, 0, 0.5}, 100.0);
    const ShadowCaster caster(flat, 1000.0);
    for (double alt : {0.1, 5.0, 45.0, 89.0})
        for (double az : {0.0, 45.0, 133.0, 270.0})
            for (Index r = 0; r < 40; r += 7)
                for (Index c = 0; c < 40; c += 5) EXPECT_FALSE(caster.shadowed(r, c, SunPosition{alt, az}));
}

TEST(Shadow, WallAt45Degrees) {
    const Raster scene = parksun::testing::wall_scene(120, 0.5, 100, 100.0, 10.0);
    const ShadowCaster caster(scene, 1000.0);
    const SunPosition sun{45.0, 180.0};
    EXPECT_TRUE(caster.shadowed(100 - 10, 60, sun));   // 5 m down-sun
    EXPECT_FALSE(caster.shadowed(100 - 30, 60, sun));  // 15 m down-sun
    EXPECT_NEAR(shadow_length(45.0), 10.0, 0.5);
}

TEST(Shadow, WallAtTanOneHalf) {
    EXPECT_NEAR(shadow_length(std::atan(0.5) / kRad), 20.0, 0.5);
}

TEST(Shadow, MaxDistanceLimitsSearch) {
    const Raster scene = parksun::testing::wall_scene(120, 0.5, 100, 100.0, 10.0);
    const SunPosition sun{10.0, 180.0};
    const ShadowCaster near(scene, 4.0), far(scene, 1000.0);
    EXPECT_FALSE(near.shadowed(90, 60, sun));  // wall 5 m away
    EXPECT_TRUE(far.shadowed(90, 60, sun));
}

TEST(Shadow, OutOfBoundsIsIndexError) {
    const Raster flat(GridSpec{4, 4, 0, 0, 0.5}, 1.0);
    EXPECT_THROW(is_shadowed(flat, 4, 0, {10, 10}, SolarConfig{}), IndexError);
    EXPECT_THROW(is_shadowed(flat, 0, -1, {10, 10}, SolarConfig{}), IndexError);
}

TEST(Shadow, BlockSkippingMatchesBruteForce) {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> alt(0.5, 70), az(0, 360), u(0, 1);
    for (int scene = 0; scene < 6; ++scene) {
        const Index n = 30 + 7 * scene;
        Raster s(GridSpec{n, n + 3, 0, 0, 0.5}, 100.0);
        // A few random boxes and some low-amplitude noise.
        for (double& v : s.flat()) v += 0.3 * u(rng);
        for (int b = 0; b < 6; ++b) {
            const Index r0 = Index(u(rng) * (n - 4)), c0 = Index(u(rng) * (n - 4));
            const double h = 2 + 15 * u(rng);
            for (Index r = r0; r < r0 + 4; ++r)
                for (Index c = c0; c < c0 + 3; ++c) s(r, c) = 100 + h;
        }
        const ShadowCaster caster(s, 1000.0);
        for (int k = 0; k < 40; ++k) {
            const SunPosition sun{alt(rng), az(rng)};
            for (Index r = 0; r < s.rows(); ++r)
                for (Index c = 0; c < s.cols(); ++c)
                    ASSERT_EQ(caster.shadowed(r, c, sun), brute_shadowed(s, r, c, sun, 1000.0))
                        << "scene " << scene << " pixel " << r << "," << c << " sun " << sun.altitude << "/"
                        << sun.azimuth;
        }
    }
}

TEST(Shadow, BlockPyramidMatchesBruteForceOnLargeScene) {
    std::mt19937 rng(22);
    std::uniform_real_distribution<double> alt(0.5, 60), az(0, 360), u(0, 1);
    Raster s(GridSpec{290, 300, 0, 0, 0.5}, 100.0);
    for (int b = 0; b < 12; ++b) {
        const Index r0 = Index(u(rng) * 280), c0 = Index(u(rng) * 270);
        const double h = 2 + 20 * u(rng);
        for (Index r = r0; r < r0 + 10; ++r)
            for (Index c = c0; c < c0 + 20; ++c) s(r, c) = 100 + h;
    }
    const ShadowCaster caster(s, 1000.0);
    std::uniform_int_distribution<Index> row(0, s.rows() - 1), col(0, s.cols() - 1);
    for (int k = 0; k < 30; ++k) {
        const SunPosition sun{alt(rng), az(rng)};
        for (int i = 0; i < 400; ++i) {
            const Index r = row(rng), c = col(rng);
            ASSERT_EQ(caster.shadowed(r, c, sun), brute_shadowed(s, r, c, sun, 1000.0)) << r << "," << c;
        }
    }
}

TEST(Shadow, TiltedRaysBracketTheTrueRay) {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> alt(1, 70), az(0, 360), u(0, 1);
    Raster s(GridSpec{48, 48, 0, 0, 0.5}, 100.0);
    for (double& v : s.flat()) v += 4.0 * u(rng) * u(rng);
    const ShadowCaster caster(s, 1000.0);
    for (int k = 0; k < 60; ++k) {
        const auto ray = ShadowCaster::ray_for({alt(rng), az(rng)}, 0.5);
        for (Index r = 0; r < 48; r += 3)
            for (Index c = 0; c < 48; c += 3) {
                const bool mid = caster.shadowed(r, c, ray);
                if (mid) EXPECT_TRUE(caster.shadowed(r, c, ray.tilted(0.75)));
                if (caster.shadowed(r, c, ray.tilted(1.25))) EXPECT_TRUE(mid);
            }
    }
}

TEST(Schedule, SunriseSunsetBracketDaylight) {
    const SolarConfig c = config(35.78, 172);
    const DaylightSchedule s = daylight_schedule(c);
    // Closed-form sunrise hour angle: cos(w) = -tan(phi) tan(delta).
    const double decl = solar_declination(172) * kRad;
    const double w = std::acos(-std::tan(35.78 * kRad) * std::tan(decl)) / kRad;
    EXPECT_NEAR(s.sunrise, 12.0 - w / 15.0, 2.0 / 3600.0);
    EXPECT_NEAR(s.sunset, 12.0 + w / 15.0, 2.0 / 3600.0);
    double total = 0;
    for (double wgt : s.weights) total += wgt;
    EXPECT_NEAR(total, s.sunset - s.sunrise, 1e-9);
    for (std::size_t i = 1; i < s.hours.size(); ++i) EXPECT_LE(s.hours[i] - s.hours[i - 1], c.time_step + 1e-12);
}

TEST(Schedule, PolarDayAndNight) {
    EXPECT_TRUE(daylight_schedule(config(80.0, 1)).hours.empty());
    const DaylightSchedule day = daylight_schedule(config(80.0, 172));
    EXPECT_EQ(day.sunrise, 0.0);
    EXPECT_EQ(day.sunset, 24.0);
}

TEST(Config, Validation) {
    SolarConfig c;
    EXPECT_NO_THROW(c.validate());
    for (auto bad : std::vector<std::function<void(SolarConfig&)>>{
             [](SolarConfig& s) { s.latitude = 91; }, [](SolarConfig& s) { s.day_of_year = 0; },
             [](SolarConfig& s) { s.day_of_year = 366; }, [](SolarConfig& s) { s.albedo = 1.5; },
             [](SolarConfig& s) { s.time_step = 0; }, [](SolarConfig& s) { s.shadow_max_distance = -1; }}) {
        SolarConfig b;
        bad(b);
        EXPECT_THROW(b.validate(), ValidationError);
    }
}

TEST(Horn, PlaneSlopeAndAspect) {
    // z rises 1 m per meter toward the east: 45 degrees, facing west.
    Raster r(GridSpec{6, 6, 0, 0, 0.5});
    for (Index row = 0; row < 6; ++row)
        for (Index c = 0; c < 6; ++c) r(row, c) = 0.5 * c;
    const SlopeAspect sa = horn_slope_aspect(r);
    EXPECT_NEAR(sa.slope(2, 2), 45.0, 1e-9);
    EXPECT_NEAR(sa.aspect(2, 2), 270.0, 1e-9);

    // z rises toward the north: facing south.
    for (Index row = 0; row < 6; ++row)
        for (Index c = 0; c < 6; ++c) r(row, c) = -0.25 * row;
    EXPECT_NEAR(horn_slope_aspect(r).aspect(3, 3), 180.0, 1e-9);
}

TEST(Horn, FlatIsZero) {
    const SlopeAspect sa = horn_slope_aspect(Raster(GridSpec{5, 5, 0, 0, 0.5}, 3.0));
    for (double v : sa.slope.flat()) EXPECT_EQ(v, 0.0);
}

TEST(Daily, FlatFieldUniform) {
    const Raster flat(GridSpec{48, 48, 0, 0, 0.5}, 100.0);
    const Raster irr = daily_irradiation(flat, config(35.78, 172));
    const auto mm = min_max(irr);
    EXPECT_LT((mm.max - mm.min) / mm.max, 1e-3);
}

TEST(Daily, SummerExceedsWinter) {
    // Horizontal receivers: a steep south-facing facet can legitimately
    // collect more in winter.
    Raster scene = parksun::testing::wall_scene(40, 0.5, 20, 100.0, 6.0);
    SolarConfig s = config(35.78, 172), w = config(35.78, 1);
    s.terrain_mode = w.terrain_mode = TerrainMode::horizontal;
    const Raster summer = daily_irradiation(scene, s);
    const Raster winter = daily_irradiation(scene, w);
    for (Index i = 0; i < summer.size(); ++i) EXPECT_GT(summer.flat()[i], winter.flat()[i]) << "pixel " << i;
}

TEST(Daily, ShadowEdgesTrackMinuteReference) {
    // A 5 m x 4 m block, 10 m tall; every pixel around it, including those
    // crossed by the moving shadow edge.
    Raster scene(GridSpec{40, 40, 0, 0, 0.5}, 100.0);
    for (Index r = 16; r < 24; ++r)
        for (Index c = 15; c < 25; ++c) scene(r, c) = 110.0;
    const ShadowCaster caster(scene, 1000.0);
    for (int day : {1, 172}) {
        SolarConfig cfg = config(35.78, day);
        cfg.terrain_mode = TerrainMode::horizontal;
        const Raster coarse = daily_irradiation(scene, cfg);
        const DaylightSchedule s = daylight_schedule(cfg);
        const int n = int(std::ceil((s.sunset - s.sunrise) * 60.0));
        const double h = (s.sunset - s.sunrise) / n;
        for (Index r = 0; r < 40; ++r)
            for (Index c = 0; c < 40; ++c) {
                double ref = 0.0;
                for (int i = 0; i <= n; ++i) {
                    const SunPosition sun = solar_position(cfg, s.sunrise + h * i);
                    if (sun.altitude <= 0) continue;
                    ref += (i == 0 || i == n ? h / 2 : h) *
                           clearsky_components(sun, cfg, 0, 0, caster.shadowed(r, c, sun)).total();
                }
                ASSERT_LT(std::abs(coarse(r, c) - ref), 0.01 * ref) << "day " << day << " pixel " << r << "," << c;
            }
    }
}

TEST(Daily, NodataStaysNodata) {
    Raster scene(GridSpec{8, 8, 0, 0, 0.5}, 100.0);
    scene(3, 3) = scene.nodata();
    const Raster irr = daily_irradiation(scene, config(35.78, 172));
    EXPECT_TRUE(irr.is_nodata(3, 3));
    EXPECT_EQ(irr.count_valid(), 63);
    EXPECT_THROW(daily_irradiation(Raster(GridSpec{3, 3, 0, 0, 1}), config(35.78, 172)), EmptyRasterError);
}

TEST(Daily, MatchesOneMinuteReference) {
    for (int day : {172, 1, 81}) {
        SolarConfig c = config(35.78, day);
        c.terrain_mode = TerrainMode::horizontal;
        const Raster flat(GridSpec{3, 3, 0, 0, 0.5}, 0.0);
        const double value = daily_irradiation(flat, c)(1, 1);
        // Trapezoid over one-minute steps across the whole day.
        double ref = 0;
        const double dt = 1.0 / 60.0;
        for (int i = 0; i < 24 * 60; ++i) {
            const double t0 = i * dt, t1 = t0 + dt;
            const double g0 = clearsky_components(solar_position(c, t0), c, 0, 0, false).total();
            const double g1 = clearsky_components(solar_position(c, t1), c, 0, 0, false).total();
            ref += 0.5 * (g0 + g1) * dt;
        }
        EXPECT_LT(std::abs(value - ref) / ref, 0.01) << "day " << day;
    }
}

TEST(Daily, AllDayShadeIsDiffuseIntegral) {
    // A pit one pixel wide inside a tall block sees no direct sun all day.
    Raster scene(GridSpec{41, 41, 0, 0, 0.5}, 100.0);
    for (Index r = 10; r <= 30; ++r)
        for (Index c = 10; c <= 30; ++c) scene(r, c) = 150.0;
    scene(20, 20) = 100.0;
    SolarConfig c = config(35.78, 172);
    c.terrain_mode = TerrainMode::horizontal;
    const Raster irr = daily_irradiation(scene, c);
    const DaylightSchedule sched = daylight_schedule(c);
    double diffuse_only = 0;
    for (std::size_t i = 0; i < sched.sun.size(); ++i)
        diffuse_only += sched.weights[i] * clearsky_components(sched.sun[i], c, 0, 0, true).total();
    EXPECT_NEAR(irr(20, 20), diffuse_only, 1e-9 * diffuse_only);
    EXPECT_EQ(min_max(irr).min, irr(20, 20));
}
