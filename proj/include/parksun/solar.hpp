#pragma once

#include <vector>

#include "parksun/raster.hpp"

namespace parksun {

enum class TerrainMode { horizontal, terrain_following };

struct SolarConfig {
    double latitude = 35.78;       // degrees north
    int day_of_year = 172;         // 1..365
    double linke_turbidity = 3.0;
    double albedo = 0.2;
    double time_step = 0.25;       // hours
    double shadow_max_distance = 1000.0;  // meters
    TerrainMode terrain_mode = TerrainMode::terrain_following;

    void validate() const;
};

struct SunPosition {
    double altitude = 0.0;  // degrees above the horizon
    double azimuth = 0.0;   // degrees clockwise from north, [0, 360)
};

/// Irradiance on a receiving surface, W/m^2.
struct IrradianceSample {
    double beam = 0.0;
    double diffuse = 0.0;
    double reflected = 0.0;
    double total() const { return beam + diffuse + reflected; }
};

inline constexpr double kSolarConstant = 1367.0;  // W/m^2

double solar_declination(int day_of_year);  // degrees
double earth_orbit_eccentricity(int day_of_year);

/// Kasten-Young relative optical air mass for a geometric altitude in degrees.
double relative_air_mass(double altitude_deg);

/// Rayleigh optical thickness at a given air mass (ESRA polynomial).
double rayleigh_optical_thickness(double air_mass);

/// Sun position at local solar time (hours, 12 = solar noon).
SunPosition solar_position(const SolarConfig& cfg, double solar_time_hours);

/// ESRA clear-sky beam, diffuse and ground-reflected irradiance on a plane
/// of the given slope/aspect (degrees; aspect clockwise from north, facing
/// downslope). A shadowed plane loses only its beam component.
IrradianceSample clearsky_components(const SunPosition& sun, const SolarConfig& cfg, double slope,
                                     double aspect, bool shadowed);

/// Ray-marching shadow test over a surface raster.
///
/// From the pixel center the ray runs toward the sun in steps of half a cell.
/// The pixel is shadowed when the bilinearly sampled surface rises above the
/// ray at any step. The march stops at shadow_max_distance, at the raster
/// edge, or once the ray is above the highest surface value.
///
/// Internally a pyramid of block maxima lets the march skip stretches where
/// the ray is already above every value the bilinear sampler could return, so
/// the result is identical to testing every step.
class ShadowCaster {
public:
    ShadowCaster(const Raster& surface, double shadow_max_distance);

    /// Sun direction in march units; computed once per sun position.
    struct Ray {
        bool up = false;
        double rise = 0.0;  // meters per step
        double du = 0.0;    // columns per step, east positive
        double dv = 0.0;    // rows per step, south positive
        double inv_du = 0.0;
        double inv_dv = 0.0;
        /// Same direction with the ray's climb scaled by `factor`.
        Ray tilted(double factor) const {
            Ray r = *this;
            r.rise *= factor;
            return r;
        }
    };
    static Ray ray_for(const SunPosition& sun, double cell_size);

    bool shadowed(Index row, Index col, const Ray& ray) const;

    bool shadowed(Index row, Index col, const SunPosition& sun) const;

    const Raster& surface() const { return *surface_; }

private:
    double sample(double u, double v) const;

    struct Level {
        int shift = 0;   // block side is 1 << shift cells
        Index rows = 0;
        Index cols = 0;
        std::vector<double> max;
    };

    const Raster* surface_;
    double max_distance_;
    double global_max_;
    std::vector<Level> levels_;  // coarsest first
};

inline constexpr Index kShadowBlock = 8;

bool is_shadowed(const Raster& surface, Index col, Index row, const SunPosition& sun, const SolarConfig& cfg);

/// Integration nodes over one day: trapezoidal weights in hours between
/// sunrise and sunset (found by bisection to one second).
struct DaylightSchedule {
    double sunrise = 0.0;  // solar hours
    double sunset = 0.0;
    std::vector<double> hours;
    std::vector<double> weights;
    std::vector<SunPosition> sun;
};

DaylightSchedule daylight_schedule(const SolarConfig& cfg);

struct SlopeAspect {
    Raster slope;   // degrees
    Raster aspect;  // degrees clockwise from north, downslope direction
};

/// Horn's 3x3 finite differences. Edge and nodata neighbours take the
/// center value.
SlopeAspect horn_slope_aspect(const Raster& surface);

/// Clear-sky daily irradiation, Wh/m^2/day, per pixel of an elevation raster.
/// Trapezoidal in time. A step whose shadow state may change (the state
/// differs at its ends, or a sunlit end's ray grazes the surface) is
/// resampled at one-minute spacing and the beam removed where it is blocked.
Raster daily_irradiation(const Raster& surface, const SolarConfig& cfg);

}  // namespace parksun
