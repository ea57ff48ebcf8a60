#pragma once

#include <optional>

#include "parksun/vegetation.hpp"

namespace parksun {

inline constexpr double kSunlitFraction = 0.995;

struct SeasonInputs {
    Raster leaf_on_irr;  // irradiation of the DSM, summer date
    Raster b;            // building_DEM, winter date
    Raster e;            // evergreen_DEM, winter date
    Raster d;            // deciduous_DEM, winter date
    SceneMasks masks;
    double f = 0.0;      // light penetration factor
    std::optional<double> v;               // all-day-shade override, leaf-on
    std::optional<double> evergreen_floor;  // all-day-shade override for e
};

/// Constants actually applied while compositing.
struct SeasonConstants {
    double v = 0.0;
    double evergreen_floor = 0.0;
    double d_min = 0.0;
    double d_max = 0.0;
    double deciduous_under_crown = 0.0;
    double f = 0.0;
};

struct SeasonOutputs {
    Raster leaf_on;
    Raster leaf_off;
    Raster e_sub;
    Raster d_adj;
    Raster d_sub;
    SeasonConstants constants;
};

struct LeafOnResult {
    Raster raster;
    double v = 0.0;
};

/// Sets pixels beneath tree crowns to the all-day-shade value v (default:
/// the raster minimum).
LeafOnResult leaf_on_composite(const Raster& leaf_on_irr, const BinaryMask& tree, std::optional<double> v_override = {});

/// Pixels below 99.5% of the raster maximum move a fraction f of the way to it.
Raster apply_penetration(const Raster& d, double f);

struct BeneathTrees {
    Raster e_sub;
    Raster d_sub;
    double evergreen_floor = 0.0;
    double deciduous_value = 0.0;
};

/// Beneath evergreen crowns e takes its own minimum (or the override);
/// beneath deciduous crowns d_adj takes min + f (max - min), with min/max of
/// the unadjusted d.
BeneathTrees beneath_trees_leaf_off(const Raster& e, const Raster& d, const Raster& d_adj, const SceneMasks& masks,
                                    double f, std::optional<double> evergreen_floor = {});

Raster leaf_off_composite(const Raster& b, const Raster& e_sub, const Raster& d_sub);

/// Full seasonal arithmetic: penetration, beneath-crown substitution, merge.
SeasonOutputs compose_seasons(const SeasonInputs& in);

}  // namespace parksun
