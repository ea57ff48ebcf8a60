#include "parksun/season.hpp"

#include <algorithm>

#include "parksun/raster_ops.hpp"

namespace parksun {

namespace {

void check_fraction(double f) {
    if (!(f >= 0.0 && f <= 1.0)) throw RangeError("light penetration factor " + std::to_string(f) + " outside [0, 1]");
}

}  // namespace

LeafOnResult leaf_on_composite(const Raster& leaf_on_irr, const BinaryMask& tree, std::optional<double> v_override) {
    require_same_grid(leaf_on_irr.spec(), tree.spec(), "leaf_on_composite");
    const auto mm = min_max(leaf_on_irr);
    double v = mm.min;
    if (v_override) {
        if (!(*v_override >= mm.min && *v_override <= mm.max))
            throw RangeError("all-day-shade value " + std::to_string(*v_override) + " outside raster range [" +
                             std::to_string(mm.min) + ", " + std::to_string(mm.max) + "]");
        v = *v_override;
    }
    return {substitute(leaf_on_irr, tree, v), v};
}

Raster apply_penetration(const Raster& d, double f) {
    check_fraction(f);
    const double max = min_max(d).max;
    const double cutoff = kSunlitFraction * max;
    Raster out = d;
    for (double& v : out.flat()) {
        if (out.is_nodata(v) || !(v < cutoff)) continue;
        v = std::min(max, v + f * (max - v));
    }
    return out;
}

BeneathTrees beneath_trees_leaf_off(const Raster& e, const Raster& d, const Raster& d_adj, const SceneMasks& masks,
                                    double f, std::optional<double> evergreen_floor) {
    check_fraction(f);
    require_same_grid(e.spec(), d.spec(), "beneath_trees_leaf_off");
    require_same_grid(e.spec(), d_adj.spec(), "beneath_trees_leaf_off");
    require_same_grid(e.spec(), masks.evergreen.spec(), "beneath_trees_leaf_off");
    require_same_grid(e.spec(), masks.deciduous.spec(), "beneath_trees_leaf_off");

    BeneathTrees out;
    out.evergreen_floor = evergreen_floor ? *evergreen_floor : min_max(e).min;
    const auto dm = min_max(d);
    out.deciduous_value = dm.min + f * (dm.max - dm.min);
    out.e_sub = substitute(e, masks.evergreen, out.evergreen_floor);
    out.d_sub = substitute(d_adj, masks.deciduous, out.deciduous_value);
    return out;
}

Raster leaf_off_composite(const Raster& b, const Raster& e_sub, const Raster& d_sub) {
    return min_merge(b, e_sub, d_sub);
}

SeasonOutputs compose_seasons(const SeasonInputs& in) {
    check_fraction(in.f);
    const GridSpec& g = in.leaf_on_irr.spec();
    for (const Raster* r : {&in.b, &in.e, &in.d}) require_same_grid(g, r->spec(), "compose_seasons");

    SeasonOutputs out;
    LeafOnResult on = leaf_on_composite(in.leaf_on_irr, in.masks.tree, in.v);
    out.leaf_on = std::move(on.raster);
    out.d_adj = apply_penetration(in.d, in.f);
    BeneathTrees bt = beneath_trees_leaf_off(in.e, in.d, out.d_adj, in.masks, in.f, in.evergreen_floor);
    out.e_sub = std::move(bt.e_sub);
    out.d_sub = std::move(bt.d_sub);
    out.leaf_off = leaf_off_composite(in.b, out.e_sub, out.d_sub);

    const auto dm = min_max(in.d);
    out.constants = {on.v, bt.evergreen_floor, dm.min, dm.max, bt.deciduous_value, in.f};
    return out;
}

}  // namespace parksun
