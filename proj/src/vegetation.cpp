#include "parksun/vegetation.hpp"

#include "parksun/raster_ops.hpp"

namespace parksun {

void ClassifyConfig::validate() const {
    if (!(tree_height_threshold > 0.0)) throw ValidationError("tree_height_threshold must be positive");
    if (!(evergreen_threshold > 0.0 && evergreen_threshold < 1.0))
        throw ValidationError("evergreen_threshold must be within (0, 1)");
}

BuildingDem building_dem(const Raster& dem, const Raster& dsm, const std::vector<Polygon>& footprints) {
    require_same_grid(dem.spec(), dsm.spec(), "building_dem");
    BinaryMask mask = rasterize_polygons(footprints, dem.spec());
    Raster elevation = substitute(dem, mask, dsm);
    return {std::move(elevation), std::move(mask)};
}

BinaryMask tree_mask(const Raster& dsm, const Raster& building_dem, const ClassifyConfig& cfg) {
    cfg.validate();
    require_same_grid(dsm.spec(), building_dem.spec(), "tree_mask");
    Raster out(dsm.spec(), 0.0);
    const auto& s = dsm.values();
    const auto& b = building_dem.values();
    const auto missing = (s == dsm.nodata()) || (b == building_dem.nodata());
    out.values() = missing.select(out.nodata(), ((s - b) > cfg.tree_height_threshold).cast<double>());
    return BinaryMask(std::move(out));
}

Raster channel_percent(const RgbImage& img, const GridSpec& target) {
    if (!img.anchor) throw ArgumentError("channel_percent: imagery has no georeferencing");
    const GridSpec& g = *img.anchor;
    if (g.ncols != img.width || g.nrows != img.height)
        throw ShapeError("channel_percent: imagery georeferencing does not match its pixel size");
    if (!g.overlaps(target))
        throw ExtentError("imagery " + describe(g) + " does not overlap analysis grid " + describe(target));

    Raster native(g);
    for (Index r = 0; r < img.height; ++r)
        for (Index c = 0; c < img.width; ++c) {
            const Rgb& p = img(r, c);
            const int sum = p[0] + p[1] + p[2];
            if (sum > 0) native(r, c) = static_cast<double>(p[1]) / static_cast<double>(sum);
        }
    return resample_to(native, target, ResampleMethod::mean);
}

TreeSplit split_trees(const Raster& channel, const BinaryMask& tree, const ClassifyConfig& cfg) {
    cfg.validate();
    require_same_grid(channel.spec(), tree.spec(), "split_trees");
    const GridSpec& g = tree.spec();
    Raster evergreen(g, 0.0), deciduous(g, 0.0);
    Index defaulted = 0;
    for (Index r = 0; r < g.nrows; ++r)
        for (Index c = 0; c < g.ncols; ++c) {
            if (tree.is_nodata(r, c)) {
                evergreen(r, c) = evergreen.nodata();
                deciduous(r, c) = deciduous.nodata();
                continue;
            }
            if (!tree.is_set(r, c)) continue;
            const double chan = channel(r, c);
            if (channel.is_nodata(chan)) {
                ++defaulted;
                deciduous(r, c) = 1.0;
            } else if (chan > cfg.evergreen_threshold) {
                evergreen(r, c) = 1.0;
            } else {
                deciduous(r, c) = 1.0;
            }
        }
    return {BinaryMask(std::move(evergreen)), BinaryMask(std::move(deciduous)), defaulted};
}

Raster tree_type_dem(const Raster& dem, const Raster& dsm, const BinaryMask& mask) {
    require_same_grid(dem.spec(), dsm.spec(), "tree_type_dem");
    return substitute(dem, mask, dsm);
}

}  // namespace parksun
