#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "parksun/geometry.hpp"
#include "parksun/raster.hpp"

namespace parksun {

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit RGB image, row 0 at the top. `anchor` georeferences the pixels when
/// the image is aerial imagery.
struct RgbImage {
    Index width = 0;
    Index height = 0;
    std::vector<Rgb> pixels;  // row-major, width * height
    std::optional<GridSpec> anchor;

    RgbImage() = default;
    RgbImage(Index w, Index h, Rgb fill = {0, 0, 0}) : width(w), height(h), pixels(static_cast<std::size_t>(w * h), fill) {}

    const Rgb& operator()(Index row, Index col) const { return pixels[static_cast<std::size_t>(row * width + col)]; }
    Rgb& operator()(Index row, Index col) { return pixels[static_cast<std::size_t>(row * width + col)]; }
};

struct ClassifyConfig {
    double tree_height_threshold = 2.5;  // meters
    double evergreen_threshold = 0.375;  // Channel% above this is evergreen

    void validate() const;
};

struct SceneMasks {
    BinaryMask building;
    BinaryMask tree;
    BinaryMask evergreen;
    BinaryMask deciduous;
};

struct BuildingDem {
    Raster elevation;
    BinaryMask mask;
};

/// Raises the DEM to DSM height inside building footprints.
BuildingDem building_dem(const Raster& dem, const Raster& dsm, const std::vector<Polygon>& footprints);

/// 1 where dsm - building_dem exceeds the threshold (strictly).
BinaryMask tree_mask(const Raster& dsm, const Raster& building_dem, const ClassifyConfig& cfg);

/// Green share G / (R + G + B) at imagery resolution, mean-resampled to target.
Raster channel_percent(const RgbImage& img, const GridSpec& target);

struct TreeSplit {
    BinaryMask evergreen;
    BinaryMask deciduous;
    Index defaulted_to_deciduous = 0;  // tree pixels without a Channel% value
};

TreeSplit split_trees(const Raster& channel, const BinaryMask& tree, const ClassifyConfig& cfg);

/// DEM with DSM heights pasted in where mask is set (evergreen_DEM or
/// deciduous_DEM depending on the mask).
Raster tree_type_dem(const Raster& dem, const Raster& dsm, const BinaryMask& mask);

}  // namespace parksun
