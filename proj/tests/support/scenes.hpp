#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "parksun/canopy.hpp"
#include "parksun/lidar.hpp"
#include "parksun/pipeline.hpp"
#include "parksun/raster.hpp"
#include "parksun/zonal.hpp"

namespace parksun::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Flat ground with a wall of the given height along one row; the wall runs
// east-west so a southern sun throws its shadow north.
Raster wall_scene(Index n, double cell, Index wall_row, double ground, double wall_height);

// Two identical flat-topped crowns on flat ground, mirror images of each
// other about the vertical line through the middle of the grid. The western
// crown is evergreen in the imagery, the eastern one deciduous. A parking lot
// sits under each crown and a road crosses the south of the scene; a small
// building straddles the mirror line north of the trees.
struct TwinTreeScene {
    Index size = 512;          // pixels per side
    double cell = 0.5;         // meters
    double ground = 100.0;     // meters
    double crown_height = 8.0; // above ground
    double crown_radius = 4.0;
    double building_height = 12.0;

    double extent() const { return static_cast<double>(size) * cell; }
    double mid() const { return extent() / 2.0; }
    double crown_y() const { return extent() / 2.0; }
    double evergreen_x() const { return mid() - 40.0 * extent() / 256.0; }
    double deciduous_x() const { return mid() + 40.0 * extent() / 256.0; }
    GridSpec grid() const { return {size, size, 0.0, 0.0, cell}; }

    std::vector<PointRecord> points() const;
    std::vector<ZonePolygon> zones() const;
    std::vector<Polygon> footprints() const;
    // Winter imagery at half the grid cell size, georeferenced via anchor.
    RgbImage imagery() const;
};

// Photo whose roi holds exactly round(ratio * roi_pixels) sky pixels.
RgbImage photo_with_ratio(Index width, Index height, const Roi& roi, double ratio);

// Writes every input of the scene plus photos for ratios {0.60, 0.70, 0.71}
// and a config file; returns the config path.
std::filesystem::path write_twin_tree_inputs(const TwinTreeScene& scene, const std::filesystem::path& dir,
                                             bool las = true);

RunConfig twin_tree_config(const TwinTreeScene& scene, const std::filesystem::path& dir, bool las = true);

}  // namespace parksun::testing
