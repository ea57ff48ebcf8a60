#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <vector>

#include "parksun/raster.hpp"

namespace parksun {

struct PointRecord {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    std::uint8_t classification = 0;  // ASPRS code
    std::uint8_t return_number = 1;   // 1-based
};

struct IngestConfig {
    double cell_size = 0.5;
    // Ground, road surface, bridge deck.
    std::set<std::uint8_t> dem_classes{2, 11, 17};
    // Low point (noise), high noise.
    std::set<std::uint8_t> noise_classes{7, 18};
    double z_min = -100.0;
    double z_max = 1000.0;

    void validate() const;
};

enum class PointFormat { las, xyz_text };

/// Picks the format from the file extension (.las, else text).
PointFormat guess_point_format(const std::filesystem::path& path);

std::vector<PointRecord> read_points(const std::filesystem::path& path, PointFormat format);
std::vector<PointRecord> read_xyz_text(const std::filesystem::path& path);
std::vector<PointRecord> read_las(const std::filesystem::path& path);

/// Writes LAS 1.2, point format 0. Coordinates are quantized with `scale`.
void write_las(const std::filesystem::path& path, std::span<const PointRecord> points, double scale = 0.001);
void write_xyz_text(const std::filesystem::path& path, std::span<const PointRecord> points);

std::vector<PointRecord> filter_noise(std::span<const PointRecord> points, const IngestConfig& cfg);

/// Smallest grid covering every point, snapped outward to whole cells.
GridSpec grid_covering(std::span<const PointRecord> points, double cell_size);

/// Max z of first returns per cell.
Raster grid_dsm(std::span<const PointRecord> points, const GridSpec& spec);

/// Min z of points in cfg.dem_classes per cell.
Raster grid_dem(std::span<const PointRecord> points, const GridSpec& spec, const IngestConfig& cfg);

/// Fills each nodata pixel from the nearest valid pixel within
/// max_radius_cells (Euclidean in cells). Ties go to the smallest row, then
/// the smallest column.
Raster fill_voids(const Raster& r, int max_radius_cells);

}  // namespace parksun
