#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "parksun/geometry.hpp"
#include "parksun/raster.hpp"
#include "parksun/vegetation.hpp"
#include "parksun/zonal.hpp"

namespace parksun {

// ESRI ASCII grid. Header values are written at full precision, pixel values
// with 6 significant digits, rows north to south.
Raster read_grid(std::istream& is, const std::string& source_name = "<stream>");
Raster read_grid(const std::filesystem::path& path);
void write_grid(std::ostream& os, const Raster& r);
void write_grid(const Raster& r, const std::filesystem::path& path);

// Binary PPM (P6, maxval 255).
RgbImage read_ppm(const std::filesystem::path& path);
void write_ppm(const RgbImage& img, const std::filesystem::path& path);

bool png_supported();
RgbImage read_png(const std::filesystem::path& path);
void write_png(const RgbImage& img, const std::filesystem::path& path);

/// Dispatches on extension (.png, else PPM).
RgbImage read_image(const std::filesystem::path& path);

/// World file: six lines (pixel width, row rotation, column rotation,
/// negative pixel height, x and y of the upper-left pixel center).
/// Rotations must be zero and pixels square.
GridSpec read_world_file(const std::filesystem::path& path, Index width, Index height);
void write_world_file(const GridSpec& spec, const std::filesystem::path& path);

/// Sidecar search order for image.ext: image.extw, image.<e[0]><e[-1]>w, image.wld.
std::filesystem::path find_world_file(const std::filesystem::path& image);

/// Image plus georeferencing from its world-file sidecar.
RgbImage read_georeferenced_image(const std::filesystem::path& path);

/// Polygons from a GeoJSON FeatureCollection / Feature / geometry
/// (Polygon and MultiPolygon; other geometry types are skipped).
std::vector<Polygon> read_geojson_polygons(const std::filesystem::path& path);

/// Zones from GeoJSON features with properties "id" and "kind"
/// ("parking" | "road"). A MultiPolygon becomes one zone.
std::vector<ZonePolygon> read_geojson_zones(const std::filesystem::path& path);

void write_geojson_zones(const std::vector<ZonePolygon>& zones, const std::filesystem::path& path);
void write_geojson_polygons(const std::vector<Polygon>& polys, const std::filesystem::path& path);

}  // namespace parksun
