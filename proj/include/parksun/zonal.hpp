#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "parksun/geometry.hpp"
#include "parksun/raster.hpp"

namespace parksun {

enum class ZoneKind { parking, road };

const char* to_string(ZoneKind k);
ZoneKind parse_zone_kind(const std::string& s);

struct ZonePolygon {
    std::string id;
    ZoneKind kind = ZoneKind::parking;
    std::vector<Ring> rings;  // closed: first vertex repeated at the end
};

struct ZonalRow {
    std::string id;
    ZoneKind kind = ZoneKind::parking;
    std::optional<double> leaf_on_mean;   // Wh/m^2/day
    std::optional<double> leaf_off_mean;
    Index pixel_count = 0;
};

struct ZoneLabels {
    Raster labels;  // zone index, nodata outside every zone
    Index overlap_pixels = 0;
};

/// Labels each pixel with the index of the zone containing its center. On
/// overlap the later zone wins and the pixel is counted in overlap_pixels.
ZoneLabels rasterize_zones(const std::vector<ZonePolygon>& zones, const GridSpec& spec);

std::vector<ZonalRow> zonal_means(const Raster& leaf_on, const Raster& leaf_off, const Raster& labels,
                                  const std::vector<ZonePolygon>& zones);

void write_zonal_csv(std::ostream& os, const std::vector<ZonalRow>& rows);
void write_zonal_csv(const std::filesystem::path& path, const std::vector<ZonalRow>& rows);

}  // namespace parksun
