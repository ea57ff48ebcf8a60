#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "parksun/canopy.hpp"
#include "parksun/lidar.hpp"
#include "parksun/season.hpp"
#include "parksun/solar.hpp"
#include "parksun/zonal.hpp"

namespace parksun {

struct RunConfig {
    std::filesystem::path points;
    std::filesystem::path footprints;  // optional
    std::filesystem::path zones;
    std::filesystem::path imagery;
    std::vector<std::filesystem::path> photos;
    std::filesystem::path output_dir = "out";

    // Analysis grid. Without an explicit extent the grid covers the points.
    double cell_size = 0.5;
    std::optional<double> x_origin;
    std::optional<double> y_origin;
    std::optional<Index> ncols;
    std::optional<Index> nrows;
    int fill_radius = 10;  // cells

    IngestConfig ingest;
    SolarConfig solar;  // shared parameters; day_of_year set per season
    int leaf_on_day = 172;
    int leaf_off_day = 1;
    ClassifyConfig classify;
    Roi roi;
    std::optional<double> photo_threshold;

    std::optional<double> v_override;
    std::optional<double> f_override;
    std::optional<double> evergreen_floor_override;

    int threads = 0;

    /// Checks invariants and that every referenced input exists.
    void validate() const;

    /// Sets one key from the flat config format; throws ValidationError on an
    /// unknown key or a malformed value.
    void set(const std::string& key, const std::string& value);

    /// Every key accepted by set(), with a one-line description.
    static const std::vector<std::pair<std::string, std::string>>& keys();
};

/// Parses `key = value` lines; `#` starts a comment. Paths are resolved
/// relative to the config file's directory.
RunConfig load_run_config(const std::filesystem::path& path);
std::map<std::string, std::string> parse_key_values(std::istream& is, const std::string& source_name);

struct RunReport {
    nlohmann::ordered_json json;
};

struct PipelineResult {
    std::map<std::string, Raster> rasters;  // every persisted raster by file stem
    SeasonOutputs seasons;
    std::vector<ZonalRow> zonal;
    RunReport report;
};

/// Runs every stage and writes rasters, zonal CSV and report.json into
/// cfg.output_dir. On failure writes an INVALID marker naming the stage and
/// rethrows as StageError.
PipelineResult run_pipeline(const RunConfig& cfg);

nlohmann::ordered_json raster_summary(const Raster& r);

}  // namespace parksun
