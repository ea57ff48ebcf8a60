#include "parksun/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>

#include "parksun/io.hpp"
#include "parksun/parallel.hpp"
#include "parksun/raster_ops.hpp"

namespace parksun {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const char* first = v.data();
    const char* last = first + v.size();
    const auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(out))
        throw ValidationError("config key '" + key + "': expected a number, got '" + v + "'");
    return out;
}

long to_long(const std::string& key, const std::string& v) {
    long out = 0;
    const char* first = v.data();
    const char* last = first + v.size();
    const auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc() || res.ptr != last)
        throw ValidationError("config key '" + key + "': expected an integer, got '" + v + "'");
    return out;
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        const auto b = item.find_last_not_of(" \t");
        out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

std::set<std::uint8_t> to_class_set(const std::string& key, const std::string& v) {
    std::set<std::uint8_t> out;
    for (const auto& item : split_list(v)) {
        const long code = to_long(key, item);
        if (code < 0 || code > 255) throw ValidationError("config key '" + key + "': class code out of range");
        out.insert(static_cast<std::uint8_t>(code));
    }
    return out;
}

bool is_path_key(const std::string& key) {
    return key == "points" || key == "footprints" || key == "zones" || key == "imagery" || key == "photos" ||
           key == "output_dir";
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& RunConfig::keys() {
    static const std::vector<std::pair<std::string, std::string>> k{
        {"points", "LiDAR points (.las or xyz text)"},
        {"footprints", "building footprints GeoJSON (optional)"},
        {"zones", "parking lot / road polygons GeoJSON"},
        {"imagery", "winter aerial imagery (PPM or PNG with world file)"},
        {"photos", "comma-separated canopy photographs"},
        {"output_dir", "directory for rasters, CSV and report"},
        {"cell_size", "analysis cell size in meters"},
        {"x_origin", "grid lower-left easting"},
        {"y_origin", "grid lower-left northing"},
        {"ncols", "grid columns"},
        {"nrows", "grid rows"},
        {"fill_radius", "void fill search radius in cells"},
        {"dem_classes", "comma-separated ASPRS codes gridded into the DEM"},
        {"noise_classes", "comma-separated ASPRS codes dropped as noise"},
        {"z_min", "lowest plausible point elevation"},
        {"z_max", "highest plausible point elevation"},
        {"latitude", "site latitude in degrees north"},
        {"linke_turbidity", "Linke turbidity factor"},
        {"albedo", "ground albedo"},
        {"time_step", "integration step in hours"},
        {"shadow_max_distance", "shadow search distance in meters"},
        {"terrain_mode", "horizontal | terrain-following"},
        {"leaf_on_day", "day of year for the leaf-on run"},
        {"leaf_off_day", "day of year for the leaf-off runs"},
        {"tree_height_threshold", "height above building_DEM marking trees (m)"},
        {"evergreen_threshold", "Channel% above which a tree is evergreen"},
        {"roi_center_x", "photo roi center, fraction of width"},
        {"roi_center_y", "photo roi center, fraction of height"},
        {"roi_radius", "photo roi radius, fraction of min(width, height)"},
        {"photo_threshold", "fixed sky luminance threshold (skips Otsu)"},
        {"v", "all-day-shade value override for the leaf-on composite"},
        {"f", "light penetration factor override"},
        {"evergreen_floor", "all-day-shade value override beneath evergreens"},
        {"threads", "worker threads (0 = all cores)"},
    };
    return k;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "points") points = value;
    else if (key == "footprints") footprints = value;
    else if (key == "zones") zones = value;
    else if (key == "imagery") imagery = value;
    else if (key == "photos") {
        photos.clear();
        for (const auto& p : split_list(value)) photos.emplace_back(p);
    } else if (key == "output_dir") output_dir = value;
    else if (key == "cell_size") cell_size = ingest.cell_size = to_double(key, value);
    else if (key == "x_origin") x_origin = to_double(key, value);
    else if (key == "y_origin") y_origin = to_double(key, value);
    else if (key == "ncols") ncols = to_long(key, value);
    else if (key == "nrows") nrows = to_long(key, value);
    else if (key == "fill_radius") fill_radius = static_cast<int>(to_long(key, value));
    else if (key == "dem_classes") ingest.dem_classes = to_class_set(key, value);
    else if (key == "noise_classes") ingest.noise_classes = to_class_set(key, value);
    else if (key == "z_min") ingest.z_min = to_double(key, value);
    else if (key == "z_max") ingest.z_max = to_double(key, value);
    else if (key == "latitude") solar.latitude = to_double(key, value);
    else if (key == "linke_turbidity") solar.linke_turbidity = to_double(key, value);
    else if (key == "albedo") solar.albedo = to_double(key, value);
    else if (key == "time_step") solar.time_step = to_double(key, value);
    else if (key == "shadow_max_distance") solar.shadow_max_distance = to_double(key, value);
    else if (key == "terrain_mode") {
        if (value == "horizontal") solar.terrain_mode = TerrainMode::horizontal;
        else if (value == "terrain-following") solar.terrain_mode = TerrainMode::terrain_following;
        else throw ValidationError("terrain_mode must be 'horizontal' or 'terrain-following', got '" + value + "'");
    } else if (key == "leaf_on_day") leaf_on_day = static_cast<int>(to_long(key, value));
    else if (key == "leaf_off_day") leaf_off_day = static_cast<int>(to_long(key, value));
    else if (key == "tree_height_threshold") classify.tree_height_threshold = to_double(key, value);
    else if (key == "evergreen_threshold") classify.evergreen_threshold = to_double(key, value);
    else if (key == "roi_center_x") roi.center_x = to_double(key, value);
    else if (key == "roi_center_y") roi.center_y = to_double(key, value);
    else if (key == "roi_radius") roi.radius = to_double(key, value);
    else if (key == "photo_threshold") photo_threshold = to_double(key, value);
    else if (key == "v") v_override = to_double(key, value);
    else if (key == "f") f_override = to_double(key, value);
    else if (key == "evergreen_floor") evergreen_floor_override = to_double(key, value);
    else if (key == "threads") threads = static_cast<int>(to_long(key, value));
    else throw ValidationError("unknown config key '" + key + "'");
}

void RunConfig::validate() const {
    auto require_file = [](const fs::path& p, const char* what) {
        if (p.empty()) throw ValidationError(std::string("missing required input '") + what + "'");
        if (!fs::exists(p)) throw ValidationError(std::string(what) + " path does not exist: " + p.string());
    };
    require_file(points, "points");
    require_file(zones, "zones");
    require_file(imagery, "imagery");
    if (!footprints.empty()) require_file(footprints, "footprints");
    for (const auto& p : photos) require_file(p, "photos");
    if (photos.empty() && !f_override) throw ValidationError("either canopy photos or an f override is required");
    if (f_override && !(*f_override >= 0.0 && *f_override <= 1.0))
        throw ValidationError("f override must be within [0, 1]");

    if (!(cell_size > 0.0)) throw ValidationError("cell_size must be positive");
    const int extent_keys = x_origin.has_value() + y_origin.has_value() + ncols.has_value() + nrows.has_value();
    if (extent_keys != 0 && extent_keys != 4)
        throw ValidationError("x_origin, y_origin, ncols and nrows must be given together");
    if (ncols && (*ncols < 1 || *nrows < 1)) throw ValidationError("ncols and nrows must be positive");
    if (fill_radius < 1) throw ValidationError("fill_radius must be >= 1");
    if (leaf_on_day == leaf_off_day) throw ValidationError("leaf_on_day and leaf_off_day must differ");
    if (threads < 0) throw ValidationError("threads must be >= 0");
    ingest.validate();
    classify.validate();
    for (int day : {leaf_on_day, leaf_off_day}) {
        SolarConfig s = solar;
        s.day_of_year = day;
        s.validate();
    }
    if (!(roi.center_x > 0.0 && roi.center_x < 1.0 && roi.center_y > 0.0 && roi.center_y < 1.0 && roi.radius > 0.0 &&
          roi.radius <= 0.5))
        throw ValidationError("roi center must be inside the photo and radius within (0, 0.5]");
}

std::map<std::string, std::string> parse_key_values(std::istream& is, const std::string& source_name) {
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    };
    while (std::getline(is, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(source_name + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError(source_name + ":" + std::to_string(line_no) + ": empty key");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    const auto kv = parse_key_values(in, path.string());
    const fs::path base = path.parent_path();
    RunConfig cfg;
    for (const auto& [key, value] : kv) {
        if (is_path_key(key) && !value.empty()) {
            std::string resolved;
            for (const auto& item : split_list(value)) {
                const fs::path p(item);
                if (!resolved.empty()) resolved += ',';
                resolved += (p.is_absolute() ? p : base / p).string();
            }
            cfg.set(key, resolved);
        } else {
            cfg.set(key, value);
        }
    }
    return cfg;
}

ordered_json raster_summary(const Raster& r) {
    ordered_json j;
    j["valid_pixels"] = r.count_valid();
    if (r.count_valid() > 0) {
        const auto mm = min_max(r);
        j["min"] = mm.min;
        j["max"] = mm.max;
    } else {
        j["min"] = nullptr;
        j["max"] = nullptr;
    }
    return j;
}

namespace {

class ThreadScope {
public:
    explicit ThreadScope(int n) : previous_(thread_count()) { set_thread_count(n); }
    ~ThreadScope() { set_thread_count(previous_); }
    ThreadScope(const ThreadScope&) = delete;
    ThreadScope& operator=(const ThreadScope&) = delete;

private:
    int previous_;
};

ordered_json solar_json(const SolarConfig& s) {
    return {{"latitude", s.latitude},
            {"day_of_year", s.day_of_year},
            {"linke_turbidity", s.linke_turbidity},
            {"albedo", s.albedo},
            {"time_step_hours", s.time_step},
            {"shadow_max_distance_m", s.shadow_max_distance},
            {"terrain_mode", s.terrain_mode == TerrainMode::horizontal ? "horizontal" : "terrain-following"}};
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& cfg) {
    using clock = std::chrono::steady_clock;
    PipelineResult result;
    ordered_json& report = result.report.json;
    report["stages"] = ordered_json::array();
    std::string stage = "validate";
    auto t0 = clock::now();
    auto finish_stage = [&](const std::string& next) {
        const auto now = clock::now();
        report["stages"].push_back({{"name", stage}, {"seconds", std::chrono::duration<double>(now - t0).count()}});
        stage = next;
        t0 = now;
    };
    auto keep = [&](const std::string& name, const Raster& r) {
        write_grid(r, cfg.output_dir / (name + ".asc"));
        result.rasters.insert_or_assign(name, r);
        report["rasters"][name] = raster_summary(r);
    };

    const fs::path invalid_marker = cfg.output_dir / "INVALID";
    try {
        cfg.validate();
        fs::create_directories(cfg.output_dir);
        fs::remove(invalid_marker);
        fs::remove(cfg.output_dir / "report.json");
        ThreadScope threads(cfg.threads);
        finish_stage("ingest");

        // LiDAR -> DSM / DEM
        const auto raw = read_points(cfg.points, guess_point_format(cfg.points));
        IngestConfig ingest = cfg.ingest;
        ingest.cell_size = cfg.cell_size;
        const auto points = filter_noise(raw, ingest);
        GridSpec grid;
        if (cfg.ncols) {
            grid = {*cfg.ncols, *cfg.nrows, *cfg.x_origin, *cfg.y_origin, cfg.cell_size};
            grid.validate();
        } else {
            grid = grid_covering(points, cfg.cell_size);
        }
        const Raster dsm_raw = grid_dsm(points, grid);
        const Raster dem_raw = grid_dem(points, grid, ingest);
        const Raster dsm = fill_voids(dsm_raw, cfg.fill_radius);
        const Raster dem = fill_voids(dem_raw, cfg.fill_radius);
        if (dsm.count_valid() == 0 || dem.count_valid() == 0)
            throw EmptyRasterError("no LiDAR points fall inside the analysis grid");
        report["grid"] = {{"ncols", grid.ncols}, {"nrows", grid.nrows}, {"x_origin", grid.x_origin},
                          {"y_origin", grid.y_origin}, {"cell_size", grid.cell_size}};
        report["points"] = {{"read", raw.size()}, {"after_noise_filter", points.size()}};
        report["warnings"]["unfilled_dsm_pixels"] = dsm.size() - dsm.count_valid();
        report["warnings"]["unfilled_dem_pixels"] = dem.size() - dem.count_valid();
        keep("dsm", dsm);
        keep("dem", dem);
        finish_stage("classify");

        // Buildings, trees, evergreen / deciduous split
        std::vector<Polygon> footprints;
        if (!cfg.footprints.empty()) footprints = read_geojson_polygons(cfg.footprints);
        BuildingDem bdem = building_dem(dem, dsm, footprints);
        BinaryMask trees = tree_mask(dsm, bdem.elevation, cfg.classify);
        const RgbImage imagery = read_georeferenced_image(cfg.imagery);
        const Raster channel = channel_percent(imagery, grid);
        TreeSplit split = split_trees(channel, trees, cfg.classify);
        const Raster evergreen_dem = tree_type_dem(dem, dsm, split.evergreen);
        const Raster deciduous_dem = tree_type_dem(dem, dsm, split.deciduous);
        report["warnings"]["trees_without_channel_percent"] = split.defaulted_to_deciduous;
        keep("building_mask", bdem.mask.raster());
        keep("building_dem", bdem.elevation);
        keep("tree_mask", trees.raster());
        keep("channel_percent", channel);
        keep("evergreen_mask", split.evergreen.raster());
        keep("deciduous_mask", split.deciduous.raster());
        keep("evergreen_dem", evergreen_dem);
        keep("deciduous_dem", deciduous_dem);
        finish_stage("sun");

        // Irradiation runs
        SolarConfig summer = cfg.solar, winter = cfg.solar;
        summer.day_of_year = cfg.leaf_on_day;
        winter.day_of_year = cfg.leaf_off_day;
        report["solar"] = {{"leaf_on", solar_json(summer)}, {"leaf_off", solar_json(winter)}};
        SeasonInputs in;
        in.leaf_on_irr = daily_irradiation(dsm, summer);
        keep("leaf_on_irradiation", in.leaf_on_irr);
        in.b = daily_irradiation(bdem.elevation, winter);
        keep("leaf_off_building_irradiation", in.b);
        in.e = daily_irradiation(evergreen_dem, winter);
        keep("leaf_off_evergreen_irradiation", in.e);
        in.d = daily_irradiation(deciduous_dem, winter);
        keep("leaf_off_deciduous_irradiation", in.d);
        finish_stage("canopy");

        // Light penetration factor
        PenetrationEstimate pen;
        Index degenerate_photos = 0;
        if (!cfg.photos.empty()) {
            std::vector<double> ratios;
            for (const auto& p : cfg.photos) {
                const auto t = crown_transparency({read_image(p), cfg.roi}, cfg.photo_threshold);
                degenerate_photos += t.degenerate;
                ratios.push_back(t.ratio);
            }
            pen = penetration_from_ratios(std::move(ratios));
        }
        report["warnings"]["degenerate_photos"] = degenerate_photos;
        const double f = cfg.f_override ? *cfg.f_override : pen.factor;
        finish_stage("compose");

        // Seasonal composites
        in.masks = {bdem.mask, trees, split.evergreen, split.deciduous};
        in.f = f;
        in.v = cfg.v_override;
        in.evergreen_floor = cfg.evergreen_floor_override;
        result.seasons = compose_seasons(in);
        const SeasonConstants& k = result.seasons.constants;
        report["constants"] = {
            {"v", k.v},
            {"v_source", cfg.v_override ? "override" : "leaf_on_irradiation minimum"},
            {"f", k.f},
            {"f_source", cfg.f_override ? "override" : "canopy photos"},
            {"per_photo_ratios", pen.per_photo_ratios},
            {"t", cfg.classify.evergreen_threshold},
            {"tree_height_threshold", cfg.classify.tree_height_threshold},
            {"evergreen_floor", k.evergreen_floor},
            {"deciduous_min", k.d_min},
            {"deciduous_max", k.d_max},
            {"deciduous_under_crown", k.deciduous_under_crown},
            {"sunlit_fraction", kSunlitFraction},
        };
        keep("leaf_off_deciduous_penetration", result.seasons.d_adj);
        keep("leaf_off_evergreen_substituted", result.seasons.e_sub);
        keep("leaf_off_deciduous_substituted", result.seasons.d_sub);
        keep("leaf_on", result.seasons.leaf_on);
        keep("leaf_off", result.seasons.leaf_off);
        finish_stage("zonal");

        // Per-zone means
        const auto zones = read_geojson_zones(cfg.zones);
        ZoneLabels labels = rasterize_zones(zones, grid);
        report["warnings"]["zone_overlap_pixels"] = labels.overlap_pixels;
        keep("zone_labels", labels.labels);
        result.zonal = zonal_means(result.seasons.leaf_on, result.seasons.leaf_off, labels.labels, zones);
        write_zonal_csv(cfg.output_dir / "zonal.csv", result.zonal);
        finish_stage("report");

        std::ofstream out(cfg.output_dir / "report.json");
        if (!out) throw IoError("cannot write report.json");
        out << report.dump(2) << '\n';
    } catch (const std::exception& e) {
        std::error_code ec;
        if (fs::exists(cfg.output_dir, ec)) {
            std::ofstream marker(invalid_marker);
            marker << "stage: " << stage << "\nerror: " << e.what() << '\n';
        }
        throw StageError(stage, e.what());
    }
    return result;
}

}  // namespace parksun
