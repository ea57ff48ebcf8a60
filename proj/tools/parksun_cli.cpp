// parksun: seasonal clear-sky solar potential for parking lots and roads.
//
// Each subcommand runs one stage over the interchange formats (ESRI ASCII
// grids, GeoJSON, LAS / xyz text, PPM / PNG + world file, CSV) so stages can
// be rerun independently; `pipeline` runs them all from a config file.

#include <filesystem>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "parksun/canopy.hpp"
#include "parksun/io.hpp"
#include "parksun/lidar.hpp"
#include "parksun/parallel.hpp"
#include "parksun/pipeline.hpp"
#include "parksun/raster_ops.hpp"
#include "parksun/season.hpp"
#include "parksun/solar.hpp"
#include "parksun/vegetation.hpp"
#include "parksun/zonal.hpp"

namespace fs = std::filesystem;
using namespace parksun;

namespace {

struct GridArgs {
    std::string points;
    std::string format = "auto";
    double cell_size = 0.5;
    std::vector<double> extent;  // x_origin y_origin ncols nrows
    int fill_radius = 10;
    double z_min = -100.0, z_max = 1000.0;
    std::string out_dsm = "dsm.asc", out_dem = "dem.asc";
};

void run_grid(const GridArgs& a) {
    PointFormat fmt = a.format == "las"   ? PointFormat::las
                      : a.format == "xyz" ? PointFormat::xyz_text
                                          : guess_point_format(a.points);
    IngestConfig cfg;
    cfg.cell_size = a.cell_size;
    cfg.z_min = a.z_min;
    cfg.z_max = a.z_max;
    cfg.validate();
    const auto points = filter_noise(read_points(a.points, fmt), cfg);
    GridSpec grid;
    if (!a.extent.empty()) {
        if (a.extent.size() != 4) throw ValidationError("--extent takes x_origin y_origin ncols nrows");
        grid = {static_cast<Index>(a.extent[2]), static_cast<Index>(a.extent[3]), a.extent[0], a.extent[1], a.cell_size};
        grid.validate();
    } else {
        grid = grid_covering(points, a.cell_size);
    }
    write_grid(fill_voids(grid_dsm(points, grid), a.fill_radius), a.out_dsm);
    write_grid(fill_voids(grid_dem(points, grid, cfg), a.fill_radius), a.out_dem);
    std::cout << "gridded " << points.size() << " points onto " << describe(grid) << '\n';
}

struct SunArgs {
    std::string surface, out = "irradiation.asc", terrain = "terrain-following";
    SolarConfig cfg;
};

void run_sun(SunArgs a) {
    if (a.terrain == "horizontal") a.cfg.terrain_mode = TerrainMode::horizontal;
    else if (a.terrain != "terrain-following") throw ValidationError("--terrain-mode must be horizontal or terrain-following");
    const Raster irr = daily_irradiation(read_grid(a.surface), a.cfg);
    write_grid(irr, a.out);
    const auto mm = min_max(irr);
    std::cout << "daily irradiation (Wh/m2/day): min " << mm.min << ", max " << mm.max << '\n';
}

struct ClassifyArgs {
    std::string dem, dsm, footprints, imagery, out_dir = ".";
    ClassifyConfig cfg;
};

void run_classify(const ClassifyArgs& a) {
    const Raster dem = read_grid(a.dem), dsm = read_grid(a.dsm);
    std::vector<Polygon> footprints;
    if (!a.footprints.empty()) footprints = read_geojson_polygons(a.footprints);
    const BuildingDem b = building_dem(dem, dsm, footprints);
    const BinaryMask trees = tree_mask(dsm, b.elevation, a.cfg);
    const Raster chan = channel_percent(read_georeferenced_image(a.imagery), dem.spec());
    const TreeSplit split = split_trees(chan, trees, a.cfg);
    const fs::path out(a.out_dir);
    fs::create_directories(out);
    write_grid(b.mask.raster(), out / "building_mask.asc");
    write_grid(b.elevation, out / "building_dem.asc");
    write_grid(trees.raster(), out / "tree_mask.asc");
    write_grid(chan, out / "channel_percent.asc");
    write_grid(split.evergreen.raster(), out / "evergreen_mask.asc");
    write_grid(split.deciduous.raster(), out / "deciduous_mask.asc");
    write_grid(tree_type_dem(dem, dsm, split.evergreen), out / "evergreen_dem.asc");
    write_grid(tree_type_dem(dem, dsm, split.deciduous), out / "deciduous_dem.asc");
    std::cout << "tree pixels: " << trees.count_set() << " (evergreen " << split.evergreen.count_set()
              << ", deciduous " << split.deciduous.count_set() << ")\n";
    if (split.defaulted_to_deciduous > 0)
        std::cerr << "warning: " << split.defaulted_to_deciduous
                  << " tree pixels had no Channel% value and were treated as deciduous\n";
}

struct CanopyArgs {
    std::vector<std::string> photos;
    Roi roi;
    std::optional<double> threshold;
};

void run_canopy(const CanopyArgs& a) {
    std::vector<double> ratios;
    for (const auto& p : a.photos) {
        const auto t = crown_transparency({read_image(p), a.roi}, a.threshold);
        if (t.degenerate) std::cerr << "warning: " << p << ": roi has a single luminance level\n";
        std::cout << p << ": transparency " << t.ratio << " (threshold " << t.threshold << ", " << t.roi_pixels
                  << " roi pixels)\n";
        ratios.push_back(t.ratio);
    }
    std::cout << "penetration factor f = " << penetration_from_ratios(std::move(ratios)).factor << '\n';
}

struct ComposeArgs {
    std::string leaf_on_irr, b, e, d, tree, evergreen, deciduous, out_dir = ".";
    double f = 0.0;
    std::optional<double> v, evergreen_floor;
};

void run_compose(const ComposeArgs& a) {
    SeasonInputs in;
    in.leaf_on_irr = read_grid(a.leaf_on_irr);
    in.b = read_grid(a.b);
    in.e = read_grid(a.e);
    in.d = read_grid(a.d);
    in.masks.tree = BinaryMask(read_grid(a.tree));
    in.masks.evergreen = BinaryMask(read_grid(a.evergreen));
    in.masks.deciduous = BinaryMask(read_grid(a.deciduous));
    in.f = a.f;
    in.v = a.v;
    in.evergreen_floor = a.evergreen_floor;
    const SeasonOutputs out = compose_seasons(in);
    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    write_grid(out.leaf_on, dir / "leaf_on.asc");
    write_grid(out.leaf_off, dir / "leaf_off.asc");
    write_grid(out.d_adj, dir / "leaf_off_deciduous_penetration.asc");
    write_grid(out.e_sub, dir / "leaf_off_evergreen_substituted.asc");
    write_grid(out.d_sub, dir / "leaf_off_deciduous_substituted.asc");
    const auto& k = out.constants;
    std::cout << "v = " << k.v << ", evergreen floor = " << k.evergreen_floor << ", deciduous min/max = " << k.d_min
              << "/" << k.d_max << ", beneath deciduous = " << k.deciduous_under_crown << ", f = " << k.f << '\n';
}

struct ZonalArgs {
    std::string leaf_on, leaf_off, zones, out = "zonal.csv";
};

void run_zonal(const ZonalArgs& a) {
    const Raster on = read_grid(a.leaf_on), off = read_grid(a.leaf_off);
    const auto zones = read_geojson_zones(a.zones);
    const ZoneLabels labels = rasterize_zones(zones, on.spec());
    if (labels.overlap_pixels > 0)
        std::cerr << "warning: " << labels.overlap_pixels << " pixels covered by overlapping zones\n";
    write_zonal_csv(a.out, zonal_means(on, off, labels.labels, zones));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Seasonal clear-sky solar potential for parking lots and roads"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = all cores)");

    GridArgs grid;
    auto* grid_cmd = app.add_subcommand("grid", "grid LiDAR points into DSM and DEM");
    grid_cmd->add_option("--points", grid.points, "LAS or xyz text file")->required();
    grid_cmd->add_option("--format", grid.format, "auto | las | xyz");
    grid_cmd->add_option("--cell-size", grid.cell_size, "meters");
    grid_cmd->add_option("--extent", grid.extent, "x_origin y_origin ncols nrows")->expected(4);
    grid_cmd->add_option("--fill-radius", grid.fill_radius, "void fill radius in cells");
    grid_cmd->add_option("--z-min", grid.z_min);
    grid_cmd->add_option("--z-max", grid.z_max);
    grid_cmd->add_option("--out-dsm", grid.out_dsm);
    grid_cmd->add_option("--out-dem", grid.out_dem);

    SunArgs sun;
    auto* sun_cmd = app.add_subcommand("sun", "clear-sky daily irradiation of an elevation grid");
    sun_cmd->add_option("--surface", sun.surface, "elevation grid (.asc)")->required();
    sun_cmd->add_option("--out", sun.out);
    sun_cmd->add_option("--latitude", sun.cfg.latitude);
    sun_cmd->add_option("--day", sun.cfg.day_of_year, "day of year 1..365");
    sun_cmd->add_option("--linke-turbidity", sun.cfg.linke_turbidity);
    sun_cmd->add_option("--albedo", sun.cfg.albedo);
    sun_cmd->add_option("--time-step", sun.cfg.time_step, "hours");
    sun_cmd->add_option("--shadow-max-distance", sun.cfg.shadow_max_distance, "meters");
    sun_cmd->add_option("--terrain-mode", sun.terrain, "horizontal | terrain-following");

    ClassifyArgs classify;
    auto* classify_cmd = app.add_subcommand("classify", "building_DEM, tree masks and tree-type DEMs");
    classify_cmd->add_option("--dem", classify.dem)->required();
    classify_cmd->add_option("--dsm", classify.dsm)->required();
    classify_cmd->add_option("--footprints", classify.footprints, "building footprints GeoJSON");
    classify_cmd->add_option("--imagery", classify.imagery, "winter imagery with world file")->required();
    classify_cmd->add_option("--out-dir", classify.out_dir);
    classify_cmd->add_option("--tree-height-threshold", classify.cfg.tree_height_threshold);
    classify_cmd->add_option("--evergreen-threshold", classify.cfg.evergreen_threshold);

    CanopyArgs canopy;
    auto* canopy_cmd = app.add_subcommand("canopy", "crown transparency and light penetration factor");
    canopy_cmd->add_option("photos", canopy.photos, "canopy photographs (PPM or PNG)")->required();
    canopy_cmd->add_option("--roi-center-x", canopy.roi.center_x);
    canopy_cmd->add_option("--roi-center-y", canopy.roi.center_y);
    canopy_cmd->add_option("--roi-radius", canopy.roi.radius);
    canopy_cmd->add_option("--threshold", canopy.threshold, "fixed sky luminance threshold");

    ComposeArgs compose;
    auto* compose_cmd = app.add_subcommand("compose", "leaf-on and leaf-off composites");
    compose_cmd->add_option("--leaf-on-irradiation", compose.leaf_on_irr)->required();
    compose_cmd->add_option("--building", compose.b, "winter irradiation of building_DEM")->required();
    compose_cmd->add_option("--evergreen", compose.e, "winter irradiation of evergreen_DEM")->required();
    compose_cmd->add_option("--deciduous", compose.d, "winter irradiation of deciduous_DEM")->required();
    compose_cmd->add_option("--tree-mask", compose.tree)->required();
    compose_cmd->add_option("--evergreen-mask", compose.evergreen)->required();
    compose_cmd->add_option("--deciduous-mask", compose.deciduous)->required();
    compose_cmd->add_option("--f", compose.f, "light penetration factor")->required();
    compose_cmd->add_option("--v", compose.v, "all-day-shade value override");
    compose_cmd->add_option("--evergreen-floor", compose.evergreen_floor);
    compose_cmd->add_option("--out-dir", compose.out_dir);

    ZonalArgs zonal;
    auto* zonal_cmd = app.add_subcommand("zonal", "per-polygon mean potential");
    zonal_cmd->add_option("--leaf-on", zonal.leaf_on)->required();
    zonal_cmd->add_option("--leaf-off", zonal.leaf_off)->required();
    zonal_cmd->add_option("--zones", zonal.zones)->required();
    zonal_cmd->add_option("--out", zonal.out);

    std::string config_path;
    std::map<std::string, std::string> overrides;
    std::map<std::string, CLI::Option*> override_opts;
    auto* pipeline_cmd = app.add_subcommand("pipeline", "run every stage from a key=value config file");
    pipeline_cmd->add_option("--config", config_path, "config file");
    for (const auto& [key, desc] : RunConfig::keys())
        override_opts[key] = pipeline_cmd->add_option("--" + key, overrides[key], desc);

    CLI11_PARSE(app, argc, argv);
    set_thread_count(threads);

    const std::string stage = app.get_subcommands().front()->get_name();
    try {
        if (*grid_cmd) run_grid(grid);
        else if (*sun_cmd) run_sun(sun);
        else if (*classify_cmd) run_classify(classify);
        else if (*canopy_cmd) run_canopy(canopy);
        else if (*compose_cmd) run_compose(compose);
        else if (*zonal_cmd) run_zonal(zonal);
        else if (*pipeline_cmd) {
            RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
            for (const auto& [key, opt] : override_opts)
                if (opt->count() > 0) cfg.set(key, overrides[key]);
            if (cfg.threads == 0) cfg.threads = threads;
            const PipelineResult res = run_pipeline(cfg);
            std::cout << "wrote " << res.rasters.size() << " rasters, " << res.zonal.size() << " zonal rows to "
                      << cfg.output_dir << '\n';
        }
    } catch (const StageError& e) {
        std::cerr << "parksun " << stage << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "parksun " << stage << ": [" << stage << "] " << e.what() << '\n';
        return 1;
    }
    return 0;
}
