// photocal command-line tool. Every command loads its inputs, calls the
// library, and writes files plus a report (JSON with --json).

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "cli_support.hpp"
#include "pano_io.hpp"
#include "photocal/photocal.hpp"

#ifndef PHOTOCAL_VERSION
#define PHOTOCAL_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace photocal;
using photocal::cli::parse_projection;
using photocal::cli::parse_vec3;

namespace {

struct Globals {
    bool json_output = false;
};

Globals g_opts;

std::optional<Projection> projection_override(const std::string& text) {
    if (text.empty()) return std::nullopt;
    return parse_projection(text);
}

// Metadata for a derived map: fresh block, provenance carried over.
json derived_metadata(const RadianceMap& map, const json& source) {
    json m = io::Metadata::for_map(map, PHOTOCAL_VERSION).block;
    for (const char* key : {"profile_hash", "config_id", "seed"})
        if (source.contains(key)) m[key] = source.at(key);
    return m;
}

// Reports go to stdout unless stdout carries image data.
void report(const json& doc, bool stdout_busy = false) {
    std::ostream& out = stdout_busy ? std::cerr : std::cout;
    if (g_opts.json_output) {
        out << doc.dump(2) << "\n";
        return;
    }
    for (const auto& [key, value] : doc.items()) {
        out << key << ": ";
        if (value.is_string()) out << value.get<std::string>();
        else out << value.dump();
        out << "\n";
    }
}

json rgb_report(const Rgb& v) { return rgb_json(v); }

std::string units_of(const RadianceMap& map, const char* calibrated_units) {
    return map.calibrated() ? calibrated_units : "relative";
}

// ---------------------------------------------------------------------------

void cmd_calibrate(const std::string& samples_path, const std::string& out_path, const std::string& timestamp) {
    const auto samples = cli::parse_samples_csv(io::read_all(samples_path));
    require(!samples.empty(), ErrorKind::InsufficientData, "calibrate: no samples in '" + samples_path + "'");
    FitReport fit = fit_profile(samples);
    fit.profile.timestamp = timestamp;
    const json profile = profile_to_json(fit.profile);
    io::write_all(out_path, profile.dump(2) + "\n");

    json doc = {{"profile", out_path}, {"profile_hash", "sha256:" + cli::sha256_hex(profile.dump(2) + "\n")}};
    json configs = json::object();
    for (const auto& [id, f] : fit.profile.configs)
        configs[id] = {{"k", rgb_report(f.k)}, {"r2", rgb_report(f.r2)}, {"n", f.samples}};
    doc["configs"] = configs;
    json excluded = json::array();
    for (const auto& e : fit.excluded)
        excluded.push_back({{"index", e.index}, {"config_id", e.config_id}, {"reason", e.reason}});
    doc["excluded"] = excluded;
    report(doc, out_path == "-");
}

void cmd_apply(const std::string& pano, const std::string& profile_path, const std::string& config,
               const std::string& out, const std::string& proj) {
    const std::string profile_bytes = io::read_all(profile_path);
    CalibrationProfile profile;
    try {
        profile = profile_from_json(json::parse(profile_bytes));
    } catch (const json::exception& e) {
        fail(ErrorKind::BadInput, std::string("profile is not valid JSON: ") + e.what());
    }
    const auto in = io::load_image(pano, projection_override(proj));
    const RadianceMap cal = apply_profile(in.map, profile, config);
    json meta = derived_metadata(cal, in.metadata);
    meta["profile_hash"] = "sha256:" + cli::sha256_hex(profile_bytes);
    meta["config_id"] = config;
    meta["k"] = rgb_json(profile.at(config).k);
    meta["units"] = "cd/m^2";
    io::save_hdr_image(out, cal, meta);
    report({{"out", out}, {"config_id", config}, {"k", rgb_json(profile.at(config).k)},
            {"profile_hash", meta["profile_hash"]}},
           out == "-");
}

void cmd_illuminance(const std::string& pano, const std::string& proj) {
    const auto in = io::load_image(pano, projection_override(proj));
    const bool ortho = std::holds_alternative<Orthographic>(in.map.projection());
    const Rgb e = ortho ? orthographic_illuminance(in.map) : planar_illuminance(in.map, solid_angles(in.map));
    report({{"method", ortho ? "orthographic" : "solid-angle"},
            {"projection", projection_name(in.map.projection())},
            {"illuminance_rgb", rgb_report(e)},
            {"illuminance", luminance(e)},
            {"units", units_of(in.map, "lux")}});
}

void cmd_msi(const std::string& pano, const std::string& proj) {
    const auto in = io::load_image(pano, projection_override(proj));
    const double msi = mean_spherical_illuminance(in.map, solid_angles(in.map));
    report({{"msi", msi}, {"units", units_of(in.map, "lux")}});
}

void cmd_cct_map(const std::string& pano, const std::string& out, const std::string& proj) {
    const auto in = io::load_image(pano, projection_override(proj));
    const CctMap c = cct_map(in.map);
    std::size_t zero = 0, outside = 0;
    std::vector<double> valid;
    for (std::size_t k = 0; k < c.status.size(); ++k) {
        if (c.status[k] == CctPixel::ZeroEnergy) ++zero;
        else if (c.status[k] == CctPixel::OutOfDomain) ++outside;
        else valid.push_back(c.kelvin[k]);
    }
    json doc = {{"valid_pixels", valid.size()}, {"zero_energy_pixels", zero}, {"out_of_domain_pixels", outside}};
    if (!valid.empty()) doc["median_pixel_kelvin"] = percentile(valid, 50.0);
    const auto xy = chromaticity_of(integrated_xyz(in.map, solid_angles(in.map), [](std::size_t) { return true; }));
    if (xy) {
        const auto t = try_cct_from_xy(*xy);
        if (t.ok()) doc["scene_kelvin"] = t.kelvin;
    }
    if (!out.empty()) {
        json meta = derived_metadata(in.map, in.metadata);
        meta["units"] = "kelvin";
        meta["channel"] = "Y holds CCT in kelvin; 0 marks zero-energy or out-of-domain pixels";
        io::save_scalar_exr(out, c.width, c.height, c.kelvin, meta);
        doc["out"] = out;
    }
    report(doc, out == "-");
}

void cmd_project(const std::string& pano, const std::string& out, const std::string& to, double fov,
                 const std::string& forward, const std::string& up, int width, int height, bool partial,
                 const std::string& proj) {
    const auto in = io::load_image(pano, projection_override(proj));
    Projection dst = parse_projection(to);
    if (auto* p = std::get_if<Perspective>(&dst); p && to.find(':') == std::string::npos) p->fov_deg = fov;
    if (height <= 0) height = width;
    if (std::holds_alternative<EquirectFull>(dst) && height == width) height = width / 2;
    const ViewFrame frame = ViewFrame::look(parse_vec3(forward, "--forward"), parse_vec3(up, "--up"),
                                            std::get_if<Perspective>(&dst) ? std::get<Perspective>(dst).fov_deg : 90.0);
    RadianceMap result;
    std::size_t uncovered = 0;
    if (partial) {
        auto r = reproject_partial(in.map, dst, width, height, frame);
        const auto valid = PixelGrid(dst, width, height).validity_mask();
        for (std::size_t k = 0; k < valid.size(); ++k) uncovered += valid[k] && !r.covered[k];
        result = std::move(r.map);
    } else {
        result = reproject(in.map, dst, width, height, frame);
    }
    io::save_hdr_image(out, result, derived_metadata(result, in.metadata));
    report({{"out", out}, {"projection", projection_to_json(dst)}, {"width", width}, {"height", height},
            {"uncovered_pixels", uncovered}},
           out == "-");
}

void cmd_downscale(const std::string& pano, const std::string& out, int width, int height, const std::string& proj) {
    const auto in = io::load_image(pano, projection_override(proj));
    if (height <= 0) height = std::holds_alternative<EquirectFull>(in.map.projection()) ? width / 2 : width;
    const RadianceMap small = downscale_energy_preserving(in.map, width, height);
    io::save_hdr_image(out, small, derived_metadata(small, in.metadata));
    report({{"out", out}, {"width", width}, {"height", height}}, out == "-");
}

struct DegradeOptions {
    std::string pano, out, spec_path, proj;
    std::optional<std::uint64_t> seed;
    std::optional<double> percentile, anchor, gamma, hue_var;
    std::optional<int> bits;
    std::string noise_range;
    bool hue_shift = false, no_gamma = false, no_quantize = false, no_noise = false;
};

void cmd_degrade(const DegradeOptions& o) {
    DegradationSpec spec;
    if (!o.spec_path.empty()) spec = spec_from_json(io::read_json_file(o.spec_path));
    if (o.seed) spec.seed = *o.seed;
    if (o.percentile) spec.reexpose_percentile = *o.percentile;
    if (o.anchor) spec.reexpose_anchor = *o.anchor;
    if (o.gamma) spec.gamma = *o.gamma;
    if (o.bits) spec.quantize_bits = *o.bits;
    if (o.hue_var) spec.hue_shift_variance = *o.hue_var;
    if (!o.noise_range.empty()) std::tie(spec.noise_variance_lo, spec.noise_variance_hi) = cli::parse_range(o.noise_range, "--noise-range");
    if (o.hue_shift) spec.apply_hue_shift = true;
    if (o.no_gamma) spec.apply_gamma = false;
    if (o.no_quantize) spec.apply_quantize = false;
    if (o.no_noise) spec.apply_noise = false;

    const auto in = io::load_image(o.pano, projection_override(o.proj));
    const DegradeResult r = degrade_all(in.map, spec);
    json meta = derived_metadata(r.ldr, in.metadata);
    meta["units"] = "ldr";
    meta["seed"] = spec.seed;
    meta["degradation"] = spec_to_json(spec);
    meta["reexpose_scale"] = r.scale;
    meta["noise_variance"] = r.noise_variance;
    meta["hue_offset"] = r.hue_offset;
    io::save_ldr_image(o.out, r.ldr, meta, spec.apply_quantize ? spec.quantize_bits : 16);
    report({{"out", o.out}, {"seed", spec.seed}, {"reexpose_scale", r.scale}, {"noise_variance", r.noise_variance},
            {"hue_offset", r.hue_offset}},
           o.out == "-");
}

void cmd_metrics(const std::string& pred_path, const std::string& gt_path, const std::string& scalars,
                 const std::string& proj) {
    json doc = json::object();
    if (!pred_path.empty() || !gt_path.empty()) {
        require(!pred_path.empty() && !gt_path.empty(), ErrorKind::BadInput, "metrics: --pred and --gt go together");
        const auto pred = io::load_image(pred_path, projection_override(proj));
        const auto gt = io::load_image(gt_path, projection_override(proj));
        require(pred.map.same_shape(gt.map), ErrorKind::BadInput, "metrics: prediction and ground truth differ in size");
        const SolidAngleMap w = solid_angles(gt.map);
        doc["rmse"] = weighted_rmse(pred.map, gt.map, w);
        const auto si = si_rmse_detail(pred.map.data(), gt.map.data(), w.omega, 3);
        doc["si_rmse"] = si.value;
        doc["si_alpha"] = si.alpha;
        const auto rel = relative_error_map(cct_map(pred.map), cct_map(gt.map), w);
        if (rel.used > 0) doc["cct_mean_relative_error"] = rel.weighted_mean;
        doc["cct_pixels_used"] = rel.used;
        doc["cct_pixels_excluded"] = rel.excluded_zero_gt + rel.excluded_invalid;
    }
    if (!scalars.empty()) {
        const auto [p, g] = cli::parse_pairs_csv(io::read_all(scalars));
        doc["r_squared"] = scalar_r_squared(p, g);
        doc["pairs"] = p.size();
    }
    require(!doc.empty(), ErrorKind::BadInput, "metrics: give --pred/--gt and/or --scalars");
    report(doc);
}

bool is_image_file(const fs::path& p) {
    const std::string ext = io::lower_extension(p.string());
    return ext == ".exr" || ext == ".hdr";
}

std::vector<std::vector<std::size_t>> load_source_masks(const fs::path& dir, const RadianceMap& map) {
    std::vector<fs::path> files;
    if (fs::is_directory(dir))
        for (const auto& e : fs::directory_iterator(dir))
            if (io::lower_extension(e.path().string()) == ".png") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<std::vector<std::size_t>> masks;
    for (const auto& f : files) {
        const auto m = io::load_mask(f.string(), map.width(), map.height());
        std::vector<std::size_t> idx;
        for (std::size_t k = 0; k < m.size(); ++k)
            if (m[k]) idx.push_back(k);
        masks.push_back(std::move(idx));
    }
    return masks;
}

json quantiles_json(const std::vector<QuantileEntry>& q) {
    json out = json::array();
    for (const auto& e : q) out.push_back({{"percent", e.percent}, {"value", e.value}});
    return out;
}

void cmd_stats(const std::string& dataset, const std::string& sources_dir, const std::string& csv_path, int bins,
               const std::string& proj) {
    require(fs::is_directory(dataset), ErrorKind::BadInput, "stats: '" + dataset + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dataset))
        if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    require(!files.empty(), ErrorKind::InsufficientData, "stats: no .exr or .hdr files in '" + dataset + "'");

    DatasetAccumulator acc;
    for (const auto& f : files) {
        const auto in = io::load_image(f.string(), projection_override(proj));
        acc.add(in.map, f.filename().string());
        if (!sources_dir.empty()) {
            const auto masks = load_source_masks(fs::path(sources_dir) / f.stem(), in.map);
            if (!masks.empty()) acc.add_sources(light_source_stats(in.map, solid_angles(in.map), masks));
        }
    }
    const DatasetReport r = acc.report();
    json doc = {{"scenes", r.scenes.size()}, {"temperature_out_of_domain", r.temperature_out_of_domain}};
    if (r.median_msi) doc["median_msi"] = *r.median_msi;
    if (r.median_temperature) doc["median_temperature"] = *r.median_temperature;
    doc["msi_quantiles"] = quantiles_json(r.msi_quantiles);
    doc["temperature_quantiles"] = quantiles_json(r.temperature_quantiles);
    const auto msi = r.msi_values();
    const auto [lo, hi] = std::minmax_element(msi.begin(), msi.end());
    if (*hi > *lo) {
        json h = json::array();
        for (const auto& b : histogram(msi, *lo, *hi, bins)) h.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}});
        doc["msi_histogram"] = h;
    }
    if (!sources_dir.empty()) {
        const SourceSummary s = acc.source_summary();
        json src = {{"count", s.count}};
        if (s.mean_luminance) src["mean_luminance"] = *s.mean_luminance;
        if (s.median_luminance) src["median_luminance"] = *s.median_luminance;
        if (s.mean_temperature) src["mean_temperature"] = *s.mean_temperature;
        if (s.median_temperature) src["median_temperature"] = *s.median_temperature;
        doc["sources"] = src;
    }
    if (!csv_path.empty()) {
        std::ostringstream csv;
        csv.precision(17);
        csv << "name,msi_lux,temperature_k\n";
        for (const auto& s : r.scenes) {
            csv << s.name << "," << s.msi << ",";
            if (s.temperature_kelvin) csv << *s.temperature_kelvin;
            csv << "\n";
        }
        io::write_all(csv_path, csv.str());
        doc["csv"] = csv_path;
    }
    report(doc, csv_path == "-");
}

void cmd_merge(const std::string& bracket_path, const std::string& out, const std::string& masks_prefix,
               const std::string& proj) {
    const json j = io::read_json_file(bracket_path);
    const fs::path base = fs::path(bracket_path).parent_path();
    ExposureBracket bracket;
    std::optional<Projection> projection = projection_override(proj);
    try {
        bracket.config_id = j.at("config_id").get<std::string>();
        if (!projection && j.contains("projection")) projection = projection_from_json(j.at("projection"));
        for (const auto& f : j.at("frames")) {
            fs::path p = f.at("path").get<std::string>();
            if (p.is_relative()) p = base / p;
            ExposureSettings s{f.at("exposure_time").get<double>(), f.value("aperture", 1.0), f.value("iso", 100.0)};
            bracket.frames.push_back({io::load_image(p.string(), projection).map, s});
        }
        if (j.contains("vignette")) {
            VignetteModel v;
            v.even_coeffs = j.at("vignette").at("coeffs").get<std::vector<double>>();
            if (j.at("vignette").contains("principal_point")) {
                const auto pp = j.at("vignette").at("principal_point").get<std::vector<double>>();
                require(pp.size() == 2, ErrorKind::BadInput, "merge: principal_point needs two numbers");
                v.principal_point = Vec2(pp[0], pp[1]);
            }
            bracket.vignette = v;
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::BadInput, std::string("merge: bad bracket description: ") + e.what());
    }
    const MergeResult m = merge_bracket(bracket);
    json meta = io::Metadata::for_map(m.map, PHOTOCAL_VERSION).block;
    meta["config_id"] = bracket.config_id;
    io::save_hdr_image(out, m.map, meta);
    std::size_t saturated = 0, unrecovered = 0;
    for (auto v : m.saturation_mask) saturated += v;
    for (auto v : m.unrecovered_mask) unrecovered += v;
    json doc = {{"out", out}, {"config_id", bracket.config_id}, {"frames", bracket.frames.size()},
                {"saturated_pixels", saturated}, {"unrecovered_pixels", unrecovered}};
    if (!masks_prefix.empty()) {
        io::save_mask_png(masks_prefix + "saturated.png", m.map.width(), m.map.height(), m.saturation_mask);
        io::save_mask_png(masks_prefix + "unrecovered.png", m.map.width(), m.map.height(), m.unrecovered_mask);
    }
    report(doc, out == "-");
}

struct SynthOptions {
    std::string kind, out = "-", projection = "equirect";
    int width = 512, height = 0;
    double L = 1.0;
    std::string rgb, axis = "0,1,0", background = "0,0,0";
    double radius_deg = 10.0;
    double kelvin = 6500.0, magnitude = 1.0;
    std::optional<double> kelvin2;
    double magnitude2 = 1.0;
};

void cmd_synth(const SynthOptions& o) {
    const Projection p = parse_projection(o.projection);
    int h = o.height;
    if (h <= 0) h = std::holds_alternative<EquirectFull>(p) ? o.width / 2 : o.width;
    const PixelGrid grid(p, o.width, h);
    const Rgb radiance = o.rgb.empty() ? Rgb(o.L, o.L, o.L) : Rgb(parse_vec3(o.rgb, "--rgb"));
    SynthScene s;
    if (o.kind == "uniform") {
        s = uniform_sphere(radiance, grid);
    } else if (o.kind == "disk") {
        s = disk_source(radiance, parse_vec3(o.axis, "--axis"), o.radius_deg * kPi / 180.0,
                        Rgb(parse_vec3(o.background, "--background")), grid);
    } else if (o.kind == "blackbody") {
        s = o.kelvin2 ? blackbody_two_region(o.kelvin, o.magnitude, *o.kelvin2, o.magnitude2, grid)
                      : blackbody_panorama(o.kelvin, o.magnitude, grid);
    } else {
        fail(ErrorKind::BadInput, "synth: unknown generator '" + o.kind + "'");
    }
    s.map.set_calibrated(true);
    json meta = io::Metadata::for_map(s.map, PHOTOCAL_VERSION).block;
    meta["truth"] = truth_to_json(s.truth);
    io::save_hdr_image(o.out, s.map, meta);
    if (o.out != "-") io::write_all(o.out + ".truth.json", truth_to_json(s.truth).dump(2) + "\n");
    report({{"out", o.out}, {"truth", truth_to_json(s.truth)}}, o.out == "-");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"photocal: photometric calibration and analysis of HDR panoramas"};
    app.set_version_flag("--version", PHOTOCAL_VERSION);
    app.require_subcommand(1);
    app.fallthrough();
    app.add_flag("--json", g_opts.json_output, "Print the report as JSON");

    auto add_proj = [](CLI::App* c, std::string& target) {
        c->add_option("--projection", target,
                      "Override the input projection (equirect, hemisphere, orthographic, perspective:<fov>, JSON)");
    };

    std::string samples, out, timestamp;
    auto* calibrate = app.add_subcommand("calibrate", "Fit a calibration profile from chroma-meter samples");
    calibrate->add_option("--samples", samples, "CSV: config_id,Er,Eg,Eb,Ev_lux,x,y")->required();
    calibrate->add_option("--out", out, "Profile JSON")->required();
    calibrate->add_option("--timestamp", timestamp, "ISO-8601 time recorded in the profile");

    std::string pano = "-", profile, config, proj;
    auto* apply = app.add_subcommand("apply", "Apply a calibration profile to a panorama");
    apply->add_option("--pano", pano)->required();
    apply->add_option("--profile", profile)->required();
    apply->add_option("--config", config, "Camera configuration id")->required();
    apply->add_option("--out", out)->required();
    add_proj(apply, proj);

    auto* illum = app.add_subcommand("illuminance", "Planar illuminance at the capture point (+z facing plane)");
    illum->add_option("--pano", pano, "Input image, - for stdin");
    add_proj(illum, proj);

    auto* msi = app.add_subcommand("msi", "Mean spherical illuminance of a full panorama");
    msi->add_option("--pano", pano, "Input image, - for stdin");
    add_proj(msi, proj);

    auto* cct = app.add_subcommand("cct-map", "Per-pixel correlated colour temperature");
    cct->add_option("--pano", pano);
    cct->add_option("--out", out, "Single-channel EXR of kelvin values");
    add_proj(cct, proj);

    std::string to = "perspective", forward = "0,0,1", up = "0,1,0";
    double fov = 90.0;
    int width = 256, height = 0;
    bool partial = false;
    auto* project = app.add_subcommand("project", "Reproject to another projection or view");
    project->add_option("--pano", pano);
    project->add_option("--out", out)->required();
    project->add_option("--to", to, "Target projection")->capture_default_str();
    project->add_option("--fov", fov, "Perspective field of view, degrees")->capture_default_str();
    project->add_option("--forward", forward, "View direction x,y,z")->capture_default_str();
    project->add_option("--up", up, "Up hint x,y,z")->capture_default_str();
    project->add_option("--width", width)->capture_default_str();
    project->add_option("--height", height, "Default: width (width/2 for equirect)");
    project->add_flag("--partial", partial, "Leave uncovered pixels black instead of failing");
    add_proj(project, proj);

    auto* downscale = app.add_subcommand("downscale", "Energy-preserving downscale of an equirect map");
    downscale->add_option("--pano", pano);
    downscale->add_option("--out", out)->required();
    downscale->add_option("--width", width)->required();
    downscale->add_option("--height", height);
    add_proj(downscale, proj);

    DegradeOptions dg;
    auto* degrade = app.add_subcommand("degrade", "Simulate an LDR capture of an HDR panorama");
    degrade->add_option("--pano", dg.pano)->required();
    degrade->add_option("--out", dg.out)->required();
    degrade->add_option("--spec", dg.spec_path, "Degradation spec JSON; flags override it");
    degrade->add_option("--seed", dg.seed);
    degrade->add_option("--percentile", dg.percentile, "Luminance percentile anchor (default 90)");
    degrade->add_option("--anchor", dg.anchor, "Value the percentile maps to (default 0.8)");
    degrade->add_option("--gamma", dg.gamma, "Default 2.2");
    degrade->add_option("--bits", dg.bits, "Quantizer depth (default 8)");
    degrade->add_option("--noise-range", dg.noise_range, "Noise variance range lo:hi (default 0:0.03)");
    degrade->add_option("--hue-var", dg.hue_var, "Hue offset variance (default 0.03)");
    degrade->add_flag("--hue-shift", dg.hue_shift, "Enable the hue shift stage");
    degrade->add_flag("--no-gamma", dg.no_gamma);
    degrade->add_flag("--no-quantize", dg.no_quantize);
    degrade->add_flag("--no-noise", dg.no_noise);
    add_proj(degrade, dg.proj);

    std::string pred, gt, scalars;
    auto* metrics = app.add_subcommand("metrics", "Solid-angle weighted error metrics");
    metrics->add_option("--pred", pred);
    metrics->add_option("--gt", gt);
    metrics->add_option("--scalars", scalars, "CSV of pred,gt scalar pairs for R^2");
    add_proj(metrics, proj);

    std::string dataset, sources_dir, csv;
    int bins = 20;
    auto* stats = app.add_subcommand("stats", "Dataset statistics over calibrated panoramas");
    stats->add_option("--dataset", dataset, "Directory of calibrated .exr/.hdr panoramas")->required();
    stats->add_option("--sources-dir", sources_dir, "Directory with <scene>/<mask>.png light source masks");
    stats->add_option("--csv", csv, "Per-scene CSV output");
    stats->add_option("--bins", bins, "MSI histogram bins")->capture_default_str();
    add_proj(stats, proj);

    std::string bracket, masks_prefix;
    auto* merge = app.add_subcommand("merge", "Merge an exposure bracket into a relative HDR map");
    merge->add_option("--bracket", bracket, "Bracket description JSON")->required();
    merge->add_option("--out", out)->required();
    merge->add_option("--masks", masks_prefix, "Write <prefix>saturated.png and <prefix>unrecovered.png");
    add_proj(merge, proj);

    SynthOptions so;
    auto* synth = app.add_subcommand("synth", "Synthetic panoramas with known ground truth");
    synth->add_option("kind", so.kind, "uniform | disk | blackbody")->required();
    synth->add_option("--out", so.out, "Output image, - for stdout")->capture_default_str();
    synth->add_option("--projection", so.projection)->capture_default_str();
    synth->add_option("--width", so.width)->capture_default_str();
    synth->add_option("--height", so.height);
    synth->add_option("--L", so.L, "Grey radiance")->capture_default_str();
    synth->add_option("--rgb", so.rgb, "Radiance r,g,b (overrides --L)");
    synth->add_option("--axis", so.axis, "Disk axis x,y,z")->capture_default_str();
    synth->add_option("--radius-deg", so.radius_deg, "Disk angular radius")->capture_default_str();
    synth->add_option("--background", so.background, "Disk background r,g,b")->capture_default_str();
    synth->add_option("--kelvin", so.kelvin)->capture_default_str();
    synth->add_option("--magnitude", so.magnitude, "Blackbody luminance")->capture_default_str();
    synth->add_option("--kelvin2", so.kelvin2, "Lower-half temperature (two-region scene)");
    synth->add_option("--magnitude2", so.magnitude2)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*calibrate) cmd_calibrate(samples, out, timestamp);
        else if (*apply) cmd_apply(pano, profile, config, out, proj);
        else if (*illum) cmd_illuminance(pano, proj);
        else if (*msi) cmd_msi(pano, proj);
        else if (*cct) cmd_cct_map(pano, out, proj);
        else if (*project) cmd_project(pano, out, to, fov, forward, up, width, height, partial, proj);
        else if (*downscale) cmd_downscale(pano, out, width, height, proj);
        else if (*degrade) cmd_degrade(dg);
        else if (*metrics) cmd_metrics(pred, gt, scalars, proj);
        else if (*stats) cmd_stats(dataset, sources_dir, csv, bins, proj);
        else if (*merge) cmd_merge(bracket, out, masks_prefix, proj);
        else if (*synth) cmd_synth(so);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
