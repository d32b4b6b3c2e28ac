#pragma once

// JSON documents: calibration profiles, degradation specs, projections and
// synthetic ground truth. Requires nlohmann/json.

#include <nlohmann/json.hpp>

#include <string>

#include "photocal/calibration.hpp"
#include "photocal/degradation.hpp"
#include "photocal/error.hpp"
#include "photocal/image.hpp"
#include "photocal/synth.hpp"

namespace photocal {

using json = nlohmann::json;

inline json rgb_json(const Rgb& v) { return json::array({v[0], v[1], v[2]}); }

inline Rgb rgb_from_json(const json& j) {
    require(j.is_array() && j.size() == 3, ErrorKind::BadInput, "expected a 3-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// {version, configs: {id: {k: [r,g,b], r2: [r,g,b], n}}}
inline json profile_to_json(const CalibrationProfile& p) {
    json configs = json::object();
    for (const auto& [id, fit] : p.configs)
        configs[id] = {{"k", rgb_json(fit.k)}, {"r2", rgb_json(fit.r2)}, {"n", fit.samples}};
    json out = {{"version", p.version}, {"configs", configs}};
    if (!p.timestamp.empty()) out["timestamp"] = p.timestamp;
    return out;
}

inline CalibrationProfile profile_from_json(const json& j) {
    try {
        CalibrationProfile p;
        p.version = j.at("version").get<int>();
        require(p.version == CalibrationProfile::kVersion, ErrorKind::BadInput,
                "unsupported calibration profile version " + std::to_string(p.version));
        for (const auto& [id, c] : j.at("configs").items()) {
            ChannelFit fit;
            fit.k = rgb_from_json(c.at("k"));
            fit.r2 = rgb_from_json(c.at("r2"));
            fit.samples = c.at("n").get<std::size_t>();
            require(fit.k.minCoeff() > 0.0, ErrorKind::BadInput, "profile '" + id + "': coefficients must be positive");
            require(fit.r2.minCoeff() >= 0.0 && fit.r2.maxCoeff() <= 1.0, ErrorKind::BadInput,
                    "profile '" + id + "': R^2 outside [0, 1]");
            require(fit.samples >= 2, ErrorKind::BadInput, "profile '" + id + "': sample count below 2");
            p.configs[id] = fit;
        }
        if (j.contains("timestamp")) p.timestamp = j.at("timestamp").get<std::string>();
        return p;
    } catch (const json::exception& e) {
        fail(ErrorKind::BadInput, std::string("malformed calibration profile: ") + e.what());
    }
}

inline json spec_to_json(const DegradationSpec& s) {
    return {{"reexpose_percentile", s.reexpose_percentile},
            {"reexpose_anchor", s.reexpose_anchor},
            {"gamma", s.gamma},
            {"quantize_bits", s.quantize_bits},
            {"noise_variance_range", {s.noise_variance_lo, s.noise_variance_hi}},
            {"hue_shift_variance", s.hue_shift_variance},
            {"rng_seed", s.seed},
            {"stages",
             {{"gamma", s.apply_gamma},
              {"quantize", s.apply_quantize},
              {"noise", s.apply_noise},
              {"hue_shift", s.apply_hue_shift}}}};
}

inline DegradationSpec spec_from_json(const json& j) {
    try {
        DegradationSpec s;
        s.reexpose_percentile = j.value("reexpose_percentile", s.reexpose_percentile);
        s.reexpose_anchor = j.value("reexpose_anchor", s.reexpose_anchor);
        s.gamma = j.value("gamma", s.gamma);
        s.quantize_bits = j.value("quantize_bits", s.quantize_bits);
        if (j.contains("noise_variance_range")) {
            const auto& r = j.at("noise_variance_range");
            require(r.is_array() && r.size() == 2, ErrorKind::BadInput, "noise_variance_range must be [lo, hi]");
            s.noise_variance_lo = r[0].get<double>();
            s.noise_variance_hi = r[1].get<double>();
        }
        s.hue_shift_variance = j.value("hue_shift_variance", s.hue_shift_variance);
        s.seed = j.value("rng_seed", s.seed);
        if (j.contains("stages")) {
            const auto& st = j.at("stages");
            s.apply_gamma = st.value("gamma", s.apply_gamma);
            s.apply_quantize = st.value("quantize", s.apply_quantize);
            s.apply_noise = st.value("noise", s.apply_noise);
            s.apply_hue_shift = st.value("hue_shift", s.apply_hue_shift);
        }
        s.validate();
        return s;
    } catch (const json::exception& e) {
        fail(ErrorKind::BadInput, std::string("malformed degradation spec: ") + e.what());
    }
}

inline json projection_to_json(const Projection& p) {
    json j = {{"type", projection_name(p)}};
    if (const auto* persp = std::get_if<Perspective>(&p)) j["fov_deg"] = persp->fov_deg;
    if (const auto* fish = std::get_if<Fisheye>(&p)) {
        const auto& cam = fish->intrinsics;
        j["width"] = cam.width;
        j["height"] = cam.height;
        if (const auto* u = std::get_if<UnifiedSphereModel>(&cam.model)) {
            j["model"] = "unified";
            j["xi"] = u->xi;
            j["fx"] = u->fx;
            j["fy"] = u->fy;
            j["cx"] = u->cx;
            j["cy"] = u->cy;
            j["distortion"] = u->distortion;
        } else {
            const auto& r = std::get<RadialPolyModel>(cam.model);
            j["model"] = "radial";
            j["focal"] = r.focal;
            j["cx"] = r.cx;
            j["cy"] = r.cy;
            j["coeffs"] = r.coeffs;
        }
    }
    return j;
}

inline Projection projection_from_json(const json& j) {
    try {
        const std::string type = j.at("type").get<std::string>();
        if (type == "equirect") return EquirectFull{};
        if (type == "hemisphere") return EquirectHemisphere{};
        if (type == "orthographic") return Orthographic{};
        if (type == "perspective") return Perspective{j.at("fov_deg").get<double>()};
        if (type == "fisheye") {
            CameraIntrinsics cam;
            cam.width = j.at("width").get<int>();
            cam.height = j.at("height").get<int>();
            const std::string model = j.at("model").get<std::string>();
            if (model == "unified") {
                UnifiedSphereModel u;
                u.xi = j.at("xi").get<double>();
                u.fx = j.at("fx").get<double>();
                u.fy = j.at("fy").get<double>();
                u.cx = j.at("cx").get<double>();
                u.cy = j.at("cy").get<double>();
                if (j.contains("distortion")) u.distortion = j.at("distortion").get<std::array<double, 4>>();
                cam.model = u;
            } else if (model == "radial") {
                RadialPolyModel r;
                r.focal = j.at("focal").get<double>();
                r.cx = j.at("cx").get<double>();
                r.cy = j.at("cy").get<double>();
                r.coeffs = j.value("coeffs", std::vector<double>{});
                cam.model = r;
            } else {
                fail(ErrorKind::BadInput, "unknown fisheye model '" + model + "'");
            }
            cam.validate();
            return Fisheye{cam};
        }
        fail(ErrorKind::BadInput, "unknown projection type '" + type + "'");
    } catch (const json::exception& e) {
        fail(ErrorKind::BadInput, std::string("malformed projection: ") + e.what());
    }
}

inline json truth_to_json(const SynthTruth& t) {
    json j = {{"generator", t.generator}};
    if (t.msi) j["msi"] = *t.msi;
    if (t.planar_illuminance) j["planar_illuminance"] = rgb_json(*t.planar_illuminance);
    if (t.source_solid_angle) j["source_solid_angle"] = *t.source_solid_angle;
    if (t.kelvin) j["kelvin"] = *t.kelvin;
    if (t.kelvin_secondary) j["kelvin_secondary"] = *t.kelvin_secondary;
    return j;
}

}  // namespace photocal
