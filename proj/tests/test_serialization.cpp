#include <gtest/gtest.h>

#include "photocal/serialization.hpp"

using namespace photocal;

TEST(ProfileJson, RoundTrip) {
    CalibrationProfile p;
    p.timestamp = "2024-05-01T12:00:00Z";
    p.configs["f14"] = ChannelFit{Rgb(11872.8, 9472.0, 7814.3), Rgb(0.985, 0.987, 0.989), 27};
    p.configs["f4"] = ChannelFit{Rgb(1, 2, 3), Rgb(1, 1, 1), 2};
    const json j = profile_to_json(p);
    EXPECT_EQ(j.at("version"), 1);
    EXPECT_EQ(j.at("configs").at("f14").at("n"), 27);
    EXPECT_EQ(j.at("configs").at("f14").at("k").size(), 3u);
    const CalibrationProfile back = profile_from_json(json::parse(j.dump()));
    EXPECT_EQ(back.timestamp, p.timestamp);
    ASSERT_EQ(back.configs.size(), 2u);
    EXPECT_EQ(back.at("f14").k, p.at("f14").k);
    EXPECT_EQ(back.at("f14").r2, p.at("f14").r2);
    EXPECT_EQ(back.at("f4").samples, 2u);
}

TEST(ProfileJson, Validation) {
    const auto bad = [](const char* text) {
        try {
            profile_from_json(json::parse(text));
            ADD_FAILURE() << text;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::BadInput) << text;
        }
    };
    bad(R"({"version": 2, "configs": {}})");
    bad(R"({"configs": {}})");
    bad(R"({"version": 1, "configs": {"a": {"k": [1, 1], "r2": [1, 1, 1], "n": 3}}})");
    bad(R"({"version": 1, "configs": {"a": {"k": [1, 0, 1], "r2": [1, 1, 1], "n": 3}}})");
    bad(R"({"version": 1, "configs": {"a": {"k": [1, 1, 1], "r2": [1, 1.5, 1], "n": 3}}})");
    bad(R"({"version": 1, "configs": {"a": {"k": [1, 1, 1], "r2": [1, 1, 1], "n": 1}}})");
    bad(R"({"version": 1, "configs": {"a": {"k": "x", "r2": [1, 1, 1], "n": 3}}})");
}

TEST(SpecJson, RoundTripAndDefaults) {
    DegradationSpec s;
    s.gamma = 2.4;
    s.quantize_bits = 10;
    s.noise_variance_lo = 0.001;
    s.noise_variance_hi = 0.01;
    s.seed = 77;
    s.apply_hue_shift = true;
    s.apply_noise = false;
    const DegradationSpec back = spec_from_json(json::parse(spec_to_json(s).dump()));
    EXPECT_EQ(back.gamma, 2.4);
    EXPECT_EQ(back.quantize_bits, 10);
    EXPECT_EQ(back.noise_variance_lo, 0.001);
    EXPECT_EQ(back.noise_variance_hi, 0.01);
    EXPECT_EQ(back.seed, 77u);
    EXPECT_TRUE(back.apply_hue_shift);
    EXPECT_FALSE(back.apply_noise);

    const DegradationSpec d = spec_from_json(json::object());
    EXPECT_EQ(d.reexpose_percentile, 90.0);
    EXPECT_EQ(d.reexpose_anchor, 0.8);
    EXPECT_EQ(d.gamma, 2.2);
    EXPECT_EQ(d.quantize_bits, 8);
    EXPECT_EQ(d.noise_variance_hi, 0.03);
    EXPECT_EQ(d.hue_shift_variance, 0.03);
}

TEST(SpecJson, Validation) {
    EXPECT_THROW(spec_from_json(json::parse(R"({"gamma": -1})")), Error);
    EXPECT_THROW(spec_from_json(json::parse(R"({"noise_variance_range": [0.1]})")), Error);
    EXPECT_THROW(spec_from_json(json::parse(R"({"quantize_bits": "eight"})")), Error);
}

TEST(ProjectionJson, RoundTripAllKinds) {
    UnifiedSphereModel u{0.9, 200, 201, 256, 255, {-0.05, 0.01, 1e-4, -1e-4}};
    RadialPolyModel r{150, 128, 128, {-0.02, 0.001}};
    const Projection kinds[] = {EquirectFull{}, EquirectHemisphere{}, Orthographic{}, Perspective{75.0},
                                Fisheye{CameraIntrinsics{u, 512, 512}}, Fisheye{CameraIntrinsics{r, 256, 256}}};
    for (const Projection& p : kinds) {
        const json j = projection_to_json(p);
        const Projection back = projection_from_json(json::parse(j.dump()));
        EXPECT_EQ(projection_name(back), projection_name(p));
        EXPECT_EQ(projection_to_json(back), j);
    }
}

TEST(ProjectionJson, Validation) {
    EXPECT_THROW(projection_from_json(json::parse(R"({"type": "cube"})")), Error);
    EXPECT_THROW(projection_from_json(json::parse(R"({"type": "perspective"})")), Error);
    EXPECT_THROW(projection_from_json(json::parse(R"({"type": "fisheye", "model": "kb", "width": 4, "height": 4})")),
                 Error);
}

TEST(TruthJson, OptionalFields) {
    SynthTruth t{"disk", 1.5, std::nullopt, 0.2, std::nullopt, std::nullopt};
    const json j = truth_to_json(t);
    EXPECT_EQ(j.at("generator"), "disk");
    EXPECT_EQ(j.at("msi"), 1.5);
    EXPECT_FALSE(j.contains("planar_illuminance"));
    EXPECT_FALSE(j.contains("kelvin"));
}
