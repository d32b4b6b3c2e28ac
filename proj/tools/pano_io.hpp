#pragma once

// File formats for the command-line tool: OpenEXR (float/half, metadata in a
// string attribute), Radiance .hdr and PNG (metadata in a sidecar JSON).
// Streams ("-") always carry OpenEXR.

#include <ImfChannelList.h>
#include <ImfFrameBuffer.h>
#include <ImfHeader.h>
#include <ImfIO.h>
#include <ImfInputFile.h>
#include <ImfOutputFile.h>
#include <ImfStringAttribute.h>
#include <Iex.h>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "photocal/image.hpp"
#include "photocal/serialization.hpp"

namespace photocal::io {

namespace fs = std::filesystem;

inline constexpr const char* kMetadataAttribute = "photocal";

enum class Format { Exr, Hdr, Png };

inline std::string lower_extension(const std::string& path) {
    std::string ext = fs::path(path).extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

inline Format format_for_path(const std::string& path) {
    if (path == "-") return Format::Exr;
    const std::string ext = lower_extension(path);
    if (ext == ".exr") return Format::Exr;
    if (ext == ".hdr" || ext == ".pic") return Format::Hdr;
    if (ext == ".png") return Format::Png;
    fail(ErrorKind::BadInput, "unsupported file extension '" + ext + "' (expected .exr, .hdr or .png)");
}

inline std::string sidecar_path(const std::string& path) { return path + ".json"; }

inline std::string read_all(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::BadInput, "cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_all(const std::string& path, const std::string& bytes) {
    if (path == "-") {
        std::cout.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::BadInput, "cannot write '" + path + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), ErrorKind::Internal, "write to '" + path + "' failed");
}

inline json read_json_file(const std::string& path) {
    const std::string text = read_all(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::BadInput, "'" + path + "' is not valid JSON: " + e.what());
    }
}

// --- OpenEXR memory streams -------------------------------------------------

class MemoryOStream : public Imf::OStream {
public:
    MemoryOStream() : Imf::OStream("<memory>") {}
    void write(const char c[], int n) override {
        if (pos_ + n > buffer_.size()) buffer_.resize(pos_ + n);
        std::memcpy(buffer_.data() + pos_, c, static_cast<std::size_t>(n));
        pos_ += static_cast<std::size_t>(n);
    }
    Imf::Int64 tellp() override { return pos_; }
    void seekp(Imf::Int64 pos) override { pos_ = static_cast<std::size_t>(pos); }
    const std::string& bytes() const { return buffer_; }

private:
    std::string buffer_;
    std::size_t pos_ = 0;
};

class MemoryIStream : public Imf::IStream {
public:
    explicit MemoryIStream(const std::string& data) : Imf::IStream("<memory>"), data_(data) {}
    bool read(char c[], int n) override {
        if (pos_ + n > data_.size()) throw Iex::InputExc("unexpected end of EXR data");
        std::memcpy(c, data_.data() + pos_, static_cast<std::size_t>(n));
        pos_ += static_cast<std::size_t>(n);
        return pos_ < data_.size();
    }
    Imf::Int64 tellg() override { return pos_; }
    void seekg(Imf::Int64 pos) override { pos_ = static_cast<std::size_t>(pos); }
    void clear() override {}

private:
    const std::string& data_;
    std::size_t pos_ = 0;
};

// --- metadata ------------------------------------------------------------------

struct Metadata {
    json block = json::object();  // tool_version, seed, profile_hash, units, ...

    static Metadata for_map(const RadianceMap& map, const std::string& tool_version) {
        Metadata m;
        m.block["tool_version"] = tool_version;
        m.block["projection"] = projection_to_json(map.projection());
        m.block["calibrated"] = map.calibrated();
        m.block["exposure_scale"] = map.exposure_scale();
        m.block["units"] = map.calibrated() ? "cd/m^2" : "relative";
        m.block["seed"] = nullptr;
        m.block["profile_hash"] = nullptr;
        return m;
    }
};

inline void apply_metadata(RadianceMap& map, const json& block) {
    if (block.contains("calibrated")) map.set_calibrated(block.at("calibrated").get<bool>());
    if (block.contains("exposure_scale")) map.set_exposure_scale(block.at("exposure_scale").get<double>());
}

inline Projection infer_projection(int width, int height, const json& block,
                                   const std::optional<Projection>& override_projection) {
    if (override_projection) return *override_projection;
    if (block.contains("projection")) return projection_from_json(block.at("projection"));
    require(width == 2 * height, ErrorKind::BadInput,
            "image has no projection metadata and is not 2:1; pass --projection");
    return EquirectFull{};
}

struct LoadedImage {
    RadianceMap map;
    json metadata;
};

// --- EXR -----------------------------------------------------------------------

inline std::string encode_exr(int width, int height, const std::vector<std::string>& channel_names,
                              const std::vector<std::vector<float>>& planes, const json& metadata, bool half) {
    Imf::Header header(width, height);
    header.compression() = Imf::ZIP_COMPRESSION;
    for (const auto& name : channel_names) header.channels().insert(name, Imf::Channel(half ? Imf::HALF : Imf::FLOAT));
    header.insert(kMetadataAttribute, Imf::StringAttribute(metadata.dump()));
    Imf::FrameBuffer fb;
    for (std::size_t c = 0; c < channel_names.size(); ++c)
        fb.insert(channel_names[c], Imf::Slice(Imf::FLOAT, reinterpret_cast<char*>(const_cast<float*>(planes[c].data())),
                                               sizeof(float), sizeof(float) * static_cast<std::size_t>(width)));
    MemoryOStream stream;
    {
        Imf::OutputFile file(stream, header);
        file.setFrameBuffer(fb);
        file.writePixels(height);
    }
    return stream.bytes();
}

inline std::string encode_exr(const RadianceMap& map, const json& metadata, bool half = false) {
    std::vector<std::vector<float>> planes(3, std::vector<float>(map.pixel_count()));
    for (std::size_t k = 0; k < map.pixel_count(); ++k) {
        const Rgb v = map.at(k);
        for (int c = 0; c < 3; ++c) planes[c][k] = static_cast<float>(v[c]);
    }
    return encode_exr(map.width(), map.height(), {"R", "G", "B"}, planes, metadata, half);
}

inline LoadedImage decode_exr(const std::string& bytes, const std::optional<Projection>& override_projection) {
    try {
        MemoryIStream stream(bytes);
        Imf::InputFile file(stream);
        const auto dw = file.header().dataWindow();
        const int width = dw.max.x - dw.min.x + 1, height = dw.max.y - dw.min.y + 1;
        json block = json::object();
        if (const auto* attr = file.header().findTypedAttribute<Imf::StringAttribute>(kMetadataAttribute))
            block = json::parse(attr->value());
        const auto& channels = file.header().channels();
        const bool rgb = channels.findChannel("R") && channels.findChannel("G") && channels.findChannel("B");
        const bool grey = channels.findChannel("Y") != nullptr;
        require(rgb || grey, ErrorKind::BadInput, "EXR image needs R, G, B or Y channels");
        const std::vector<std::string> names = rgb ? std::vector<std::string>{"R", "G", "B"} : std::vector<std::string>{"Y"};
        std::vector<std::vector<float>> planes(names.size(), std::vector<float>(static_cast<std::size_t>(width) * height));
        Imf::FrameBuffer fb;
        for (std::size_t c = 0; c < names.size(); ++c) {
            char* base = reinterpret_cast<char*>(planes[c].data()) -
                         (static_cast<std::ptrdiff_t>(dw.min.x) + static_cast<std::ptrdiff_t>(dw.min.y) * width) *
                             static_cast<std::ptrdiff_t>(sizeof(float));
            fb.insert(names[c], Imf::Slice(Imf::FLOAT, base, sizeof(float), sizeof(float) * static_cast<std::size_t>(width)));
        }
        file.setFrameBuffer(fb);
        file.readPixels(dw.min.y, dw.max.y);
        LoadedImage out{RadianceMap(width, height, infer_projection(width, height, block, override_projection)), block};
        for (std::size_t k = 0; k < out.map.pixel_count(); ++k) {
            const auto& r = planes[0];
            const auto& g = planes[rgb ? 1 : 0];
            const auto& b = planes[rgb ? 2 : 0];
            out.map.set(k, Rgb(r[k], g[k], b[k]));
        }
        apply_metadata(out.map, block);
        return out;
    } catch (const Iex::BaseExc& e) {
        fail(ErrorKind::BadInput, std::string("cannot decode EXR: ") + e.what());
    } catch (const json::exception& e) {
        fail(ErrorKind::BadInput, std::string("EXR metadata is not valid JSON: ") + e.what());
    }
}

// --- OpenCV codecs (.hdr, .png) ---------------------------------------------------

inline cv::Mat to_bgr(const RadianceMap& map, int depth, double scale) {
    cv::Mat mat(map.height(), map.width(), CV_MAKETYPE(depth, 3));
    for (int i = 0; i < map.height(); ++i)
        for (int j = 0; j < map.width(); ++j) {
            const Rgb v = map.at(i, j) * scale;
            if (depth == CV_32F) {
                mat.at<cv::Vec3f>(i, j) = cv::Vec3f(float(v[2]), float(v[1]), float(v[0]));
            } else if (depth == CV_8U) {
                auto q = [](double x) { return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 255.0))); };
                mat.at<cv::Vec3b>(i, j) = cv::Vec3b(q(v[2]), q(v[1]), q(v[0]));
            } else {
                auto q = [](double x) { return static_cast<std::uint16_t>(std::lround(std::clamp(x, 0.0, 65535.0))); };
                mat.at<cv::Vec3w>(i, j) = cv::Vec3w(q(v[2]), q(v[1]), q(v[0]));
            }
        }
    return mat;
}

inline std::string encode_cv(const cv::Mat& mat, const std::string& ext) {
    std::vector<uchar> buf;
    require(cv::imencode(ext, mat, buf), ErrorKind::Internal, "image encoding failed for " + ext);
    return {buf.begin(), buf.end()};
}

inline LoadedImage decode_cv(const std::string& bytes, const json& block,
                             const std::optional<Projection>& override_projection) {
    const cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8U, const_cast<char*>(bytes.data()));
    cv::Mat mat = cv::imdecode(raw, cv::IMREAD_UNCHANGED);
    require(!mat.empty(), ErrorKind::BadInput, "cannot decode image");
    double scale = 1.0;
    if (mat.depth() == CV_8U) scale = 1.0 / 255.0;
    else if (mat.depth() == CV_16U) scale = 1.0 / 65535.0;
    cv::Mat f;
    mat.convertTo(f, CV_32F, scale);
    if (f.channels() == 1) cv::cvtColor(f, f, cv::COLOR_GRAY2BGR);
    if (f.channels() == 4) cv::cvtColor(f, f, cv::COLOR_BGRA2BGR);
    LoadedImage out{RadianceMap(f.cols, f.rows, infer_projection(f.cols, f.rows, block, override_projection)), block};
    for (int i = 0; i < f.rows; ++i)
        for (int j = 0; j < f.cols; ++j) {
            const cv::Vec3f v = f.at<cv::Vec3f>(i, j);
            out.map.set(i, j, Rgb(v[2], v[1], v[0]));
        }
    apply_metadata(out.map, block);
    return out;
}

// --- public entry points -------------------------------------------------------------

inline LoadedImage load_image(const std::string& path, const std::optional<Projection>& override_projection = {}) {
    const std::string bytes = read_all(path);
    require(!bytes.empty(), ErrorKind::BadInput, "'" + path + "' is empty");
    const bool exr_magic = bytes.size() >= 4 && static_cast<unsigned char>(bytes[0]) == 0x76 &&
                           static_cast<unsigned char>(bytes[1]) == 0x2f && static_cast<unsigned char>(bytes[2]) == 0x31 &&
                           static_cast<unsigned char>(bytes[3]) == 0x01;
    if (exr_magic) return decode_exr(bytes, override_projection);
    json block = json::object();
    if (path != "-" && fs::exists(sidecar_path(path))) block = read_json_file(sidecar_path(path));
    return decode_cv(bytes, block, override_projection);
}

// HDR outputs: .exr (float or half) or .hdr with sidecar.
inline void save_hdr_image(const std::string& path, const RadianceMap& map, const json& metadata, bool half = false) {
    switch (format_for_path(path)) {
        case Format::Exr:
            write_all(path, encode_exr(map, metadata, half));
            return;
        case Format::Hdr:
            write_all(path, encode_cv(to_bgr(map, CV_32F, 1.0), ".hdr"));
            write_all(sidecar_path(path), metadata.dump(2) + "\n");
            return;
        case Format::Png:
            fail(ErrorKind::BadInput, "PNG cannot hold HDR data; use .exr or .hdr");
    }
}

// LDR outputs in [0, 1]: 8- or 16-bit PNG with sidecar, or EXR.
inline void save_ldr_image(const std::string& path, const RadianceMap& map, const json& metadata, int bits) {
    if (format_for_path(path) != Format::Png) {
        save_hdr_image(path, map, metadata);
        return;
    }
    const bool wide = bits > 8;
    write_all(path, encode_cv(to_bgr(map, wide ? CV_16U : CV_8U, wide ? 65535.0 : 255.0), ".png"));
    write_all(sidecar_path(path), metadata.dump(2) + "\n");
}

inline void save_scalar_exr(const std::string& path, int width, int height, const std::vector<float>& values,
                            const json& metadata) {
    require(format_for_path(path) == Format::Exr, ErrorKind::BadInput, "scalar maps are written as .exr");
    write_all(path, encode_exr(width, height, {"Y"}, {values}, metadata, false));
}

inline std::vector<std::uint8_t> load_mask(const std::string& path, int width, int height) {
    cv::Mat mat = cv::imread(path, cv::IMREAD_GRAYSCALE);
    require(!mat.empty(), ErrorKind::BadInput, "cannot read mask '" + path + "'");
    require(mat.cols == width && mat.rows == height, ErrorKind::BadInput, "mask '" + path + "' has the wrong size");
    std::vector<std::uint8_t> out(static_cast<std::size_t>(width) * height);
    for (int i = 0; i < height; ++i)
        for (int j = 0; j < width; ++j) out[static_cast<std::size_t>(i) * width + j] = mat.at<std::uint8_t>(i, j) != 0;
    return out;
}

inline void save_mask_png(const std::string& path, int width, int height, const std::vector<std::uint8_t>& mask) {
    cv::Mat mat(height, width, CV_8U);
    for (int i = 0; i < height; ++i)
        for (int j = 0; j < width; ++j) mat.at<std::uint8_t>(i, j) = mask[static_cast<std::size_t>(i) * width + j] ? 255 : 0;
    write_all(path, encode_cv(mat, ".png"));
}

}  // namespace photocal::io
