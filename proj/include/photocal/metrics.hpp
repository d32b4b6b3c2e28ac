#pragma once

// Solid-angle-weighted evaluation metrics and dataset / light-source
// statistics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "photocal/color.hpp"
#include "photocal/degradation.hpp"
#include "photocal/error.hpp"
#include "photocal/image.hpp"
#include "photocal/photometry.hpp"
#include "photocal/projection.hpp"

namespace photocal {

// Interleaved values: `channels` values per pixel, one weight per pixel.
struct WeightedView {
    std::span<const double> values;
    std::size_t channels = 1;
};

namespace detail {

inline void check_metric_shapes(std::span<const double> pred, std::span<const double> gt,
                                std::span<const double> weights, std::size_t channels) {
    require(channels > 0 && pred.size() == gt.size() && pred.size() == weights.size() * channels,
            ErrorKind::BadInput, "metric: prediction, ground truth and weights have mismatched shapes");
}

inline double weighted_sse(std::span<const double> pred, std::span<const double> gt,
                           std::span<const double> weights, std::size_t channels, double alpha) {
    double sse = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k)
        for (std::size_t c = 0; c < channels; ++c) {
            const double d = alpha * pred[k * channels + c] - gt[k * channels + c];
            sse += weights[k] * d * d;
        }
    return sse;
}

inline double weight_total(std::span<const double> weights) {
    double s = 0.0;
    for (double w : weights) s += w;
    require(s > 0.0, ErrorKind::BadInput, "metric: weights sum to zero");
    return s;
}

}  // namespace detail

// sqrt(sum w (p - g)^2 / (channels * sum w))
inline double weighted_rmse(std::span<const double> pred, std::span<const double> gt,
                            std::span<const double> weights, std::size_t channels = 1) {
    detail::check_metric_shapes(pred, gt, weights, channels);
    return std::sqrt(detail::weighted_sse(pred, gt, weights, channels, 1.0) /
                     (static_cast<double>(channels) * detail::weight_total(weights)));
}

struct ScaleInvariantError {
    double value = 0.0;
    double alpha = 1.0;  // optimal global scale applied to the prediction
};

inline ScaleInvariantError si_rmse_detail(std::span<const double> pred, std::span<const double> gt,
                                          std::span<const double> weights, std::size_t channels = 1) {
    detail::check_metric_shapes(pred, gt, weights, channels);
    double spg = 0.0, spp = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k)
        for (std::size_t c = 0; c < channels; ++c) {
            const double p = pred[k * channels + c];
            spg += weights[k] * p * gt[k * channels + c];
            spp += weights[k] * p * p;
        }
    require(spp > 0.0, ErrorKind::BadInput, "si_rmse: prediction has no energy");
    const double alpha = spg / spp;
    const double value = std::sqrt(detail::weighted_sse(pred, gt, weights, channels, alpha) /
                                   (static_cast<double>(channels) * detail::weight_total(weights)));
    return {value, alpha};
}

inline double si_rmse(std::span<const double> pred, std::span<const double> gt, std::span<const double> weights,
                      std::size_t channels = 1) {
    return si_rmse_detail(pred, gt, weights, channels).value;
}

inline double weighted_rmse(const RadianceMap& pred, const RadianceMap& gt, const SolidAngleMap& weights) {
    return weighted_rmse(pred.data(), gt.data(), weights.omega, 3);
}
inline double si_rmse(const RadianceMap& pred, const RadianceMap& gt, const SolidAngleMap& weights) {
    return si_rmse(pred.data(), gt.data(), weights.omega, 3);
}
inline double weighted_rmse(const ScalarImage& pred, const ScalarImage& gt, const SolidAngleMap& weights) {
    return weighted_rmse(pred.values, gt.values, weights.omega, 1);
}
inline double si_rmse(const ScalarImage& pred, const ScalarImage& gt, const SolidAngleMap& weights) {
    return si_rmse(pred.values, gt.values, weights.omega, 1);
}

struct RelativeErrorResult {
    ScalarImage error;                // |p - g| / g; NaN where excluded
    double weighted_mean = 0.0;
    std::size_t used = 0;
    std::size_t excluded_zero_gt = 0;
    std::size_t excluded_invalid = 0;
};

inline RelativeErrorResult relative_error_map(const CctMap& pred, const CctMap& gt, const SolidAngleMap& weights) {
    require(pred.width == gt.width && pred.height == gt.height && weights.omega.size() == gt.kelvin.size(),
            ErrorKind::BadInput, "relative error: shape mismatch");
    RelativeErrorResult out;
    out.error = ScalarImage(gt.width, gt.height, std::numeric_limits<double>::quiet_NaN());
    double acc = 0.0, total = 0.0;
    for (std::size_t k = 0; k < gt.kelvin.size(); ++k) {
        if (!pred.valid(k) || !gt.valid(k)) {
            ++out.excluded_invalid;
            continue;
        }
        const double g = gt.kelvin[k], p = pred.kelvin[k];
        if (g == 0.0) {
            ++out.excluded_zero_gt;
            continue;
        }
        const double e = std::abs(p - g) / g;
        out.error[k] = e;
        acc += weights.omega[k] * e;
        total += weights.omega[k];
        ++out.used;
    }
    out.weighted_mean = total > 0.0 ? acc / total : std::numeric_limits<double>::quiet_NaN();
    return out;
}

// 1 - SS_res / SS_tot about the mean of the ground truth.
inline double scalar_r_squared(std::span<const double> preds, std::span<const double> gts) {
    require(preds.size() == gts.size(), ErrorKind::BadInput, "r_squared: size mismatch");
    require(gts.size() >= 2, ErrorKind::InsufficientData, "r_squared: at least two pairs are required");
    double mean = 0.0;
    for (double g : gts) mean += g;
    mean /= static_cast<double>(gts.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < gts.size(); ++i) {
        ss_res += (gts[i] - preds[i]) * (gts[i] - preds[i]);
        ss_tot += (gts[i] - mean) * (gts[i] - mean);
    }
    require(ss_tot > 0.0, ErrorKind::BadInput, "r_squared: ground truth has zero variance");
    return 1.0 - ss_res / ss_tot;
}

struct MetricReport {
    std::optional<double> rmse;
    std::optional<double> si_rmse;
    std::optional<double> mean_relative_error;
    std::optional<double> r_squared;
};

// --- dataset statistics ---------------------------------------------------

inline const std::vector<double>& default_quantile_levels() {
    static const std::vector<double> levels{1, 10, 20, 30, 40, 50, 60, 70, 80, 90, 95, 99};
    return levels;
}

struct QuantileEntry {
    double percent;
    double value;
};

inline std::vector<QuantileEntry> quantiles(const std::vector<double>& values, const std::vector<double>& levels) {
    std::vector<QuantileEntry> out;
    if (values.empty()) return out;
    for (double p : levels) out.push_back({p, percentile(values, p)});
    return out;
}

struct HistogramBin {
    double lo;
    double hi;
    std::size_t count;
};

// Equal-width bins over [lo, hi]; values outside are not counted.
inline std::vector<HistogramBin> histogram(const std::vector<double>& values, double lo, double hi, int bins) {
    require(bins > 0 && hi > lo, ErrorKind::BadInput, "histogram: invalid range");
    std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
    const double width = (hi - lo) / bins;
    for (int b = 0; b < bins; ++b) out[b] = {lo + b * width, lo + (b + 1) * width, 0};
    for (double v : values) {
        if (!(v >= lo && v <= hi)) continue;
        const int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
        ++out[b].count;
    }
    return out;
}

struct SourceStats {
    std::size_t id = 0;
    double mean_luminance = 0.0;             // cd/m^2
    std::optional<double> temperature_kelvin;  // nullopt when outside the CCT domain
    double solid_angle = 0.0;                 // sr
};

// Masks are lists of pixel indices (row * width + col).
inline std::vector<SourceStats> light_source_stats(const RadianceMap& map, const SolidAngleMap& weights,
                                                   const std::vector<std::vector<std::size_t>>& masks) {
    require(map.calibrated(), ErrorKind::BadInput, "light source stats require a calibrated map");
    check_weights(map, weights);
    const Vec3 w = luminance_weights();
    std::vector<SourceStats> out;
    for (std::size_t m = 0; m < masks.size(); ++m) {
        const auto& mask = masks[m];
        require(!mask.empty(), ErrorKind::BadInput, "light source mask " + std::to_string(m) + " is empty");
        Rgb energy = Rgb::Zero();
        double omega = 0.0, lum = 0.0;
        for (std::size_t k : mask) {
            require(k < map.pixel_count(), ErrorKind::BadInput,
                    "light source mask " + std::to_string(m) + " lies outside the image");
            omega += weights.omega[k];
            lum += weights.omega[k] * w.dot(map.at(k));
            energy += weights.omega[k] * map.at(k);
        }
        require(omega > 0.0, ErrorKind::BadInput, "light source mask " + std::to_string(m) + " has zero solid angle");
        SourceStats s{m, lum / omega, std::nullopt, omega};
        if (const auto xy = chromaticity_of(rgb_to_xyz(energy))) {
            const auto cct = try_cct_from_xy(*xy);
            if (cct.ok()) s.temperature_kelvin = cct.kelvin;
        }
        out.push_back(s);
    }
    return out;
}

struct SceneEntry {
    std::string name;
    double msi = 0.0;
    std::optional<double> temperature_kelvin;
};

struct DatasetReport {
    std::vector<SceneEntry> scenes;
    std::vector<QuantileEntry> msi_quantiles;
    std::vector<QuantileEntry> temperature_quantiles;
    std::optional<double> median_msi;
    std::optional<double> median_temperature;
    std::size_t temperature_out_of_domain = 0;

    std::vector<double> msi_values() const {
        std::vector<double> v;
        for (const auto& s : scenes) v.push_back(s.msi);
        return v;
    }
    std::vector<double> temperature_values() const {
        std::vector<double> v;
        for (const auto& s : scenes)
            if (s.temperature_kelvin) v.push_back(*s.temperature_kelvin);
        return v;
    }
};

struct SourceSummary {
    std::size_t count = 0;
    std::optional<double> mean_luminance;
    std::optional<double> median_luminance;
    std::optional<double> mean_temperature;
    std::optional<double> median_temperature;
};

// Streaming fold over calibrated panoramas. Shards can be merged.
class DatasetAccumulator {
public:
    void add(const RadianceMap& map, const std::string& name = {}) {
        require(map.calibrated(), ErrorKind::BadInput, "dataset statistics: map '" + name + "' is not calibrated");
        const SolidAngleMap weights = solid_angles(map);
        SceneEntry entry{name, mean_spherical_illuminance(map, weights), std::nullopt};
        if (const auto xy = chromaticity_of(integrated_xyz(map, weights, [](std::size_t) { return true; }))) {
            const auto cct = try_cct_from_xy(*xy);
            if (cct.ok()) entry.temperature_kelvin = cct.kelvin;
        }
        scenes_.push_back(std::move(entry));
    }

    void add_sources(const std::vector<SourceStats>& sources) {
        sources_.insert(sources_.end(), sources.begin(), sources.end());
    }

    void merge(const DatasetAccumulator& other) {
        scenes_.insert(scenes_.end(), other.scenes_.begin(), other.scenes_.end());
        sources_.insert(sources_.end(), other.sources_.begin(), other.sources_.end());
    }

    std::size_t size() const noexcept { return scenes_.size(); }

    DatasetReport report(const std::vector<double>& levels = default_quantile_levels()) const {
        DatasetReport r;
        r.scenes = scenes_;
        const auto msi = r.msi_values();
        const auto temps = r.temperature_values();
        r.temperature_out_of_domain = scenes_.size() - temps.size();
        r.msi_quantiles = quantiles(msi, levels);
        r.temperature_quantiles = quantiles(temps, levels);
        if (!msi.empty()) r.median_msi = percentile(msi, 50.0);
        if (!temps.empty()) r.median_temperature = percentile(temps, 50.0);
        return r;
    }

    SourceSummary source_summary() const {
        SourceSummary s;
        s.count = sources_.size();
        std::vector<double> lum, temp;
        for (const auto& src : sources_) {
            lum.push_back(src.mean_luminance);
            if (src.temperature_kelvin) temp.push_back(*src.temperature_kelvin);
        }
        const auto mean = [](const std::vector<double>& v) {
            double a = 0.0;
            for (double x : v) a += x;
            return a / static_cast<double>(v.size());
        };
        if (!lum.empty()) {
            s.mean_luminance = mean(lum);
            s.median_luminance = percentile(lum, 50.0);
        }
        if (!temp.empty()) {
            s.mean_temperature = mean(temp);
            s.median_temperature = percentile(temp, 50.0);
        }
        return s;
    }

private:
    std::vector<SceneEntry> scenes_;
    std::vector<SourceStats> sources_;
};

inline DatasetReport dataset_statistics(std::span<const RadianceMap> maps) {
    DatasetAccumulator acc;
    for (std::size_t i = 0; i < maps.size(); ++i) acc.add(maps[i], "map" + std::to_string(i));
    return acc.report();
}

}  // namespace photocal
