#include "pcgk/harness/commands.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pcgk/common/error.hpp"
#include "pcgk/geometry/hpr.hpp"
#include "pcgk/geometry/sampling.hpp"
#include "pcgk/metrics/image_metrics.hpp"
#include "pcgk/render/raster.hpp"

namespace pcgk::harness {

using geometry::CameraPose;
using geometry::PointCloud;
using geometry::Vec3;
using tensor::Value;

std::vector<CameraPose> canonical_poses() {
    const double third = 2.0 * std::numbers::pi / 3.0;
    return {{0.0, 0.5, 1.0}, {third, 0.5, 1.0}, {2.0 * third, 0.5, 1.0}};
}

std::vector<double> probe_features(const model::PointCG& net, const PointCloud& cloud, const RunConfig& cfg,
                                   std::size_t cloud_id) {
    auto params = cfg.sample_params().patch;
    params.input_mode = dataorg::InputMode::view1;
    std::vector<dataorg::PatchSet> sets;
    const auto poses = canonical_poses();
    for (std::size_t i = 0; i < poses.size(); ++i)
        sets.push_back(dataorg::build_patches(cloud, poses[i], params, derive_seed(cfg.seed, cloud_id, i), cloud_id));
    const auto feats = net.pooled_features(model::make_point_batch(sets));
    std::vector<double> mean(feats[0].size(), 0.0);
    for (const auto& f : feats)
        for (std::size_t j = 0; j < f.size(); ++j) mean[j] += f[j] / static_cast<double>(feats.size());
    return mean;
}

ProbeData probe_dataset(const model::PointCG& net, const std::vector<PointCloud>& clouds, const RunConfig& cfg) {
    ProbeData data;
    for (std::size_t i = 0; i < clouds.size(); ++i) {
        if (!clouds[i].label) throw DataError("probe: cloud " + std::to_string(i) + " has no label");
        data.features.push_back(probe_features(net, clouds[i], cfg, i));
        data.labels.push_back(*clouds[i].label);
    }
    return data;
}

ProbeReport probe_splits(const ProbeData& data, std::uint64_t seed, std::size_t splits) {
    ProbeReport rep;
    for (std::size_t s = 0; s < splits; ++s) {
        const auto r = metrics::linear_probe(data.features, data.labels, derive_seed(seed, s));
        rep.accuracies.push_back(r.accuracy);
        rep.mean += r.accuracy / static_cast<double>(splits);
    }
    return rep;
}

ProbeReport run_probe(const model::PointCG& net, const std::vector<PointCloud>& clouds, const RunConfig& cfg) {
    return probe_splits(probe_dataset(net, clouds, cfg), cfg.seed, cfg.probe_splits);
}

namespace {

std::vector<Vec3> absolute_patches(const std::vector<Vec3>& rel, const std::vector<Vec3>& centers, std::size_t per) {
    std::vector<Vec3> out;
    out.reserve(rel.size());
    for (std::size_t i = 0; i < rel.size(); ++i) out.push_back(rel[i] + centers[i / per]);
    return out;
}

std::vector<Vec3> predicted_points(const tensor::Value& pred, const std::vector<Vec3>& centers, std::size_t k) {
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < centers.size() * k; ++i)
        out.push_back(Vec3{pred.at(3 * i), pred.at(3 * i + 1), pred.at(3 * i + 2)} + centers[i / k]);
    return out;
}

}  // namespace

GenerationReport evaluate(const model::PointCG& net, const std::vector<PointCloud>& clouds, const RunConfig& cfg) {
    GenerationReport rep;
    const auto sp = cfg.sample_params();
    std::size_t finite_psnr = 0;
    for (std::size_t i = 0; i < clouds.size(); ++i) {
        const auto sample = dataorg::build_sample(clouds[i], sp, derive_seed(cfg.eval_seed, 0xE7A1, i), i);
        const auto batch = model::make_batch({sample});
        const auto out = net.forward(batch, {true, false, true});
        GenerationRow row;
        row.sample_id = i;
        const auto& ps = sample.patches;
        if (ps.h > 0) {
            auto merged = absolute_patches(ps.visible_patches, ps.visible_centers, ps.k_v);
            const auto pred = predicted_points(out.predicted, ps.hidden_centers, ps.k);
            merged.insert(merged.end(), pred.begin(), pred.end());
            row.cd = metrics::chamfer_distance(merged, clouds[i].points);
        }
        const auto gen = model::value_to_image(out.generated);
        row.mse = metrics::mse(gen, sample.target_image);
        row.psnr = metrics::psnr_from_mse(row.mse);
        row.ssim = metrics::ssim(gen, sample.target_image);
        row.nmi = metrics::nmi(gen, sample.target_image);
        rep.mean_cd += row.cd;
        rep.mean_mse += row.mse;
        rep.mean_ssim += row.ssim;
        rep.mean_nmi += row.nmi;
        if (std::isfinite(row.psnr)) {
            rep.mean_psnr += row.psnr;
            ++finite_psnr;
        }
        rep.rows.push_back(row);
    }
    const double n = static_cast<double>(std::max<std::size_t>(1, clouds.size()));
    rep.mean_cd /= n;
    rep.mean_mse /= n;
    rep.mean_ssim /= n;
    rep.mean_nmi /= n;
    rep.mean_psnr = finite_psnr ? rep.mean_psnr / static_cast<double>(finite_psnr)
                                : std::numeric_limits<double>::infinity();
    return rep;
}

void write_metrics_csv(const GenerationReport& report, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write '" + path.string() + "'");
    os << "sample_id,cd,mse,psnr,ssim,nmi\n";
    for (const auto& r : report.rows)
        os << r.sample_id << ',' << metrics::format_metric(r.cd) << ',' << metrics::format_metric(r.mse) << ','
           << metrics::format_metric(r.psnr) << ',' << metrics::format_metric(r.ssim) << ','
           << metrics::format_metric(r.nmi) << '\n';
}

namespace {

std::size_t mode_count(const std::string& mode, const std::string& prefix) {
    try {
        std::size_t used = 0;
        const auto text = mode.substr(prefix.size());
        const auto n = std::stoul(text, &used);
        if (used != text.size() || n == 0) throw std::invalid_argument("count");
        return n;
    } catch (const std::exception&) {
        throw ConfigError("completion mode '" + mode + "': expected a positive count after '" + prefix + "'");
    }
}

}  // namespace

CompletionResult complete_cloud(const model::PointCG& net, const PointCloud& cloud, const std::string& mode,
                                const CameraPose& pose, const RunConfig& cfg, std::uint64_t seed) {
    const auto& mc = net.config();
    std::vector<std::size_t> visible;
    if (mode == "hpr_view") {
        visible = geometry::hidden_point_removal(cloud, pose, cfg.gamma).visible;
    } else if (mode.rfind("groups:", 0) == 0) {
        // The cloud is divided into v + h groups; the first g FPS groups are kept.
        const std::size_t total = mc.v + mc.h;
        const std::size_t g = mode_count(mode, "groups:");
        if (g > total) throw ConfigError("groups:" + std::to_string(g) + " exceeds the " + std::to_string(total) + " groups");
        const auto centers = geometry::farthest_point_sampling(cloud.points, std::min(total, cloud.size()), seed);
        std::vector<bool> keep(cloud.size(), false);
        for (std::size_t i = 0; i < g && i < centers.size(); ++i)
            for (auto j : geometry::knn(cloud.points[centers[i]], cloud.points, mc.k_v)) keep[j] = true;
        if (g == total)
            keep.assign(cloud.size(), true);
        for (std::size_t i = 0; i < cloud.size(); ++i)
            if (keep[i]) visible.push_back(i);
    } else if (mode.rfind("partial:", 0) == 0) {
        // Contiguous partial input: the npts nearest points to a seeded anchor.
        const std::size_t npts = std::min(mode_count(mode, "partial:"), cloud.size());
        Rng rng(seed);
        visible = geometry::knn(cloud.points[uniform_index(rng, cloud.size())], cloud.points, npts);
    } else {
        throw ConfigError("unknown completion mode '" + mode + "' (expected hpr_view, groups:<g> or partial:<npts>)");
    }
    const std::size_t hidden_count = cloud.size() - std::min(cloud.size(), visible.size());
    const std::size_t v = std::min(mc.v, visible.size());
    const std::size_t h = std::min(mc.h, hidden_count);
    const auto ps = dataorg::patches_from_split(cloud, visible, v, h, mc.k, mc.k_v, seed);
    CompletionResult res;
    res.input = absolute_patches(ps.visible_patches, ps.visible_centers, ps.k_v);
    std::vector<Vec3> merged = res.input;
    if (h > 0) {
        const auto out = net.forward(model::make_point_batch({ps}), {true, false, false});
        res.predicted = predicted_points(out.predicted, ps.hidden_centers, ps.k);
        merged.insert(merged.end(), res.predicted.begin(), res.predicted.end());
    }
    res.chamfer_to_gt = metrics::chamfer_distance(merged, cloud.points);
    return res;
}

GeneratedPair generate_view(const model::PointCG& net, const PointCloud& cloud, const CameraPose& input_pose,
                            const CameraPose& target_pose, const RunConfig& cfg, std::uint64_t seed) {
    const auto sp = cfg.sample_params();
    const auto ps = dataorg::build_patches(cloud, input_pose, sp.patch, seed);
    auto batch = model::make_point_batch({ps});
    batch.target_poses = {target_pose};
    const Value encoded = net.encode_batch(batch);
    const auto gen = net.generate(encoded, net.embed_view(batch.target_poses));
    return {model::value_to_image(gen),
            render::rasterize(cloud.points, target_pose, sp.img_size, sp.render_mode, sp.fov_deg)};
}

CameraPose parse_pose(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError("pose '" + text + "': expected az,el,dist");
        }
    }
    if (v.size() != 3) throw ConfigError("pose '" + text + "': expected az,el,dist");
    try {
        return {v[0], v[1], v[2]};
    } catch (const GeometryError& e) {
        throw ConfigError(std::string("pose: ") + e.what());
    }
}

}  // namespace pcgk::harness
