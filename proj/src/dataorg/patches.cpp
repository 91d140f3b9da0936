#include "pcgk/dataorg/patches.hpp"

#include <algorithm>
#include <numbers>
#include <set>

#include "pcgk/common/error.hpp"
#include "pcgk/geometry/hpr.hpp"
#include "pcgk/geometry/sampling.hpp"

namespace pcgk::dataorg {

using geometry::PointCloud;
using geometry::Vec3;

InputMode parse_input_mode(const std::string& s) {
    if (s == "view1") return InputMode::view1;
    if (s == "view1+p2") return InputMode::view1_p2;
    if (s == "view1+p8") return InputMode::view1_p8;
    if (s == "view2") return InputMode::view2;
    throw ConfigError("unknown input_mode '" + s + "' (expected view1, view1+p2, view1+p8 or view2)");
}

std::string to_string(InputMode mode) {
    switch (mode) {
        case InputMode::view1: return "view1";
        case InputMode::view1_p2: return "view1+p2";
        case InputMode::view1_p8: return "view1+p8";
        case InputMode::view2: return "view2";
    }
    return "view1";
}

geometry::CameraPose sample_pose(Rng& rng) {
    const double az = uniform(rng, 0.0, 2 * std::numbers::pi);
    const double el = uniform(rng, 0.0, 2 * std::numbers::pi);
    return {az, el, 1.0};
}

namespace {

std::vector<Vec3> gather(const PointCloud& cloud, const std::vector<std::size_t>& idx) {
    std::vector<Vec3> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(cloud.points[i]);
    return out;
}

// Adds `extra` groups of hidden points (FPS seeds, k_v nearest hidden each) to the visible set.
std::vector<std::size_t> add_hidden_patches(const PointCloud& cloud, std::vector<std::size_t> visible,
                                            std::size_t extra, std::size_t k_v, std::uint64_t seed) {
    std::vector<bool> vis(cloud.size(), false);
    for (auto i : visible) vis[i] = true;
    std::vector<std::size_t> hidden;
    for (std::size_t i = 0; i < cloud.size(); ++i)
        if (!vis[i]) hidden.push_back(i);
    if (hidden.empty()) return visible;
    const auto hp = gather(cloud, hidden);
    for (auto c : geometry::farthest_point_sampling(hp, std::min(extra, hp.size()), seed))
        for (auto j : geometry::knn(hp[c], hp, std::min(k_v, hp.size()))) vis[hidden[j]] = true;
    visible.clear();
    for (std::size_t i = 0; i < cloud.size(); ++i)
        if (vis[i]) visible.push_back(i);
    return visible;
}

std::vector<std::size_t> union_sorted(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::vector<std::size_t> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

}  // namespace

PatchSet patches_from_split(const PointCloud& cloud, std::vector<std::size_t> visible, std::size_t v, std::size_t h,
                            std::size_t k, std::size_t k_v, std::uint64_t seed) {
    if (k == 0 || k_v == 0) throw ConfigError("patches: k and k_v must be >= 1");
    if (v == 0) throw ConfigError("patches: v must be >= 1");
    std::sort(visible.begin(), visible.end());
    visible.erase(std::unique(visible.begin(), visible.end()), visible.end());
    std::vector<bool> vis(cloud.size(), false);
    for (auto i : visible) {
        if (i >= cloud.size()) throw DataError("patches: visible index " + std::to_string(i) + " out of range");
        vis[i] = true;
    }
    PatchSet ps;
    ps.v = v;
    ps.h = h;
    ps.k = k;
    ps.k_v = k_v;
    ps.visible_indices = visible;
    for (std::size_t i = 0; i < cloud.size(); ++i)
        if (!vis[i]) ps.hidden_indices.push_back(i);
    if (visible.size() < std::max(v, k_v))
        throw DataError("patches: " + std::to_string(visible.size()) + " visible points, need " +
                        std::to_string(std::max(v, k_v)));
    if (ps.hidden_indices.size() < h)
        throw DataError("patches: " + std::to_string(ps.hidden_indices.size()) + " hidden points, need " +
                        std::to_string(h));
    if (h > 0 && cloud.size() < k)
        throw DataError("patches: cloud has " + std::to_string(cloud.size()) + " points, need k=" + std::to_string(k));

    const auto vp = gather(cloud, visible);
    for (auto c : geometry::farthest_point_sampling(vp, v, seed)) {
        ps.visible_centers.push_back(vp[c]);
        for (auto j : geometry::knn(vp[c], vp, k_v)) {
            ps.visible_patches.push_back(vp[j] - vp[c]);
            ps.visible_patch_indices.push_back(visible[j]);
        }
    }
    if (h > 0) {
        const auto hp = gather(cloud, ps.hidden_indices);
        for (auto c : geometry::farthest_point_sampling(hp, h, seed)) {
            ps.hidden_centers.push_back(hp[c]);
            for (auto j : geometry::knn(hp[c], cloud.points, k)) {
                ps.target_patches.push_back(cloud.points[j] - hp[c]);
                ps.target_patch_indices.push_back(j);
            }
        }
    }
    return ps;
}

PatchSet build_patches(const PointCloud& cloud, const geometry::CameraPose& pose, const PatchParams& params,
                       std::uint64_t seed, std::size_t cloud_id) {
    Rng retry_rng(derive_seed(seed, 0x5eed));
    geometry::CameraPose current = pose;
    std::string last_reason;
    for (std::size_t attempt = 1; attempt <= kPoseRetryBudget; ++attempt) {
        try {
            auto visible = geometry::hidden_point_removal(cloud, current, params.gamma).visible;
            switch (params.input_mode) {
                case InputMode::view1: break;
                case InputMode::view1_p2: visible = add_hidden_patches(cloud, visible, 2, params.k_v, seed); break;
                case InputMode::view1_p8: visible = add_hidden_patches(cloud, visible, 8, params.k_v, seed); break;
                case InputMode::view2: {
                    Rng second(derive_seed(seed, 0x2, attempt));
                    const auto other = geometry::hidden_point_removal(cloud, sample_pose(second), params.gamma);
                    visible = union_sorted(visible, other.visible);
                    break;
                }
            }
            auto ps = patches_from_split(cloud, std::move(visible), params.v, params.h, params.k, params.k_v, seed);
            ps.pose = current;
            ps.attempts = attempt;
            return ps;
        } catch (const GeometryError& e) {
            last_reason = e.what();
        } catch (const DataError& e) {
            last_reason = e.what();
        }
        current = sample_pose(retry_rng);
    }
    throw DataError("cloud " + std::to_string(cloud_id) + ": no usable pose after " +
                    std::to_string(kPoseRetryBudget) + " attempts (" + last_reason + ")");
}

Sample build_sample(const PointCloud& cloud, const SampleParams& params, std::uint64_t seed, std::size_t cloud_id) {
    Rng rng(seed);
    Sample s;
    s.cloud = cloud;
    s.input_pose = sample_pose(rng);
    s.align_pose = sample_pose(rng);
    s.target_pose = sample_pose(rng);
    s.patches = build_patches(cloud, s.input_pose, params.patch, derive_seed(seed, 1), cloud_id);
    s.input_pose = s.patches.pose;
    s.align_image = render::rasterize(cloud.points, s.align_pose, params.img_size, params.render_mode, params.fov_deg);
    s.target_image = render::rasterize(cloud.points, s.target_pose, params.img_size, params.render_mode, params.fov_deg);
    return s;
}

}  // namespace pcgk::dataorg
