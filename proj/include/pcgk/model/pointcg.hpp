#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pcgk/dataorg/patches.hpp"
#include "pcgk/geometry/point_cloud.hpp"
#include "pcgk/model/config.hpp"
#include "pcgk/model/layers.hpp"
#include "pcgk/render/image.hpp"

namespace pcgk::model {

/// Samples stacked into tensors. All samples must share v and h.
struct Batch {
    std::size_t size = 0, v = 0, h = 0;
    Value visible_patches;  // (B*v, k_v, 3)
    Value visible_centers;  // (B, v, 3)
    Value hidden_centers;   // (B, h, 3), unset when h = 0
    Value target_patches;   // (B, h, k, 3), unset when h = 0
    Value align_images;     // (B, 1, S, S)
    Value target_images;    // (B, 1, S, S)
    std::vector<geometry::CameraPose> target_poses;
};

Batch make_batch(const std::vector<dataorg::Sample>& samples);
/// Only the point-side fields, from patch sets (images and poses left unset).
Batch make_point_batch(const std::vector<dataorg::PatchSet>& patches);

Value image_to_value(const render::ImageGrid& img);                 // (1,1,H,W)
Value images_to_value(const std::vector<render::ImageGrid>& imgs);  // (B,1,H,W)
/// Clamps into [0,1]. Expects (1,1,H,W) or (H,W).
render::ImageGrid value_to_image(const Value& v, std::size_t index = 0);

struct ForwardOptions {
    bool completion = true;  // decoder + reconstruction head
    bool alignment = true;   // projection heads on both modalities
    bool generation = true;  // view-conditioned generator
};

struct ForwardResult {
    Value encoded;      // T_E (B, v, d)
    Value predicted;    // (B, h, k, 3), unset if completion is off or h = 0
    Value z_point;      // (B, proj_dim)
    Value z_image;      // (B, proj_dim)
    Value generated;    // (B, 1, S, S)
};

class PointCG {
public:
    /// Validates the config and initializes all parameters from config.seed.
    explicit PointCG(const ModelConfig& config);

    const ModelConfig& config() const { return config_; }
    tensor::ParamStore& params() { return params_; }
    const tensor::ParamStore& params() const { return params_; }
    /// Frozen image-encoder weights; never registered as learnable.
    const std::map<std::string, Value>& frozen() const { return frozen_; }

    /// (n, k_v, 3) -> (n, d): shared per-point MLP then max over the patch.
    Value embed_patches(const Value& patches) const;
    /// (..., 3) -> (..., d).
    Value embed_positions(const Value& centers) const;
    /// tokens, positions: (B, v, d) -> (B, v, d).
    Value encode(const Value& tokens, const Value& positions) const;
    /// -> (B, v + h, d). With pos_hidden unset the decoder runs over the v tokens only.
    Value decode(const Value& encoded, const Value& pos_visible, const std::optional<Value>& pos_hidden) const;
    /// Last h tokens of (B, v + h, d) -> (B, h, k, 3).
    Value reconstruct(const Value& decoded, std::size_t h) const;

    /// (B, 1, S, S) -> (B, feature_dim). Constant with respect to every parameter.
    Value image_features(const Value& images) const;
    /// (B, feature_dim) -> (B, proj_dim).
    Value project_image(const Value& features) const;
    /// T_E (B, v, d) -> max over tokens -> (B, proj_dim).
    Value project_point(const Value& encoded) const;
    /// (B, d) from (sin az, cos az, sin el, cos el, distance).
    Value embed_view(const std::vector<geometry::CameraPose>& poses) const;
    /// T_E (B, v, d), view tokens (B, d) -> images (B, 1, S, S) in (0, 1).
    Value generate(const Value& encoded, const Value& view) const;

    /// Visible patches to T_E.
    Value encode_batch(const Batch& batch) const;
    ForwardResult forward(const Batch& batch, const ForwardOptions& opts = {}) const;

    /// Max-pooled frozen features Max(T_E) per cloud, (B, d) as plain rows.
    std::vector<std::vector<double>> pooled_features(const Batch& batch) const;

    /// Block access for diagnostics.
    const std::vector<TransformerBlock>& encoder_blocks() const { return enc_; }

    /// Parameters of each component, by name prefix.
    static constexpr const char* kGeneratorPrefixes[] = {"gen.", "view_embed."};
    static constexpr const char* kAlignmentPrefixes[] = {"proj_image.", "proj_point."};
    static constexpr const char* kCompletionPrefixes[] = {"decoder.", "head."};

private:
    ModelConfig config_;
    tensor::ParamStore params_;
    std::map<std::string, Value> frozen_;

    Mlp patch_mlp_, pos_mlp_;
    std::vector<TransformerBlock> enc_, dec_;
    LayerNorm enc_norm_, dec_norm_;
    Value hidden_token_;
    Linear head_;
    Mlp proj_image_, proj_point_, view_mlp_, gen_token_mlp_;
    Linear gen_seed_;
    struct UpBlock {
        Value deconv_w, deconv_b, conv_w, conv_b;
    };
    std::vector<UpBlock> up_;
    std::vector<Value> branch_w_;
    Value out_b_;
};

}  // namespace pcgk::model
