#pragma once

#include <cstdint>
#include <cstddef>

namespace pcgk::model {

struct ModelConfig {
    std::size_t d = 64;
    std::size_t heads = 4;
    std::size_t enc_blocks = 2;
    std::size_t dec_blocks = 1;
    std::size_t mlp_ratio = 4;

    std::size_t v = 16, h = 16, k = 16, k_v = 16;

    std::size_t patch_hidden = 64;  // PointNet width
    std::size_t pos_hidden = 128;

    std::size_t img_size = 16;
    std::size_t gen_c0 = 32, gen_h0 = 4, gen_w0 = 4;

    std::size_t feature_dim = 32;  // frozen image encoder output
    std::size_t proj_dim = 64;
    double tau = 0.07;

    std::uint64_t seed = 7;

    /// Number of deconvolution blocks: log2(img_size / gen_h0).
    std::size_t gen_blocks() const;
    /// Channels entering deconv block i (i = gen_blocks() gives the output width).
    std::size_t gen_channels(std::size_t i) const;

    /// Throws ConfigError on any violated invariant.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

}  // namespace pcgk::model
