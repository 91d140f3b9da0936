#include "pcgk/model/config.hpp"

#include <algorithm>
#include <string>

#include "pcgk/common/error.hpp"

namespace pcgk::model {

std::size_t ModelConfig::gen_blocks() const {
    std::size_t blocks = 0;
    for (std::size_t s = gen_h0; s < img_size; s *= 2) ++blocks;
    return blocks;
}

std::size_t ModelConfig::gen_channels(std::size_t i) const {
    std::size_t c = gen_c0;
    for (std::size_t b = 0; b < i; ++b) c = std::max<std::size_t>(4, c / 2);
    return c;
}

void ModelConfig::validate() const {
    auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError("model config: " + msg);
    };
    need(d > 0 && heads > 0 && mlp_ratio > 0, "d, heads and mlp_ratio must be positive");
    need(d % heads == 0, "d=" + std::to_string(d) + " is not divisible by heads=" + std::to_string(heads));
    need(enc_blocks > 0, "enc_blocks must be positive");
    need(v > 0 && k > 0 && k_v > 0, "v, k and k_v must be positive");
    need(patch_hidden > 0 && pos_hidden > 0 && feature_dim > 0 && proj_dim > 0, "hidden widths must be positive");
    need(tau > 0.0, "tau must be positive");
    need(gen_c0 > 0 && gen_h0 > 0 && gen_w0 > 0, "generator seed map extents must be positive");
    need(gen_h0 == gen_w0, "generator seed map must be square");
    need(img_size >= 8, "img_size must be >= 8");
    need(gen_h0 << gen_blocks() == img_size && gen_blocks() >= 1,
         "img_size=" + std::to_string(img_size) + " is not gen_h0=" + std::to_string(gen_h0) + " times a power of two");
    need(img_size % 8 == 0, "img_size must be divisible by 8 for the image feature encoder");
}

}  // namespace pcgk::model
