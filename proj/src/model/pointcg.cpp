#include "pcgk/model/pointcg.hpp"

#include <cmath>

#include "pcgk/common/error.hpp"
#include "pcgk/tensor/ops.hpp"

namespace pcgk::model {

namespace ops = pcgk::tensor;
using geometry::Vec3;

namespace {

void append(std::vector<double>& out, const std::vector<Vec3>& pts) {
    for (const auto& p : pts) {
        out.push_back(p.x);
        out.push_back(p.y);
        out.push_back(p.z);
    }
}

// Kernel of shape (d0, d1, k, k); fan_in counts the input channels times k^2.
Value conv_kernel(Rng& rng, std::size_t d0, std::size_t d1, std::size_t k, std::size_t in_channels) {
    const double a = std::sqrt(1.0 / static_cast<double>(in_channels * k * k));
    std::vector<double> w(d0 * d1 * k * k);
    for (auto& x : w) x = uniform(rng, -a, a);
    return Value({d0, d1, k, k}, std::move(w));
}

constexpr std::size_t kBranchKernels[] = {3, 5, 7};

}  // namespace

Value image_to_value(const render::ImageGrid& img) { return images_to_value({img}); }

Value images_to_value(const std::vector<render::ImageGrid>& imgs) {
    if (imgs.empty()) throw ShapeError("images_to_value: empty list");
    const std::size_t H = imgs[0].height(), W = imgs[0].width();
    std::vector<double> data;
    data.reserve(imgs.size() * H * W);
    for (const auto& im : imgs) {
        if (im.height() != H || im.width() != W || im.channels() != 1)
            throw ShapeError("images_to_value: images must share one grayscale size");
        data.insert(data.end(), im.data().begin(), im.data().end());
    }
    return Value({imgs.size(), 1, H, W}, std::move(data));
}

render::ImageGrid value_to_image(const Value& v, std::size_t index) {
    std::size_t H = 0, W = 0;
    if (v.rank() == 4 && v.dim(1) == 1) {
        H = v.dim(2);
        W = v.dim(3);
    } else if (v.rank() == 2 && index == 0) {
        H = v.dim(0);
        W = v.dim(1);
    } else {
        throw ShapeError("value_to_image: expected (B,1,H,W) or (H,W), got " + tensor::shape_str(v.shape()));
    }
    if (v.rank() == 4 && index >= v.dim(0)) throw ShapeError("value_to_image: index out of range");
    render::ImageGrid img(H, W, 1);
    for (std::size_t r = 0; r < H; ++r)
        for (std::size_t c = 0; c < W; ++c) img.set(r, c, v.at(index * H * W + r * W + c));
    return img;
}

Batch make_point_batch(const std::vector<dataorg::PatchSet>& patches) {
    if (patches.empty()) throw ShapeError("make_batch: no samples");
    Batch b;
    b.size = patches.size();
    b.v = patches[0].v;
    b.h = patches[0].h;
    const std::size_t k = patches[0].k, k_v = patches[0].k_v;
    std::vector<double> vp, vc, hc, tp;
    for (const auto& ps : patches) {
        if (ps.v != b.v || ps.h != b.h || ps.k != k || ps.k_v != k_v)
            throw ShapeError("make_batch: samples disagree on v, h, k or k_v");
        append(vp, ps.visible_patches);
        append(vc, ps.visible_centers);
        append(hc, ps.hidden_centers);
        append(tp, ps.target_patches);
    }
    b.visible_patches = Value({b.size * b.v, k_v, 3}, std::move(vp));
    b.visible_centers = Value({b.size, b.v, 3}, std::move(vc));
    if (b.h > 0) {
        b.hidden_centers = Value({b.size, b.h, 3}, std::move(hc));
        b.target_patches = Value({b.size, b.h, k, 3}, std::move(tp));
    }
    return b;
}

Batch make_batch(const std::vector<dataorg::Sample>& samples) {
    std::vector<dataorg::PatchSet> patches;
    std::vector<render::ImageGrid> align, target;
    Batch b;
    for (const auto& s : samples) {
        patches.push_back(s.patches);
        align.push_back(s.align_image);
        target.push_back(s.target_image);
        b.target_poses.push_back(s.target_pose);
    }
    auto poses = std::move(b.target_poses);
    b = make_point_batch(patches);
    b.target_poses = std::move(poses);
    b.align_images = images_to_value(align);
    b.target_images = images_to_value(target);
    return b;
}

PointCG::PointCG(const ModelConfig& config) : config_(config), params_(config.seed) {
    config_.validate();
    const auto& c = config_;
    Rng rng(c.seed);
    patch_mlp_ = Mlp(params_, "patch_embed", 3, c.patch_hidden, c.d, rng);
    pos_mlp_ = Mlp(params_, "pos_embed", 3, c.pos_hidden, c.d, rng);
    for (std::size_t i = 0; i < c.enc_blocks; ++i)
        enc_.emplace_back(params_, "encoder.block" + std::to_string(i), c.d, c.heads, c.mlp_ratio, rng);
    enc_norm_ = LayerNorm(params_, "encoder.norm", c.d);
    for (std::size_t i = 0; i < c.dec_blocks; ++i)
        dec_.emplace_back(params_, "decoder.block" + std::to_string(i), c.d, c.heads, c.mlp_ratio, rng);
    dec_norm_ = LayerNorm(params_, "decoder.norm", c.d);
    {
        std::vector<double> t(c.d);
        for (auto& x : t) x = 0.02 * normal(rng);
        hidden_token_ = params_.add("decoder.hidden_token", Value({c.d}, std::move(t)));
    }
    head_ = Linear(params_, "head", c.d, 3 * c.k, rng);
    proj_image_ = Mlp(params_, "proj_image", c.feature_dim, c.proj_dim, c.proj_dim, rng);
    proj_point_ = Mlp(params_, "proj_point", c.d, c.proj_dim, c.proj_dim, rng);
    view_mlp_ = Mlp(params_, "view_embed", 5, c.d, c.d, rng);
    gen_token_mlp_ = Mlp(params_, "gen.token", c.d, c.d, c.d, rng);
    gen_seed_ = Linear(params_, "gen.seed", 2 * c.d, c.gen_c0 * c.gen_h0 * c.gen_w0, rng);
    for (std::size_t i = 0; i < c.gen_blocks(); ++i) {
        const std::size_t cin = c.gen_channels(i), cout = c.gen_channels(i + 1);
        const std::string name = "gen.up" + std::to_string(i);
        UpBlock blk;
        // conv2d_transpose kernels are laid out (in, out, kh, kw).
        blk.deconv_w = params_.add(name + ".deconv.w", conv_kernel(rng, cin, cout, 4, cin));
        blk.deconv_b = params_.add(name + ".deconv.b", Value::zeros({cout}));
        blk.conv_w = params_.add(name + ".conv.w", conv_kernel(rng, cout, cout, 3, cout));
        blk.conv_b = params_.add(name + ".conv.b", Value::zeros({cout}));
        up_.push_back(blk);
    }
    const std::size_t cf = c.gen_channels(c.gen_blocks());
    for (auto k : kBranchKernels)
        branch_w_.push_back(params_.add("gen.branch" + std::to_string(k) + ".w", conv_kernel(rng, 1, cf, k, cf)));
    out_b_ = params_.add("gen.out.b", Value::zeros({1}));

    // Frozen image encoder, regenerated from its own stream.
    Rng frozen_rng(derive_seed(c.seed, 0xF207E2));
    const std::size_t chans[] = {1, 8, 16, c.feature_dim};
    for (std::size_t i = 0; i < 3; ++i) {
        const std::size_t fan_in = chans[i] * 9;
        std::vector<double> w(chans[i + 1] * fan_in), b(chans[i + 1]);
        for (auto& x : w) x = std::sqrt(2.0 / static_cast<double>(fan_in)) * normal(frozen_rng);
        for (auto& x : b) x = 0.1 * normal(frozen_rng);
        frozen_["conv" + std::to_string(i) + ".w"] = Value({chans[i + 1], chans[i], 3, 3}, std::move(w));
        frozen_["conv" + std::to_string(i) + ".b"] = Value({chans[i + 1]}, std::move(b));
    }
}

Value PointCG::embed_patches(const Value& patches) const {
    if (patches.rank() != 3 || patches.dim(2) != 3)
        throw ShapeError("embed_patches: expected (n,k_v,3), got " + tensor::shape_str(patches.shape()));
    return ops::max_axis(patch_mlp_(patches), 1);
}

Value PointCG::embed_positions(const Value& centers) const {
    if (centers.shape().back() != 3)
        throw ShapeError("embed_positions: expected (...,3), got " + tensor::shape_str(centers.shape()));
    return pos_mlp_(centers);
}

Value PointCG::encode(const Value& tokens, const Value& positions) const {
    if (tokens.rank() != 3 || tokens.dim(2) != config_.d || tokens.shape() != positions.shape())
        throw ShapeError("encode: tokens " + tensor::shape_str(tokens.shape()) + " and positions " +
                         tensor::shape_str(positions.shape()) + " must both be (B,v,d)");
    Value x = ops::add(tokens, positions);
    for (const auto& blk : enc_) x = blk(x);
    return enc_norm_(x);
}

Value PointCG::decode(const Value& encoded, const Value& pos_visible, const std::optional<Value>& pos_hidden) const {
    Value x = encoded, pos = pos_visible;
    if (pos_hidden) {
        const std::size_t B = encoded.dim(0), h = pos_hidden->dim(1);
        const Value hidden = ops::broadcast_to(ops::reshape(hidden_token_, {1, 1, config_.d}), {B, h, config_.d});
        x = ops::concat({encoded, hidden}, 1);
        pos = ops::concat({pos_visible, *pos_hidden}, 1);
    }
    x = ops::add(x, pos);
    for (const auto& blk : dec_) x = blk(x);
    return dec_norm_(x);
}

Value PointCG::reconstruct(const Value& decoded, std::size_t h) const {
    const std::size_t B = decoded.dim(0), n = decoded.dim(1);
    if (h == 0 || h > n) throw ShapeError("reconstruct: h=" + std::to_string(h) + " for " + std::to_string(n) + " tokens");
    return ops::reshape(head_(ops::slice(decoded, 1, n - h, n)), {B, h, config_.k, 3});
}

Value PointCG::image_features(const Value& images) const {
    if (images.rank() != 4 || images.dim(1) != 1 || images.dim(2) != config_.img_size ||
        images.dim(3) != config_.img_size)
        throw ShapeError("image_features: expected (B,1," + std::to_string(config_.img_size) + "," +
                         std::to_string(config_.img_size) + "), got " + tensor::shape_str(images.shape()));
    Value x = images.detach();
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& w = frozen_.at("conv" + std::to_string(i) + ".w");
        const auto& b = frozen_.at("conv" + std::to_string(i) + ".b");
        x = ops::gelu(add_channel_bias(ops::conv2d(x, w, 2, 1), b));
    }
    return ops::mean_axis(ops::reshape(x, {x.dim(0), x.dim(1), x.dim(2) * x.dim(3)}), 2);
}

Value PointCG::project_image(const Value& features) const { return proj_image_(features); }

Value PointCG::project_point(const Value& encoded) const { return proj_point_(ops::max_axis(encoded, 1)); }

Value PointCG::embed_view(const std::vector<geometry::CameraPose>& poses) const {
    if (poses.empty()) throw ShapeError("embed_view: no poses");
    std::vector<double> f;
    for (const auto& p : poses) {
        f.insert(f.end(), {std::sin(p.azimuth()), std::cos(p.azimuth()), std::sin(p.elevation()),
                           std::cos(p.elevation()), p.distance()});
    }
    return view_mlp_(Value({poses.size(), 5}, std::move(f)));
}

Value PointCG::generate(const Value& encoded, const Value& view) const {
    const std::size_t B = encoded.dim(0), d = config_.d;
    if (view.shape() != tensor::Shape{B, d})
        throw ShapeError("generate: view tokens must be (" + std::to_string(B) + "," + std::to_string(d) + "), got " +
                         tensor::shape_str(view.shape()));
    const Value tokens = gen_token_mlp_(ops::concat({encoded, ops::reshape(view, {B, 1, d})}, 1));
    const Value pooled = ops::concat({ops::max_axis(tokens, 1), ops::mean_axis(tokens, 1)}, 1);
    Value x = ops::reshape(ops::gelu(gen_seed_(pooled)), {B, config_.gen_c0, config_.gen_h0, config_.gen_w0});
    for (const auto& blk : up_) {
        const Value t = add_channel_bias(ops::conv2d_transpose(x, blk.deconv_w, 2, 1), blk.deconv_b);
        const Value r = add_channel_bias(ops::conv2d(ops::gelu(t), blk.conv_w, 1, 1), blk.conv_b);
        x = ops::gelu(ops::add(t, r));
    }
    Value out;
    for (std::size_t i = 0; i < branch_w_.size(); ++i) {
        const Value y = ops::conv2d(x, branch_w_[i], 1, kBranchKernels[i] / 2);
        out = i == 0 ? y : ops::add(out, y);
    }
    return ops::sigmoid(add_channel_bias(out, out_b_));
}

Value PointCG::encode_batch(const Batch& batch) const {
    const Value tokens = ops::reshape(embed_patches(batch.visible_patches), {batch.size, batch.v, config_.d});
    return encode(tokens, embed_positions(batch.visible_centers));
}

ForwardResult PointCG::forward(const Batch& batch, const ForwardOptions& opts) const {
    ForwardResult r;
    const Value pos_v = embed_positions(batch.visible_centers);
    const Value tokens = ops::reshape(embed_patches(batch.visible_patches), {batch.size, batch.v, config_.d});
    r.encoded = encode(tokens, pos_v);
    if (opts.completion && batch.h > 0) {
        const Value decoded = decode(r.encoded, pos_v, embed_positions(batch.hidden_centers));
        r.predicted = reconstruct(decoded, batch.h);
    }
    if (opts.alignment) {
        r.z_point = project_point(r.encoded);
        r.z_image = project_image(image_features(batch.align_images));
    }
    if (opts.generation) r.generated = generate(r.encoded, embed_view(batch.target_poses));
    return r;
}

std::vector<std::vector<double>> PointCG::pooled_features(const Batch& batch) const {
    const Value pooled = ops::max_axis(encode_batch(batch), 1);
    std::vector<std::vector<double>> out(batch.size);
    for (std::size_t i = 0; i < batch.size; ++i)
        out[i].assign(pooled.data().begin() + static_cast<long>(i * config_.d),
                      pooled.data().begin() + static_cast<long>((i + 1) * config_.d));
    return out;
}

}  // namespace pcgk::model
