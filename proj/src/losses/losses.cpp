#include "pcgk/losses/losses.hpp"

#include <cmath>
#include <map>

#include "pcgk/common/error.hpp"
#include "pcgk/tensor/dft.hpp"
#include "pcgk/tensor/ops.hpp"

namespace pcgk::losses {

namespace ops = pcgk::tensor;
using tensor::Shape;
using tensor::shape_str;

ChamferMode parse_chamfer_mode(const std::string& s) {
    if (s == "per_patch") return ChamferMode::per_patch;
    if (s == "global") return ChamferMode::global;
    throw ConfigError("unknown chamfer_mode '" + s + "' (expected per_patch or global)");
}

std::string to_string(ChamferMode mode) { return mode == ChamferMode::global ? "global" : "per_patch"; }

GenLossKind parse_gen_loss(const std::string& s) {
    if (s == "l1_msfr") return GenLossKind::l1_msfr;
    if (s == "l1_l2") return GenLossKind::l1_l2;
    throw ConfigError("unknown gen_loss '" + s + "' (expected l1_msfr or l1_l2)");
}

std::string to_string(GenLossKind kind) { return kind == GenLossKind::l1_l2 ? "l1_l2" : "l1_msfr"; }

void LossWeights::validate() const {
    for (auto [name, w] : {std::pair{"alpha", alpha}, {"beta", beta}, {"omega", omega}, {"phi", phi}, {"psi", psi}})
        if (!(w >= 0.0)) throw ConfigError(std::string("loss weight ") + name + " must be non-negative");
    if (omega == 0.0 && phi == 0.0 && psi == 0.0) throw ConfigError("loss weights omega, phi and psi are all zero");
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    if (msfr_scales == 0) throw ConfigError("msfr_scales must be >= 1");
}

namespace {

// Chamfer between point sets a (P,n,3) and b (P,m,3), averaged over P.
Value chamfer_sets(const Value& a, const Value& b) {
    const std::size_t P = a.dim(0), n = a.dim(1), m = b.dim(1);
    const Shape full{P, n, m, 3};
    const Value da = ops::broadcast_to(ops::reshape(a, {P, n, 1, 3}), full);
    const Value db = ops::broadcast_to(ops::reshape(b, {P, 1, m, 3}), full);
    const Value d2 = ops::sum_axis(ops::square(ops::sub(da, db)), 3);  // (P,n,m)
    return ops::add(ops::mean(ops::min_axis(d2, 2)), ops::mean(ops::min_axis(d2, 1)));
}

Value flatten_sets(const Value& x, const char* what) {
    if (x.rank() < 2 || x.shape().back() != 3)
        throw ShapeError(std::string("chamfer: ") + what + " must be (...,k,3), got " + shape_str(x.shape()));
    const std::size_t k = x.dim(x.rank() - 2);
    return ops::reshape(x, {x.size() / (3 * k), k, 3});
}

Value as_images(const Value& x) {
    if (x.rank() == 2) return ops::reshape(x, {1, x.dim(0), x.dim(1)});
    if (x.rank() == 3) return x;
    if (x.rank() == 4 && x.dim(1) == 1) return ops::reshape(x, {x.dim(0), x.dim(2), x.dim(3)});
    throw ShapeError("msfr: expected (H,W), (B,H,W) or (B,1,H,W), got " + shape_str(x.shape()));
}

// (n/2, n) matrix averaging adjacent pairs.
Value pool_matrix(std::size_t n) {
    std::vector<double> p(n / 2 * n, 0.0);
    for (std::size_t i = 0; i < n / 2; ++i) p[i * n + 2 * i] = p[i * n + 2 * i + 1] = 0.5;
    return Value({n / 2, n}, std::move(p));
}

const tensor::Dft2Basis& cached_basis(std::size_t h, std::size_t w) {
    static thread_local std::map<std::pair<std::size_t, std::size_t>, tensor::Dft2Basis> cache;
    auto it = cache.find({h, w});
    if (it == cache.end()) it = cache.emplace(std::pair{h, w}, tensor::dft2_matrices(h, w)).first;
    return it->second;
}

void require_same(const char* op, const Value& a, const Value& b) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

}  // namespace

Value chamfer(const Value& pred, const Value& gt, ChamferMode mode, const Value* centers) {
    if (mode == ChamferMode::per_patch) {
        const Value a = flatten_sets(pred, "prediction"), b = flatten_sets(gt, "target");
        if (a.dim(0) != b.dim(0))
            throw ShapeError("chamfer: patch counts differ, " + shape_str(pred.shape()) + " vs " + shape_str(gt.shape()));
        return chamfer_sets(a, b);
    }
    if (!centers) throw ShapeError("chamfer: global mode needs patch centers");
    require_same("chamfer", pred, gt);
    if (pred.rank() != 4 || centers->shape() != Shape{pred.dim(0), pred.dim(1), 3})
        throw ShapeError("chamfer: global mode expects (B,h,k,3) patches and (B,h,3) centers, got " +
                         shape_str(pred.shape()) + " and " + shape_str(centers->shape()));
    const std::size_t B = pred.dim(0), h = pred.dim(1), k = pred.dim(2);
    const Value c = ops::broadcast_to(ops::reshape(*centers, {B, h, 1, 3}), pred.shape());
    const Value a = ops::reshape(ops::add(pred, c), {B, h * k, 3});
    const Value b = ops::reshape(ops::add(gt, c), {B, h * k, 3});
    return chamfer_sets(a, b);
}

Value cross_modal(const Value& z, const Value& h, double tau) {
    require_same("cross_modal", z, h);
    if (z.rank() != 2) throw ShapeError("cross_modal: expected (M,p), got " + shape_str(z.shape()));
    if (!(tau > 0.0)) throw ConfigError("cross_modal: tau must be positive");
    const std::size_t M = z.dim(0), p = z.dim(1);

    auto normalize_rows = [&](const Value& x, const char* side) {
        const Value norms = ops::sqrt(ops::sum_axis(ops::square(x), 1, true));  // (M,1)
        for (std::size_t i = 0; i < M; ++i)
            if (!(norms.at(i) > 1e-12))
                throw NumericError(std::string("cross_modal: zero-norm ") + side + " embedding in row " +
                                   std::to_string(i));
        return ops::div(x, ops::broadcast_to(norms, {M, p}));
    };
    const Value zn = normalize_rows(z, "point"), hn = normalize_rows(h, "image");
    const Value s_zh = ops::scalar_mul(ops::matmul(zn, ops::transpose_last(hn)), 1.0 / tau);
    const Value s_hz = ops::transpose_last(s_zh);
    const Value s_zz = ops::scalar_mul(ops::matmul(zn, ops::transpose_last(zn)), 1.0 / tau);
    const Value s_hh = ops::scalar_mul(ops::matmul(hn, ops::transpose_last(hn)), 1.0 / tau);

    std::vector<double> eye(M * M, 0.0), mask(2 * M * M, 1.0);
    for (std::size_t i = 0; i < M; ++i) {
        eye[i * M + i] = 1.0;
        mask[i * 2 * M + i] = 0.0;  // drop k = i from the intra-modal block
    }
    const Value eye_v({M, M}, eye), mask_v({M, 2 * M}, mask);

    // Per-row -positive + log(sum over allowed logits), stabilized by a constant row max.
    auto directed = [&](const Value& intra, const Value& cross) {
        const Value logits = ops::concat({intra, cross}, 1);  // (M, 2M)
        std::vector<double> mx(M, -1e300);
        for (std::size_t i = 0; i < M; ++i)
            for (std::size_t j = 0; j < 2 * M; ++j)
                if (mask[i * 2 * M + j] != 0.0) mx[i] = std::max(mx[i], logits.at(i * 2 * M + j));
        const Value m_col({M, 1}, mx);
        const Value shifted = ops::sub(logits, ops::broadcast_to(m_col, {M, 2 * M}));
        // Masked entries are zeroed before exp so they cannot overflow.
        const Value denom = ops::sum_axis(ops::mul(ops::exp(ops::mul(shifted, mask_v)), mask_v), 1, true);
        const Value lse = ops::add(ops::log(denom), m_col);
        const Value pos = ops::sum_axis(ops::mul(cross, eye_v), 1, true);
        return ops::sum(ops::sub(lse, pos));
    };
    const Value total = ops::add(directed(s_zz, s_zh), directed(s_hh, s_hz));
    return ops::scalar_mul(total, 1.0 / (2.0 * static_cast<double>(M)));
}

Value l1_image(const Value& gt, const Value& pred) {
    require_same("l1_image", gt, pred);
    return ops::mean(ops::abs(ops::sub(gt, pred)));
}

Value l2_image(const Value& gt, const Value& pred) {
    require_same("l2_image", gt, pred);
    return ops::mean(ops::square(ops::sub(gt, pred)));
}

Value msfr(const Value& gt, const Value& pred, std::size_t scales) {
    require_same("msfr", gt, pred);
    if (scales == 0) throw ShapeError("msfr: scales must be >= 1");
    Value diff = as_images(ops::sub(gt, pred));
    const std::size_t div = std::size_t{1} << (scales - 1);
    if (diff.dim(1) % div != 0 || diff.dim(2) % div != 0)
        throw ShapeError("msfr: image " + shape_str(gt.shape()) + " not divisible by 2^" + std::to_string(scales - 1));
    // Pooling and the DFT are linear, so the pyramid of the difference is the
    // difference of the pyramids.
    Value total;
    for (std::size_t s = 0; s < scales; ++s) {
        if (s > 0) {
            const std::size_t H = diff.dim(1), W = diff.dim(2);
            diff = ops::matmul(ops::matmul(pool_matrix(H), diff), ops::transpose_last(pool_matrix(W)));
        }
        const auto [re, im] = tensor::dft2(diff, cached_basis(diff.dim(1), diff.dim(2)));
        const Value level = ops::mean(ops::add(ops::abs(re), ops::abs(im)));
        total = s == 0 ? level : ops::add(total, level);
    }
    return total;
}

Value image_gen_loss(const Value& gt, const Value& pred, const LossWeights& w) {
    if (!(w.alpha >= 0.0) || !(w.beta >= 0.0)) throw ConfigError("image_gen_loss: weights must be non-negative");
    const Value second = w.gen_loss == GenLossKind::l1_msfr ? msfr(gt, pred, w.msfr_scales) : l2_image(gt, pred);
    return ops::add(ops::scalar_mul(l1_image(gt, pred), w.alpha), ops::scalar_mul(second, w.beta));
}

Value total_loss(const Value& cd, const Value& cm, const Value& gen, const LossWeights& w) {
    if (!(w.omega >= 0.0 && w.phi >= 0.0 && w.psi >= 0.0)) throw ConfigError("total_loss: negative weight");
    if (w.omega == 0.0 && w.phi == 0.0 && w.psi == 0.0) throw ConfigError("total_loss: all weights are zero");
    for (const auto* v : {&cd, &cm, &gen})
        if (v->size() != 1) throw ShapeError("total_loss: components must be scalars");
    return ops::add(ops::add(ops::scalar_mul(cd, w.omega), ops::scalar_mul(cm, w.phi)), ops::scalar_mul(gen, w.psi));
}

}  // namespace pcgk::losses
