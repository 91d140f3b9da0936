#pragma once

#include <string>

#include "pcgk/tensor/value.hpp"

namespace pcgk::losses {

using tensor::Value;

enum class ChamferMode { per_patch, global };
ChamferMode parse_chamfer_mode(const std::string& s);
std::string to_string(ChamferMode mode);

enum class GenLossKind { l1_msfr, l1_l2 };
GenLossKind parse_gen_loss(const std::string& s);
std::string to_string(GenLossKind kind);

struct LossWeights {
    double alpha = 1.0, beta = 0.2;            // image generation mix
    double omega = 1.0, phi = 1.0, psi = 1.0;  // completion, alignment, generation
    double tau = 0.07;
    std::size_t msfr_scales = 2;
    GenLossKind gen_loss = GenLossKind::l1_msfr;

    /// Throws ConfigError on negative weights, all-zero omega/phi/psi or tau <= 0.
    void validate() const;
};

/// Symmetric squared-distance Chamfer: mean nearest squared distance from each
/// set to the other, summed.
///
/// per_patch: pred (..., k, 3) against gt (..., k', 3), averaged over patches.
/// global: pred/gt (B, h, k, 3) are re-absolutized with centers (B, h, 3) and
/// compared as one set per sample, averaged over samples.
Value chamfer(const Value& pred, const Value& gt, ChamferMode mode = ChamferMode::per_patch,
              const Value* centers = nullptr);

/// Cross-modal instance discrimination over M paired rows (Z point side, H image
/// side), cosine similarity over temperature tau. Exactly 0 when M = 1.
/// Throws NumericError on a zero-norm row.
Value cross_modal(const Value& z, const Value& h, double tau);

/// Mean absolute pixel difference.
Value l1_image(const Value& gt, const Value& pred);
/// Mean squared pixel difference.
Value l2_image(const Value& gt, const Value& pred);

/// Sum over pyramid levels of mean(|Re dF| + |Im dF|) with dF the 2D DFT of the
/// level difference. Images are (H,W), (B,H,W) or (B,1,H,W).
Value msfr(const Value& gt, const Value& pred, std::size_t scales);

/// alpha * L1 + beta * (MSFR or L2, per weights.gen_loss).
Value image_gen_loss(const Value& gt, const Value& pred, const LossWeights& weights);

/// omega * cd + phi * cm + psi * gen.
Value total_loss(const Value& cd, const Value& cm, const Value& gen, const LossWeights& weights);

}  // namespace pcgk::losses
