#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gwlab/dataset.hpp"
#include "gwlab/numkernel.hpp"
#include "gwlab/world.hpp"

namespace gwlab {

// ---- object features ---------------------------------------------------------

/// Attribute one-hots (category + color + size) concatenated with 7 spatial
/// values: x_min, y_min, x_max, y_max, width, height, area.
struct ObjectFeatureSet {
    Tensor2 rows;  // N x F
};

struct FeatureLayout {
    int n_categories = kMaxCategories;
    int n_colors = kMaxColors;

    std::size_t dim() const {
        return static_cast<std::size_t>(n_categories + n_colors + kNumSizes + 7);
    }
};

ObjectFeatureSet object_features(const Scene& scene, const FeatureLayout& layout);

// ---- encoder ------------------------------------------------------------------

struct EncoderDims {
    std::size_t hidden = 32;  // d
    std::size_t vocab = 0;
    std::size_t feat = 0;
    int layers = 1;  // 0 or 1 co-attention rounds
};

enum class EncodeMode { Oracle, Guesser, Questioner };

/// Final hidden states: pooled and per-item, both modalities.
struct EncoderOutput {
    Vec h_img;      // d
    Vec h_cls;      // d
    Tensor2 h_obj;  // N x d
    Tensor2 h_tok;  // L x d (tokens after [CLS])
    int target_row = -1;  // designated row of h_obj in oracle mode

    Vec h_tgt() const { return h_obj.row_vec(static_cast<std::size_t>(target_row)); }
};

/// Everything the backward pass needs; filled when encode() gets a cache.
struct EncoderCache {
    std::vector<std::size_t> token_ids;
    Tensor2 feats;       // N x F
    Tensor2 t0, o0;      // embeddings / projections
    Tensor2 qt, kv, vv;  // text-queries attention
    Tensor2 at;          // (L+1) x N rows of softmax weights
    Tensor2 qv, kt, vt;  // vision-queries attention
    Tensor2 av;          // N x (L+1)
    Tensor2 t1, o1;
    Tensor2 zt, zo;  // tanh feed-forward activations
    Tensor2 t2, o2;
    Vec mean_t, mean_o;
    Vec h_cls, h_img;  // post-tanh pool outputs
};

/// Gradients flowing into the encoder outputs; empty tensors mean zero.
struct EncoderOutputGrads {
    Vec g_img;
    Vec g_cls;
    Tensor2 g_obj;
    Tensor2 g_tok;
};

/// Parameter names all carry the "enc." prefix so agent heads can share one
/// ParamSet with their encoder.
ParamSet init_encoder_params(const EncoderDims& dims, Rng& rng);
void add_encoder_params(ParamSet& params, const EncoderDims& dims);

EncoderOutput encode(const QuestionTokens& tokens, const ObjectFeatureSet& feats,
                     const ParamSet& params, const EncoderDims& dims, EncodeMode mode,
                     int target_id = -1, EncoderCache* cache = nullptr);

void encode_backward(const EncoderCache& cache, const EncoderOutputGrads& gout,
                     const ParamSet& params, const EncoderDims& dims, GradSet& grads);

}  // namespace gwlab
