#include "gwlab/encoder.hpp"

#include <cmath>

namespace gwlab {

ObjectFeatureSet object_features(const Scene& scene, const FeatureLayout& layout) {
    const std::size_t f = layout.dim();
    Tensor2 rows(scene.objects.size(), f);
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
        const SceneObject& o = scene.objects[i];
        auto row = rows.row(i);
        row[static_cast<std::size_t>(o.category)] = 1.0;
        row[static_cast<std::size_t>(layout.n_categories + o.color)] = 1.0;
        row[static_cast<std::size_t>(layout.n_categories + layout.n_colors + o.size_class)] = 1.0;
        const std::size_t sp = static_cast<std::size_t>(layout.n_categories + layout.n_colors + kNumSizes);
        const double w = o.bbox[2] - o.bbox[0];
        const double h = o.bbox[3] - o.bbox[1];
        row[sp + 0] = o.bbox[0];
        row[sp + 1] = o.bbox[1];
        row[sp + 2] = o.bbox[2];
        row[sp + 3] = o.bbox[3];
        row[sp + 4] = w;
        row[sp + 5] = h;
        row[sp + 6] = w * h;
    }
    return {std::move(rows)};
}

void add_encoder_params(ParamSet& params, const EncoderDims& dims) {
    if (dims.hidden < 2) throw InvalidSpec("encoder: hidden size >= 2");
    if (dims.layers != 0 && dims.layers != 1)
        throw InvalidSpec("encoder: layer count must be 0 or 1");
    const std::size_t d = dims.hidden;
    params.add("enc.tok_embed", dims.vocab, d);
    params.add("enc.vis_proj", dims.feat, d);
    if (dims.layers == 1) {
        params.add("enc.txt_attn_q", d, d);
        params.add("enc.txt_attn_k", d, d);
        params.add("enc.txt_attn_v", d, d);
        params.add("enc.vis_attn_q", d, d);
        params.add("enc.vis_attn_k", d, d);
        params.add("enc.vis_attn_v", d, d);
        params.add("enc.txt_ff", d, d);
        params.add("enc.vis_ff", d, d);
    }
    params.add("enc.txt_pool", d, d);
    params.add("enc.vis_pool", d, d);
}

ParamSet init_encoder_params(const EncoderDims& dims, Rng& rng) {
    ParamSet params;
    add_encoder_params(params, dims);
    params.init_uniform(rng, 0.08);
    return params;
}

namespace {

Tensor2 row_softmax(const Tensor2& scores) {
    Tensor2 out(scores.rows, scores.cols);
    for (std::size_t i = 0; i < scores.rows; ++i) {
        Vec s = softmax(scores.row_vec(i));
        std::copy(s.begin(), s.end(), out.data.begin() + static_cast<std::ptrdiff_t>(i * out.cols));
    }
    return out;
}

Tensor2 row_softmax_backward(const Tensor2& probs, const Tensor2& g) {
    Tensor2 out(probs.rows, probs.cols);
    for (std::size_t i = 0; i < probs.rows; ++i) {
        Vec gi = softmax_backward(probs.row_vec(i), g.row_vec(i));
        std::copy(gi.begin(), gi.end(), out.data.begin() + static_cast<std::ptrdiff_t>(i * out.cols));
    }
    return out;
}

}  // namespace

EncoderOutput encode(const QuestionTokens& tokens, const ObjectFeatureSet& feats,
                     const ParamSet& params, const EncoderDims& dims, EncodeMode mode,
                     int target_id, EncoderCache* cache) {
    if (tokens.ids.empty()) throw InvalidShape("encode: empty token sequence");
    if (feats.rows.rows == 0) throw InvalidShape("encode: empty object set");
    const std::size_t n = feats.rows.rows;
    if (mode == EncodeMode::Oracle &&
        (target_id < 0 || target_id >= static_cast<int>(n)))
        throw InvalidTarget("encode: oracle mode needs a valid target row");

    const std::size_t d = dims.hidden;
    const std::size_t s = tokens.ids.size();
    const Tensor2& embed = params.at("enc.tok_embed");

    Tensor2 t0(s, d);
    for (std::size_t i = 0; i < s; ++i) {
        if (tokens.ids[i] >= embed.rows) throw InvalidShape("encode: token id out of vocab");
        auto src = embed.row(tokens.ids[i]);
        std::copy(src.begin(), src.end(), t0.data.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
    Tensor2 o0 = matmul(feats.rows, params.at("enc.vis_proj"));

    Tensor2 t2, o2;
    Tensor2 qt, kv, vv, at, qv, kt, vt, av, t1, o1, zt, zo;
    if (dims.layers == 1) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(d));
        qt = matmul(t0, params.at("enc.txt_attn_q"));
        kv = matmul(o0, params.at("enc.txt_attn_k"));
        vv = matmul(o0, params.at("enc.txt_attn_v"));
        Tensor2 st = matmul_nt(qt, kv);
        for (double& x : st.data) x *= scale;
        at = row_softmax(st);
        t1 = t0;
        add_inplace(t1, matmul(at, vv));

        qv = matmul(o0, params.at("enc.vis_attn_q"));
        kt = matmul(t0, params.at("enc.vis_attn_k"));
        vt = matmul(t0, params.at("enc.vis_attn_v"));
        Tensor2 sv = matmul_nt(qv, kt);
        for (double& x : sv.data) x *= scale;
        av = row_softmax(sv);
        o1 = o0;
        add_inplace(o1, matmul(av, vt));

        zt = tanh_map(matmul(t1, params.at("enc.txt_ff")));
        t2 = t1;
        add_inplace(t2, zt);
        zo = tanh_map(matmul(o1, params.at("enc.vis_ff")));
        o2 = o1;
        add_inplace(o2, zo);
    } else {
        t2 = t0;
        o2 = o0;
    }

    EncoderOutput out;
    Vec mean_t = mean_rows(t2);
    Vec mean_o = mean_rows(o2);
    out.h_cls = vec_tanh(vecmat(mean_t, params.at("enc.txt_pool")));
    out.h_img = vec_tanh(vecmat(mean_o, params.at("enc.vis_pool")));
    out.h_obj = o2;
    out.h_tok = Tensor2(s - 1, d);
    for (std::size_t i = 1; i < s; ++i) {
        auto src = t2.row(i);
        std::copy(src.begin(), src.end(),
                  out.h_tok.data.begin() + static_cast<std::ptrdiff_t>((i - 1) * d));
    }
    out.target_row = mode == EncodeMode::Oracle ? target_id : -1;

    if (cache) {
        cache->token_ids = tokens.ids;
        cache->feats = feats.rows;
        cache->t0 = std::move(t0);
        cache->o0 = std::move(o0);
        cache->qt = std::move(qt);
        cache->kv = std::move(kv);
        cache->vv = std::move(vv);
        cache->at = std::move(at);
        cache->qv = std::move(qv);
        cache->kt = std::move(kt);
        cache->vt = std::move(vt);
        cache->av = std::move(av);
        cache->t1 = std::move(t1);
        cache->o1 = std::move(o1);
        cache->zt = std::move(zt);
        cache->zo = std::move(zo);
        cache->t2 = std::move(t2);
        cache->o2 = std::move(o2);
        cache->mean_t = std::move(mean_t);
        cache->mean_o = std::move(mean_o);
        cache->h_cls = out.h_cls;
        cache->h_img = out.h_img;
    }
    return out;
}

void encode_backward(const EncoderCache& cache, const EncoderOutputGrads& gout,
                     const ParamSet& params, const EncoderDims& dims, GradSet& grads) {
    const std::size_t d = dims.hidden;
    const std::size_t s = cache.token_ids.size();
    const std::size_t n = cache.feats.rows;

    Tensor2 g_t2(s, d);
    Tensor2 g_o2(n, d);
    if (gout.g_tok.rows) {
        for (std::size_t i = 1; i < s; ++i) {
            auto dst = g_t2.row(i);
            auto src = gout.g_tok.row(i - 1);
            for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
        }
    }
    if (gout.g_obj.rows) add_inplace(g_o2, gout.g_obj);

    // Pooled heads: h = tanh(mean * W).
    if (!gout.g_cls.empty()) {
        Vec gu = vec_tanh_backward(cache.h_cls, gout.g_cls);
        add_outer(grads.at("enc.txt_pool"), cache.mean_t, gu);
        Vec gm = vecmat_nt(gu, params.at("enc.txt_pool"));
        const double inv = 1.0 / static_cast<double>(s);
        for (std::size_t i = 0; i < s; ++i) {
            auto dst = g_t2.row(i);
            for (std::size_t j = 0; j < d; ++j) dst[j] += gm[j] * inv;
        }
    }
    if (!gout.g_img.empty()) {
        Vec gu = vec_tanh_backward(cache.h_img, gout.g_img);
        add_outer(grads.at("enc.vis_pool"), cache.mean_o, gu);
        Vec gm = vecmat_nt(gu, params.at("enc.vis_pool"));
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto dst = g_o2.row(i);
            for (std::size_t j = 0; j < d; ++j) dst[j] += gm[j] * inv;
        }
    }

    Tensor2 g_t0(s, d);
    Tensor2 g_o0(n, d);
    if (dims.layers == 1) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(d));

        // Feed-forward residual: x2 = x1 + tanh(x1 * Wf).
        Tensor2 g_pre_t = tanh_backward(cache.zt, g_t2);
        add_inplace(grads.at("enc.txt_ff"), matmul_tn(cache.t1, g_pre_t));
        Tensor2 g_t1 = g_t2;
        add_inplace(g_t1, matmul_nt(g_pre_t, params.at("enc.txt_ff")));

        Tensor2 g_pre_o = tanh_backward(cache.zo, g_o2);
        add_inplace(grads.at("enc.vis_ff"), matmul_tn(cache.o1, g_pre_o));
        Tensor2 g_o1 = g_o2;
        add_inplace(g_o1, matmul_nt(g_pre_o, params.at("enc.vis_ff")));

        // Vision-queries attention: o1 = o0 + av * vt.
        add_inplace(g_o0, g_o1);
        Tensor2 g_av = matmul_nt(g_o1, cache.vt);
        Tensor2 g_vt = matmul_tn(cache.av, g_o1);
        add_inplace(grads.at("enc.vis_attn_v"), matmul_tn(cache.t0, g_vt));
        add_inplace(g_t0, matmul_nt(g_vt, params.at("enc.vis_attn_v")));
        Tensor2 g_sv = row_softmax_backward(cache.av, g_av);
        for (double& x : g_sv.data) x *= scale;
        Tensor2 g_qv = matmul(g_sv, cache.kt);
        Tensor2 g_kt = matmul_tn(g_sv, cache.qv);
        add_inplace(grads.at("enc.vis_attn_q"), matmul_tn(cache.o0, g_qv));
        add_inplace(g_o0, matmul_nt(g_qv, params.at("enc.vis_attn_q")));
        add_inplace(grads.at("enc.vis_attn_k"), matmul_tn(cache.t0, g_kt));
        add_inplace(g_t0, matmul_nt(g_kt, params.at("enc.vis_attn_k")));

        // Text-queries attention: t1 = t0 + at * vv.
        add_inplace(g_t0, g_t1);
        Tensor2 g_at = matmul_nt(g_t1, cache.vv);
        Tensor2 g_vv = matmul_tn(cache.at, g_t1);
        add_inplace(grads.at("enc.txt_attn_v"), matmul_tn(cache.o0, g_vv));
        add_inplace(g_o0, matmul_nt(g_vv, params.at("enc.txt_attn_v")));
        Tensor2 g_st = row_softmax_backward(cache.at, g_at);
        for (double& x : g_st.data) x *= scale;
        Tensor2 g_qt = matmul(g_st, cache.kv);
        Tensor2 g_kv = matmul_tn(g_st, cache.qt);
        add_inplace(grads.at("enc.txt_attn_q"), matmul_tn(cache.t0, g_qt));
        add_inplace(g_t0, matmul_nt(g_qt, params.at("enc.txt_attn_q")));
        add_inplace(grads.at("enc.txt_attn_k"), matmul_tn(cache.o0, g_kv));
        add_inplace(g_o0, matmul_nt(g_kv, params.at("enc.txt_attn_k")));
    } else {
        add_inplace(g_t0, g_t2);
        add_inplace(g_o0, g_o2);
    }

    add_inplace(grads.at("enc.vis_proj"), matmul_tn(cache.feats, g_o0));
    Tensor2& g_embed = grads.at("enc.tok_embed");
    for (std::size_t i = 0; i < s; ++i) {
        auto dst = g_embed.row(cache.token_ids[i]);
        auto src = g_t0.row(i);
        for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
}

}  // namespace gwlab
