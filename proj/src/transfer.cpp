#include "art/transfer.hpp"

#include "art/errors.hpp"

namespace art {

namespace {
constexpr double kScoreClip = 80.0;  // attention scores are clipped before exp
}

TransferMode transfer_mode_from_string(const std::string& name) {
    if (name == "full_art") return TransferMode::full_art;
    if (name == "cct") return TransferMode::cct;
    if (name == "lwt") return TransferMode::lwt;
    if (name == "lstm_only") return TransferMode::lstm_only;
    if (name == "lstm_union") return TransferMode::lstm_union;
    if (name == "lstm_source_only") return TransferMode::lstm_source_only;
    throw ConfigError("unknown mode '" + name +
                      "' (expected full_art, cct, lwt, lstm_only, lstm_union or "
                      "lstm_source_only)");
}

std::string transfer_mode_to_string(TransferMode mode) {
    switch (mode) {
        case TransferMode::full_art: return "full_art";
        case TransferMode::cct: return "cct";
        case TransferMode::lwt: return "lwt";
        case TransferMode::lstm_only: return "lstm_only";
        case TransferMode::lstm_union: return "lstm_union";
        case TransferMode::lstm_source_only: return "lstm_source_only";
    }
    return "?";
}

bool mode_uses_transfer(TransferMode mode) {
    return mode == TransferMode::full_art || mode == TransferMode::cct ||
           mode == TransferMode::lwt;
}

bool mode_is_plain(TransferMode mode) { return !mode_uses_transfer(mode); }

AttentionParams make_attention_params(ParamStore& store, const std::string& prefix, int hidden,
                                      int attn_dim, Rng& rng) {
    AttentionParams p;
    p.w_a = store.create(prefix + ".W_a", init_glorot(rng, attn_dim, hidden));
    p.u_a = store.create(prefix + ".U_a", init_glorot(rng, attn_dim, hidden));
    p.v_a = store.create(prefix + ".v_a", init_zeros(attn_dim));
    return p;
}

ConcentrateParams make_concentrate_params(ParamStore& store, const std::string& prefix, int hidden,
                                          Rng& rng) {
    ConcentrateParams p;
    p.w_u = store.create(prefix + ".W_u", init_glorot(rng, hidden, hidden));
    p.c_u = store.create(prefix + ".C_u", init_glorot(rng, hidden, hidden));
    return p;
}

FusionParams make_fusion_params(ParamStore& store, const std::string& prefix, int input, int hidden,
                                Rng& rng) {
    FusionParams p;
    p.w_psi = store.create(prefix + ".W_psi", init_glorot(rng, hidden, input));
    p.u_psi = store.create(prefix + ".U_psi", init_glorot(rng, hidden, hidden));
    p.c_psi = store.create(prefix + ".C_psi", init_glorot(rng, hidden, hidden));
    p.w_z = store.create(prefix + ".W_z", init_glorot(rng, hidden, input));
    p.u_z = store.create(prefix + ".U_z", init_glorot(rng, hidden, hidden));
    p.c_z = store.create(prefix + ".C_z", init_glorot(rng, hidden, hidden));
    p.w_r = store.create(prefix + ".W_r", init_glorot(rng, hidden, input));
    p.u_r = store.create(prefix + ".U_r", init_glorot(rng, hidden, hidden));
    p.c_r = store.create(prefix + ".C_r", init_glorot(rng, hidden, hidden));
    return p;
}

ArtLstmParams make_art_lstm_params(ParamStore& store, const std::string& prefix, int input,
                                   int hidden, int attn_dim, Rng& rng) {
    ArtLstmParams p;
    p.target_lstm = make_lstm_params(store, prefix + ".lstm", input, hidden, rng);
    p.fuse_h = make_fusion_params(store, prefix + ".fuse_h", input, hidden, rng);
    p.fuse_c = make_fusion_params(store, prefix + ".fuse_c", input, hidden, rng);
    p.attn_h = make_attention_params(store, prefix + ".attn_h", hidden, attn_dim, rng);
    p.attn_c = make_attention_params(store, prefix + ".attn_c", hidden, attn_dim, rng);
    p.conc_h = make_concentrate_params(store, prefix + ".conc_h", hidden, rng);
    p.conc_c = make_concentrate_params(store, prefix + ".conc_c", hidden, rng);
    return p;
}

void precompute_keys(SourceEncoding& enc, const AttentionParams& h_params,
                     const AttentionParams& c_params) {
    enc.keys_h.clear();
    enc.keys_c.clear();
    for (int j = 0; j < enc.padded_size(); ++j) {
        enc.keys_h.push_back(matvec(h_params.u_a, enc.h[j]));
        enc.keys_c.push_back(matvec(c_params.u_a, enc.c[j]));
    }
}

NodeRef attention_weights(const NodeRef& query, const SourceEncoding& enc, StreamKind stream,
                          const AttentionParams& params) {
    const auto& keys = stream == StreamKind::short_term ? enc.keys_h : enc.keys_c;
    if (keys.size() != enc.h.size())
        throw ContractViolation("attention_weights: keys not precomputed for this stream");
    NodeRef wq = matvec(params.w_a, query);
    std::vector<NodeRef> scores;
    scores.reserve(keys.size());
    for (int j = 0; j < enc.valid; ++j)
        scores.push_back(dot(params.v_a, tanh_op(add(wq, keys[j]))));
    // pad positions never enter the softmax
    for (int j = enc.valid; j < enc.padded_size(); ++j)
        scores.push_back(make_constant(Tensor::scalar(0.0)));
    return softmax_masked(clamp(stack_scalars(scores), -kScoreClip, kScoreClip), enc.valid);
}

NodeRef context(const NodeRef& alpha, const std::vector<NodeRef>& states) {
    return weighted_sum(alpha, states);
}

std::pair<NodeRef, NodeRef> concentrate(const NodeRef& pi, const NodeRef& s_corr,
                                        const ConcentrateParams& params, bool pin_u_one) {
    if (pin_u_one) {
        NodeRef ones = make_constant([&] {
            Tensor t(pi->value.shape);
            t.fill(1.0);
            return t;
        }());
        return {s_corr, ones};
    }
    require_same_shape(pi->value, s_corr->value, "concentrate");
    NodeRef u = sigmoid(add(matvec(params.w_u, s_corr), matvec(params.c_u, pi)));
    NodeRef psi = add(mul(axpb(u, -1.0, 1.0), pi), mul(u, s_corr));
    return {psi, u};
}

NodeRef fuse(const NodeRef& x, const NodeRef& prev, const NodeRef& psi, const FusionParams& params,
             bool pin_z_zero) {
    if (pin_z_zero) return prev;  // (1 - 0) o prev + 0 o psi~
    NodeRef r = sigmoid(
        add(add(matvec(params.w_r, x), matvec(params.u_r, prev)), matvec(params.c_r, psi)));
    NodeRef z = sigmoid(
        add(add(matvec(params.w_z, x), matvec(params.u_z, prev)), matvec(params.c_z, psi)));
    NodeRef psi_tilde = tanh_op(add(add(matvec(params.w_psi, x), matvec(params.u_psi, mul(r, prev))),
                                    matvec(params.c_psi, psi)));
    return add(mul(axpb(z, -1.0, 1.0), prev), mul(z, psi_tilde));
}

ArtStepResult art_lstm_step(const NodeRef& x, const NodeRef& h_prev, const NodeRef& c_prev,
                            const SourceEncoding& enc, int position, const ArtLstmParams& params) {
    if (position < 0 || position >= enc.valid)
        throw ContractViolation("art_lstm_step: position " + std::to_string(position) +
                                " out of range for " + std::to_string(enc.valid) + " states");
    ArtStepResult out;
    out.alpha_h = attention_weights(h_prev, enc, StreamKind::short_term, params.attn_h);
    NodeRef pi_h = context(out.alpha_h, enc.h);
    NodeRef psi_h = concentrate(pi_h, enc.h[position], params.conc_h, params.pin_concentrate_one)
                        .first;
    NodeRef fused_h = fuse(x, h_prev, psi_h, params.fuse_h, params.pin_update_gate_zero);

    out.alpha_c = attention_weights(c_prev, enc, StreamKind::long_term, params.attn_c);
    NodeRef pi_c = context(out.alpha_c, enc.c);
    NodeRef psi_c = concentrate(pi_c, enc.c[position], params.conc_c, params.pin_concentrate_one)
                        .first;
    NodeRef fused_c = fuse(x, c_prev, psi_c, params.fuse_c, params.pin_update_gate_zero);

    const int d = params.target_lstm.hidden;
    NodeRef z = affine(concat({x, fused_h}), params.target_lstm.w, params.target_lstm.bias);
    NodeRef c_tilde = tanh_op(slice(z, 0, d));
    NodeRef o = sigmoid(slice(z, d, d));
    NodeRef i = sigmoid(slice(z, 2 * d, d));
    NodeRef f = sigmoid(slice(z, 3 * d, d));
    out.c = add(mul(c_tilde, i), mul(fused_c, f));
    out.h = mul(o, tanh_op(out.c));
    return out;
}

namespace {

// CCT: the transferred information is the corresponding position's state,
// no attention and no concentrate gate; fusion still applies.
std::pair<NodeRef, NodeRef> cct_step(const NodeRef& x, const NodeRef& h_prev,
                                     const NodeRef& c_prev, const SourceEncoding& enc,
                                     int position, const ArtLstmParams& params) {
    NodeRef fused_h = fuse(x, h_prev, enc.h[position], params.fuse_h, params.pin_update_gate_zero);
    NodeRef fused_c = fuse(x, c_prev, enc.c[position], params.fuse_c, params.pin_update_gate_zero);
    const int d = params.target_lstm.hidden;
    NodeRef z = affine(concat({x, fused_h}), params.target_lstm.w, params.target_lstm.bias);
    NodeRef c_tilde = tanh_op(slice(z, 0, d));
    NodeRef o = sigmoid(slice(z, d, d));
    NodeRef i = sigmoid(slice(z, 2 * d, d));
    NodeRef f = sigmoid(slice(z, 3 * d, d));
    NodeRef c = add(mul(c_tilde, i), mul(fused_c, f));
    NodeRef h = mul(o, tanh_op(c));
    return {h, c};
}

std::vector<NodeRef> encode_direction(const std::vector<NodeRef>& xs, const SourceEncoding* enc,
                                      const ArtLstmParams& params, TransferMode mode,
                                      AttentionTrace* trace) {
    const int n = static_cast<int>(xs.size());
    const int d = params.target_lstm.hidden;
    NodeRef h = make_constant(Tensor({d}));
    NodeRef c = make_constant(Tensor({d}));
    std::vector<NodeRef> states;
    states.reserve(xs.size());

    const int n_padded = enc ? enc->padded_size() : n;
    if (trace) {
        trace->alpha_h = Tensor({n, n_padded});
        trace->alpha_c = Tensor({n, n_padded});
    }

    for (int t = 0; t < n; ++t) {
        switch (mode) {
            case TransferMode::full_art: {
                ArtStepResult r = art_lstm_step(xs[t], h, c, *enc, t, params);
                h = r.h;
                c = r.c;
                if (trace) {
                    for (int j = 0; j < n_padded; ++j) {
                        trace->alpha_h.at(t, j) = r.alpha_h->value.data[j];
                        trace->alpha_c.at(t, j) = r.alpha_c->value.data[j];
                    }
                }
                break;
            }
            case TransferMode::cct:
                std::tie(h, c) = cct_step(xs[t], h, c, *enc, t, params);
                break;
            case TransferMode::lwt:
                if (t == n - 1) {
                    ArtStepResult r = art_lstm_step(xs[t], h, c, *enc, t, params);
                    h = r.h;
                    c = r.c;
                } else {
                    std::tie(h, c) = lstm_step(xs[t], h, c, params.target_lstm);
                }
                break;
            default:
                std::tie(h, c) = lstm_step(xs[t], h, c, params.target_lstm);
                break;
        }
        states.push_back(h);
    }
    return states;
}

}  // namespace

std::vector<NodeRef> TargetEncoder::encode(const std::vector<NodeRef>& xs,
                                           const SourceEncoding* enc_fwd,
                                           const SourceEncoding* enc_bwd,
                                           std::vector<AttentionTrace>* traces) const {
    if (xs.empty()) throw ContractViolation("TargetEncoder::encode: empty input");
    const int n = static_cast<int>(xs.size());
    if (mode_uses_transfer(mode)) {
        if (!enc_fwd || !enc_bwd)
            throw ContractViolation("TargetEncoder::encode: mode needs source encodings");
        if (enc_fwd->valid != n || enc_bwd->valid != n)
            throw ShapeError("TargetEncoder::encode: " + std::to_string(n) + " inputs vs " +
                             std::to_string(enc_fwd->valid) + "/" +
                             std::to_string(enc_bwd->valid) + " source states");
    }

    const bool record = traces && mode == TransferMode::full_art;
    AttentionTrace tr_fwd, tr_bwd;
    tr_fwd.direction = AttentionTrace::Direction::forward;
    tr_bwd.direction = AttentionTrace::Direction::backward;

    std::vector<NodeRef> fwd_states =
        encode_direction(xs, enc_fwd, fwd, mode, record ? &tr_fwd : nullptr);

    std::vector<NodeRef> xs_rev(xs.rbegin(), xs.rend());
    std::vector<NodeRef> bwd_states_rev =
        encode_direction(xs_rev, enc_bwd, bwd, mode, record ? &tr_bwd : nullptr);

    if (record) {
        traces->push_back(std::move(tr_fwd));
        traces->push_back(std::move(tr_bwd));
    }

    std::vector<NodeRef> out;
    out.reserve(xs.size());
    for (int i = 0; i < n; ++i)
        out.push_back(concat({fwd_states[i], bwd_states_rev[n - 1 - i]}));
    return out;
}

TargetEncoder build_ablation(TransferMode kind, ArtLstmParams fwd, ArtLstmParams bwd,
                             bool per_token_head) {
    if (kind == TransferMode::lwt && per_token_head)
        throw ConfigError("mode lwt only supports sentence classification");
    TargetEncoder enc;
    enc.mode = kind;
    enc.fwd = std::move(fwd);
    enc.bwd = std::move(bwd);
    return enc;
}

}  // namespace art
