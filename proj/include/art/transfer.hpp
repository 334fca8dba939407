#pragma once

#include <string>
#include <utility>
#include <vector>

#include "art/cells.hpp"

namespace art {

// a(q, s_j) = v_a^T tanh(W_a q + U_a s_j)
struct AttentionParams {
    NodeRef w_a;  // d_a x d
    NodeRef u_a;  // d_a x d
    NodeRef v_a;  // d_a
};

// u = sigmoid(W_u s_i + C_u pi)
struct ConcentrateParams {
    NodeRef w_u;  // d x d
    NodeRef c_u;  // d x d
};

// Gated fusion of the previous target state with transferred information:
//   r = sigmoid(W_r x + U_r prev + C_r psi)
//   z = sigmoid(W_z x + U_z prev + C_z psi)
//   psi~ = tanh(W_psi x + U_psi (r o prev) + C_psi psi)
//   out = (1 - z) o prev + z o psi~
struct FusionParams {
    NodeRef w_psi, u_psi, c_psi;
    NodeRef w_z, u_z, c_z;
    NodeRef w_r, u_r, c_r;
};

// Target cell parameters: the LSTM transform plus one fusion/attention/
// concentrate set per transferred stream (short-term h, long-term c).
// The pin_* flags are test hooks for the reduction identities.
struct ArtLstmParams {
    LstmParams target_lstm;
    FusionParams fuse_h, fuse_c;
    AttentionParams attn_h, attn_c;
    ConcentrateParams conc_h, conc_c;
    bool pin_update_gate_zero = false;  // z == 0: fuse passes prev through
    bool pin_concentrate_one = false;   // u == 1: psi is the corresponding state
};

enum class StreamKind { short_term, long_term };

enum class TransferMode { full_art, cct, lwt, lstm_only, lstm_union, lstm_source_only };

TransferMode transfer_mode_from_string(const std::string& name);
std::string transfer_mode_to_string(TransferMode mode);
// Modes whose target encoder consumes source states.
bool mode_uses_transfer(TransferMode mode);
// Modes that run a plain LSTM and differ only in training data.
bool mode_is_plain(TransferMode mode);

// Attention weights recorded during one directional pass; row i = target
// step, column j = source position, both in processing order.
struct AttentionTrace {
    enum class Direction { forward, backward };
    Tensor alpha_h;  // n x n_padded
    Tensor alpha_c;
    Direction direction = Direction::forward;
};

AttentionParams make_attention_params(ParamStore& store, const std::string& prefix, int hidden,
                                      int attn_dim, Rng& rng);
ConcentrateParams make_concentrate_params(ParamStore& store, const std::string& prefix, int hidden,
                                          Rng& rng);
FusionParams make_fusion_params(ParamStore& store, const std::string& prefix, int input, int hidden,
                                Rng& rng);
ArtLstmParams make_art_lstm_params(ParamStore& store, const std::string& prefix, int input,
                                   int hidden, int attn_dim, Rng& rng);

// Fills enc.keys_h / enc.keys_c with U_a h_j / U_a c_j. Key reuse makes the
// n^2 scoring an n^2 vector op instead of n^2 matvecs.
void precompute_keys(SourceEncoding& enc, const AttentionParams& h_params,
                     const AttentionParams& c_params);

// Softmax-normalized collocation intensities of `query` against the stream's
// source states. Pad positions get exactly zero weight.
NodeRef attention_weights(const NodeRef& query, const SourceEncoding& enc, StreamKind stream,
                          const AttentionParams& params);

// pi = sum_j alpha_j states[j]
NodeRef context(const NodeRef& alpha, const std::vector<NodeRef>& states);

// psi = (1 - u) o pi + u o s_corr, u = sigmoid(W_u s_corr + C_u pi)
std::pair<NodeRef, NodeRef> concentrate(const NodeRef& pi, const NodeRef& s_corr,
                                        const ConcentrateParams& params,
                                        bool pin_u_one = false);

NodeRef fuse(const NodeRef& x, const NodeRef& prev, const NodeRef& psi, const FusionParams& params,
             bool pin_z_zero = false);

struct ArtStepResult {
    NodeRef h;
    NodeRef c;
    NodeRef alpha_h;
    NodeRef alpha_c;
};

// One target cell: attend over both source streams, concentrate, fuse into
// the recurrent inputs, then the LSTM update.
ArtStepResult art_lstm_step(const NodeRef& x, const NodeRef& h_prev, const NodeRef& c_prev,
                            const SourceEncoding& enc, int position, const ArtLstmParams& params);

// Target-side encoder configured for one ablation mode.
struct TargetEncoder {
    TransferMode mode = TransferMode::full_art;
    ArtLstmParams fwd;
    ArtLstmParams bwd;

    // xs in sentence order; encodings built over the matching direction.
    // Output i is concat(forward state i, backward state i), width 2d.
    std::vector<NodeRef> encode(const std::vector<NodeRef>& xs, const SourceEncoding* enc_fwd,
                                const SourceEncoding* enc_bwd,
                                std::vector<AttentionTrace>* traces = nullptr) const;
};

// kind: full_art — attention + concentrate + fuse at every cell;
//       cct — corresponding-position transfer only;
//       lwt — plain cells except the last one of each direction;
//       lstm_only — plain LSTM, source unused.
TargetEncoder build_ablation(TransferMode kind, ArtLstmParams fwd, ArtLstmParams bwd,
                             bool per_token_head);

}  // namespace art
