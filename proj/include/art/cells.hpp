#pragma once

#include <utility>
#include <vector>

#include "art/ops.hpp"
#include "art/param_store.hpp"

namespace art {

// Elman cell: h = tanh(W_x x + W_h h_prev + b)
struct RnnParams {
    NodeRef w_x;  // d x d_in
    NodeRef w_h;  // d x d
    NodeRef b;    // d
};

// Stacked LSTM transform from [x; h_prev] to the four gate pre-activations,
// block order [c~; o; i; f].
struct LstmParams {
    NodeRef w;     // 4d x (d_in + d)
    NodeRef bias;  // 4d; forget block initialized to 1
    int input = 0;
    int hidden = 0;
};

// Per-position source states the target attends over. `keys_*` hold the
// precomputed key transforms (U_a h_j / U_a c_j), filled by the transfer
// module. Positions at index >= valid are padding: zero states, zero
// attention weight.
struct SourceEncoding {
    std::vector<NodeRef> h;
    std::vector<NodeRef> c;
    std::vector<NodeRef> keys_h;
    std::vector<NodeRef> keys_c;
    int valid = 0;

    int padded_size() const { return static_cast<int>(h.size()); }
};

RnnParams make_rnn_params(ParamStore& store, const std::string& prefix, int input, int hidden,
                          Rng& rng);
LstmParams make_lstm_params(ParamStore& store, const std::string& prefix, int input, int hidden,
                            Rng& rng);

NodeRef rnn_step(const NodeRef& h_prev, const NodeRef& x, const RnnParams& params);

std::pair<NodeRef, NodeRef> lstm_step(const NodeRef& x, const NodeRef& h_prev,
                                      const NodeRef& c_prev, const LstmParams& params);

// Runs the source LSTM over xs. Initial states default to zero. When
// pad_to > xs.size(), the encoding is extended with zero states so batch
// padding has somewhere to mask.
SourceEncoding encode_source(const std::vector<NodeRef>& xs, const LstmParams& params,
                             NodeRef h0 = nullptr, NodeRef c0 = nullptr, int pad_to = 0);

}  // namespace art
