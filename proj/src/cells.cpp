#include "art/cells.hpp"

#include "art/errors.hpp"

namespace art {

RnnParams make_rnn_params(ParamStore& store, const std::string& prefix, int input, int hidden,
                          Rng& rng) {
    RnnParams p;
    p.w_x = store.create(prefix + ".W_x", init_glorot(rng, hidden, input));
    p.w_h = store.create(prefix + ".W_h", init_glorot(rng, hidden, hidden));
    p.b = store.create(prefix + ".b", init_zeros(hidden));
    return p;
}

LstmParams make_lstm_params(ParamStore& store, const std::string& prefix, int input, int hidden,
                            Rng& rng) {
    LstmParams p;
    p.input = input;
    p.hidden = hidden;
    p.w = store.create(prefix + ".W", init_glorot(rng, 4 * hidden, input + hidden));
    Tensor bias = init_zeros(4 * hidden);
    // forget gate is the last block
    for (int i = 3 * hidden; i < 4 * hidden; ++i) bias.data[i] = 1.0;
    p.bias = store.create(prefix + ".bias", std::move(bias));
    return p;
}

NodeRef rnn_step(const NodeRef& h_prev, const NodeRef& x, const RnnParams& params) {
    return tanh_op(add(affine(x, params.w_x, params.b), matvec(params.w_h, h_prev)));
}

std::pair<NodeRef, NodeRef> lstm_step(const NodeRef& x, const NodeRef& h_prev,
                                      const NodeRef& c_prev, const LstmParams& params) {
    const int d = params.hidden;
    NodeRef z = affine(concat({x, h_prev}), params.w, params.bias);
    NodeRef c_tilde = tanh_op(slice(z, 0, d));
    NodeRef o = sigmoid(slice(z, d, d));
    NodeRef i = sigmoid(slice(z, 2 * d, d));
    NodeRef f = sigmoid(slice(z, 3 * d, d));
    NodeRef c = add(mul(c_tilde, i), mul(c_prev, f));
    NodeRef h = mul(o, tanh_op(c));
    return {h, c};
}

SourceEncoding encode_source(const std::vector<NodeRef>& xs, const LstmParams& params, NodeRef h0,
                             NodeRef c0, int pad_to) {
    if (xs.empty()) throw ContractViolation("encode_source: empty input sequence");
    const int d = params.hidden;
    NodeRef h = h0 ? h0 : make_constant(Tensor({d}));
    NodeRef c = c0 ? c0 : make_constant(Tensor({d}));
    SourceEncoding enc;
    enc.valid = static_cast<int>(xs.size());
    for (const auto& x : xs) {
        std::tie(h, c) = lstm_step(x, h, c, params);
        enc.h.push_back(h);
        enc.c.push_back(c);
    }
    for (int i = enc.valid; i < pad_to; ++i) {
        enc.h.push_back(make_constant(Tensor({d})));
        enc.c.push_back(make_constant(Tensor({d})));
    }
    return enc;
}

}  // namespace art
