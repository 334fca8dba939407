#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "art/errors.hpp"
#include "art/transfer.hpp"

using namespace art;

namespace {

NodeRef zeros(std::vector<int> shape) { return make_leaf(Tensor(std::move(shape)), true); }

NodeRef rand_leaf(Rng& rng, std::vector<int> shape, double scale = 1.0) {
    Tensor t(std::move(shape));
    for (auto& v : t.data) v = scale * rng.uniform(-1.0, 1.0);
    return make_leaf(std::move(t), true);
}

AttentionParams rand_attention(Rng& rng, int d, int da) {
    return {rand_leaf(rng, {da, d}), rand_leaf(rng, {da, d}), rand_leaf(rng, {da})};
}

ConcentrateParams rand_concentrate(Rng& rng, int d) {
    return {rand_leaf(rng, {d, d}), rand_leaf(rng, {d, d})};
}

FusionParams rand_fusion(Rng& rng, int din, int d) {
    FusionParams p;
    p.w_psi = rand_leaf(rng, {d, din});
    p.u_psi = rand_leaf(rng, {d, d});
    p.c_psi = rand_leaf(rng, {d, d});
    p.w_z = rand_leaf(rng, {d, din});
    p.u_z = rand_leaf(rng, {d, d});
    p.c_z = rand_leaf(rng, {d, d});
    p.w_r = rand_leaf(rng, {d, din});
    p.u_r = rand_leaf(rng, {d, d});
    p.c_r = rand_leaf(rng, {d, d});
    return p;
}

LstmParams rand_lstm(Rng& rng, int din, int d) {
    LstmParams p;
    p.input = din;
    p.hidden = d;
    p.w = rand_leaf(rng, {4 * d, din + d});
    p.bias = rand_leaf(rng, {4 * d});
    return p;
}

ArtLstmParams rand_art(Rng& rng, int din, int d, int da) {
    ArtLstmParams p;
    p.target_lstm = rand_lstm(rng, din, d);
    p.fuse_h = rand_fusion(rng, din, d);
    p.fuse_c = rand_fusion(rng, din, d);
    p.attn_h = rand_attention(rng, d, da);
    p.attn_c = rand_attention(rng, d, da);
    p.conc_h = rand_concentrate(rng, d);
    p.conc_c = rand_concentrate(rng, d);
    return p;
}

SourceEncoding rand_encoding(Rng& rng, int n, int d, const ArtLstmParams& p, int pad_to = 0) {
    SourceEncoding enc;
    for (int j = 0; j < n; ++j) {
        enc.h.push_back(rand_leaf(rng, {d}));
        enc.c.push_back(rand_leaf(rng, {d}));
    }
    enc.valid = n;
    for (int j = n; j < pad_to; ++j) {
        enc.h.push_back(make_constant(Tensor({d})));
        enc.c.push_back(make_constant(Tensor({d})));
    }
    precompute_keys(enc, p.attn_h, p.attn_c);
    return enc;
}

}  // namespace

TEST_CASE("zero scoring vector gives uniform attention") {
    Rng rng(3);
    const int d = 3, n = 4;
    ArtLstmParams p = rand_art(rng, d, d, d);
    for (auto& v : p.attn_h.v_a->value.data) v = 0.0;
    SourceEncoding enc = rand_encoding(rng, n, d, p);
    NodeRef alpha = attention_weights(rand_leaf(rng, {d}), enc, StreamKind::short_term, p.attn_h);
    for (double a : alpha->value.data) CHECK(a == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("singleton attention is exactly one") {
    Rng rng(5);
    const int d = 2;
    ArtLstmParams p = rand_art(rng, d, d, d);
    SourceEncoding enc = rand_encoding(rng, 1, d, p);
    NodeRef alpha = attention_weights(rand_leaf(rng, {d}), enc, StreamKind::short_term, p.attn_h);
    CHECK(alpha->value.data[0] == 1.0);
}

TEST_CASE("cached keys match uncached scoring") {
    Rng rng(7);
    const int d = 3, da = 4, n = 3;
    ArtLstmParams p = rand_art(rng, d, d, da);
    SourceEncoding enc = rand_encoding(rng, n, d, p);
    NodeRef q = rand_leaf(rng, {d});
    NodeRef alpha = attention_weights(q, enc, StreamKind::short_term, p.attn_h);

    // oracle: score each position from scratch, no key reuse
    std::vector<double> scores(n);
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int a = 0; a < da; ++a) {
            double pre = 0.0;
            for (int k = 0; k < d; ++k) {
                pre += p.attn_h.w_a->value.at(a, k) * q->value.data[k];
                pre += p.attn_h.u_a->value.at(a, k) * enc.h[j]->value.data[k];
            }
            s += p.attn_h.v_a->value.data[a] * std::tanh(pre);
        }
        scores[j] = s;
    }
    double m = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double s : scores) z += std::exp(s - m);
    for (int j = 0; j < n; ++j)
        CHECK(std::fabs(alpha->value.data[j] - std::exp(scores[j] - m) / z) < 1e-12);
}

TEST_CASE("attention rows are a distribution and pads get exactly zero") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(seed);
        const int d = 1 + rng.uniform_int(4);
        const int n = 1 + rng.uniform_int(5);
        const int pad_to = n + rng.uniform_int(3);
        ArtLstmParams p = rand_art(rng, d, d, d);
        SourceEncoding enc = rand_encoding(rng, n, d, p, pad_to);
        NodeRef alpha =
            attention_weights(rand_leaf(rng, {d}), enc, StreamKind::short_term, p.attn_h);
        REQUIRE(static_cast<int>(alpha->size()) == enc.padded_size());
        double total = 0.0;
        for (int j = 0; j < enc.padded_size(); ++j) {
            const double a = alpha->value.data[j];
            CHECK(a >= 0.0);
            if (j >= n) CHECK(a == 0.0);
            total += a;
        }
        CHECK(std::fabs(total - 1.0) < 1e-9);
    }
}

TEST_CASE("attention requires precomputed keys") {
    Rng rng(11);
    const int d = 2;
    ArtLstmParams p = rand_art(rng, d, d, d);
    SourceEncoding enc;
    enc.h.push_back(rand_leaf(rng, {d}));
    enc.c.push_back(rand_leaf(rng, {d}));
    enc.valid = 1;
    CHECK_THROWS_AS(attention_weights(rand_leaf(rng, {d}), enc, StreamKind::short_term, p.attn_h),
                    ContractViolation);
}

TEST_CASE("context with one-hot weights selects the state") {
    Rng rng(13);
    std::vector<NodeRef> states = {rand_leaf(rng, {3}), rand_leaf(rng, {3}), rand_leaf(rng, {3})};
    NodeRef alpha = make_constant(Tensor::vector({0.0, 1.0, 0.0}));
    NodeRef pi = context(alpha, states);
    CHECK(pi->value.data == states[1]->value.data);
}

TEST_CASE("context of opposite states under uniform weights cancels") {
    Rng rng(17);
    NodeRef s = rand_leaf(rng, {4});
    NodeRef neg = make_leaf([&] {
        Tensor t = s->value;
        for (auto& v : t.data) v = -v;
        return t;
    }(), true);
    NodeRef alpha = make_constant(Tensor::vector({0.5, 0.5}));
    NodeRef pi = context(alpha, {s, neg});
    for (double v : pi->value.data) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("context matches the naive loop") {
    Rng rng(19);
    const int n = 4, d = 3;
    std::vector<NodeRef> states;
    for (int j = 0; j < n; ++j) states.push_back(rand_leaf(rng, {d}));
    NodeRef alpha = rand_leaf(rng, {n});
    NodeRef pi = context(alpha, states);
    for (int k = 0; k < d; ++k) {
        double expect = 0.0;
        for (int j = 0; j < n; ++j) expect += alpha->value.data[j] * states[j]->value.data[k];
        CHECK(pi->value.data[k] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("context is covariant under joint permutation") {
    Rng rng(23);
    const int n = 5, d = 3;
    std::vector<NodeRef> states;
    std::vector<double> weights;
    for (int j = 0; j < n; ++j) {
        states.push_back(rand_leaf(rng, {d}));
        weights.push_back(rng.uniform());
    }
    NodeRef alpha = make_constant(Tensor::vector(weights));
    NodeRef pi = context(alpha, states);

    std::vector<int> perm = {3, 0, 4, 1, 2};
    std::vector<NodeRef> pstates;
    std::vector<double> pweights;
    for (int j : perm) {
        pstates.push_back(states[static_cast<std::size_t>(j)]);
        pweights.push_back(weights[static_cast<std::size_t>(j)]);
    }
    NodeRef ppi = context(make_constant(Tensor::vector(pweights)), pstates);
    for (int k = 0; k < d; ++k)
        CHECK(std::fabs(pi->value.data[k] - ppi->value.data[k]) < 1e-12);
}

TEST_CASE("concentrate zero-weight arithmetic") {
    const int d = 3;
    ConcentrateParams p{zeros({d, d}), zeros({d, d})};
    Rng rng(29);
    NodeRef pi = rand_leaf(rng, {d}), s = rand_leaf(rng, {d});
    auto [psi, u] = concentrate(pi, s, p);
    for (int k = 0; k < d; ++k) {
        CHECK(u->value.data[k] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(psi->value.data[k] ==
              doctest::Approx(0.5 * pi->value.data[k] + 0.5 * s->value.data[k]).epsilon(1e-12));
    }
}

TEST_CASE("concentrate collapses when context equals the corresponding state") {
    Rng rng(31);
    const int d = 4;
    ConcentrateParams p = rand_concentrate(rng, d);
    NodeRef pi = rand_leaf(rng, {d});
    auto [psi, u] = concentrate(pi, pi, p);
    for (int k = 0; k < d; ++k)
        CHECK(psi->value.data[k] == doctest::Approx(pi->value.data[k]).epsilon(1e-12));
}

TEST_CASE("fuse pinned update gate passes the previous state through") {
    Rng rng(37);
    const int d = 3;
    FusionParams p = rand_fusion(rng, d, d);
    NodeRef x = rand_leaf(rng, {d}), prev = rand_leaf(rng, {d}), psi = rand_leaf(rng, {d});
    NodeRef out = fuse(x, prev, psi, p, true);
    CHECK(out.get() == prev.get());
}

TEST_CASE("fuse zero-parameter arithmetic") {
    const int d = 2;
    FusionParams p;
    p.w_psi = zeros({d, d});
    p.u_psi = zeros({d, d});
    p.c_psi = zeros({d, d});
    p.w_z = zeros({d, d});
    p.u_z = zeros({d, d});
    p.c_z = zeros({d, d});
    p.w_r = zeros({d, d});
    p.u_r = zeros({d, d});
    p.c_r = zeros({d, d});
    Rng rng(41);
    NodeRef x = rand_leaf(rng, {d}), prev = rand_leaf(rng, {d}), psi = rand_leaf(rng, {d});
    NodeRef out = fuse(x, prev, psi, p);
    // z = r = 0.5, psi~ = 0: out = 0.5 prev
    for (int k = 0; k < d; ++k)
        CHECK(out->value.data[k] == doctest::Approx(0.5 * prev->value.data[k]).epsilon(1e-12));
}

TEST_CASE("art step reduces to the plain lstm when both gates are pinned") {
    Rng rng(43);
    const int d = 3, n = 4;
    ArtLstmParams p = rand_art(rng, d, d, d);
    p.pin_update_gate_zero = true;
    SourceEncoding enc = rand_encoding(rng, n, d, p);
    NodeRef x = rand_leaf(rng, {d}), h = rand_leaf(rng, {d}), c = rand_leaf(rng, {d});

    ArtStepResult r = art_lstm_step(x, h, c, enc, 2, p);
    auto [h_plain, c_plain] = lstm_step(x, h, c, p.target_lstm);
    CHECK(r.h->value.data == h_plain->value.data);  // bit-identical
    CHECK(r.c->value.data == c_plain->value.data);
}

TEST_CASE("art step with a single source position") {
    Rng rng(47);
    const int d = 3;
    ArtLstmParams p = rand_art(rng, d, d, d);
    SourceEncoding enc = rand_encoding(rng, 1, d, p);
    ArtStepResult r = art_lstm_step(rand_leaf(rng, {d}), rand_leaf(rng, {d}), rand_leaf(rng, {d}),
                                    enc, 0, p);
    CHECK(r.alpha_h->value.data[0] == 1.0);
    CHECK(r.alpha_c->value.data[0] == 1.0);
}

TEST_CASE("art step rejects out-of-range positions") {
    Rng rng(53);
    const int d = 2;
    ArtLstmParams p = rand_art(rng, d, d, d);
    SourceEncoding enc = rand_encoding(rng, 2, d, p);
    NodeRef x = rand_leaf(rng, {d}), h = rand_leaf(rng, {d}), c = rand_leaf(rng, {d});
    CHECK_THROWS_AS(art_lstm_step(x, h, c, enc, 2, p), ContractViolation);
    CHECK_THROWS_AS(art_lstm_step(x, h, c, enc, -1, p), ContractViolation);
}

TEST_CASE("full art gradient check through one step") {
    Rng rng(59);
    const int d = 3, n = 4;
    ArtLstmParams p = rand_art(rng, d, d, d);
    std::vector<NodeRef> hs, cs;
    for (int j = 0; j < n; ++j) {
        hs.push_back(rand_leaf(rng, {d}));
        cs.push_back(rand_leaf(rng, {d}));
    }
    NodeRef x = rand_leaf(rng, {d}), h = rand_leaf(rng, {d}), c = rand_leaf(rng, {d});
    std::vector<NodeRef> inputs = {x,          h,          c,          p.target_lstm.w,
                                   p.target_lstm.bias,     p.fuse_h.w_psi, p.fuse_h.c_z,
                                   p.attn_h.w_a,           p.attn_h.u_a,   p.attn_h.v_a,
                                   p.conc_h.w_u,           p.conc_c.c_u,   p.fuse_c.u_r};
    inputs.insert(inputs.end(), hs.begin(), hs.end());
    const double err = grad_check(
        [&] {
            SourceEncoding enc;
            enc.h = hs;
            enc.c = cs;
            enc.valid = n;
            precompute_keys(enc, p.attn_h, p.attn_c);
            ArtStepResult r = art_lstm_step(x, h, c, enc, 1, p);
            return add(sum(r.h), sum(r.c));
        },
        inputs);
    CHECK(err < 1e-4);
}

namespace {

struct TinySetup {
    LstmParams src;
    ArtLstmParams fwd, bwd;
    std::vector<NodeRef> xs;
    int d = 3;

    explicit TinySetup(std::uint64_t seed, int n = 4) {
        Rng rng(seed);
        src = rand_lstm(rng, d, d);
        fwd = rand_art(rng, d, d, d);
        bwd = rand_art(rng, d, d, d);
        for (int i = 0; i < n; ++i) xs.push_back(rand_leaf(rng, {d}));
    }

    std::pair<SourceEncoding, SourceEncoding> encode(const TargetEncoder& enc_cfg) const {
        SourceEncoding f = encode_source(xs, src);
        std::vector<NodeRef> rev(xs.rbegin(), xs.rend());
        SourceEncoding b = encode_source(rev, src);
        if (enc_cfg.mode == TransferMode::full_art || enc_cfg.mode == TransferMode::lwt) {
            precompute_keys(f, enc_cfg.fwd.attn_h, enc_cfg.fwd.attn_c);
            precompute_keys(b, enc_cfg.bwd.attn_h, enc_cfg.bwd.attn_c);
        }
        return {f, b};
    }

    std::vector<NodeRef> run(TransferMode mode, bool pin_z = false, bool pin_u = false,
                             std::vector<AttentionTrace>* traces = nullptr) const {
        TargetEncoder enc_cfg = build_ablation(mode, fwd, bwd, false);
        enc_cfg.fwd.pin_update_gate_zero = pin_z;
        enc_cfg.bwd.pin_update_gate_zero = pin_z;
        enc_cfg.fwd.pin_concentrate_one = pin_u;
        enc_cfg.bwd.pin_concentrate_one = pin_u;
        auto [f, b] = encode(enc_cfg);
        if (mode_uses_transfer(mode)) return enc_cfg.encode(xs, &f, &b, traces);
        return enc_cfg.encode(xs, nullptr, nullptr, traces);
    }
};

}  // namespace

TEST_CASE("bidirectional output has width 2d and n=1 works") {
    TinySetup setup(61, 1);
    auto out = setup.run(TransferMode::full_art);
    REQUIRE(out.size() == 1);
    CHECK(static_cast<int>(out[0]->size()) == 2 * setup.d);
}

TEST_CASE("palindromic input with tied directions is its own half-swapped reversal") {
    Rng rng(67);
    const int d = 3, n = 5;
    LstmParams src = rand_lstm(rng, d, d);
    ArtLstmParams tied = rand_art(rng, d, d, d);

    // palindrome: x0 x1 x2 x1 x0 (shared nodes make it exact)
    std::vector<NodeRef> xs = {rand_leaf(rng, {d}), rand_leaf(rng, {d}), rand_leaf(rng, {d})};
    xs.push_back(xs[1]);
    xs.push_back(xs[0]);

    TargetEncoder enc_cfg = build_ablation(TransferMode::full_art, tied, tied, false);
    SourceEncoding f = encode_source(xs, src);
    std::vector<NodeRef> rev(xs.rbegin(), xs.rend());
    SourceEncoding b = encode_source(rev, src);
    precompute_keys(f, tied.attn_h, tied.attn_c);
    precompute_keys(b, tied.attn_h, tied.attn_c);
    auto out = enc_cfg.encode(xs, &f, &b, nullptr);

    for (int i = 0; i < n; ++i) {
        const auto& a = out[static_cast<std::size_t>(i)]->value.data;
        const auto& z = out[static_cast<std::size_t>(n - 1 - i)]->value.data;
        for (int k = 0; k < d; ++k) {
            CHECK(a[static_cast<std::size_t>(k)] == z[static_cast<std::size_t>(d + k)]);
            CHECK(a[static_cast<std::size_t>(d + k)] == z[static_cast<std::size_t>(k)]);
        }
    }
}

TEST_CASE("encoder forward pass is reproducible bit-exactly") {
    TinySetup setup(71);
    auto out1 = setup.run(TransferMode::full_art);
    auto out2 = setup.run(TransferMode::full_art);
    REQUIRE(out1.size() == out2.size());
    for (std::size_t i = 0; i < out1.size(); ++i)
        CHECK(out1[i]->value.data == out2[i]->value.data);
}

TEST_CASE("pinning the concentrate gate reproduces cct exactly") {
    TinySetup setup(73);
    auto cct = setup.run(TransferMode::cct);
    auto pinned = setup.run(TransferMode::full_art, false, true);
    REQUIRE(cct.size() == pinned.size());
    for (std::size_t i = 0; i < cct.size(); ++i)
        CHECK(cct[i]->value.data == pinned[i]->value.data);  // bit-identical
}

TEST_CASE("pinning the update gate reproduces the plain lstm exactly") {
    TinySetup setup(79);
    auto plain = setup.run(TransferMode::lstm_only);
    auto pinned = setup.run(TransferMode::full_art, true, false);
    REQUIRE(plain.size() == pinned.size());
    for (std::size_t i = 0; i < plain.size(); ++i)
        CHECK(plain[i]->value.data == pinned[i]->value.data);  // bit-identical
}

TEST_CASE("lstm_only ignores the source parameters entirely") {
    TinySetup setup(83);
    auto before = setup.run(TransferMode::lstm_only);
    for (auto& v : setup.src.w->value.data) v += 3.17;  // arbitrary perturbation
    for (auto& v : setup.src.bias->value.data) v -= 1.23;
    auto after = setup.run(TransferMode::lstm_only);
    for (std::size_t i = 0; i < before.size(); ++i)
        CHECK(before[i]->value.data == after[i]->value.data);
}

TEST_CASE("lwt runs plain cells everywhere except the last one") {
    TinySetup setup(89);
    auto plain = setup.run(TransferMode::lstm_only);
    auto lwt = setup.run(TransferMode::lwt);
    const int n = static_cast<int>(plain.size());
    const int d = setup.d;
    // forward half: positions 0..n-2 match the plain encoder, the last differs
    for (int i = 0; i < n - 1; ++i) {
        for (int k = 0; k < d; ++k)
            CHECK(lwt[static_cast<std::size_t>(i)]->value.data[static_cast<std::size_t>(k)] ==
                  plain[static_cast<std::size_t>(i)]->value.data[static_cast<std::size_t>(k)]);
    }
    bool last_differs = false;
    for (int k = 0; k < d; ++k)
        last_differs = last_differs ||
                       lwt[static_cast<std::size_t>(n - 1)]->value.data[static_cast<std::size_t>(k)] !=
                           plain[static_cast<std::size_t>(n - 1)]->value.data[static_cast<std::size_t>(k)];
    CHECK(last_differs);
    // backward half: its last processed cell is position 0 in sentence order
    bool back_differs = false;
    for (int k = 0; k < d; ++k)
        back_differs = back_differs ||
                       lwt[0]->value.data[static_cast<std::size_t>(d + k)] !=
                           plain[0]->value.data[static_cast<std::size_t>(d + k)];
    CHECK(back_differs);
}

TEST_CASE("lwt is rejected for per-token heads") {
    TinySetup setup(97);
    CHECK_THROWS_AS(build_ablation(TransferMode::lwt, setup.fwd, setup.bwd, true), ConfigError);
}

TEST_CASE("full art and cct differ when the informative position is elsewhere") {
    TinySetup setup(101);
    auto full = setup.run(TransferMode::full_art);
    auto cct = setup.run(TransferMode::cct);
    bool any_differs = false;
    for (std::size_t i = 0; i < full.size(); ++i)
        any_differs = any_differs || full[i]->value.data != cct[i]->value.data;
    CHECK(any_differs);
}

TEST_CASE("traces are recorded per direction with distribution rows") {
    TinySetup setup(103);
    std::vector<AttentionTrace> traces;
    auto out = setup.run(TransferMode::full_art, false, false, &traces);
    REQUIRE(traces.size() == 2);
    CHECK(traces[0].direction == AttentionTrace::Direction::forward);
    CHECK(traces[1].direction == AttentionTrace::Direction::backward);
    for (const auto& trace : traces) {
        for (const Tensor* alpha : {&trace.alpha_h, &trace.alpha_c}) {
            REQUIRE(alpha->rows() == 4);
            for (int i = 0; i < alpha->rows(); ++i) {
                double total = 0.0;
                for (int j = 0; j < alpha->cols(); ++j) {
                    CHECK(alpha->at(i, j) >= 0.0);
                    total += alpha->at(i, j);
                }
                CHECK(std::fabs(total - 1.0) < 1e-9);
            }
        }
    }
}

TEST_CASE("end-to-end gradients through a two-sentence batch") {
    Rng rng(107);
    const int d = 3, da = 3;
    LstmParams src = rand_lstm(rng, d, d);
    ArtLstmParams fwd = rand_art(rng, d, d, da);
    ArtLstmParams bwd = rand_art(rng, d, d, da);
    NodeRef w_y = rand_leaf(rng, {1, 2 * d});
    NodeRef b_y = rand_leaf(rng, {1});

    std::vector<std::vector<NodeRef>> sentences;
    for (int s = 0; s < 2; ++s) {
        std::vector<NodeRef> xs;
        for (int i = 0; i < 3 + s; ++i) xs.push_back(rand_leaf(rng, {d}));
        sentences.push_back(xs);
    }

    auto build = [&]() -> NodeRef {
        NodeRef total;
        TargetEncoder enc_cfg = build_ablation(TransferMode::full_art, fwd, bwd, false);
        for (const auto& xs : sentences) {
            SourceEncoding f = encode_source(xs, src);
            std::vector<NodeRef> rev(xs.rbegin(), xs.rend());
            SourceEncoding b = encode_source(rev, src);
            precompute_keys(f, fwd.attn_h, fwd.attn_c);
            precompute_keys(b, bwd.attn_h, bwd.attn_c);
            auto states = enc_cfg.encode(xs, &f, &b, nullptr);
            NodeRef p = sigmoid(add(matvec(w_y, max_over_time(states)), b_y));
            NodeRef pc = clamp(p, 1e-12, 1.0 - 1e-12);
            NodeRef loss = scale(log_op(pc), -1.0);
            total = total ? add(total, loss) : loss;
        }
        return scale(total, 0.5);
    };

    std::vector<NodeRef> inputs = {src.w,        src.bias,     w_y,          b_y,
                                   fwd.target_lstm.w,          fwd.fuse_h.c_psi,
                                   fwd.attn_c.u_a,             fwd.conc_h.c_u,
                                   bwd.fuse_c.w_z,             bwd.attn_h.v_a};
    const double err = grad_check(build, inputs);
    CHECK(err < 1e-4);
}
