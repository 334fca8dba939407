#include "art/gradcheck.hpp"

#include <algorithm>
#include <functional>

#include "art/errors.hpp"
#include "art/heads.hpp"
#include "art/model.hpp"
#include "art/train.hpp"
#include "art/transfer.hpp"

namespace art {

namespace {

Tensor random_tensor(Rng& rng, std::vector<int> shape, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (auto& v : t.data) v = rng.uniform(lo, hi);
    return t;
}

NodeRef rleaf(Rng& rng, std::vector<int> shape, double lo = -1.0, double hi = 1.0) {
    return make_leaf(random_tensor(rng, std::move(shape), lo, hi), true);
}

// Test hook: identity forward whose backward inflates the incoming gradient,
// so the finite-difference suite must flag its consumer.
NodeRef corrupt_grad(const NodeRef& x) {
    auto n = std::make_shared<Node>();
    n->value = x->value;
    n->parents = {x};
    n->op = "corrupt";
    n->requires_grad = x->requires_grad;
    Node* np = n.get();
    Node* xp = x.get();
    n->backward_fn = [np, xp] {
        Tensor g = np->grad;
        for (auto& v : g.data) v *= 1.02;
        xp->accum(g);
    };
    return n;
}

using Check = std::function<double(std::uint64_t seed, bool fault)>;

double check_affine(std::uint64_t seed, bool) {
    Rng rng(seed);
    const int rows = 1 + rng.uniform_int(5), cols = 1 + rng.uniform_int(5);
    NodeRef x = rleaf(rng, {cols}), w = rleaf(rng, {rows, cols}), b = rleaf(rng, {rows});
    NodeRef probe = make_constant(random_tensor(rng, {rows}));
    return grad_check([&] { return dot(probe, affine(x, w, b)); }, {x, w, b});
}

double check_activations(std::uint64_t seed, bool) {
    Rng rng(seed);
    const int d = 1 + rng.uniform_int(5);
    NodeRef x = rleaf(rng, {d}, -2.0, 2.0);
    NodeRef probe = make_constant(random_tensor(rng, {d}));
    double worst = grad_check([&] { return dot(probe, tanh_op(x)); }, {x});
    worst = std::max(worst, grad_check([&] { return dot(probe, sigmoid(x)); }, {x}));
    // log over a positive transform
    worst = std::max(worst,
                     grad_check([&] { return dot(probe, log_op(axpb(sigmoid(x), 1.0, 0.5))); }, {x}));
    return worst;
}

double check_softmax(std::uint64_t seed, bool) {
    Rng rng(seed);
    const int d = 2 + rng.uniform_int(4);
    NodeRef x = rleaf(rng, {d}, -3.0, 3.0);
    NodeRef probe = make_constant(random_tensor(rng, {d}));
    double worst = grad_check([&] { return dot(probe, softmax(x)); }, {x});
    worst = std::max(worst, grad_check([&] { return logsumexp(x); }, {x}));
    return worst;
}

double check_dropout(std::uint64_t seed, bool) {
    Rng rng(seed);
    const int d = 3 + rng.uniform_int(8);
    NodeRef x = rleaf(rng, {d});
    NodeRef probe = make_constant(random_tensor(rng, {d}));
    // mask must be identical on every rebuild
    return grad_check(
        [&, seed] {
            Rng mask_rng(mix_seed(seed, 77));
            return dot(probe, dropout(x, 0.4, true, mask_rng));
        },
        {x});
}

double check_rnn_step(std::uint64_t seed, bool) {
    Rng rng(seed);
    const int d = 1 + rng.uniform_int(4), din = 1 + rng.uniform_int(4);
    RnnParams p{rleaf(rng, {d, din}), rleaf(rng, {d, d}), rleaf(rng, {d})};
    NodeRef h = rleaf(rng, {d}), x = rleaf(rng, {din});
    NodeRef probe = make_constant(random_tensor(rng, {d}));
    return grad_check([&] { return dot(probe, rnn_step(h, x, p)); },
                      {h, x, p.w_x, p.w_h, p.b});
}

LstmParams random_lstm(Rng& rng, int din, int d) {
    LstmParams p;
    p.input = din;
    p.hidden = d;
    p.w = rleaf(rng, {4 * d, din + d});
    p.bias = rleaf(rng, {4 * d});
    return p;
}

double check_lstm_step(std::uint64_t seed, bool) {
    Rng rng(seed);
    const int d = 1 + rng.uniform_int(4), din = 1 + rng.uniform_int(4);
    LstmParams p = random_lstm(rng, din, d);
    NodeRef x = rleaf(rng, {din}), h = rleaf(rng, {d}), c = rleaf(rng, {d});
    NodeRef probe_h = make_constant(random_tensor(rng, {d}));
    NodeRef probe_c = make_constant(random_tensor(rng, {d}));
    return grad_check(
        [&] {
            auto [hn, cn] = lstm_step(x, h, c, p);
            return add(dot(probe_h, hn), dot(probe_c, cn));
        },
        {x, h, c, p.w, p.bias});
}

AttentionParams random_attention(Rng& rng, int d, int da) {
    return AttentionParams{rleaf(rng, {da, d}), rleaf(rng, {da, d}), rleaf(rng, {da})};
}

SourceEncoding encoding_from_leaves(const std::vector<NodeRef>& hs, const std::vector<NodeRef>& cs,
                                    const AttentionParams& ah, const AttentionParams& ac) {
    SourceEncoding enc;
    enc.h = hs;
    enc.c = cs;
    enc.valid = static_cast<int>(hs.size());
    precompute_keys(enc, ah, ac);
    return enc;
}

double check_attention(std::uint64_t seed, bool) {
    Rng rng(seed);
    const int d = 1 + rng.uniform_int(4), da = 1 + rng.uniform_int(4);
    const int n = 2 + rng.uniform_int(3);
    AttentionParams ah = random_attention(rng, d, da), ac = random_attention(rng, d, da);
    std::vector<NodeRef> hs, cs;
    for (int j = 0; j < n; ++j) {
        hs.push_back(rleaf(rng, {d}));
        cs.push_back(rleaf(rng, {d}));
    }
    NodeRef q = rleaf(rng, {d});
    NodeRef probe = make_constant(random_tensor(rng, {n}));
    std::vector<NodeRef> inputs = {q, ah.w_a, ah.u_a, ah.v_a};
    inputs.insert(inputs.end(), hs.begin(), hs.end());
    return grad_check(
        [&] {
            SourceEncoding enc = encoding_from_leaves(hs, cs, ah, ac);
            return dot(probe, attention_weights(q, enc, StreamKind::short_term, ah));
        },
        inputs);
}

double check_context(std::uint64_t seed, bool) {
    Rng rng(seed);
    const int d = 1 + rng.uniform_int(4), n = 2 + rng.uniform_int(3);
    NodeRef raw = rleaf(rng, {n});
    std::vector<NodeRef> states;
    for (int j = 0; j < n; ++j) states.push_back(rleaf(rng, {d}));
    NodeRef probe = make_constant(random_tensor(rng, {d}));
    std::vector<NodeRef> inputs = {raw};
    inputs.insert(inputs.end(), states.begin(), states.end());
    return grad_check([&] { return dot(probe, context(softmax(raw), states)); }, inputs);
}

double check_concentrate(std::uint64_t seed, bool) {
    Rng rng(seed);
    const int d = 1 + rng.uniform_int(3) + 1;
    ConcentrateParams p{rleaf(rng, {d, d}), rleaf(rng, {d, d})};
    NodeRef pi = rleaf(rng, {d}), s = rleaf(rng, {d});
    NodeRef probe = make_constant(random_tensor(rng, {d}));
    return grad_check(
        [&] {
            auto [psi, u] = concentrate(pi, s, p);
            return add(dot(probe, psi), sum(u));
        },
        {pi, s, p.w_u, p.c_u});
}

FusionParams random_fusion(Rng& rng, int din, int d) {
    FusionParams p;
    p.w_psi = rleaf(rng, {d, din});
    p.u_psi = rleaf(rng, {d, d});
    p.c_psi = rleaf(rng, {d, d});
    p.w_z = rleaf(rng, {d, din});
    p.u_z = rleaf(rng, {d, d});
    p.c_z = rleaf(rng, {d, d});
    p.w_r = rleaf(rng, {d, din});
    p.u_r = rleaf(rng, {d, d});
    p.c_r = rleaf(rng, {d, d});
    return p;
}

double check_fuse(std::uint64_t seed, bool fault) {
    Rng rng(seed);
    const int d = 1 + rng.uniform_int(4), din = 1 + rng.uniform_int(4);
    FusionParams p = random_fusion(rng, din, d);
    NodeRef x = rleaf(rng, {din}), prev = rleaf(rng, {d}), psi = rleaf(rng, {d});
    NodeRef probe = make_constant(random_tensor(rng, {d}));
    return grad_check(
        [&] {
            FusionParams used = p;
            if (fault) used.c_z = corrupt_grad(p.c_z);
            return dot(probe, fuse(x, prev, psi, used));
        },
        {x, prev, psi, p.w_psi, p.u_psi, p.c_psi, p.w_z, p.u_z, p.c_z, p.w_r, p.u_r, p.c_r});
}

ArtLstmParams random_art_params(Rng& rng, int din, int d, int da) {
    ArtLstmParams p;
    p.target_lstm = random_lstm(rng, din, d);
    p.fuse_h = random_fusion(rng, din, d);
    p.fuse_c = random_fusion(rng, din, d);
    p.attn_h = random_attention(rng, d, da);
    p.attn_c = random_attention(rng, d, da);
    p.conc_h = ConcentrateParams{rleaf(rng, {d, d}), rleaf(rng, {d, d})};
    p.conc_c = ConcentrateParams{rleaf(rng, {d, d}), rleaf(rng, {d, d})};
    return p;
}

void collect_art_inputs(const ArtLstmParams& p, std::vector<NodeRef>& inputs) {
    inputs.insert(inputs.end(), {p.target_lstm.w, p.target_lstm.bias});
    for (const FusionParams* f : {&p.fuse_h, &p.fuse_c})
        inputs.insert(inputs.end(),
                      {f->w_psi, f->u_psi, f->c_psi, f->w_z, f->u_z, f->c_z, f->w_r, f->u_r, f->c_r});
    for (const AttentionParams* a : {&p.attn_h, &p.attn_c})
        inputs.insert(inputs.end(), {a->w_a, a->u_a, a->v_a});
    for (const ConcentrateParams* c : {&p.conc_h, &p.conc_c})
        inputs.insert(inputs.end(), {c->w_u, c->c_u});
}

double check_art_lstm_step(std::uint64_t seed, bool) {
    Rng rng(seed);
    const int d = 3, din = 3, da = 3, n = 4;
    ArtLstmParams p = random_art_params(rng, din, d, da);
    std::vector<NodeRef> hs, cs;
    for (int j = 0; j < n; ++j) {
        hs.push_back(rleaf(rng, {d}));
        cs.push_back(rleaf(rng, {d}));
    }
    NodeRef x = rleaf(rng, {din}), h = rleaf(rng, {d}), c = rleaf(rng, {d});
    const int pos = rng.uniform_int(n);
    NodeRef probe_h = make_constant(random_tensor(rng, {d}));
    NodeRef probe_c = make_constant(random_tensor(rng, {d}));
    std::vector<NodeRef> inputs = {x, h, c};
    collect_art_inputs(p, inputs);
    inputs.insert(inputs.end(), hs.begin(), hs.end());
    inputs.insert(inputs.end(), cs.begin(), cs.end());
    return grad_check(
        [&] {
            SourceEncoding enc = encoding_from_leaves(hs, cs, p.attn_h, p.attn_c);
            ArtStepResult r = art_lstm_step(x, h, c, enc, pos, p);
            return add(dot(probe_h, r.h), dot(probe_c, r.c));
        },
        inputs);
}

double check_classify(std::uint64_t seed, bool) {
    Rng rng(seed);
    const int d = 2 + rng.uniform_int(4), n = 1 + rng.uniform_int(4);
    std::vector<NodeRef> states;
    for (int i = 0; i < n; ++i) states.push_back(rleaf(rng, {d}));
    ClassifierHead head{rleaf(rng, {1, d}), rleaf(rng, {1})};
    Rng drop_rng(0);
    std::vector<NodeRef> inputs = states;
    inputs.push_back(head.w_y);
    inputs.push_back(head.b_y);
    const int label = rng.uniform_int(2);
    return grad_check(
        [&] { return bce_loss(classify(states, head, 0.0, false, drop_rng), label); }, inputs);
}

double check_bce(std::uint64_t seed, bool) {
    Rng rng(seed);
    NodeRef logit = rleaf(rng, {1}, -2.0, 2.0);
    const int label = rng.uniform_int(2);
    return grad_check([&] { return bce_loss(sigmoid(logit), label); }, {logit});
}

double check_crf(std::uint64_t seed, bool) {
    Rng rng(seed);
    const int k = 2 + rng.uniform_int(3), d = 2 + rng.uniform_int(3);
    const int n = 1 + rng.uniform_int(4);
    CrfHead head;
    head.num_tags = k;
    head.emission = rleaf(rng, {k, d});
    head.transition = rleaf(rng, {k, k});
    head.start = rleaf(rng, {k});
    head.stop = rleaf(rng, {k});
    std::vector<NodeRef> states;
    std::vector<int> tags;
    for (int t = 0; t < n; ++t) {
        states.push_back(rleaf(rng, {d}));
        tags.push_back(rng.uniform_int(k));
    }
    std::vector<NodeRef> inputs = states;
    inputs.insert(inputs.end(), {head.emission, head.transition, head.start, head.stop});
    return grad_check([&] { return scale(crf_log_likelihood(states, tags, head), -1.0); },
                      inputs);
}

double check_char_cnn(std::uint64_t seed, bool) {
    Rng rng(seed);
    const int alphabet = 6, cd = 2, nf = 3, width = 3;
    CharCnnEmbedder emb;
    emb.char_dim = cd;
    emb.width = width;
    emb.n_filters = nf;
    emb.table = rleaf(rng, {alphabet, cd});
    emb.filters = rleaf(rng, {nf, width * cd});
    emb.bias = rleaf(rng, {nf});
    const int len = 1 + rng.uniform_int(5);
    std::vector<int> ids;
    for (int i = 0; i < len; ++i) ids.push_back(rng.uniform_int(alphabet));
    NodeRef probe = make_constant(random_tensor(rng, {nf}));
    return grad_check([&] { return dot(probe, char_cnn_embed(ids, emb)); },
                      {emb.table, emb.filters, emb.bias});
}

// Tiny full model: source LSTM -> bidirectional target encoder -> classifier.
double check_end_to_end(std::uint64_t seed, bool) {
    TrainingConfig cfg;
    cfg.task = Task::classification;
    cfg.mode = TransferMode::full_art;
    cfg.hidden = 3;
    cfg.attn_dim = 3;
    cfg.word_dim = 3;
    cfg.dropout = 0.0;
    cfg.seed = seed;

    Vocabulary words;
    for (const char* t : {"a", "b", "c", "d", "e"}) words.add(t);
    TransferModel model(cfg, words, Vocabulary{}, Vocabulary{}, Vocabulary{});

    Rng rng(mix_seed(seed, 5));
    for (auto& [name, e] : model.store.entries()) {
        for (auto& v : e.node->value.data) v = rng.uniform(-0.8, 0.8);
    }

    Example e;
    e.tokens = {"a", "b", "c", "d"};
    e.token_ids = {2, 3, 4, 5};
    e.label = rng.uniform_int(2);

    std::vector<NodeRef> inputs;
    for (auto& [name, entry] : model.store.entries()) inputs.push_back(entry.node);
    ForwardOptions opts;  // eval mode: dropout off
    return grad_check([&] { return model.forward_target(e, opts).loss; }, inputs);
}

struct Component {
    const char* name;
    Check check;
};

const std::vector<Component>& components() {
    static const std::vector<Component> all = {
        {"affine", check_affine},
        {"activations", check_activations},
        {"softmax", check_softmax},
        {"dropout", check_dropout},
        {"rnn_step", check_rnn_step},
        {"lstm_step", check_lstm_step},
        {"attention", check_attention},
        {"context", check_context},
        {"concentrate", check_concentrate},
        {"fuse", check_fuse},
        {"art_lstm_step", check_art_lstm_step},
        {"classify", check_classify},
        {"bce", check_bce},
        {"crf", check_crf},
        {"char_cnn", check_char_cnn},
        {"end_to_end", check_end_to_end},
    };
    return all;
}

}  // namespace

std::vector<std::string> gradcheck_component_names() {
    std::vector<std::string> names;
    for (const auto& c : components()) names.push_back(c.name);
    return names;
}

std::vector<GradCheckResult> run_gradcheck_suite(const GradCheckOptions& opts) {
    std::vector<GradCheckResult> results;
    bool matched = false;
    for (const auto& comp : components()) {
        if (!opts.component.empty() && opts.component != comp.name) continue;
        matched = true;
        const bool fault = opts.inject_fault == comp.name;
        std::vector<double> errs(static_cast<std::size_t>(opts.seeds), 0.0);
#pragma omp parallel for schedule(dynamic)
        for (int s = 0; s < opts.seeds; ++s)
            errs[static_cast<std::size_t>(s)] =
                comp.check(mix_seed(0xc0ffee, static_cast<std::uint64_t>(s)), fault);
        GradCheckResult r;
        r.component = comp.name;
        r.max_rel_err = *std::max_element(errs.begin(), errs.end());
        results.push_back(r);
    }
    if (!matched)
        throw ConfigError("unknown gradcheck component '" + opts.component + "'");
    return results;
}

}  // namespace art
