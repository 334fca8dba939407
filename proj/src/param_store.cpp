#include "art/param_store.hpp"

#include <cmath>

#include "art/errors.hpp"

namespace art {

OptimizerKind optimizer_from_string(const std::string& name) {
    if (name == "sgd") return OptimizerKind::sgd;
    if (name == "adam") return OptimizerKind::adam;
    if (name == "adagrad") return OptimizerKind::adagrad;
    throw ConfigError("unknown optimizer '" + name + "' (expected sgd, adam or adagrad)");
}

std::string optimizer_to_string(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::sgd: return "sgd";
        case OptimizerKind::adam: return "adam";
        case OptimizerKind::adagrad: return "adagrad";
    }
    return "?";
}

NodeRef ParamStore::create(const std::string& name, Tensor init) {
    if (entries_.count(name)) throw ConfigError("parameter '" + name + "' already registered");
    NodeRef node = make_leaf(std::move(init), true);
    node->op = "param";
    node->param_slot = static_cast<int>(by_slot_.size());
    by_slot_.push_back(node.get());
    entries_[name] = Entry{node, node->param_slot, {}, {}};
    return node;
}

const NodeRef& ParamStore::get(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ConfigError("unknown parameter '" + name + "'");
    return it->second.node;
}

std::size_t ParamStore::scalar_count() const {
    std::size_t n = 0;
    for (const auto& [name, e] : entries_) n += e.node->size();
    return n;
}

void ParamStore::apply_sink(const GradSink& sink) {
    for (std::size_t s = 0; s < sink.slots.size(); ++s) {
        const Tensor& src = sink.slots[s];
        if (src.data.empty()) continue;
        Node* node = by_slot_[s];
        if (node->grad.data.empty()) node->grad = Tensor(node->value.shape);
        for (std::size_t i = 0; i < src.size(); ++i) node->grad.data[i] += src.data[i];
    }
}

void ParamStore::zero_grads() {
    for (auto& [name, e] : entries_) {
        if (!e.node->grad.data.empty()) e.node->grad.fill(0.0);
    }
}

double ParamStore::max_abs_grad() const {
    double m = 0.0;
    for (const auto& [name, e] : entries_) {
        for (double g : e.node->grad.data) m = std::max(m, std::fabs(g));
    }
    return m;
}

void optimizer_step(ParamStore& store, OptimizerKind kind, double lr,
                    const OptimizerHyper& hyper) {
    if (lr <= 0.0) throw ConfigError("optimizer_step: learning rate must be positive");
    store.step_count += 1;
    const double t = static_cast<double>(store.step_count);
    for (auto& [name, e] : store.entries()) {
        Tensor& p = e.node->value;
        if (e.node->grad.data.empty()) e.node->grad = Tensor(p.shape);
        const Tensor& g = e.node->grad;
        switch (kind) {
            case OptimizerKind::sgd:
                for (std::size_t i = 0; i < p.size(); ++i) p.data[i] -= lr * g.data[i];
                break;
            case OptimizerKind::adam: {
                if (e.m.data.empty()) e.m = Tensor(p.shape);
                if (e.v.data.empty()) e.v = Tensor(p.shape);
                const double bc1 = 1.0 - std::pow(hyper.beta1, t);
                const double bc2 = 1.0 - std::pow(hyper.beta2, t);
                for (std::size_t i = 0; i < p.size(); ++i) {
                    e.m.data[i] = hyper.beta1 * e.m.data[i] + (1.0 - hyper.beta1) * g.data[i];
                    e.v.data[i] =
                        hyper.beta2 * e.v.data[i] + (1.0 - hyper.beta2) * g.data[i] * g.data[i];
                    const double mhat = e.m.data[i] / bc1;
                    const double vhat = e.v.data[i] / bc2;
                    p.data[i] -= lr * mhat / (std::sqrt(vhat) + hyper.eps);
                }
                break;
            }
            case OptimizerKind::adagrad:
                if (e.m.data.empty()) e.m = Tensor(p.shape);
                for (std::size_t i = 0; i < p.size(); ++i) {
                    e.m.data[i] += g.data[i] * g.data[i];
                    p.data[i] -= lr * g.data[i] / (std::sqrt(e.m.data[i]) + hyper.eps);
                }
                break;
        }
    }
    store.zero_grads();
}

Tensor init_glorot(Rng& rng, int rows, int cols) {
    const double bound = std::sqrt(6.0 / (rows + cols));
    Tensor t({rows, cols});
    for (auto& v : t.data) v = rng.uniform(-bound, bound);
    return t;
}

Tensor init_zeros(int n) { return Tensor({n}); }

double grad_check(const std::function<NodeRef()>& build_loss, const std::vector<NodeRef>& inputs,
                  double step) {
    for (const auto& in : inputs) in->grad = Tensor();
    NodeRef loss = build_loss();
    backward(loss);

    std::vector<Tensor> analytic;
    analytic.reserve(inputs.size());
    for (const auto& in : inputs) {
        analytic.push_back(in->grad.data.empty() ? Tensor(in->value.shape) : in->grad);
    }

    double worst = 0.0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        Node* in = inputs[k].get();
        for (std::size_t i = 0; i < in->value.size(); ++i) {
            const double saved = in->value.data[i];
            in->value.data[i] = saved + step;
            const double up = build_loss()->value.data[0];
            in->value.data[i] = saved - step;
            const double down = build_loss()->value.data[0];
            in->value.data[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double a = analytic[k].data[i];
            const double denom = std::max(std::fabs(a), std::fabs(numeric));
            const double err = denom < 1e-5 ? std::fabs(a - numeric)
                                            : std::fabs(a - numeric) / denom;
            worst = std::max(worst, err);
        }
    }
    for (const auto& in : inputs) in->grad = Tensor();
    return worst;
}

}  // namespace art
