#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "art/tensor.hpp"

namespace art {

struct Node;
using NodeRef = std::shared_ptr<Node>;

// Gradient sink for batch-parallel training: gradients of parameter leaves
// (nodes with param_slot >= 0) are routed here instead of Node::grad, so
// concurrent backward passes over shared parameters never race.
struct GradSink {
    std::vector<Tensor> slots;

    void add_into(GradSink& other) const {
        for (std::size_t s = 0; s < slots.size(); ++s) {
            const Tensor& src = slots[s];
            if (src.data.empty()) continue;
            Tensor& dst = other.slots[s];
            if (dst.data.empty()) dst = Tensor(src.shape);
            for (std::size_t i = 0; i < src.size(); ++i) dst.data[i] += src.data[i];
        }
    }
};

// One vertex of the computation graph. `parents` is the op record: it keeps
// the producing operation's inputs alive and `backward_fn` pushes this
// node's gradient into them.
struct Node {
    Tensor value;
    Tensor grad;  // allocated lazily, zero-initialized
    std::vector<NodeRef> parents;
    std::function<void()> backward_fn;
    bool requires_grad = false;
    int param_slot = -1;
    const char* op = "leaf";

    std::size_t size() const { return value.size(); }
    const std::vector<int>& shape() const { return value.shape; }

    // Target buffer for gradient accumulation. Parameters are redirected to
    // the thread's active GradSink when one is installed.
    Tensor& grad_target();

    void accum(std::size_t offset, const double* g, std::size_t n) {
        if (!requires_grad) return;
        Tensor& t = grad_target();
        double* dst = t.data.data() + offset;
        for (std::size_t i = 0; i < n; ++i) dst[i] += g[i];
    }

    void accum(const Tensor& g) { accum(0, g.data.data(), g.size()); }
};

NodeRef make_leaf(Tensor value, bool requires_grad);
NodeRef make_constant(Tensor value);

// Reverse topological sweep from a scalar loss. Gradients of all ancestors
// with requires_grad are accumulated (not reset); parameter leaves go to
// `sink` when given. Deterministic: the sweep order depends only on graph
// structure.
void backward(const NodeRef& loss, GradSink* sink = nullptr);

// Deterministic topological order (parents before children) of the subgraph
// that requires gradients.
std::vector<Node*> topo_order(Node* root);

}  // namespace art
