#include "art/node.hpp"

#include <unordered_set>

#include "art/errors.hpp"

namespace art {

namespace {
thread_local GradSink* tl_sink = nullptr;
}

Tensor& Node::grad_target() {
    if (param_slot >= 0 && tl_sink) {
        Tensor& t = tl_sink->slots[static_cast<std::size_t>(param_slot)];
        if (t.data.empty()) t = Tensor(value.shape);
        return t;
    }
    if (grad.data.empty()) grad = Tensor(value.shape);
    return grad;
}

NodeRef make_leaf(Tensor value, bool requires_grad) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    return n;
}

NodeRef make_constant(Tensor value) { return make_leaf(std::move(value), false); }

std::vector<Node*> topo_order(Node* root) {
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    // Iterative post-order DFS; child is emitted after all its parents.
    struct Frame {
        Node* node;
        std::size_t next_parent;
    };
    std::vector<Frame> stack;
    stack.push_back({root, 0});
    visited.insert(root);
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            Node* p = f.node->parents[f.next_parent++].get();
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.push_back({p, 0});
            }
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }
    return order;
}

void backward(const NodeRef& loss, GradSink* sink) {
    if (!loss) throw ContractViolation("backward: null loss node");
    if (loss->size() != 1)
        throw ContractViolation("backward: loss must be scalar, got shape " +
                                loss->value.shape_str());
    if (!loss->requires_grad) return;

    GradSink* prev = tl_sink;
    tl_sink = sink;
    try {
        std::vector<Node*> order = topo_order(loss.get());
        loss->grad_target().data[0] += 1.0;
        // order is parents-first; sweep children-first. A node whose grad is
        // still unallocated received no contribution (e.g. a non-argmax input
        // of max_over_time); its pushes would all be zero, so skip it.
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            Node* n = *it;
            if (n->backward_fn && !n->grad.data.empty()) n->backward_fn();
        }
    } catch (...) {
        tl_sink = prev;
        throw;
    }
    tl_sink = prev;
}

}  // namespace art
