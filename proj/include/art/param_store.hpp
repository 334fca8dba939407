#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "art/node.hpp"
#include "art/rng.hpp"

namespace art {

enum class OptimizerKind { sgd, adam, adagrad };

OptimizerKind optimizer_from_string(const std::string& name);
std::string optimizer_to_string(OptimizerKind kind);

struct OptimizerHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Named registry of trainable leaves. Iteration is always sorted by name;
// slot ids (used by GradSink) follow creation order.
class ParamStore {
public:
    struct Entry {
        NodeRef node;
        int slot = -1;
        Tensor m;  // adam first moment / adagrad squared-gradient accumulator
        Tensor v;  // adam second moment
    };

    NodeRef create(const std::string& name, Tensor init);
    const NodeRef& get(const std::string& name) const;
    bool has(const std::string& name) const { return entries_.count(name) != 0; }

    const std::map<std::string, Entry>& entries() const { return entries_; }
    std::map<std::string, Entry>& entries() { return entries_; }
    std::size_t size() const { return entries_.size(); }
    std::size_t scalar_count() const;

    GradSink make_sink() const { return GradSink{std::vector<Tensor>(by_slot_.size())}; }
    // Ordered reduction target: adds every sink slot into the owning node's
    // grad. Called once per example, in example order.
    void apply_sink(const GradSink& sink);

    void zero_grads();
    double max_abs_grad() const;

    long long step_count = 0;  // shared adam timestep

private:
    std::map<std::string, Entry> entries_;
    std::vector<Node*> by_slot_;
};

// In-place update of every entry per the chosen rule; zeroes grads after.
void optimizer_step(ParamStore& store, OptimizerKind kind, double lr,
                    const OptimizerHyper& hyper = {});

// D4-style initializers.
Tensor init_glorot(Rng& rng, int rows, int cols);
Tensor init_zeros(int n);

// Compares analytic gradients of the given leaves against central finite
// differences of the loss that `build_loss` reconstructs on every call.
// Returns the worst relative error over all elements.
double grad_check(const std::function<NodeRef()>& build_loss, const std::vector<NodeRef>& inputs,
                  double step = 1e-5);

}  // namespace art
