#pragma once

#include <vector>

#include "art/node.hpp"
#include "art/rng.hpp"

namespace art {

// Elementwise
NodeRef add(const NodeRef& a, const NodeRef& b);
NodeRef sub(const NodeRef& a, const NodeRef& b);
NodeRef mul(const NodeRef& a, const NodeRef& b);
NodeRef scale(const NodeRef& x, double c);
NodeRef axpb(const NodeRef& x, double a, double b);  // a*x + b
NodeRef clamp(const NodeRef& x, double lo, double hi);

// Linear algebra
NodeRef matvec(const NodeRef& w, const NodeRef& x);
NodeRef affine(const NodeRef& x, const NodeRef& w, const NodeRef& b);  // W·x + b
NodeRef dot(const NodeRef& a, const NodeRef& b);

// Activations
NodeRef tanh_op(const NodeRef& x);
NodeRef sigmoid(const NodeRef& x);
NodeRef log_op(const NodeRef& x);
NodeRef softmax(const NodeRef& x);
// Softmax over the first `valid` entries; the rest get exactly zero weight.
NodeRef softmax_masked(const NodeRef& x, int valid);
NodeRef logsumexp(const NodeRef& x);

// Reductions / structure
NodeRef sum(const NodeRef& x);
NodeRef concat(const std::vector<NodeRef>& parts);
NodeRef slice(const NodeRef& x, int offset, int len);
NodeRef pick(const NodeRef& x, int index);
NodeRef matrix_row(const NodeRef& m, int row);
NodeRef matrix_column(const NodeRef& m, int col);
NodeRef pick_rc(const NodeRef& m, int row, int col);
NodeRef stack_scalars(const std::vector<NodeRef>& items);
// Elementwise max over a sequence of same-shape vectors; ties break toward
// the earliest position.
NodeRef max_over_time(const std::vector<NodeRef>& steps);
// sum_j alpha[j] * states[j]
NodeRef weighted_sum(const NodeRef& alpha, const std::vector<NodeRef>& states);
NodeRef scale_by(const NodeRef& x, const NodeRef& s);  // scalar node * vector

// Inverted dropout: zero with probability p and scale survivors by 1/(1-p)
// in training mode; identity in eval mode.
NodeRef dropout(const NodeRef& x, double p, bool training, Rng& rng);

}  // namespace art
