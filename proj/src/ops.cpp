#include "art/ops.hpp"

#include <algorithm>
#include <cmath>

#include "art/errors.hpp"
#include "art/kernels.hpp"

namespace art {

namespace {

NodeRef new_node(Tensor value, std::vector<NodeRef> parents, const char* opname) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->parents = std::move(parents);
    n->op = opname;
    for (const auto& p : n->parents) {
        if (p->requires_grad) {
            n->requires_grad = true;
            break;
        }
    }
    return n;
}

void require_vector(const NodeRef& x, const char* op) {
    if (x->value.rank() != 1)
        throw ShapeError(std::string(op) + ": expected vector, got " + x->value.shape_str());
}

}  // namespace

NodeRef add(const NodeRef& a, const NodeRef& b) {
    require_same_shape(a->value, b->value, "add");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += b->value.data[i];
    auto n = new_node(std::move(out), {a, b}, "add");
    if (n->requires_grad) {
        Node *np = n.get(), *ap = a.get(), *bp = b.get();
        n->backward_fn = [np, ap, bp] {
            ap->accum(np->grad);
            bp->accum(np->grad);
        };
    }
    return n;
}

NodeRef sub(const NodeRef& a, const NodeRef& b) {
    require_same_shape(a->value, b->value, "sub");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= b->value.data[i];
    auto n = new_node(std::move(out), {a, b}, "sub");
    if (n->requires_grad) {
        Node *np = n.get(), *ap = a.get(), *bp = b.get();
        n->backward_fn = [np, ap, bp] {
            ap->accum(np->grad);
            if (bp->requires_grad) {
                Tensor neg = np->grad;
                for (auto& v : neg.data) v = -v;
                bp->accum(neg);
            }
        };
    }
    return n;
}

NodeRef mul(const NodeRef& a, const NodeRef& b) {
    require_same_shape(a->value, b->value, "mul");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= b->value.data[i];
    auto n = new_node(std::move(out), {a, b}, "mul");
    if (n->requires_grad) {
        Node *np = n.get(), *ap = a.get(), *bp = b.get();
        n->backward_fn = [np, ap, bp] {
            if (ap->requires_grad)
                kernels::mul_accum(np->grad.data.data(), bp->value.data.data(),
                                   ap->grad_target().data.data(), np->grad.size());
            if (bp->requires_grad)
                kernels::mul_accum(np->grad.data.data(), ap->value.data.data(),
                                   bp->grad_target().data.data(), np->grad.size());
        };
    }
    return n;
}

NodeRef scale(const NodeRef& x, double c) { return axpb(x, c, 0.0); }

NodeRef axpb(const NodeRef& x, double a, double b) {
    Tensor out = x->value;
    for (auto& v : out.data) v = a * v + b;
    auto n = new_node(std::move(out), {x}, "axpb");
    if (n->requires_grad) {
        Node *np = n.get(), *xp = x.get();
        n->backward_fn = [np, xp, a] {
            Tensor g = np->grad;
            for (auto& v : g.data) v *= a;
            xp->accum(g);
        };
    }
    return n;
}

NodeRef clamp(const NodeRef& x, double lo, double hi) {
    Tensor out = x->value;
    for (auto& v : out.data) v = std::min(hi, std::max(lo, v));
    auto n = new_node(std::move(out), {x}, "clamp");
    if (n->requires_grad) {
        Node *np = n.get(), *xp = x.get();
        n->backward_fn = [np, xp, lo, hi] {
            Tensor g = np->grad;
            for (std::size_t i = 0; i < g.size(); ++i) {
                double v = xp->value.data[i];
                if (v < lo || v > hi) g.data[i] = 0.0;
            }
            xp->accum(g);
        };
    }
    return n;
}

NodeRef matvec(const NodeRef& w, const NodeRef& x) {
    if (w->value.rank() != 2 || x->value.rank() != 1 || w->value.cols() != x->value.rows())
        throw ShapeError("matvec: W is " + w->value.shape_str() + ", x is " +
                         x->value.shape_str());
    const int rows = w->value.rows(), cols = w->value.cols();
    Tensor out({rows});
    kernels::matvec(w->value.data.data(), x->value.data.data(), out.data.data(), rows, cols);
    auto n = new_node(std::move(out), {w, x}, "matvec");
    if (n->requires_grad) {
        Node *np = n.get(), *wp = w.get(), *xp = x.get();
        n->backward_fn = [np, wp, xp, rows, cols] {
            if (wp->requires_grad)
                kernels::matvec_grad_w(np->grad.data.data(), xp->value.data.data(),
                                       wp->grad_target().data.data(), rows, cols);
            if (xp->requires_grad)
                kernels::matvec_grad_x(wp->value.data.data(), np->grad.data.data(),
                                       xp->grad_target().data.data(), rows, cols);
        };
    }
    return n;
}

NodeRef affine(const NodeRef& x, const NodeRef& w, const NodeRef& b) {
    if (w->value.rank() != 2 || x->value.rank() != 1 || w->value.cols() != x->value.rows() ||
        b->value.rank() != 1 || b->value.rows() != w->value.rows())
        throw ShapeError("affine: W is " + w->value.shape_str() + ", x is " +
                         x->value.shape_str() + ", b is " + b->value.shape_str());
    const int rows = w->value.rows(), cols = w->value.cols();
    Tensor out({rows});
    kernels::matvec(w->value.data.data(), x->value.data.data(), out.data.data(), rows, cols);
    for (int i = 0; i < rows; ++i) out.data[i] += b->value.data[i];
    auto n = new_node(std::move(out), {x, w, b}, "affine");
    if (n->requires_grad) {
        Node *np = n.get(), *xp = x.get(), *wp = w.get(), *bp = b.get();
        n->backward_fn = [np, xp, wp, bp, rows, cols] {
            if (wp->requires_grad)
                kernels::matvec_grad_w(np->grad.data.data(), xp->value.data.data(),
                                       wp->grad_target().data.data(), rows, cols);
            if (xp->requires_grad)
                kernels::matvec_grad_x(wp->value.data.data(), np->grad.data.data(),
                                       xp->grad_target().data.data(), rows, cols);
            bp->accum(np->grad);
        };
    }
    return n;
}

NodeRef dot(const NodeRef& a, const NodeRef& b) {
    require_same_shape(a->value, b->value, "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a->size(); ++i) acc += a->value.data[i] * b->value.data[i];
    auto n = new_node(Tensor::scalar(acc), {a, b}, "dot");
    if (n->requires_grad) {
        Node *np = n.get(), *ap = a.get(), *bp = b.get();
        n->backward_fn = [np, ap, bp] {
            const double g = np->grad.data[0];
            if (ap->requires_grad) {
                Tensor t = bp->value;
                for (auto& v : t.data) v *= g;
                ap->accum(t);
            }
            if (bp->requires_grad) {
                Tensor t = ap->value;
                for (auto& v : t.data) v *= g;
                bp->accum(t);
            }
        };
    }
    return n;
}

NodeRef tanh_op(const NodeRef& x) {
    Tensor out = x->value;
    for (auto& v : out.data) v = std::tanh(v);
    auto n = new_node(std::move(out), {x}, "tanh");
    if (n->requires_grad) {
        Node *np = n.get(), *xp = x.get();
        n->backward_fn = [np, xp] {
            Tensor g = np->grad;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double y = np->value.data[i];
                g.data[i] *= 1.0 - y * y;
            }
            xp->accum(g);
        };
    }
    return n;
}

NodeRef sigmoid(const NodeRef& x) {
    Tensor out = x->value;
    for (auto& v : out.data) {
        if (v >= 0.0) {
            v = 1.0 / (1.0 + std::exp(-v));
        } else {
            const double e = std::exp(v);
            v = e / (1.0 + e);
        }
    }
    auto n = new_node(std::move(out), {x}, "sigmoid");
    if (n->requires_grad) {
        Node *np = n.get(), *xp = x.get();
        n->backward_fn = [np, xp] {
            Tensor g = np->grad;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double y = np->value.data[i];
                g.data[i] *= y * (1.0 - y);
            }
            xp->accum(g);
        };
    }
    return n;
}

NodeRef log_op(const NodeRef& x) {
    Tensor out = x->value;
    for (auto& v : out.data) v = std::log(v);
    auto n = new_node(std::move(out), {x}, "log");
    if (n->requires_grad) {
        Node *np = n.get(), *xp = x.get();
        n->backward_fn = [np, xp] {
            Tensor g = np->grad;
            for (std::size_t i = 0; i < g.size(); ++i) g.data[i] /= xp->value.data[i];
            xp->accum(g);
        };
    }
    return n;
}

NodeRef softmax(const NodeRef& x) {
    require_vector(x, "softmax");
    return softmax_masked(x, x->value.rows());
}

NodeRef softmax_masked(const NodeRef& x, int valid) {
    require_vector(x, "softmax");
    const int n_all = x->value.rows();
    if (valid < 1 || valid > n_all)
        throw ContractViolation("softmax_masked: valid=" + std::to_string(valid) +
                                " out of range for " + x->value.shape_str());
    Tensor out({n_all});
    double m = x->value.data[0];
    for (int i = 1; i < valid; ++i) m = std::max(m, x->value.data[i]);
    double z = 0.0;
    for (int i = 0; i < valid; ++i) {
        out.data[i] = std::exp(x->value.data[i] - m);
        z += out.data[i];
    }
    for (int i = 0; i < valid; ++i) out.data[i] /= z;
    auto n = new_node(std::move(out), {x}, "softmax");
    if (n->requires_grad) {
        Node *np = n.get(), *xp = x.get();
        n->backward_fn = [np, xp, valid] {
            double gy = 0.0;
            for (int i = 0; i < valid; ++i) gy += np->grad.data[i] * np->value.data[i];
            Tensor g(np->value.shape);
            for (int i = 0; i < valid; ++i)
                g.data[i] = np->value.data[i] * (np->grad.data[i] - gy);
            xp->accum(g);
        };
    }
    return n;
}

NodeRef logsumexp(const NodeRef& x) {
    require_vector(x, "logsumexp");
    const int d = x->value.rows();
    double m = x->value.data[0];
    for (int i = 1; i < d; ++i) m = std::max(m, x->value.data[i]);
    double z = 0.0;
    for (int i = 0; i < d; ++i) z += std::exp(x->value.data[i] - m);
    const double lse = m + std::log(z);
    auto n = new_node(Tensor::scalar(lse), {x}, "logsumexp");
    if (n->requires_grad) {
        Node *np = n.get(), *xp = x.get();
        n->backward_fn = [np, xp, d, lse] {
            const double g = np->grad.data[0];
            Tensor t({d});
            for (int i = 0; i < d; ++i) t.data[i] = g * std::exp(xp->value.data[i] - lse);
            xp->accum(t);
        };
    }
    return n;
}

NodeRef sum(const NodeRef& x) {
    double acc = 0.0;
    for (double v : x->value.data) acc += v;
    auto n = new_node(Tensor::scalar(acc), {x}, "sum");
    if (n->requires_grad) {
        Node *np = n.get(), *xp = x.get();
        n->backward_fn = [np, xp] {
            Tensor g(xp->value.shape);
            g.fill(np->grad.data[0]);
            xp->accum(g);
        };
    }
    return n;
}

NodeRef concat(const std::vector<NodeRef>& parts) {
    if (parts.empty()) throw ContractViolation("concat: empty input");
    int total = 0;
    for (const auto& p : parts) {
        require_vector(p, "concat");
        total += p->value.rows();
    }
    Tensor out({total});
    int off = 0;
    for (const auto& p : parts) {
        std::copy(p->value.data.begin(), p->value.data.end(), out.data.begin() + off);
        off += p->value.rows();
    }
    auto n = new_node(std::move(out), parts, "concat");
    if (n->requires_grad) {
        Node* np = n.get();
        n->backward_fn = [np] {
            std::size_t off = 0;
            for (const auto& p : np->parents) {
                p->accum(0, np->grad.data.data() + off, p->size());
                off += p->size();
            }
        };
    }
    return n;
}

NodeRef slice(const NodeRef& x, int offset, int len) {
    require_vector(x, "slice");
    if (offset < 0 || len < 1 || offset + len > x->value.rows())
        throw ShapeError("slice: range [" + std::to_string(offset) + ", " +
                         std::to_string(offset + len) + ") out of " + x->value.shape_str());
    Tensor out({len});
    std::copy(x->value.data.begin() + offset, x->value.data.begin() + offset + len,
              out.data.begin());
    auto n = new_node(std::move(out), {x}, "slice");
    if (n->requires_grad) {
        Node *np = n.get(), *xp = x.get();
        n->backward_fn = [np, xp, offset, len] {
            xp->accum(static_cast<std::size_t>(offset), np->grad.data.data(),
                      static_cast<std::size_t>(len));
        };
    }
    return n;
}

NodeRef pick(const NodeRef& x, int index) {
    require_vector(x, "pick");
    if (index < 0 || index >= x->value.rows())
        throw ContractViolation("pick: index " + std::to_string(index) + " out of " +
                                x->value.shape_str());
    auto n = new_node(Tensor::scalar(x->value.data[index]), {x}, "pick");
    if (n->requires_grad) {
        Node *np = n.get(), *xp = x.get();
        n->backward_fn = [np, xp, index] {
            xp->accum(static_cast<std::size_t>(index), np->grad.data.data(), 1);
        };
    }
    return n;
}

NodeRef matrix_row(const NodeRef& m, int row) {
    if (m->value.rank() != 2 || row < 0 || row >= m->value.rows())
        throw ShapeError("matrix_row: row " + std::to_string(row) + " of " +
                         m->value.shape_str());
    const int cols = m->value.cols();
    const std::size_t off = static_cast<std::size_t>(row) * cols;
    Tensor out({cols});
    std::copy(m->value.data.begin() + off, m->value.data.begin() + off + cols, out.data.begin());
    auto n = new_node(std::move(out), {m}, "matrix_row");
    if (n->requires_grad) {
        Node *np = n.get(), *mp = m.get();
        n->backward_fn = [np, mp, off, cols] {
            mp->accum(off, np->grad.data.data(), static_cast<std::size_t>(cols));
        };
    }
    return n;
}

NodeRef matrix_column(const NodeRef& m, int col) {
    if (m->value.rank() != 2 || col < 0 || col >= m->value.cols())
        throw ShapeError("matrix_column: column " + std::to_string(col) + " of " +
                         m->value.shape_str());
    const int rows = m->value.rows(), cols = m->value.cols();
    Tensor out({rows});
    for (int i = 0; i < rows; ++i) out.data[i] = m->value.at(i, col);
    auto n = new_node(std::move(out), {m}, "matrix_column");
    if (n->requires_grad) {
        Node *np = n.get(), *mp = m.get();
        n->backward_fn = [np, mp, rows, cols, col] {
            if (!mp->requires_grad) return;
            Tensor& g = mp->grad_target();
            for (int i = 0; i < rows; ++i)
                g.data[static_cast<std::size_t>(i) * cols + col] += np->grad.data[i];
        };
    }
    return n;
}

NodeRef pick_rc(const NodeRef& m, int row, int col) {
    if (m->value.rank() != 2 || row < 0 || row >= m->value.rows() || col < 0 ||
        col >= m->value.cols())
        throw ContractViolation("pick_rc: (" + std::to_string(row) + ", " + std::to_string(col) +
                                ") out of " + m->value.shape_str());
    const std::size_t idx = static_cast<std::size_t>(row) * m->value.cols() + col;
    auto n = new_node(Tensor::scalar(m->value.data[idx]), {m}, "pick_rc");
    if (n->requires_grad) {
        Node *np = n.get(), *mp = m.get();
        n->backward_fn = [np, mp, idx] { mp->accum(idx, np->grad.data.data(), 1); };
    }
    return n;
}

NodeRef stack_scalars(const std::vector<NodeRef>& items) {
    if (items.empty()) throw ContractViolation("stack_scalars: empty input");
    Tensor out({static_cast<int>(items.size())});
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i]->size() != 1)
            throw ShapeError("stack_scalars: item " + std::to_string(i) + " is " +
                             items[i]->value.shape_str());
        out.data[i] = items[i]->value.data[0];
    }
    auto n = new_node(std::move(out), items, "stack");
    if (n->requires_grad) {
        Node* np = n.get();
        n->backward_fn = [np] {
            for (std::size_t i = 0; i < np->parents.size(); ++i)
                np->parents[i]->accum(0, np->grad.data.data() + i, 1);
        };
    }
    return n;
}

NodeRef max_over_time(const std::vector<NodeRef>& steps) {
    if (steps.empty()) throw ContractViolation("max_over_time: empty sequence");
    const int d = steps[0]->value.rows();
    for (const auto& s : steps) require_same_shape(steps[0]->value, s->value, "max_over_time");
    Tensor out = steps[0]->value;
    std::vector<int> argmax(static_cast<std::size_t>(d), 0);
    for (std::size_t t = 1; t < steps.size(); ++t) {
        for (int k = 0; k < d; ++k) {
            if (steps[t]->value.data[k] > out.data[k]) {
                out.data[k] = steps[t]->value.data[k];
                argmax[k] = static_cast<int>(t);
            }
        }
    }
    auto n = new_node(std::move(out), steps, "max_over_time");
    if (n->requires_grad) {
        Node* np = n.get();
        n->backward_fn = [np, argmax, d] {
            for (int k = 0; k < d; ++k)
                np->parents[static_cast<std::size_t>(argmax[k])]->accum(
                    static_cast<std::size_t>(k), np->grad.data.data() + k, 1);
        };
    }
    return n;
}

NodeRef weighted_sum(const NodeRef& alpha, const std::vector<NodeRef>& states) {
    require_vector(alpha, "weighted_sum");
    if (static_cast<std::size_t>(alpha->value.rows()) != states.size())
        throw ShapeError("weighted_sum: alpha is " + alpha->value.shape_str() + " for " +
                         std::to_string(states.size()) + " states");
    const int d = states.at(0)->value.rows();
    Tensor out({d});
    for (std::size_t j = 0; j < states.size(); ++j) {
        require_same_shape(states[0]->value, states[j]->value, "weighted_sum");
        const double a = alpha->value.data[j];
        for (int k = 0; k < d; ++k) out.data[k] += a * states[j]->value.data[k];
    }
    std::vector<NodeRef> parents;
    parents.reserve(states.size() + 1);
    parents.push_back(alpha);
    parents.insert(parents.end(), states.begin(), states.end());
    auto n = new_node(std::move(out), std::move(parents), "weighted_sum");
    if (n->requires_grad) {
        Node *np = n.get(), *ap = alpha.get();
        n->backward_fn = [np, ap] {
            const std::size_t m = np->parents.size() - 1;
            const std::size_t d = np->grad.size();
            if (ap->requires_grad) {
                Tensor ga({static_cast<int>(m)});
                for (std::size_t j = 0; j < m; ++j) {
                    double acc = 0.0;
                    const Tensor& sj = np->parents[j + 1]->value;
                    for (std::size_t k = 0; k < d; ++k) acc += np->grad.data[k] * sj.data[k];
                    ga.data[j] = acc;
                }
                ap->accum(ga);
            }
            for (std::size_t j = 0; j < m; ++j) {
                Node* sj = np->parents[j + 1].get();
                if (!sj->requires_grad) continue;
                const double a = ap->value.data[j];
                Tensor gs({static_cast<int>(d)});
                for (std::size_t k = 0; k < d; ++k) gs.data[k] = a * np->grad.data[k];
                sj->accum(gs);
            }
        };
    }
    return n;
}

NodeRef scale_by(const NodeRef& x, const NodeRef& s) {
    if (s->size() != 1) throw ShapeError("scale_by: scale is " + s->value.shape_str());
    const double sv = s->value.data[0];
    Tensor out = x->value;
    for (auto& v : out.data) v *= sv;
    auto n = new_node(std::move(out), {x, s}, "scale_by");
    if (n->requires_grad) {
        Node *np = n.get(), *xp = x.get(), *sp = s.get();
        n->backward_fn = [np, xp, sp, sv] {
            if (xp->requires_grad) {
                Tensor g = np->grad;
                for (auto& v : g.data) v *= sv;
                xp->accum(g);
            }
            if (sp->requires_grad) {
                double acc = 0.0;
                for (std::size_t i = 0; i < np->grad.size(); ++i)
                    acc += np->grad.data[i] * xp->value.data[i];
                sp->accum(0, &acc, 1);
            }
        };
    }
    return n;
}

NodeRef dropout(const NodeRef& x, double p, bool training, Rng& rng) {
    if (p < 0.0 || p >= 1.0)
        throw ConfigError("dropout: probability must be in [0, 1), got " + std::to_string(p));
    if (!training || p == 0.0) return x;
    const double keep_scale = 1.0 / (1.0 - p);
    Tensor mask(x->value.shape);
    for (auto& m : mask.data) m = rng.uniform() < p ? 0.0 : keep_scale;
    Tensor out = x->value;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= mask.data[i];
    auto n = new_node(std::move(out), {x}, "dropout");
    if (n->requires_grad) {
        Node *np = n.get(), *xp = x.get();
        auto mask_ptr = std::make_shared<Tensor>(std::move(mask));
        n->backward_fn = [np, xp, mask_ptr] {
            Tensor g = np->grad;
            for (std::size_t i = 0; i < g.size(); ++i) g.data[i] *= mask_ptr->data[i];
            xp->accum(g);
        };
    }
    return n;
}

}  // namespace art
