#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "betagan/errors.hpp"
#include "betagan/tensor.hpp"

namespace betagan::ad {

/// Handle to a node on a Tape.
struct Var {
    std::size_t id = static_cast<std::size_t>(-1);
};

/// Gradients of a scalar loss with respect to every leaf on the tape.
class Gradients {
public:
    const Tensor& at(Var v) const {
        if (v.id >= grads_.size() || !is_leaf_[v.id])
            throw ContractError("Gradients::at: var is not a traced leaf");
        return grads_[v.id];
    }

private:
    friend class Tape;
    std::vector<Tensor> grads_;
    std::vector<bool> is_leaf_;
};

/// Record of primitive operations in issue order. Issue order is a
/// topological order by construction (an op's inputs must already exist), so
/// the backward pass is a single reverse sweep that touches every node once.
/// backward() consumes the tape; recording after that is a contract error.
class Tape {
public:
    Var leaf(Tensor value) {
        return push(Op::Leaf, kNone, kNone, std::move(value));
    }

    Var matmul(Var a, Var b) {
        check(a);
        check(b);
        return push(Op::MatMul, a.id, b.id,
                    betagan::matmul(nodes_[a.id].value, nodes_[b.id].value));
    }

    Var add_row_bias(Var x, Var bias) {
        check(x);
        check(bias);
        return push(Op::AddRowBias, x.id, bias.id,
                    betagan::add_row_bias(nodes_[x.id].value, nodes_[bias.id].value));
    }

    /// Elementwise activation; Linear is the identity and records nothing.
    Var activation(Var x, Activation kind) {
        check(x);
        switch (kind) {
            case Activation::Relu:
                return push(Op::Relu, x.id, kNone,
                            betagan::activation(nodes_[x.id].value, kind));
            case Activation::Tanh:
                return push(Op::Tanh, x.id, kNone,
                            betagan::activation(nodes_[x.id].value, kind));
            case Activation::Sigmoid:
                return push(Op::Sigmoid, x.id, kNone,
                            betagan::activation(nodes_[x.id].value, kind));
            case Activation::Linear:
                return x;
        }
        throw ContractError("activation: bad kind");
    }

    /// Fused log(sigmoid(x)); the stable form never evaluates log(0).
    Var log_sigmoid(Var x) {
        check(x);
        const Tensor& in = nodes_[x.id].value;
        Tensor out(in.rows(), in.cols());
        for (std::size_t i = 0; i < in.size(); ++i)
            out.data()[i] = betagan::log_sigmoid(in.data()[i]);
        return push(Op::LogSigmoid, x.id, kNone, std::move(out));
    }

    Var neg(Var x) {
        check(x);
        const Tensor& in = nodes_[x.id].value;
        Tensor out(in.rows(), in.cols());
        for (std::size_t i = 0; i < in.size(); ++i) out.data()[i] = -in.data()[i];
        return push(Op::Neg, x.id, kNone, std::move(out));
    }

    Var add(Var a, Var b) {
        check(a);
        check(b);
        const Tensor& ta = nodes_[a.id].value;
        const Tensor& tb = nodes_[b.id].value;
        if (!ta.same_shape(tb))
            throw DimensionError("add: " + shape_string(ta) + " vs " + shape_string(tb));
        Tensor out = ta;
        for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += tb.data()[i];
        return push(Op::Add, a.id, b.id, std::move(out));
    }

    /// Mean over all entries, as a 1 x 1 tensor.
    Var mean_all(Var x) {
        check(x);
        return push(Op::MeanAll, x.id, kNone, Tensor::scalar(nodes_[x.id].value.mean()));
    }

    const Tensor& value(Var v) const {
        if (v.id >= nodes_.size()) throw ContractError("Tape::value: unknown var");
        return nodes_[v.id].value;
    }

    std::size_t size() const { return nodes_.size(); }

    /// Reverse sweep from a scalar loss. Every recorded node is visited
    /// exactly once, in reverse issue order.
    Gradients backward(Var loss) {
        check(loss);
        const Tensor& lv = nodes_[loss.id].value;
        if (lv.size() != 1)
            throw ContractError("backward: loss must be scalar, got " + shape_string(lv));

        Gradients out;
        out.grads_.reserve(nodes_.size());
        out.is_leaf_.resize(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            out.grads_.emplace_back(nodes_[i].value.rows(), nodes_[i].value.cols());
            out.is_leaf_[i] = nodes_[i].op == Op::Leaf;
        }
        out.grads_[loss.id].at(0, 0) = 1.0;

        for (std::size_t id = nodes_.size(); id-- > 0;) {
            const Node& node = nodes_[id];
            const Tensor& grad = out.grads_[id];
            switch (node.op) {
                case Op::Leaf:
                    break;
                case Op::MatMul:
                    backward_matmul(nodes_[node.a].value, nodes_[node.b].value, grad,
                                    out.grads_[node.a], out.grads_[node.b]);
                    break;
                case Op::AddRowBias: {
                    Tensor& gx = out.grads_[node.a];
                    Tensor& gb = out.grads_[node.b];
                    const std::size_t n = grad.cols();
                    for (std::size_t i = 0; i < grad.rows(); ++i)
                        for (std::size_t j = 0; j < n; ++j) {
                            gx.at(i, j) += grad.at(i, j);
                            gb.at(0, j) += grad.at(i, j);
                        }
                    break;
                }
                case Op::Relu: {
                    Tensor& gx = out.grads_[node.a];
                    const Tensor& in = nodes_[node.a].value;
                    for (std::size_t i = 0; i < grad.size(); ++i)
                        if (in.data()[i] > 0.0) gx.data()[i] += grad.data()[i];
                    break;
                }
                case Op::Tanh: {
                    Tensor& gx = out.grads_[node.a];
                    for (std::size_t i = 0; i < grad.size(); ++i) {
                        const double y = node.value.data()[i];
                        gx.data()[i] += grad.data()[i] * (1.0 - y * y);
                    }
                    break;
                }
                case Op::Sigmoid: {
                    Tensor& gx = out.grads_[node.a];
                    for (std::size_t i = 0; i < grad.size(); ++i) {
                        const double y = node.value.data()[i];
                        gx.data()[i] += grad.data()[i] * y * (1.0 - y);
                    }
                    break;
                }
                case Op::LogSigmoid: {
                    // d/dx log(sigmoid(x)) = sigmoid(-x)
                    Tensor& gx = out.grads_[node.a];
                    const Tensor& in = nodes_[node.a].value;
                    for (std::size_t i = 0; i < grad.size(); ++i)
                        gx.data()[i] += grad.data()[i] * stable_sigmoid(-in.data()[i]);
                    break;
                }
                case Op::Neg: {
                    Tensor& gx = out.grads_[node.a];
                    for (std::size_t i = 0; i < grad.size(); ++i)
                        gx.data()[i] -= grad.data()[i];
                    break;
                }
                case Op::Add: {
                    Tensor& ga = out.grads_[node.a];
                    Tensor& gb = out.grads_[node.b];
                    for (std::size_t i = 0; i < grad.size(); ++i) {
                        ga.data()[i] += grad.data()[i];
                        gb.data()[i] += grad.data()[i];
                    }
                    break;
                }
                case Op::MeanAll: {
                    Tensor& gx = out.grads_[node.a];
                    const double g = grad.at(0, 0) / static_cast<double>(gx.size());
                    for (std::size_t i = 0; i < gx.size(); ++i) gx.data()[i] += g;
                    break;
                }
            }
        }
        consumed_ = true;
        return out;
    }

private:
    enum class Op {
        Leaf,
        MatMul,
        AddRowBias,
        Relu,
        Tanh,
        Sigmoid,
        LogSigmoid,
        Neg,
        Add,
        MeanAll
    };

    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    struct Node {
        Op op;
        std::size_t a;
        std::size_t b;
        Tensor value;
    };

    Var push(Op op, std::size_t a, std::size_t b, Tensor value) {
        if (consumed_) throw ContractError("Tape: already consumed by backward()");
        nodes_.push_back(Node{op, a, b, std::move(value)});
        return Var{nodes_.size() - 1};
    }

    void check(Var v) const {
        if (consumed_) throw ContractError("Tape: already consumed by backward()");
        if (v.id >= nodes_.size()) throw ContractError("Tape: var from another tape");
    }

    static void backward_matmul(const Tensor& a, const Tensor& b, const Tensor& grad,
                                Tensor& ga, Tensor& gb) {
        // C = A(m x k) * B(k x n):  dA = dC * B^T,  dB = A^T * dC.
        const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
        for (std::size_t i = 0; i < m; ++i) {
            const double* grow = grad.row(i);
            for (std::size_t kk = 0; kk < k; ++kk) {
                const double* brow = b.row(kk);
                double dot = 0.0;
                for (std::size_t j = 0; j < n; ++j) dot += grow[j] * brow[j];
                ga.at(i, kk) += dot;
            }
        }
        for (std::size_t i = 0; i < m; ++i) {
            const double* grow = grad.row(i);
            const double* arow = a.row(i);
            for (std::size_t kk = 0; kk < k; ++kk) {
                const double aik = arow[kk];
                double* gbrow = gb.row(kk);
                for (std::size_t j = 0; j < n; ++j) gbrow[j] += aik * grow[j];
            }
        }
    }

    std::vector<Node> nodes_;
    bool consumed_ = false;
};

}  // namespace betagan::ad
