#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "wlsa/tensor.hpp"

namespace wlsa::grad {

class Graph;

/// Handle to a node in a Graph. Cheap to copy; only valid while its graph lives.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, std::uint32_t id) : graph_(graph), id_(id) {}

  Graph& graph() const { return *graph_; }
  std::uint32_t id() const noexcept { return id_; }
  bool valid() const noexcept { return graph_ != nullptr; }

  const Tensor& value() const;
  /// Gradient after Graph::backward. Zero-filled for nodes the loss does not reach.
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }

 private:
  Graph* graph_ = nullptr;
  std::uint32_t id_ = 0;
};

/// What a recorded op sees during the reverse sweep. `in_grads[i]` is null
/// when input i needs no gradient.
struct BackwardContext {
  const Tensor& out_value;
  const Tensor& out_grad;
  std::span<const Tensor* const> in_values;
  std::span<Tensor* const> in_grads;
};

using BackwardFn = std::function<void(const BackwardContext&)>;

/// Append-only define-by-run tape. Nodes are stored in creation order, which
/// is a topological order because an op can only consume existing nodes.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Leaf that receives a gradient.
  Var parameter(Tensor value);
  /// Leaf that never receives a gradient.
  Var constant(Tensor value);

  /// Records an op output. The node needs a gradient iff any input does.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);

  /// Reverse sweep from a scalar loss. Every node is visited once, in reverse
  /// creation order; gradients of shared inputs accumulate.
  void backward(Var loss);

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  const Tensor& grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// When enabled, every recorded value is scanned for NaN/Inf and a
  /// ContractError is thrown at the first offending op.
  void set_check_finite(bool on) noexcept { check_finite_ = on; }
  bool check_finite() const noexcept { return check_finite_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::uint32_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };

  std::deque<Node> nodes_;  // stable addresses: value() references survive later records
  bool check_finite_ = false;
  bool backward_done_ = false;
};

inline const Tensor& Var::value() const { return graph_->value(*this); }
inline const Tensor& Var::grad() const { return graph_->grad(*this); }

}  // namespace wlsa::grad
