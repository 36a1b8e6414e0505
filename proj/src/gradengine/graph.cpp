#include "wlsa/graph.hpp"

#include <string>

#include "wlsa/errors.hpp"

namespace wlsa::grad {

Var Graph::parameter(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Graph::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Graph::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  if (check_finite_ && !value.all_finite()) {
    throw ContractError("non-finite value produced by op at node " + std::to_string(nodes_.size()));
  }
  Node n;
  n.value = std::move(value);
  n.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    if (&in.graph() != this) throw ContractError("op mixes nodes from different graphs");
    n.inputs.push_back(in.id());
    n.requires_grad = n.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

const Tensor& Graph::grad(Var v) const {
  if (!backward_done_) throw ContractError("grad() requested before backward()");
  return nodes_[v.id()].grad;
}

void Graph::backward(Var loss) {
  if (&loss.graph() != this) throw ContractError("loss belongs to another graph");
  if (nodes_[loss.id()].value.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " +
                        shape_string(nodes_[loss.id()].value.shape()));
  }
  if (backward_done_) throw ContractError("backward() already ran on this graph");
  backward_done_ = true;

  Node& root = nodes_[loss.id()];
  root.grad = Tensor(root.value.shape(), 1.0);

  std::vector<const Tensor*> in_values;
  std::vector<Tensor*> in_grads;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward || n.grad.size() == 0) continue;
    in_values.clear();
    in_grads.clear();
    for (std::uint32_t in : n.inputs) {
      Node& src = nodes_[in];
      in_values.push_back(&src.value);
      if (src.requires_grad) {
        if (src.grad.size() == 0) src.grad = Tensor(src.value.shape());
        in_grads.push_back(&src.grad);
      } else {
        in_grads.push_back(nullptr);
      }
    }
    n.backward(BackwardContext{n.value, n.grad, in_values, in_grads});
  }
  // Nodes the loss does not reach report a zero gradient.
  for (Node& n : nodes_) {
    if (n.grad.size() != n.value.size()) n.grad = Tensor(n.value.shape());
  }
}

}  // namespace wlsa::grad
