#include "ricon/graph.hpp"

#include <string>

#include "ricon/errors.hpp"

namespace ricon {

Param& ParamStore::add(std::string name, Tensor value) {
  if (by_name_.contains(name)) {
    throw ContractError("duplicate parameter name '" + name + "'");
  }
  std::size_t index = params_.size();
  by_name_.emplace(name, index);
  params_.push_back(std::make_unique<Param>(std::move(name), std::move(value), index));
  return *params_.back();
}

Param* ParamStore::find(std::string_view name) {
  auto it = by_name_.find(std::string(name));
  return it == by_name_.end() ? nullptr : params_[it->second].get();
}

const Param* ParamStore::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  return it == by_name_.end() ? nullptr : params_[it->second].get();
}

Param& ParamStore::get(std::string_view name) {
  if (auto* p = find(name)) return *p;
  throw ContractError("unknown parameter '" + std::string(name) + "'");
}

const Param& ParamStore::get(std::string_view name) const {
  if (const auto* p = find(name)) return *p;
  throw ContractError("unknown parameter '" + std::string(name) + "'");
}

std::size_t ParamStore::total_entries() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += p->value().size();
  return total;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

void ParamStore::round_to_single() {
  for (auto& p : params_) {
    for (auto& v : p->value().values()) v = static_cast<float>(v);
  }
}

GradBuffer::GradBuffer(const ParamStore& store) {
  grads_.reserve(store.size());
  for (const auto& p : store) grads_.push_back(Tensor::zeros_like(p->value()));
}

void GradBuffer::add_to(ParamStore& store) const {
  for (std::size_t k = 0; k < grads_.size(); ++k) store[k].grad() += grads_[k];
}

const Tensor& Var::value() const {
  if (!graph_) throw ContractError("use of an empty Var");
  return graph_->node(id_).value;
}

const Tensor& Var::grad() const {
  if (!graph_) throw ContractError("use of an empty Var");
  return graph_->node(id_).grad;
}

Real Var::item() const {
  const auto& v = value();
  if (v.size() != 1) {
    throw ContractError("item() on non-scalar of shape " + shape_string(v.shape()));
  }
  return v[0];
}

Var Graph::constant(Tensor value) {
  auto node = std::make_unique<Node>();
  node->value = std::move(value);
  node->op = "constant";
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Graph::param(Param& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) {
    return Var(this, it->second);
  }
  auto node = std::make_unique<Node>();
  node->value = p.value();
  node->param = &p;
  node->requires_grad = true;
  node->op = "param";
  nodes_.push_back(std::move(node));
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(const char* op, Tensor value, std::vector<std::size_t> inputs,
                  BackwardFn fn) {
  if (precision_ == Precision::kSingle) {
    for (auto& v : value.values()) v = static_cast<float>(v);
  }
  if (!value.all_finite()) {
    throw NumericError(std::string(op) + " produced a non-finite value");
  }
  auto node = std::make_unique<Node>();
  node->value = std::move(value);
  node->op = op;
  for (auto id : inputs) {
    if (nodes_[id]->requires_grad) node->requires_grad = true;
  }
  node->inputs = std::move(inputs);
  node->backward = std::move(fn);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Tensor* Graph::grad_of(std::size_t id) {
  auto& node = *nodes_[id];
  if (!node.requires_grad) return nullptr;
  if (node.grad.empty()) node.grad = Tensor::zeros_like(node.value);
  return &node.grad;
}

void Graph::run_backward(Var loss, Real seed) {
  if (loss.graph() != this) {
    throw ContractError("backward: loss was not recorded on this graph");
  }
  if (loss.value().size() != 1) {
    throw ContractError("backward: loss must be a scalar, got shape " +
                        shape_string(loss.shape()));
  }
  for (auto& node : nodes_) node->grad = Tensor();
  if (auto* g = grad_of(loss.id())) (*g)[0] = seed;
  for (std::size_t k = loss.id() + 1; k-- > 0;) {
    auto& node = *nodes_[k];
    if (!node.requires_grad || node.grad.empty() || !node.backward) continue;
    node.backward(*this, node);
  }
}

void Graph::backward(Var loss, Real seed) {
  run_backward(loss, seed);
  for (auto& node : nodes_) {
    if (node->param && !node->grad.empty()) node->param->grad() += node->grad;
  }
}

void Graph::backward(Var loss, GradBuffer& sink, Real seed) {
  run_backward(loss, seed);
  for (auto& node : nodes_) {
    if (node->param && !node->grad.empty()) sink[node->param->index()] += node->grad;
  }
}

}  // namespace ricon
