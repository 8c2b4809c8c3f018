#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ricon/tensor.hpp"

namespace ricon {

enum class Precision { kSingle, kDouble };

// A learnable tensor with its accumulated gradient.
class Param {
 public:
  Param(std::string name, Tensor value, std::size_t index)
      : name_(std::move(name)), value_(std::move(value)),
        grad_(Tensor::zeros_like(value_)), index_(index) {}

  const std::string& name() const { return name_; }
  std::size_t index() const { return index_; }
  Tensor& value() { return value_; }
  const Tensor& value() const { return value_; }
  Tensor& grad() { return grad_; }
  const Tensor& grad() const { return grad_; }
  void zero_grad() { grad_.fill(0.0); }

 private:
  std::string name_;
  Tensor value_;
  Tensor grad_;
  std::size_t index_;
};

// Owns every parameter of a model in registration order. Addresses are stable.
class ParamStore {
 public:
  Param& add(std::string name, Tensor value);
  Param& get(std::string_view name);
  const Param& get(std::string_view name) const;
  Param* find(std::string_view name);
  const Param* find(std::string_view name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t total_entries() const;
  Param& operator[](std::size_t k) { return *params_[k]; }
  const Param& operator[](std::size_t k) const { return *params_[k]; }

  void zero_grad();
  // Rounds every value to the nearest single-precision float.
  void round_to_single();

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::vector<std::unique_ptr<Param>> params_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

// Gradient destination parallel to a ParamStore, used when several graphs
// run concurrently and must not share the parameters' own buffers.
class GradBuffer {
 public:
  explicit GradBuffer(const ParamStore& store);
  Tensor& operator[](std::size_t k) { return grads_[k]; }
  const Tensor& operator[](std::size_t k) const { return grads_[k]; }
  std::size_t size() const { return grads_.size(); }
  void add_to(ParamStore& store) const;

 private:
  std::vector<Tensor> grads_;
};

class Graph;

// Handle to a value recorded on a graph.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  bool valid() const { return graph_ != nullptr; }
  Graph* graph() const { return graph_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  // Convenience for scalar results.
  Real item() const;

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

// Tape of recorded operations. Each op records its output value and a
// closure that propagates the output gradient to its inputs. Backward
// replays the tape in reverse.
class Graph {
 public:
  struct Node;
  using BackwardFn = std::function<void(Graph&, const Node&)>;

  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    Param* param = nullptr;
    bool requires_grad = false;
    const char* op = "";
  };

  explicit Graph(Precision precision = Precision::kDouble)
      : precision_(precision) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Precision precision() const { return precision_; }

  Var constant(Tensor value);
  // Leaf bound to a parameter; repeated calls return the same node.
  Var param(Param& p);

  // Records an op. `fn` runs during backward when the node requires grad.
  Var record(const char* op, Tensor value, std::vector<std::size_t> inputs,
             BackwardFn fn);

  // Propagates d(seed * loss) to every reachable parameter's grad buffer,
  // accumulating. Intermediate gradients are reset on each call.
  void backward(Var loss, Real seed = 1.0);
  void backward(Var loss, GradBuffer& sink, Real seed = 1.0);

  const Node& node(std::size_t id) const { return *nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }

  // Gradient buffer of an input during backward, or nullptr when that
  // input does not require grad.
  Tensor* grad_of(std::size_t id);

 private:
  void run_backward(Var loss, Real seed);

  Precision precision_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::unordered_map<const Param*, std::size_t> param_nodes_;
};

}  // namespace ricon
