#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "phaseret/errors.hpp"

namespace phaseret::ad {

using Shape = std::vector<int>;

std::int64_t shape_size(const Shape& s);
std::string shape_str(const Shape& s);

namespace detail {

/// One record of the differentiation tape. Nodes are created in execution
/// order with a monotonically increasing id, so sorting reachable nodes by id
/// gives the exact reverse topological order for the backward pass.
struct Node {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // same length as values once touched
  bool requires_grad = false;
  bool needs_grad = false;  // requires_grad or downstream of one
  std::uint64_t id = 0;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;  // accumulates into parents' grad

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }
};

std::shared_ptr<Node> make_node(Shape shape, std::vector<double> values,
                                bool requires_grad, const char* op);

}  // namespace detail

/// While a guard is alive, newly created ops do not record the tape (values
/// are still computed). Used for inference-only forward passes.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

bool grad_enabled();

/// N-dimensional dense double tensor with reverse-mode gradients. Value
/// semantics over shared node state: copies alias the same storage.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_values(Shape shape, std::vector<double> values,
                            bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  int dim(int i) const { return shape().at(i); }
  int rank() const { return int(shape().size()); }
  std::int64_t size() const;

  bool requires_grad() const;
  bool needs_grad() const;

  const std::vector<double>& values() const;
  /// Leaf-only mutable access (optimizer updates). Throws on op outputs.
  std::vector<double>& mutable_values();
  /// Gradient buffer; zero-filled for requires_grad leaves never touched by
  /// a backward pass.
  const std::vector<double>& grad() const;
  void zero_grad();

  double scalar() const;  // value of a size-1 tensor

  /// Debug dump: one plain-text shape header line then raw little-endian
  /// doubles.
  void dump(std::ostream& os) const;

  detail::Node* node() const { return node_.get(); }
  std::shared_ptr<detail::Node> node_ptr() const { return node_; }
  static Tensor wrap(std::shared_ptr<detail::Node> n);

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Reverse pass from a scalar loss: fills grad for every needs_grad tensor
/// reachable through the tape, accumulating over fan-out by summation.
void backward(const Tensor& loss);

void check_finite(const std::vector<double>& values, const char* what);

}  // namespace phaseret::ad
