#include "phaseret/ad/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace phaseret::ad {

std::int64_t shape_size(const Shape& s) {
  std::int64_t n = 1;
  for (int d : s) {
    if (d <= 0) throw DimensionError("tensor shape extent must be positive");
    n *= d;
  }
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << "]";
  return os.str();
}

void check_finite(const std::vector<double>& values, const char* what) {
  for (double x : values) {
    if (!std::isfinite(x))
      throw NumericError(std::string(what) + ": non-finite value");
  }
}

namespace detail {

namespace {
std::atomic<std::uint64_t> g_next_id{1};
thread_local int g_no_grad_depth = 0;
}  // namespace

std::shared_ptr<Node> make_node(Shape shape, std::vector<double> values,
                                bool requires_grad, const char* op) {
  if (shape_size(shape) != std::int64_t(values.size()))
    throw DimensionError(std::string(op) + ": value count does not match shape");
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->values = std::move(values);
  n->requires_grad = requires_grad;
  n->needs_grad = requires_grad;
  n->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  n->op = op;
  return n;
}

}  // namespace detail

NoGradGuard::NoGradGuard() { ++detail::g_no_grad_depth; }
NoGradGuard::~NoGradGuard() { --detail::g_no_grad_depth; }

bool grad_enabled() { return detail::g_no_grad_depth == 0; }

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::vector<double> v(shape_size(shape), 0.0);
  return from_values(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::vector<double> v(shape_size(shape), value);
  return from_values(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::from_values(Shape shape, std::vector<double> values,
                           bool requires_grad) {
  check_finite(values, "tensor");
  Tensor t;
  t.node_ = detail::make_node(std::move(shape), std::move(values), requires_grad, "leaf");
  if (requires_grad) t.node_->ensure_grad();
  return t;
}

Tensor Tensor::wrap(std::shared_ptr<detail::Node> n) {
  Tensor t;
  t.node_ = std::move(n);
  return t;
}

const Shape& Tensor::shape() const {
  if (!node_) throw ConfigError("empty tensor");
  return node_->shape;
}

std::int64_t Tensor::size() const { return std::int64_t(values().size()); }

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }
bool Tensor::needs_grad() const { return node_ && node_->needs_grad; }

const std::vector<double>& Tensor::values() const {
  if (!node_) throw ConfigError("empty tensor");
  return node_->values;
}

std::vector<double>& Tensor::mutable_values() {
  if (!node_) throw ConfigError("empty tensor");
  if (!node_->parents.empty())
    throw ConfigError("mutable_values: only leaf tensors may be mutated");
  return node_->values;
}

const std::vector<double>& Tensor::grad() const {
  if (!node_) throw ConfigError("empty tensor");
  const_cast<detail::Node*>(node_.get())->ensure_grad();
  return node_->grad;
}

void Tensor::zero_grad() {
  if (!node_) return;
  node_->grad.assign(node_->values.size(), 0.0);
}

double Tensor::scalar() const {
  if (size() != 1) throw DimensionError("scalar(): tensor has more than one value");
  return values()[0];
}

void Tensor::dump(std::ostream& os) const {
  const auto& s = shape();
  os << "PRT1 " << s.size();
  for (int d : s) os << " " << d;
  os << "\n";
  const auto& v = values();
  os.write(reinterpret_cast<const char*>(v.data()),
           std::streamsize(v.size() * sizeof(double)));
}

void backward(const Tensor& loss) {
  if (!loss.defined()) throw ConfigError("backward: empty tensor");
  if (loss.size() != 1)
    throw ConfigError("backward: loss must be a scalar tensor");

  auto* root = loss.node();
  if (!root->needs_grad) return;  // nothing reachable requires a gradient

  // Collect reachable grad-relevant nodes; construction ids give the order.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<detail::Node*> stack{root};
  seen.insert(root);
  while (!stack.empty()) {
    detail::Node* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents) {
      if (p->needs_grad && seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }
  std::sort(order.begin(), order.end(),
            [](const detail::Node* a, const detail::Node* b) { return a->id > b->id; });

  root->ensure_grad();
  root->grad[0] += 1.0;

  for (detail::Node* n : order) {
    if (!n->backward) continue;
    n->backward(*n);
    for (const auto& p : n->parents) {
      if (p->needs_grad) check_finite(p->grad, n->op);
    }
  }
}

}  // namespace phaseret::ad
