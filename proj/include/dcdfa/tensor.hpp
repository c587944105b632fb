// Copyright 2026 The DCDFA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DCDFA_TENSOR_HPP_
#define DCDFA_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcdfa {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Thrown for shape, domain and contract violations anywhere in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename T>
struct TensorNode {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until first touched
  bool requires_grad = false;
  std::int64_t node_id = -1;

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), T(0));
  }
};

/// Shared handle to a dense row-major array. Copies alias the same storage;
/// use clone() for a deep copy.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> values);

  static Tensor scalar(T value) { return Tensor(Shape{}, std::vector<T>{value}); }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t ndim() const { return node_->shape.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t numel() const { return node_->data.size(); }

  std::span<T> data() { return node_->data; }
  std::span<const T> data() const { return node_->data; }
  std::vector<T>& values() { return node_->data; }
  const std::vector<T>& values() const { return node_->data; }

  /// Gradient buffer, allocated as zeros on first access.
  std::span<T> grad();
  std::span<const T> grad() const;
  bool has_grad() const { return !node_->grad.empty(); }
  void zero_grad();

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool on = true);
  std::int64_t node_id() const { return node_->node_id; }

  T item() const;
  T& operator[](std::size_t i) { return node_->data[i]; }
  const T& operator[](std::size_t i) const { return node_->data[i]; }

  /// Deep copy of the values without gradient or tape linkage.
  Tensor clone() const;
  Tensor detach() const { return clone(); }

  std::shared_ptr<TensorNode<T>> node() const { return node_; }
  explicit Tensor(std::shared_ptr<TensorNode<T>> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<TensorNode<T>> node_;
};

/// One recorded operation: inputs, output and the rule that pushes the
/// output gradient back into the inputs.
template <typename T>
struct TapeRecord {
  std::vector<std::shared_ptr<TensorNode<T>>> inputs;
  std::shared_ptr<TensorNode<T>> output;
  std::function<void()> backward;
};

/// Ordered operation log. Records are appended in execution order, so the
/// log is topologically sorted by construction.
template <typename T>
class Tape {
 public:
  void record(std::vector<std::shared_ptr<TensorNode<T>>> inputs,
              std::shared_ptr<TensorNode<T>> output, std::function<void()> rule);
  void backward(const Tensor<T>& loss);
  void clear();
  std::size_t size() const { return records_.size(); }
  bool recording() const { return enabled_; }
  void set_recording(bool on) { enabled_ = on; }

 private:
  std::vector<TapeRecord<T>> records_;
  std::int64_t next_id_ = 0;
  bool enabled_ = true;
};

/// The calling thread's tape for scalar type T.
template <typename T>
Tape<T>& active_tape();

template <typename T>
void backward(const Tensor<T>& loss) {
  active_tape<T>().backward(loss);
}

/// Disables recording on the current thread's tapes for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_float_;
  bool prev_double_;
};

/// Converts values between scalar types; the result is a fresh leaf.
template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& t) {
  std::vector<To> v(t.values().begin(), t.values().end());
  return Tensor<To>(t.shape(), std::move(v));
}

}  // namespace dcdfa

#endif  // DCDFA_TENSOR_HPP_
