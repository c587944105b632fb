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

#include "dcdfa/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace dcdfa {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : node_(std::make_shared<TensorNode<T>>()) {
  node_->data.assign(shape_numel(shape), fill);
  node_->shape = std::move(shape);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values)
    : node_(std::make_shared<TensorNode<T>>()) {
  if (shape_numel(shape) != values.size()) {
    throw Error("tensor: shape " + shape_string(shape) + " needs " +
                std::to_string(shape_numel(shape)) + " values, got " +
                std::to_string(values.size()));
  }
  node_->shape = std::move(shape);
  node_->data = std::move(values);
}

template <typename T>
std::span<T> Tensor<T>::grad() {
  node_->ensure_grad();
  return node_->grad;
}

template <typename T>
std::span<const T> Tensor<T>::grad() const {
  node_->ensure_grad();
  return node_->grad;
}

template <typename T>
void Tensor<T>::zero_grad() {
  std::fill(node_->grad.begin(), node_->grad.end(), T(0));
}

template <typename T>
Tensor<T>& Tensor<T>::set_requires_grad(bool on) {
  node_->requires_grad = on;
  return *this;
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) {
    throw Error("item() on tensor of shape " + shape_string(shape()));
  }
  return node_->data[0];
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  return Tensor<T>(node_->shape, node_->data);
}

template <typename T>
void Tape<T>::record(std::vector<std::shared_ptr<TensorNode<T>>> inputs,
                     std::shared_ptr<TensorNode<T>> output,
                     std::function<void()> rule) {
  output->node_id = next_id_++;
  output->requires_grad = true;
  records_.push_back({std::move(inputs), std::move(output), std::move(rule)});
}

template <typename T>
void Tape<T>::backward(const Tensor<T>& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw Error("backward: loss must be a scalar, got shape " +
                (loss.defined() ? shape_string(loss.shape()) : std::string("<undefined>")));
  }
  if (!loss.requires_grad() || loss.node_id() < 0) {
    throw Error("backward: loss is not on the tape");
  }
  auto root = loss.node();
  root->ensure_grad();
  root->grad[0] += T(1);
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    if (it->output->grad.empty()) continue;
    for (auto& in : it->inputs) {
      if (in->requires_grad) in->ensure_grad();
    }
    it->backward();
  }
  clear();
}

template <typename T>
void Tape<T>::clear() {
  for (auto& r : records_) r.output->node_id = -1;
  records_.clear();
}

template <typename T>
Tape<T>& active_tape() {
  thread_local Tape<T> tape;
  return tape;
}

NoGradGuard::NoGradGuard()
    : prev_float_(active_tape<float>().recording()),
      prev_double_(active_tape<double>().recording()) {
  active_tape<float>().set_recording(false);
  active_tape<double>().set_recording(false);
}

NoGradGuard::~NoGradGuard() {
  active_tape<float>().set_recording(prev_float_);
  active_tape<double>().set_recording(prev_double_);
}

template class Tensor<float>;
template class Tensor<double>;
template class Tape<float>;
template class Tape<double>;
template Tape<float>& active_tape<float>();
template Tape<double>& active_tape<double>();

}  // namespace dcdfa
