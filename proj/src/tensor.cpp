#include "cfh/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace cfh {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_to_string(const std::vector<std::size_t>& shape) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << "x";
    out << shape[i];
  }
  out << "]";
  return out.str();
}

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor dimension must be positive, got shape " + shape_to_string(shape));
  }
  data.assign(shape_product(shape), 0.0);
}

Tensor::Tensor(std::vector<std::size_t> s, std::vector<double> values)
    : shape(std::move(s)), data(std::move(values)) {
  if (data.size() != shape_product(shape)) {
    throw ShapeError("tensor data length " + std::to_string(data.size()) +
                     " does not match shape " + shape_to_string(shape));
  }
}

std::size_t Tensor::dim(std::size_t i) const {
  if (i >= shape.size()) throw ShapeError("dim index " + std::to_string(i) + " out of rank " + std::to_string(shape.size()));
  return shape[i];
}

double& Tensor::at(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
const double& Tensor::at(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }

double& Tensor::at(std::size_t i, std::size_t j, std::size_t k) {
  return data[(i * shape[1] + j) * shape[2] + k];
}
const double& Tensor::at(std::size_t i, std::size_t j, std::size_t k) const {
  return data[(i * shape[1] + j) * shape[2] + k];
}

void Tensor::ensure_grad() {
  if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

void Tensor::zero_grad() { grad.assign(data.size(), 0.0); }

std::string Tensor::shape_str() const { return shape_to_string(shape); }

void require_same_shape(const Tensor& a, const Tensor& b, const std::string& who) {
  if (a.shape != b.shape) {
    throw ShapeError(who + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
}

}  // namespace cfh
