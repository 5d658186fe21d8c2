#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "cfh/errors.hpp"

namespace cfh {

/// Dense n-dimensional array of doubles in row-major order, with an
/// optional gradient buffer of the same length. This is the substrate of
/// all network math; shapes up to rank 3 are what the layers actually use.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty, or same length as data

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s);
  Tensor(std::vector<std::size_t> s, std::vector<double> values);

  static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }
  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t i) const;

  double& at(std::size_t i) { return data[i]; }
  const double& at(std::size_t i) const { return data[i]; }
  double& at(std::size_t i, std::size_t j);
  const double& at(std::size_t i, std::size_t j) const;
  double& at(std::size_t i, std::size_t j, std::size_t k);
  const double& at(std::size_t i, std::size_t j, std::size_t k) const;

  void ensure_grad();
  void zero_grad();

  std::string shape_str() const;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);
std::string shape_to_string(const std::vector<std::size_t>& shape);

// Throws ShapeError with both shapes spelled out when they differ.
void require_same_shape(const Tensor& a, const Tensor& b, const std::string& who);

}  // namespace cfh
