#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace repgeo {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Dense row-major array of doubles. Images are (channels, height, width).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor image(std::size_t channels, std::size_t height, std::size_t width,
                      double fill = 0.0) {
    return Tensor({channels, height, width}, fill);
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Image accessors assume rank 3.
  std::size_t channels() const { return shape_.at(0); }
  std::size_t height() const { return shape_.at(1); }
  std::size_t width() const { return shape_.at(2); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }

  /// Same data viewed under a new shape with equal element count.
  Tensor reshaped(Shape shape) const;
  Tensor flattened() const { return reshaped({size()}); }

  void fill(double value);

  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);
  Tensor& operator*=(double scale);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);
Tensor operator*(double s, Tensor a);

double dot(const Tensor& a, const Tensor& b);
double squared_norm(const Tensor& a);
double norm(const Tensor& a);
double squared_distance(const Tensor& a, const Tensor& b);
bool all_finite(const Tensor& a);

/// Throws ShapeError mentioning `what` unless shapes agree.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

}  // namespace repgeo
