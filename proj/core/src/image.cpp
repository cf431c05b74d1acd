#include "hybridaug/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hybridaug/errors.hpp"

namespace hybridaug {

void validate_shape(const Shape& shape) {
  if (shape.height == 0 || shape.width == 0) {
    throw InvalidArgument("image height and width must be positive");
  }
  if (shape.channels != 1 && shape.channels != 3) {
    throw InvalidArgument("image channels must be 1 or 3, got " + std::to_string(shape.channels));
  }
}

ImageTensor::ImageTensor(Shape shape, float fill) : shape_(shape) {
  validate_shape(shape);
  data_.assign(shape.size(), fill);
}

ImageTensor::ImageTensor(Shape shape, std::vector<float> data)
    : shape_(shape), data_(std::move(data)) {
  validate_shape(shape);
  if (data_.size() != shape.size()) {
    throw InvalidArgument("image data length " + std::to_string(data_.size()) +
                          " does not match shape " + std::to_string(shape.size()));
  }
}

bool ImageTensor::finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

namespace {

void require_same_shape(const ImageTensor& a, const ImageTensor& b) {
  if (a.shape() != b.shape()) throw InvalidArgument("image shapes differ");
}

}  // namespace

ImageTensor add(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b);
  ImageTensor out(a.shape());
  auto o = out.data();
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] + y[i];
  return out;
}

ImageTensor subtract(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b);
  ImageTensor out(a.shape());
  auto o = out.data();
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] - y[i];
  return out;
}

double squared_norm(const ImageTensor& x) {
  double sum = 0.0;
  for (float v : x.data()) sum += static_cast<double>(v) * v;
  return sum;
}

double max_abs_diff(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b);
  double worst = 0.0;
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(x[i]) - y[i]));
  }
  return worst;
}

}  // namespace hybridaug
