#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hybridaug {

/// Dimensions of an image tensor. Channels is 1 (gray) or 3 (RGB).
struct Shape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t size() const { return height * width * channels; }
  std::size_t plane() const { return height * width; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// H x W x C float image stored row-major in (y, x, c) order.
///
/// Source images live in [0, 1]; intermediate results of the augmentations
/// (high-frequency residuals, recombined spectra) may leave that range and
/// are never clamped here.
class ImageTensor {
 public:
  ImageTensor() = default;

  /// Zero-filled image. Throws InvalidArgument on zero dims or channels not in {1, 3}.
  explicit ImageTensor(Shape shape, float fill = 0.0f);

  /// Takes ownership of `data`; its length must equal shape.size().
  ImageTensor(Shape shape, std::vector<float> data);

  const Shape& shape() const { return shape_; }
  std::size_t height() const { return shape_.height; }
  std::size_t width() const { return shape_.width; }
  std::size_t channels() const { return shape_.channels; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float& at(std::size_t y, std::size_t x, std::size_t c) {
    return data_[(y * shape_.width + x) * shape_.channels + c];
  }
  float at(std::size_t y, std::size_t x, std::size_t c) const {
    return data_[(y * shape_.width + x) * shape_.channels + c];
  }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  std::vector<float>& storage() { return data_; }
  const std::vector<float>& storage() const { return data_; }

  /// True when every element is finite.
  bool finite() const;

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  Shape shape_{};
  std::vector<float> data_;
};

/// Throws InvalidArgument unless the shape is a valid image shape.
void validate_shape(const Shape& shape);

/// Element-wise a + b. Shapes must match.
ImageTensor add(const ImageTensor& a, const ImageTensor& b);

/// Element-wise a - b. Shapes must match.
ImageTensor subtract(const ImageTensor& a, const ImageTensor& b);

/// Sum of squared elements, accumulated in double.
double squared_norm(const ImageTensor& x);

/// Largest absolute element-wise difference. Shapes must match.
double max_abs_diff(const ImageTensor& a, const ImageTensor& b);

}  // namespace hybridaug
