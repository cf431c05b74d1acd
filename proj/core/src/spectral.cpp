#include "hybridaug/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hybridaug/errors.hpp"

namespace hybridaug {

GaussianKernel gaussian_kernel(std::size_t size, double sigma) {
  if (size == 0 || size % 2 == 0) {
    throw InvalidArgument("gaussian kernel size must be odd and positive, got " +
                          std::to_string(size));
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("gaussian kernel sigma must be positive");
  }
  const std::size_t radius = (size - 1) / 2;
  std::vector<double> w(size);
  for (std::size_t i = 0; i <= radius; ++i) {
    const double d = static_cast<double>(radius - i);
    w[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < radius; ++i) sum += 2.0 * w[i];
  sum += w[radius];
  for (std::size_t i = 0; i <= radius; ++i) w[i] /= sum;
  for (std::size_t i = 0; i < radius; ++i) w[size - 1 - i] = w[i];
  return GaussianKernel{size, sigma, std::move(w)};
}

namespace {

// reflect-101: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
std::size_t reflect101(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  i %= period;
  if (i < 0) i += period;
  if (i >= static_cast<std::ptrdiff_t>(n)) i = period - i;
  return static_cast<std::size_t>(i);
}

}  // namespace

std::vector<double> low_pass_values(const ImageTensor& x, const GaussianKernel& kernel) {
  const std::size_t h = x.height();
  const std::size_t w = x.width();
  const std::size_t ch = x.channels();
  if (kernel.weights.size() != kernel.size || kernel.size % 2 == 0) {
    throw InvalidArgument("malformed gaussian kernel");
  }
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size / 2);
  const auto& taps = kernel.weights;

  // Precomputed source indices for every output coordinate and tap.
  auto border_table = [&](std::size_t n) {
    std::vector<std::size_t> table(n * kernel.size);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < kernel.size; ++k) {
        table[i * kernel.size + k] =
            reflect101(static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(k) - radius, n);
      }
    }
    return table;
  };
  const auto cols = border_table(w);
  const auto rows = border_table(h);

  std::vector<double> horizontal(x.size());
  auto src = x.data();
  for (std::size_t y = 0; y < h; ++y) {
    const float* row = src.data() + y * w * ch;
    double* out = horizontal.data() + y * w * ch;
    for (std::size_t xx = 0; xx < w; ++xx) {
      const std::size_t* idx = cols.data() + xx * kernel.size;
      for (std::size_t c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < kernel.size; ++k) acc += taps[k] * row[idx[k] * ch + c];
        out[xx * ch + c] = acc;
      }
    }
  }

  std::vector<double> result(x.size());
  double* dst = result.data();
  const std::size_t stride = w * ch;
  std::vector<double> acc(stride);
  for (std::size_t y = 0; y < h; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0);
    const std::size_t* idx = rows.data() + y * kernel.size;
    for (std::size_t k = 0; k < kernel.size; ++k) {
      const double* row = horizontal.data() + idx[k] * stride;
      const double wk = taps[k];
      for (std::size_t i = 0; i < stride; ++i) acc[i] += wk * row[i];
    }
    std::copy(acc.begin(), acc.end(), dst + y * stride);
  }
  return result;
}

ImageTensor low_pass(const ImageTensor& x, const GaussianKernel& kernel) {
  const std::vector<double> values = low_pass_values(x, kernel);
  std::vector<float> data(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) data[i] = static_cast<float>(values[i]);
  return ImageTensor(x.shape(), std::move(data));
}

FrequencyDecomposition decompose(const ImageTensor& x, const GaussianKernel& kernel) {
  ImageTensor lf = low_pass(x, kernel);
  ImageTensor hf = subtract(x, lf);
  return {std::move(lf), std::move(hf)};
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace {

using cd = std::complex<double>;

// exp(sign * 2 pi i k / n) for k in [0, n)
std::vector<cd> twiddles(std::size_t n, bool inverse) {
  std::vector<cd> t(n);
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(n);
    t[k] = cd(std::cos(angle), std::sin(angle));
  }
  return t;
}

// Plain complex product; std::complex operator* takes the slow
// NaN-recovering path unless -ffast-math is on.
inline cd mul(cd a, cd b) {
  return cd(a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real());
}

void fft_radix2(std::span<cd> a, const std::vector<cd>& table) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const cd u = a[start + k];
        const cd v = mul(a[start + k + half], table[k * step]);
        a[start + k] = u + v;
        a[start + k + half] = u - v;
      }
    }
  }
}

void dft_direct(std::span<cd> a, const std::vector<cd>& table, std::vector<cd>& scratch) {
  const std::size_t n = a.size();
  scratch.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd acc(0.0, 0.0);
    std::size_t idx = 0;
    for (std::size_t j = 0; j < n; ++j) {
      acc += mul(a[j], table[idx]);
      idx += k;
      if (idx >= n) idx -= n;
    }
    scratch[k] = acc;
  }
  std::copy(scratch.begin(), scratch.end(), a.begin());
}

// Twiddles for one transform length, reused across every row or column.
struct Plan1d {
  Plan1d(std::size_t n, bool inverse) : table(twiddles(n, inverse)), radix2(is_power_of_two(n)) {}

  void run(std::span<cd> a) {
    if (a.size() <= 1) return;
    if (radix2) {
      fft_radix2(a, table);
    } else {
      dft_direct(a, table, scratch);
    }
  }

  std::vector<cd> table;
  bool radix2;
  std::vector<cd> scratch;
};

// Transforms one channel plane (h x w, row-major) in place.
void dft2_plane(std::vector<cd>& plane, std::size_t h, std::size_t w, bool inverse) {
  Plan1d rows(w, inverse);
  for (std::size_t y = 0; y < h; ++y) rows.run(std::span<cd>(plane.data() + y * w, w));
  Plan1d cols(h, inverse);
  std::vector<cd> column(h);
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < h; ++y) column[y] = plane[y * w + x];
    cols.run(column);
    for (std::size_t y = 0; y < h; ++y) plane[y * w + x] = column[y];
  }
}

}  // namespace

void dft1(std::span<std::complex<double>> data, bool inverse) {
  Plan1d(data.size(), inverse).run(data);
}

ComplexSpectrum dft2_complex(const ImageTensor& x) {
  const Shape shape = x.shape();
  const std::size_t plane_size = shape.plane();
  ComplexSpectrum spec{shape, std::vector<cd>(shape.size())};
  std::vector<cd> plane(plane_size);
  auto src = x.data();
  for (std::size_t c = 0; c < shape.channels; ++c) {
    for (std::size_t i = 0; i < plane_size; ++i) plane[i] = cd(src[i * shape.channels + c], 0.0);
    dft2_plane(plane, shape.height, shape.width, false);
    for (std::size_t i = 0; i < plane_size; ++i) spec.bins[i * shape.channels + c] = plane[i];
  }
  return spec;
}

Spectrum to_polar(const ComplexSpectrum& spec) {
  Spectrum out{spec.shape, std::vector<double>(spec.bins.size()),
               std::vector<double>(spec.bins.size())};
  for (std::size_t i = 0; i < spec.bins.size(); ++i) {
    const cd z = spec.bins[i];
    const double amp = std::abs(z);
    double phase = 0.0;
    if (amp > 0.0) {
      phase = std::arg(z);
      if (phase <= -std::numbers::pi) phase = std::numbers::pi;
    }
    out.amplitude[i] = amp;
    out.phase[i] = phase;
  }
  return out;
}

Spectrum dft2(const ImageTensor& x) { return to_polar(dft2_complex(x)); }

ComplexSpectrum to_complex(const Spectrum& spec) {
  if (spec.amplitude.size() != spec.shape.size() || spec.phase.size() != spec.shape.size()) {
    throw InvalidArgument("spectrum planes do not match its shape");
  }
  ComplexSpectrum out{spec.shape, std::vector<cd>(spec.amplitude.size())};
  for (std::size_t i = 0; i < out.bins.size(); ++i) {
    out.bins[i] = std::polar(spec.amplitude[i], spec.phase[i]);
  }
  return out;
}

InverseResult idft2_complex(const ComplexSpectrum& spec) {
  const Shape shape = spec.shape;
  validate_shape(shape);
  const std::size_t plane_size = shape.plane();
  const double scale = 1.0 / static_cast<double>(plane_size);
  InverseResult result{ImageTensor(shape), std::vector<double>(shape.size()), 0.0, 0.0};
  auto dst = result.image.data();
  std::vector<cd> plane(plane_size);
  for (std::size_t c = 0; c < shape.channels; ++c) {
    for (std::size_t i = 0; i < plane_size; ++i) plane[i] = spec.bins[i * shape.channels + c];
    dft2_plane(plane, shape.height, shape.width, true);
    for (std::size_t i = 0; i < plane_size; ++i) {
      const cd v = plane[i] * scale;
      dst[i * shape.channels + c] = static_cast<float>(v.real());
      result.values[i * shape.channels + c] = v.real();
      result.max_imag_residual = std::max(result.max_imag_residual, std::abs(v.imag()));
      result.max_abs_real = std::max(result.max_abs_real, std::abs(v.real()));
    }
  }
  return result;
}

InverseResult idft2_checked(const Spectrum& spec) { return idft2_complex(to_complex(spec)); }

ImageTensor idft2(const Spectrum& spec) { return idft2_checked(spec).image; }

}  // namespace hybridaug
