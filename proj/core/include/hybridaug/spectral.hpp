#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "hybridaug/image.hpp"

namespace hybridaug {

/// Normalized 1-D Gaussian taps used separably as the low-pass filter.
struct GaussianKernel {
  std::size_t size = 1;
  double sigma = 1.0;
  std::vector<double> weights{1.0};
};

/// Builds a Gaussian kernel with `size` taps (odd, >= 1) and standard
/// deviation `sigma` (> 0). Weights are exp(-d^2 / (2 sigma^2)) for offsets
/// d from the center, normalized to sum to one and mirrored so that
/// w[i] == w[size - 1 - i] holds exactly.
GaussianKernel gaussian_kernel(std::size_t size, double sigma);

/// Separable Gaussian blur: horizontal pass then vertical pass, per channel,
/// with reflect-101 borders (edge pixel not repeated). Accumulates in double.
ImageTensor low_pass(const ImageTensor& x, const GaussianKernel& kernel);

/// The double-precision blur values that low_pass rounds to float, in (y, x, c) order.
std::vector<double> low_pass_values(const ImageTensor& x, const GaussianKernel& kernel);

/// Low/high frequency split of an image; lf + hf reproduces the source.
struct FrequencyDecomposition {
  ImageTensor lf;
  ImageTensor hf;
};

/// lf = low_pass(x), hf = x - lf.
FrequencyDecomposition decompose(const ImageTensor& x, const GaussianKernel& kernel);

/// Per-channel complex spectrum in (u, v, c) order, same layout as ImageTensor.
struct ComplexSpectrum {
  Shape shape;
  std::vector<std::complex<double>> bins;
};

/// Per-channel amplitude/phase representation of a 2-D DFT.
/// amplitude >= 0, phase in (-pi, pi]; layout (u, v, c).
struct Spectrum {
  Shape shape;
  std::vector<double> amplitude;
  std::vector<double> phase;

  double amplitude_at(std::size_t u, std::size_t v, std::size_t c) const {
    return amplitude[(u * shape.width + v) * shape.channels + c];
  }
  double phase_at(std::size_t u, std::size_t v, std::size_t c) const {
    return phase[(u * shape.width + v) * shape.channels + c];
  }
};

/// Unnormalized forward 2-D DFT of each channel.
ComplexSpectrum dft2_complex(const ImageTensor& x);

/// Forward 2-D DFT split into amplitude and principal-argument phase.
/// Phase is 0 wherever the amplitude is exactly 0.
Spectrum dft2(const ImageTensor& x);

/// Converts a complex spectrum to amplitude/phase form.
Spectrum to_polar(const ComplexSpectrum& spec);

/// amplitude * exp(i * phase) for every bin.
ComplexSpectrum to_complex(const Spectrum& spec);

/// Result of an inverse transform: the real image plus the largest
/// magnitude of the imaginary part that was dropped.
struct InverseResult {
  ImageTensor image;
  std::vector<double> values;  // real part before rounding to float
  double max_imag_residual = 0.0;
  double max_abs_real = 0.0;
};

/// Inverse 2-D DFT scaled by 1/(H*W), keeping the real part.
InverseResult idft2_complex(const ComplexSpectrum& spec);

/// Inverse 2-D DFT of amplitude * exp(i * phase), scaled by 1/(H*W). Returns the real part.
ImageTensor idft2(const Spectrum& spec);

/// Same as idft2 but also reports the discarded imaginary residual.
InverseResult idft2_checked(const Spectrum& spec);

/// In-place 1-D DFT of `data` (forward when inverse == false). Uses an
/// iterative radix-2 FFT for power-of-two lengths and a direct O(N^2)
/// transform otherwise. No normalization is applied in either direction.
void dft1(std::span<std::complex<double>> data, bool inverse);

bool is_power_of_two(std::size_t n);

}  // namespace hybridaug
