#include "hybridaug/photometric_ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "hybridaug/errors.hpp"

namespace hybridaug {

namespace {

constexpr std::array<std::string_view, kNumOpKinds> kOpNames = {
    "posterize", "autocontrast", "equalize", "rotate",      "solarize",
    "shear_x",   "shear_y",      "translate_x", "translate_y",
};

int quantize(float v) {
  const long q = std::lround(static_cast<double>(v) * 255.0);
  return static_cast<int>(std::clamp(q, 0L, 255L));
}

float dequantize(int q) { return static_cast<float>(q / 255.0); }

// Applies a per-channel 256-entry lookup table built from the quantized values.
template <typename BuildLut>
ImageTensor map_channels(const ImageTensor& x, BuildLut build_lut) {
  ImageTensor out(x.shape());
  const std::size_t ch = x.channels();
  const std::size_t n = x.shape().plane();
  auto src = x.data();
  auto dst = out.data();
  std::vector<int> q(n);
  for (std::size_t c = 0; c < ch; ++c) {
    std::array<std::size_t, 256> hist{};
    for (std::size_t i = 0; i < n; ++i) {
      q[i] = quantize(src[i * ch + c]);
      ++hist[q[i]];
    }
    const std::array<int, 256> lut = build_lut(hist);
    for (std::size_t i = 0; i < n; ++i) dst[i * ch + c] = dequantize(lut[q[i]]);
  }
  return out;
}

std::array<int, 256> identity_lut() {
  std::array<int, 256> lut{};
  for (int i = 0; i < 256; ++i) lut[i] = i;
  return lut;
}

ImageTensor posterize(const ImageTensor& x, double magnitude) {
  const int bits = 8 - static_cast<int>(std::lround(magnitude * 4.0));
  const int mask = ~((1 << (8 - bits)) - 1) & 0xff;
  return map_channels(x, [mask](const std::array<std::size_t, 256>&) {
    std::array<int, 256> lut{};
    for (int i = 0; i < 256; ++i) lut[i] = i & mask;
    return lut;
  });
}

ImageTensor autocontrast(const ImageTensor& x) {
  return map_channels(x, [](const std::array<std::size_t, 256>& hist) {
    int lo = 0;
    while (lo < 255 && hist[lo] == 0) ++lo;
    int hi = 255;
    while (hi > 0 && hist[hi] == 0) --hi;
    if (hi <= lo) return identity_lut();
    std::array<int, 256> lut{};
    const double scale = 255.0 / (hi - lo);
    for (int i = 0; i < 256; ++i) {
      const long v = std::lround((i - lo) * scale);
      lut[i] = static_cast<int>(std::clamp(v, 0L, 255L));
    }
    return lut;
  });
}

// Cumulative-histogram equalization in the PIL formulation: the step size
// ignores the population of the brightest occupied bin.
ImageTensor equalize(const ImageTensor& x) {
  return map_channels(x, [](const std::array<std::size_t, 256>& hist) {
    std::size_t total = 0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < 256; ++i) {
      total += hist[i];
      if (hist[i] != 0) last = hist[i];
    }
    const std::size_t step = (total - last) / 255;
    if (step == 0) return identity_lut();
    std::array<int, 256> lut{};
    std::size_t running = step / 2;
    for (std::size_t i = 0; i < 256; ++i) {
      lut[i] = static_cast<int>(std::min<std::size_t>(running / step, 255));
      running += hist[i];
    }
    return lut;
  });
}

ImageTensor solarize(const ImageTensor& x, double magnitude) {
  const double threshold = 1.0 - 0.5 * magnitude;
  ImageTensor out = x;
  for (float& v : out.data()) {
    if (v > threshold) v = static_cast<float>(1.0 - v);
  }
  return out;
}

// Resamples with bilinear interpolation; `source` maps an output pixel
// center to source coordinates. Samples outside the image read as zero.
template <typename SourceMap>
ImageTensor resample(const ImageTensor& x, SourceMap source) {
  const std::size_t h = x.height();
  const std::size_t w = x.width();
  const std::size_t ch = x.channels();
  ImageTensor out(x.shape());
  auto pixel = [&](std::ptrdiff_t yy, std::ptrdiff_t xx, std::size_t c) -> double {
    if (yy < 0 || xx < 0 || yy >= static_cast<std::ptrdiff_t>(h) ||
        xx >= static_cast<std::ptrdiff_t>(w)) {
      return 0.0;
    }
    return x.at(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx), c);
  };
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t xx = 0; xx < w; ++xx) {
      const auto [sx, sy] = source(static_cast<double>(xx), static_cast<double>(y));
      const double fx0 = std::floor(sx);
      const double fy0 = std::floor(sy);
      const double ax = sx - fx0;
      const double ay = sy - fy0;
      const auto x0 = static_cast<std::ptrdiff_t>(fx0);
      const auto y0 = static_cast<std::ptrdiff_t>(fy0);
      for (std::size_t c = 0; c < ch; ++c) {
        double v = (1.0 - ay) * (1.0 - ax) * pixel(y0, x0, c);
        if (ax != 0.0) v += (1.0 - ay) * ax * pixel(y0, x0 + 1, c);
        if (ay != 0.0) {
          v += ay * (1.0 - ax) * pixel(y0 + 1, x0, c);
          if (ax != 0.0) v += ay * ax * pixel(y0 + 1, x0 + 1, c);
        }
        out.at(y, xx, c) = static_cast<float>(v);
      }
    }
  }
  return out;
}

struct Point {
  double x;
  double y;
};

ImageTensor rotate(const ImageTensor& x, double degrees) {
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double cx = (static_cast<double>(x.width()) - 1.0) / 2.0;
  const double cy = (static_cast<double>(x.height()) - 1.0) / 2.0;
  return resample(x, [=](double px, double py) {
    const double dx = px - cx;
    const double dy = py - cy;
    return Point{cs * dx + sn * dy + cx, -sn * dx + cs * dy + cy};
  });
}

ImageTensor shear_x(const ImageTensor& x, double factor) {
  const double cy = (static_cast<double>(x.height()) - 1.0) / 2.0;
  return resample(x, [=](double px, double py) { return Point{px + factor * (py - cy), py}; });
}

ImageTensor shear_y(const ImageTensor& x, double factor) {
  const double cx = (static_cast<double>(x.width()) - 1.0) / 2.0;
  return resample(x, [=](double px, double py) { return Point{px, py + factor * (px - cx)}; });
}

ImageTensor translate(const ImageTensor& x, double dx, double dy) {
  return resample(x, [=](double px, double py) { return Point{px - dx, py - dy}; });
}

}  // namespace

std::string_view op_name(OpKind kind) {
  const auto idx = static_cast<std::size_t>(kind);
  if (idx >= kNumOpKinds) return "unknown";
  return kOpNames[idx];
}

std::optional<OpKind> parse_op_kind(std::string_view name) {
  for (std::size_t i = 0; i < kNumOpKinds; ++i) {
    if (kOpNames[i] == name) return static_cast<OpKind>(i);
  }
  return std::nullopt;
}

ImageTensor apply_op(const ImageTensor& x, const AugOp& op) {
  if (!(op.magnitude >= 0.0 && op.magnitude <= 1.0)) {
    throw InvalidArgument("op magnitude must lie in [0, 1]");
  }
  if (op.direction != 1 && op.direction != -1) {
    throw InvalidArgument("op direction must be +1 or -1");
  }
  const double signed_mag = op.magnitude * op.direction;
  switch (op.kind) {
    case OpKind::kPosterize:
      return posterize(x, op.magnitude);
    case OpKind::kAutocontrast:
      return autocontrast(x);
    case OpKind::kEqualize:
      return equalize(x);
    case OpKind::kRotate:
      return rotate(x, signed_mag * kMaxRotateDegrees);
    case OpKind::kSolarize:
      return solarize(x, op.magnitude);
    case OpKind::kShearX:
      return shear_x(x, signed_mag * kMaxShear);
    case OpKind::kShearY:
      return shear_y(x, signed_mag * kMaxShear);
    case OpKind::kTranslateX:
      return translate(x, signed_mag * kMaxTranslateFraction * static_cast<double>(x.width()), 0.0);
    case OpKind::kTranslateY:
      return translate(x, 0.0, signed_mag * kMaxTranslateFraction * static_cast<double>(x.height()));
  }
  throw InvalidArgument("unknown op kind " + std::to_string(static_cast<int>(op.kind)));
}

ImageTensor apply_chain(const ImageTensor& x, const OpChain& chain) {
  if (chain.ops.size() < kMinChainLength || chain.ops.size() > kMaxChainLength) {
    throw InvalidArgument("op chain length must be between 1 and 3");
  }
  ImageTensor out = apply_op(x, chain.ops.front());
  for (std::size_t i = 1; i < chain.ops.size(); ++i) out = apply_op(out, chain.ops[i]);
  return out;
}

OpChain sample_chain(Rng& rng) {
  const std::size_t length = kMinChainLength + static_cast<std::size_t>(rng.below(kMaxChainLength));
  OpChain chain;
  chain.ops.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    AugOp op;
    op.kind = kAllOpKinds[rng.below(kNumOpKinds)];
    op.magnitude = rng.uniform();
    op.direction = rng.chance(0.5) ? 1 : -1;
    chain.ops.push_back(op);
  }
  return chain;
}

OpChain identity_chain() { return OpChain{{AugOp{OpKind::kRotate, 0.0, 1}}}; }

}  // namespace hybridaug
