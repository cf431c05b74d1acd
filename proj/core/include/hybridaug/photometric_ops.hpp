#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "hybridaug/image.hpp"
#include "hybridaug/random.hpp"

namespace hybridaug {

/// The single-image operations used to build augmented views. None of them
/// overlaps with the ImageNet-C / CIFAR-C corruption families; keep it that
/// way when adding ops.
enum class OpKind : std::uint8_t {
  kPosterize,
  kAutocontrast,
  kEqualize,
  kRotate,
  kSolarize,
  kShearX,
  kShearY,
  kTranslateX,
  kTranslateY,
};

inline constexpr std::size_t kNumOpKinds = 9;

inline constexpr std::array<OpKind, kNumOpKinds> kAllOpKinds = {
    OpKind::kPosterize, OpKind::kAutocontrast, OpKind::kEqualize,
    OpKind::kRotate,    OpKind::kSolarize,     OpKind::kShearX,
    OpKind::kShearY,    OpKind::kTranslateX,   OpKind::kTranslateY,
};

std::string_view op_name(OpKind kind);
std::optional<OpKind> parse_op_kind(std::string_view name);

// Physical ranges reached at magnitude 1.
inline constexpr double kMaxRotateDegrees = 30.0;
inline constexpr double kMaxShear = 0.3;
inline constexpr double kMaxTranslateFraction = 0.25;

/// One operation. `magnitude` in [0, 1] is scaled to the op's physical
/// range; `direction` (+1 or -1) picks the sign for the geometric ops and
/// is ignored by the pixel-value ops.
struct AugOp {
  OpKind kind = OpKind::kRotate;
  double magnitude = 0.0;
  int direction = 1;

  friend bool operator==(const AugOp&, const AugOp&) = default;
};

/// Ordered list of 1 to 3 ops, applied left to right.
struct OpChain {
  std::vector<AugOp> ops;

  friend bool operator==(const OpChain&, const OpChain&) = default;
};

inline constexpr std::size_t kMinChainLength = 1;
inline constexpr std::size_t kMaxChainLength = 3;

/// Applies a single op. Throws InvalidArgument for an out-of-range magnitude,
/// a direction other than +/-1, or an unknown kind.
ImageTensor apply_op(const ImageTensor& x, const AugOp& op);

/// Applies every op of the chain in order. Throws InvalidArgument when the
/// chain length is outside [1, 3].
ImageTensor apply_chain(const ImageTensor& x, const OpChain& chain);

/// Draws a chain: length uniform in {1, 2, 3}; per op a kind uniform over
/// the nine kinds, a magnitude uniform in [0, 1) and a fair-coin direction.
OpChain sample_chain(Rng& rng);

/// The chain [rotate(0)], which leaves any image unchanged.
OpChain identity_chain();

}  // namespace hybridaug
