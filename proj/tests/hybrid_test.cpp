#include "hybridaug/hybrid.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hybridaug/errors.hpp"
#include "oracles.hpp"

namespace hybridaug {
namespace {

LabeledBatch random_batch(Rng& rng, std::size_t n, std::size_t h, std::size_t w, std::size_t c) {
  LabeledBatch b;
  for (std::size_t i = 0; i < n; ++i) {
    b.images.push_back(oracle::random_image(rng, h, w, c));
    b.labels.push_back(static_cast<std::int64_t>(10 + i));
  }
  return b;
}

// LF and HF of one image through the direct-convolution oracle.
std::pair<std::vector<double>, std::vector<double>> oracle_split(const ImageTensor& x,
                                                                 const GaussianKernel& k) {
  const auto lf = oracle::convolve2d(x, oracle::gaussian_taps(k.size, k.sigma));
  std::vector<double> hf(lf.size());
  for (std::size_t i = 0; i < lf.size(); ++i) hf[i] = x.data()[i] - lf[i];
  return {lf, hf};
}

ImageTensor to_image(const std::vector<double>& v, Shape shape) {
  std::vector<float> data(v.begin(), v.end());
  return ImageTensor(shape, std::move(data));
}

AugmentConfig all_gates(double p) {
  AugmentConfig cfg;
  cfg.p_paired = p;
  cfg.p_single = p;
  cfg.p_inner_apr = p;
  return cfg;
}

// --- apr_p / apr_s -------------------------------------------------------------

TEST(AprP, SelfSwapIsIdentity) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = oracle::random_image(rng, 2 + rng.below(20), 2 + rng.below(20), 3);
    EXPECT_LE(max_abs_diff(apr_p(x, x), x), 1e-6);
  }
}

TEST(AprP, ConstantsTakeAmplitudeDonorValue) {
  const ImageTensor c(Shape{4, 4, 1}, 0.2f);
  const ImageTensor d(Shape{4, 4, 1}, 0.7f);
  const auto y = apr_p(c, d);
  for (float v : y.data()) EXPECT_NEAR(v, 0.7f, 1e-6);
}

TEST(AprP, OutputCarriesDonorAmplitude) {
  Rng rng(2);
  const auto a = oracle::random_image(rng, 4, 4, 1);
  const auto b = oracle::random_image(rng, 4, 4, 1);
  const auto y = apr_p(a, b);
  const auto sy = dft2(y);
  const auto sb = dft2(b);
  for (std::size_t i = 0; i < sy.amplitude.size(); ++i) {
    EXPECT_NEAR(sy.amplitude[i], sb.amplitude[i], 1e-6 * std::max(1.0, sb.amplitude[i]));
  }
}

TEST(AprP, MatchesNaiveOracle) {
  Rng rng(3);
  const auto a = oracle::random_image(rng, 6, 5, 3);
  const auto b = oracle::random_image(rng, 6, 5, 3);
  const auto y = apr_p(a, b);
  for (std::size_t c = 0; c < 3; ++c) {
    const auto ref = oracle::apr(a, b, c);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y.data()[i * 3 + c], ref[i], 1e-6);
  }
}

TEST(AprP, RejectsShapeMismatch) {
  EXPECT_THROW(apr_p(ImageTensor(Shape{4, 4, 1}), ImageTensor(Shape{4, 5, 1})), InvalidArgument);
}

TEST(AprS, IdentityChainsReduceToSelfSwap) {
  Rng rng(4);
  const auto x = oracle::random_image(rng, 8, 8, 3);
  const AprPlan plan{identity_chain(), identity_chain()};
  EXPECT_LE(max_abs_diff(apply_apr_plan(x, plan), x), 1e-6);
}

TEST(AprS, DeterministicAndMatchesPipelineOracle) {
  Rng img_rng(5);
  const auto x = oracle::random_image(img_rng, 8, 8, 1);
  for (std::uint64_t seed : {1u, 2u, 3u, 99u}) {
    Rng r1(seed);
    Rng r2(seed);
    const auto y1 = apr_s(x, r1);
    EXPECT_EQ(y1, apr_s(x, r2));

    Rng r3(seed);
    const OpChain c1 = sample_chain(r3);
    const OpChain c2 = sample_chain(r3);
    const auto ref = oracle::apr(apply_chain(x, c1), apply_chain(x, c2), 0);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y1.data()[i], ref[i], 1e-6);
  }
}

// --- paired ------------------------------------------------------------------------

TEST(HaP, IdentityPermutationLeavesBatch) {
  Rng rng(6);
  const auto batch = random_batch(rng, 4, 8, 8, 3);
  PairedPlan plan;
  plan.hf_source = Permutation{0, 1, 2, 3};
  const auto out = apply_paired_plan(batch, plan, gaussian_kernel(3, 0.5));
  EXPECT_EQ(out.labels, batch.labels);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_LE(max_abs_diff(out.images[i], batch.images[i]), 1e-6);
}

TEST(HaP, GateOffReturnsBatchUnchanged) {
  Rng rng(7);
  const auto batch = random_batch(rng, 3, 6, 6, 1);
  Rng r(1);
  const auto out = ha_p(batch, all_gates(0.0), r);
  EXPECT_EQ(out.images, batch.images);
  EXPECT_EQ(out.labels, batch.labels);
}

TEST(HaP, ConstantImagesKeepTheirValue) {
  LabeledBatch batch;
  for (float v : {0.1f, 0.5f, 0.9f}) {
    batch.images.emplace_back(Shape{5, 5, 1}, v);
    batch.labels.push_back(static_cast<std::int64_t>(v * 10));
  }
  PairedPlan plan;
  plan.hf_source = Permutation{1, 2, 0};  // 0->1, 1->2, 2->0
  const auto out = apply_paired_plan(batch, plan, gaussian_kernel(3, 0.5));
  for (std::size_t i = 0; i < 3; ++i) {
    for (float v : out.images[i].data()) EXPECT_NEAR(v, batch.images[i].data()[0], 1e-6);
  }
  EXPECT_EQ(out.labels, batch.labels);
}

TEST(HaP, MatchesDecomposeAddOracle) {
  Rng rng(8);
  const auto batch = random_batch(rng, 3, 7, 9, 3);
  const auto k = gaussian_kernel(3, 0.5);
  PairedPlan plan;
  plan.hf_source = Permutation{2, 0, 1};
  const auto out = apply_paired_plan(batch, plan, k);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto [lf, hf_unused] = oracle_split(batch.images[i], k);
    const auto [lf_unused, hf] = oracle_split(batch.images[(*plan.hf_source)[i]], k);
    for (std::size_t p = 0; p < lf.size(); ++p) {
      EXPECT_NEAR(out.images[i].data()[p], lf[p] + hf[p], 1e-6);
    }
  }
}

TEST(HaPP, IdentityPermutationsWithInnerSwapAreIdentity) {
  Rng rng(9);
  const auto batch = random_batch(rng, 4, 8, 8, 3);
  PairedPlan plan;
  plan.hf_source = Permutation{0, 1, 2, 3};
  plan.amplitude_source = Permutation{0, 1, 2, 3};
  const auto out = apply_paired_plan(batch, plan, gaussian_kernel(3, 0.5));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_LE(max_abs_diff(out.images[i], batch.images[i]), 1e-6);
}

TEST(HaPP, InnerGateOffEqualsHaP) {
  Rng rng(10);
  const auto batch = random_batch(rng, 4, 8, 8, 1);
  AugmentConfig cfg = all_gates(1.0);
  cfg.p_inner_apr = 0.0;
  // Same seed: the ha_pp_p draw sequence starts with the same gate + permutation.
  Rng r1(42);
  Rng r2(42);
  EXPECT_EQ(ha_pp_p(batch, cfg, r1).images, ha_p(batch, cfg, r2).images);
}

TEST(HaPP, TwoImageBatchMatchesPipelineOracle) {
  Rng rng(11);
  const auto batch = random_batch(rng, 2, 4, 4, 1);
  const auto k = gaussian_kernel(3, 0.5);
  PairedPlan plan;
  plan.hf_source = Permutation{1, 0};
  plan.amplitude_source = Permutation{1, 0};
  const auto out = apply_paired_plan(batch, plan, k);
  const Shape shape = batch.images[0].shape();
  for (std::size_t i = 0; i < 2; ++i) {
    const auto [lf_i, hf_i] = oracle_split(batch.images[i], k);
    const auto [lf_j, hf_j] = oracle_split(batch.images[1 - i], k);
    const auto mixed = oracle::apr(to_image(lf_i, shape), to_image(lf_j, shape), 0);
    for (std::size_t p = 0; p < mixed.size(); ++p) {
      EXPECT_NEAR(out.images[i].data()[p], mixed[p] + hf_j[p], 1e-6);
    }
  }
}

TEST(HaPP, LfAmplitudeComesFromDonor) {
  Rng rng(12);
  const auto batch = random_batch(rng, 3, 8, 8, 3);
  const auto k = gaussian_kernel(3, 0.5);
  PairedPlan plan;
  plan.hf_source = Permutation{1, 2, 0};
  plan.amplitude_source = Permutation{2, 0, 1};
  const auto out = apply_paired_plan(batch, plan, k);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto hf = decompose(batch.images[(*plan.hf_source)[i]], k).hf;
    const auto lf_out = subtract(out.images[i], hf);
    const auto donor = decompose(batch.images[(*plan.amplitude_source)[i]], k).lf;
    const auto a = dft2(lf_out);
    const auto b = dft2(donor);
    const double scale = *std::max_element(b.amplitude.begin(), b.amplitude.end());
    for (std::size_t p = 0; p < a.amplitude.size(); ++p) {
      EXPECT_NEAR(a.amplitude[p], b.amplitude[p], 1e-6 * scale);
    }
  }
}

TEST(PairedPlan, RejectsNonPermutation) {
  Rng rng(13);
  const auto batch = random_batch(rng, 3, 4, 4, 1);
  PairedPlan plan;
  plan.hf_source = Permutation{0, 0, 1};
  EXPECT_THROW(apply_paired_plan(batch, plan, gaussian_kernel(3, 0.5)), InvalidArgument);
}

TEST(LabelPolicy, AllPermutationsKeepLabels) {
  Rng rng(14);
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto batch = random_batch(rng, n, 4, 4, 1);
    Permutation pi(n);
    std::iota(pi.begin(), pi.end(), 0);
    do {
      Permutation rho(n);
      std::iota(rho.begin(), rho.end(), 0);
      do {
        PairedPlan plan{pi, rho};
        ASSERT_EQ(apply_paired_plan(batch, plan, gaussian_kernel(3, 0.5)).labels, batch.labels);
      } while (std::next_permutation(rho.begin(), rho.end()));
      PairedPlan plain{pi, std::nullopt};
      ASSERT_EQ(apply_paired_plan(batch, plain, gaussian_kernel(3, 0.5)).labels, batch.labels);
    } while (std::next_permutation(pi.begin(), pi.end()));
  }
}

// --- single ------------------------------------------------------------------------

TEST(HaS, IdentityChainsReproduceInput) {
  Rng rng(15);
  const auto x = oracle::random_image(rng, 8, 8, 3);
  for (bool lf_first : {true, false}) {
    SinglePlan plan;
    plan.applied = true;
    plan.first_view = identity_chain();
    plan.second_view = identity_chain();
    plan.lf_from_first = lf_first;
    EXPECT_LE(max_abs_diff(apply_single_plan(x, plan, gaussian_kernel(3, 0.5)), x), 1e-6);
  }
}

TEST(HaS, GateOffIsIdentity) {
  Rng rng(16);
  const auto x = oracle::random_image(rng, 8, 8, 3);
  Rng r(3);
  EXPECT_EQ(ha_s(x, all_gates(0.0), r), x);
  EXPECT_EQ(ha_pp_s(x, all_gates(0.0), r), x);
}

TEST(HaS, DeterministicAndMatchesPipelineOracle) {
  Rng img_rng(17);
  const auto x = oracle::random_image(img_rng, 8, 8, 1);
  const AugmentConfig cfg = all_gates(1.0);
  const auto k = cfg.kernel();
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Rng r1(seed);
    Rng r2(seed);
    const auto y = ha_s(x, cfg, r1);
    EXPECT_EQ(y, ha_s(x, cfg, r2));

    // Draw sequence: gate, chain, chain, source selection ("p > prob" -> LF of view 1).
    Rng r(seed);
    ASSERT_LT(r.uniform(), cfg.p_single);
    const auto v1 = apply_chain(x, sample_chain(r));
    const auto v2 = apply_chain(x, sample_chain(r));
    const bool lf_first = r.uniform() >= cfg.p_single;
    const auto [lf1, hf1] = oracle_split(v1, k);
    const auto [lf2, hf2] = oracle_split(v2, k);
    for (std::size_t p = 0; p < x.size(); ++p) {
      const double expected = lf_first ? lf1[p] + hf2[p] : lf2[p] + hf1[p];
      EXPECT_NEAR(y.data()[p], expected, 1e-5);
    }
  }
}

TEST(HaPPS, AllIdentityWithInnerGatesOff) {
  Rng rng(18);
  const auto x = oracle::random_image(rng, 8, 8, 3);
  SinglePlan plan;
  plan.applied = true;
  plan.first_view = identity_chain();
  plan.second_view = identity_chain();
  EXPECT_LE(max_abs_diff(apply_single_plan(x, plan, gaussian_kernel(3, 0.5)), x), 1e-6);
}

TEST(HaPPS, SeededFourByFourMatchesFullOracle) {
  Rng img_rng(19);
  const auto x = oracle::random_image(img_rng, 4, 4, 1);
  const Shape shape = x.shape();
  AugmentConfig cfg = all_gates(1.0);
  cfg.p_single = 0.5;
  cfg.p_inner_apr = 0.6;
  const auto k = cfg.kernel();
  int inner_swaps = 0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    Rng r1(seed);
    Rng r2(seed);
    const auto y = ha_pp_s(x, cfg, r1);
    EXPECT_EQ(y, ha_pp_s(x, cfg, r2));

    Rng r(seed);
    if (r.uniform() >= cfg.p_single) {
      EXPECT_EQ(y, x);
      continue;
    }
    const auto v1 = apply_chain(x, sample_chain(r));
    const auto v2 = apply_chain(x, sample_chain(r));
    auto [lf1, hf1] = oracle_split(v1, k);
    auto [lf2, hf2] = oracle_split(v2, k);
    for (auto* lf : {&lf1, &lf2}) {
      if (r.uniform() < cfg.p_inner_apr) {
        ++inner_swaps;
        const auto lf_img = to_image(*lf, shape);
        const auto phase_view = apply_chain(lf_img, sample_chain(r));
        const auto amp_view = apply_chain(lf_img, sample_chain(r));
        *lf = oracle::apr(phase_view, amp_view, 0);
      }
    }
    const bool lf_first = r.uniform() >= cfg.p_single;
    for (std::size_t p = 0; p < x.size(); ++p) {
      const double expected = lf_first ? lf1[p] + hf2[p] : lf2[p] + hf1[p];
      EXPECT_NEAR(y.data()[p], expected, 1e-5) << "seed " << seed;
    }
  }
  EXPECT_GT(inner_swaps, 0);
}

// --- gates ---------------------------------------------------------------------------

TEST(Gates, FiringRatesMatchConfiguration) {
  const AugmentConfig cfg;  // 0.6 / 0.5 / 0.6
  Rng rng(20);
  std::size_t paired = 0;
  std::size_t inner = 0;
  std::size_t single = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto plan = sample_paired_plan(4, cfg, rng, true);
    if (plan.applied()) {
      ++paired;
      if (plan.amplitude_source) ++inner;
    }
    if (sample_single_plan(cfg, rng, false).applied) ++single;
  }
  EXPECT_NEAR(paired / static_cast<double>(draws), 0.6, 0.02);
  EXPECT_NEAR(inner / static_cast<double>(paired), 0.6, 0.02);
  EXPECT_NEAR(single / static_cast<double>(draws), 0.5, 0.02);
}

// --- dispatch ------------------------------------------------------------------------

TEST(AugmentBatch, ModeNamesRoundTrip) {
  for (auto name : {"apr_s", "apr_p", "ha_s", "ha_p", "ha_pp_s", "ha_pp_p", "ha_ps", "ha_pp_ps", "apr_ps"}) {
    EXPECT_EQ(mode_name(parse_mode(name)), name);
  }
  EXPECT_THROW(parse_mode("mixup"), InvalidArgument);
}

TEST(AugmentBatch, AllGatesOffIsExactIdentity) {
  Rng rng(21);
  const auto batch = random_batch(rng, 5, 8, 8, 3);
  for (auto name : {"apr_s", "apr_p", "ha_s", "ha_p", "ha_pp_s", "ha_pp_p", "ha_ps", "ha_pp_ps", "apr_ps"}) {
    Rng r(7);
    const auto out = augment_batch(batch, parse_mode(name), all_gates(0.0), r);
    EXPECT_EQ(out.images, batch.images) << name;
    EXPECT_EQ(out.labels, batch.labels) << name;
  }
}

TEST(AugmentBatch, DeterministicAndShapePreserving) {
  Rng rng(22);
  const auto batch = random_batch(rng, 6, 8, 8, 3);
  const AugmentConfig cfg = all_gates(1.0);
  for (auto name : {"apr_s", "apr_p", "ha_s", "ha_p", "ha_pp_s", "ha_pp_p", "ha_ps", "ha_pp_ps", "apr_ps"}) {
    Rng r1(123);
    Rng r2(123);
    const auto a = augment_batch(batch, parse_mode(name), cfg, r1);
    const auto b = augment_batch(batch, parse_mode(name), cfg, r2);
    EXPECT_EQ(a.images, b.images) << name;
    EXPECT_EQ(a.labels, batch.labels) << name;
    ASSERT_EQ(a.size(), batch.size());
    for (const auto& img : a.images) {
      EXPECT_EQ(img.shape(), batch.images[0].shape());
      EXPECT_TRUE(img.finite());
    }
  }
}

TEST(AugmentBatch, SingleStageUsesPerImageDerivedStreams) {
  Rng rng(23);
  const auto batch = random_batch(rng, 4, 8, 8, 1);
  const AugmentConfig cfg = all_gates(1.0);
  Rng r(55);
  const auto out = augment_batch(batch, AugmentMode::kHaS, cfg, r);
  const std::uint64_t base = Rng(55).next_u64();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Rng image_rng(derive_seed(base, i));
    EXPECT_EQ(out.images[i], ha_s(batch.images[i], cfg, image_rng));
  }
}

TEST(AugmentBatch, PairedOnlyWithZeroProbabilityIsIdentity) {
  Rng rng(24);
  const auto batch = random_batch(rng, 3, 8, 8, 3);
  AugmentConfig cfg;
  cfg.p_paired = 0.0;
  Rng r(1);
  EXPECT_EQ(augment_batch(batch, AugmentMode::kHaP, cfg, r).images, batch.images);
}

TEST(AugmentBatch, RejectsInvalidInput) {
  LabeledBatch empty;
  Rng r(1);
  EXPECT_THROW(augment_batch(empty, AugmentMode::kHaP, AugmentConfig{}, r), InvalidArgument);
  LabeledBatch mixed;
  mixed.images = {ImageTensor(Shape{4, 4, 1}), ImageTensor(Shape{4, 5, 1})};
  mixed.labels = {0, 1};
  EXPECT_THROW(augment_batch(mixed, AugmentMode::kHaP, AugmentConfig{}, r), InvalidArgument);
  AugmentConfig bad;
  bad.p_paired = 1.5;
  Rng rng(2);
  EXPECT_THROW(augment_batch(random_batch(rng, 2, 4, 4, 1), AugmentMode::kHaP, bad, r),
               InvalidArgument);
}

}  // namespace
}  // namespace hybridaug
