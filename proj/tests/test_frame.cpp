#include <gtest/gtest.h>

#include <sstream>

#include "tnattack/frame.hpp"

using namespace tnattack;

TEST(BuildFrame, OrthonormalWhenStatesFit) {
  EXPECT_LT(build_frame(1, 2, 1).objective, 1e-6);
  EXPECT_LT(build_frame(2, 4, 2).objective, 1e-6);
  EXPECT_LT(build_frame(3, 4, 3).objective, 1e-6);
}

TEST(BuildFrame, SingleQubitFourStatesReachesTightFrameBound) {
  // Value 2 from tests/oracles/frame_oracle.py (multi-start L-BFGS) and the
  // closed-form tight-frame bound sqrt(k^2/d - k).
  EXPECT_DOUBLE_EQ(tight_frame_bound(2, 4), 2.0);
  const auto frame = build_frame(1, 4, 17);
  EXPECT_NEAR(frame.objective, 2.0, 1e-4);
  EXPECT_EQ(frame.bits_per_group, 2u);
}

TEST(BuildFrame, LargerSingleQubitFrames) {
  EXPECT_NEAR(build_frame(1, 8, 5).objective, 4.8989794856, 1e-4);
  EXPECT_NEAR(build_frame(1, 16, 5).objective, 10.5830052443, 1e-4);
}

TEST(BuildFrame, UnitColumnsAndPinnedZeroState) {
  const auto f = build_frame(2, 8, 9);
  for (Eigen::Index j = 0; j < f.columns.cols(); ++j) EXPECT_NEAR(f.columns.col(j).norm(), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(f.columns(0, 0) - cplx(1, 0)), 0.0, 1e-15);
  EXPECT_NEAR(f.columns.col(0).tail(3).norm(), 0.0, 1e-15);
}

TEST(BuildFrame, ObjectiveIsMonotone) {
  const auto run = build_frame_detailed(1, 4, 23);
  ASSERT_GE(run.history.size(), 2u);
  for (std::size_t i = 1; i < run.history.size(); ++i) EXPECT_LE(run.history[i], run.history[i - 1]);
}

TEST(BuildFrame, RejectsBadShapes) {
  EXPECT_THROW(build_frame(1, 3, 0), ShapeError);
  EXPECT_THROW(build_frame(0, 2, 0), ShapeError);
  EXPECT_THROW(build_frame(1, 1, 0), ShapeError);
  EXPECT_THROW(build_frame(7, 2, 0), ShapeError);
}

TEST(BuildFrame, NonConvergenceCarriesBestFrame) {
  FrameOptions opt;
  opt.restarts = 2;
  opt.max_iterations = 1;
  try {
    build_frame(1, 16, 3, opt);
    FAIL() << "expected FrameOptimizationError";
  } catch (const FrameOptimizationError& e) {
    EXPECT_EQ(e.best().k, 16u);
    EXPECT_TRUE(std::isfinite(e.best().objective));
  }
}

TEST(DecodeGroup, ExactFrameStates) {
  const auto f = build_frame(1, 2, 4);
  MatrixC zero = MatrixC::Zero(2, 2), one = MatrixC::Zero(2, 2);
  zero(0, 0) = 1;
  one(1, 1) = 1;
  EXPECT_EQ(decode_group(zero, f), 0u);
  EXPECT_EQ(decode_group(one, f), 1u);
}

TEST(DecodeGroup, MaximallyMixedTiesToLowestIndex) {
  const auto f = build_frame(1, 4, 8);
  const MatrixC mixed = 0.5 * MatrixC::Identity(2, 2);
  const auto fid = frame_fidelities(mixed, f);
  for (double x : fid) EXPECT_NEAR(x, 0.5, 1e-12);
  EXPECT_EQ(decode_group(mixed, f), 0u);
}

TEST(DecodeGroup, InvariantUnderColumnPhases) {
  auto f = build_frame(1, 4, 12);
  auto g = f;
  for (Eigen::Index j = 0; j < g.columns.cols(); ++j) g.columns.col(j) *= std::polar(1.0, 0.7 * static_cast<double>(j + 1));
  for (Eigen::Index j = 0; j < f.columns.cols(); ++j) {
    const VectorC a = f.columns.col(j);
    const MatrixC rho = 0.9 * a * a.adjoint() + 0.05 * MatrixC::Identity(2, 2);
    EXPECT_EQ(decode_group(rho, f), decode_group(rho, g));
    EXPECT_EQ(decode_group(rho, f), static_cast<std::size_t>(j));
  }
}

TEST(DecodeGroup, RejectsInvalidStates) {
  const auto f = build_frame(1, 2, 4);
  MatrixC bad = MatrixC::Zero(2, 2);
  bad(0, 0) = 0.7;
  EXPECT_THROW(decode_group(bad, f), InvalidStateError);
  MatrixC nonherm = 0.5 * MatrixC::Identity(2, 2);
  nonherm(0, 1) = 0.1;
  EXPECT_THROW(decode_group(nonherm, f), InvalidStateError);
  MatrixC negative = MatrixC::Zero(2, 2);
  negative(0, 0) = 1.5;
  negative(1, 1) = -0.5;
  EXPECT_THROW(decode_group(negative, f), InvalidStateError);
}

TEST(KeyGroups, EncodeAndDecode) {
  EXPECT_EQ(encode_key_groups(BitString::parse("1010"), 2), (std::vector<std::size_t>{2, 2}));
  EXPECT_EQ(encode_key_groups(BitString(10), 2), (std::vector<std::size_t>(5, 0)));
  EXPECT_THROW(encode_key_groups(BitString(10), 4), ShapeError);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const std::size_t bpg = 1 + static_cast<std::size_t>(i % 4);
    const auto key = random_bits(bpg * 5, rng);
    EXPECT_EQ(decode_key_groups(encode_key_groups(key, bpg), bpg), key);
  }
}

TEST(FrameText, RoundTrip) {
  const auto f = build_frame(1, 4, 2);
  std::stringstream ss;
  write_frame(ss, f);
  const auto g = read_frame(ss);
  EXPECT_EQ(g.dim, f.dim);
  EXPECT_EQ(g.k, f.k);
  EXPECT_EQ(g.bits_per_group, 2u);
  EXPECT_EQ((g.columns - f.columns).norm(), 0.0);
  EXPECT_EQ(g.objective, f.objective);
  std::istringstream junk("not-a-frame 1");
  EXPECT_THROW(read_frame(junk), ShapeError);
}
