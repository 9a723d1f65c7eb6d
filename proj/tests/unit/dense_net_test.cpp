#include "pmsm/autodiff/dense_net.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "pmsm/autodiff/checkpoint.hpp"
#include "pmsm/error.hpp"

namespace pmsm {
namespace {

TEST(DenseNet, ParameterLayoutIsRowMajorWeightsThenBias) {
  DenseNet net({2, 3, 1});
  EXPECT_EQ(net.num_params(), 2 * 3 + 3 + 3 * 1 + 1);
  net.weight(0)(1, 0) = 5.0;  // output 1, input 0
  EXPECT_EQ(net.params()[2], 5.0);
  net.bias(0)[2] = 7.0;
  EXPECT_EQ(net.params()[8], 7.0);
  EXPECT_EQ(net.bias_offset(1), 12);
}

TEST(DenseNet, PublishedShapes) {
  EXPECT_EQ(solution_net_shape(2), (std::vector<int>{3, 64, 64, 64, 1}));
  EXPECT_EQ(potential_net_shape(6), (std::vector<int>{7, 256, 1}));
}

TEST(DenseNet, GlorotIsSeededAndBounded) {
  const DenseNet a = make_glorot_net({4, 64, 1}, 42);
  const DenseNet b = make_glorot_net({4, 64, 1}, 42);
  const DenseNet c = make_glorot_net({4, 64, 1}, 43);
  EXPECT_TRUE((a.params().array() == b.params().array()).all());
  EXPECT_FALSE((a.params().array() == c.params().array()).all());
  const double limit = std::sqrt(6.0 / 68.0);
  EXPECT_LE(a.weight(0).cwiseAbs().maxCoeff(), limit);
  EXPECT_TRUE(a.bias(0).isZero(0.0));
  EXPECT_TRUE(a.all_finite());
}

TEST(DenseNet, RejectsBadShapes) {
  EXPECT_THROW(DenseNet({3}), ConfigError);
  EXPECT_THROW(DenseNet({3, 0, 1}), ConfigError);
  DenseNet net({2, 1});
  EXPECT_THROW(net.set_params(Eigen::VectorXd::Zero(5)), ConfigError);
}

TEST(Checkpoint, RoundTripsBitExactly) {
  DenseNet net = make_glorot_net({3, 7, 5, 1}, 99);
  net.params()[3] = 1.0 / 3.0;
  net.params()[4] = -5e-310;  // subnormal
  std::stringstream ss;
  write_checkpoint(ss, net);
  const std::string first = ss.str();
  const DenseNet back = read_checkpoint(ss);
  EXPECT_EQ(back.layer_sizes(), net.layer_sizes());
  EXPECT_TRUE((back.params().array() == net.params().array()).all());
  std::stringstream again;
  write_checkpoint(again, back);
  EXPECT_EQ(again.str(), first);
}

TEST(Checkpoint, RejectsCorruptInput) {
  std::stringstream bad("pmsm-densenet 2\n");
  EXPECT_THROW(read_checkpoint(bad), IoError);
  std::stringstream truncated("pmsm-densenet 1\nactivation tanh\nlayers 2 2 1\nparams 3\n0.5\n");
  EXPECT_THROW(read_checkpoint(truncated), IoError);
}

}  // namespace
}  // namespace pmsm
