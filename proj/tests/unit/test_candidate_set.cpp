#include <gtest/gtest.h>

#include "cll/candidate_set.hpp"
#include "cll/error.hpp"

namespace {

using cll::CandidateSet;
using cll::InvalidCandidateSet;

TEST(CandidateSet, SortsInput) {
  const CandidateSet Y(6, {4, 1, 3});
  EXPECT_EQ(std::vector<int>(Y.begin(), Y.end()), (std::vector<int>{1, 3, 4}));
  EXPECT_EQ(Y.size(), 3);
  EXPECT_EQ(Y.num_classes(), 6);
  EXPECT_TRUE(Y.contains(3));
  EXPECT_FALSE(Y.contains(0));
  EXPECT_FALSE(Y.contains(17));
}

TEST(CandidateSet, Complement) {
  const CandidateSet Y(5, {0, 2});
  EXPECT_EQ(Y.complement(), CandidateSet(5, {1, 3, 4}));
  EXPECT_EQ(Y.complement().complement(), Y);
}

TEST(CandidateSet, RejectsInvalid) {
  EXPECT_THROW(CandidateSet(4, std::vector<int>{}), InvalidCandidateSet);
  EXPECT_THROW(CandidateSet(3, {0, 1, 2}), InvalidCandidateSet);
  EXPECT_THROW(CandidateSet(3, {0, 0}), InvalidCandidateSet);
  EXPECT_THROW(CandidateSet(3, {3}), InvalidCandidateSet);
  EXPECT_THROW(CandidateSet(3, {-1}), InvalidCandidateSet);
  EXPECT_THROW(CandidateSet(1, {0}), InvalidCandidateSet);
}

TEST(CandidateSet, TwoClassSingleton) {
  const CandidateSet Y(2, {1});
  EXPECT_EQ(Y.complement(), CandidateSet(2, {0}));
}

}  // namespace
