#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

using namespace govrt;

namespace {

CandidateMeasurement cand(std::string id, double q, double r, double v, double u, double c) {
  return CandidateMeasurement{std::move(id), q, r, v, u, c, {}};
}

}  // namespace

TEST(Selection, ScoreMatchesDuplicateArithmetic) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto m = oracle::random_candidates(rng, 1).front();
    const auto w = oracle::random_weights(rng);
    EXPECT_NEAR(score(m, w), oracle::objective(m, w), 1e-12);
  }
}

TEST(Selection, HandComputedScore) {
  // 1*.8 + 2*.5 + 0*.9 + 1*.4 - 0.5*1.2 = 1.6
  const ObjectiveWeights w{1.0, 2.0, 0.0, 1.0, 0.5};
  EXPECT_NEAR(score(cand("a", 0.8, 0.5, 0.9, 0.4, 1.2), w), 1.6, 1e-12);
}

TEST(Selection, WinnerMatchesExhaustiveScan) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 500; ++i) {
    const auto cands = oracle::random_candidates(rng, 1 + rng() % 50);
    const auto w = oracle::random_weights(rng);
    const SelectionResult r = select(cands, w);
    EXPECT_EQ(r.winner, oracle::argmax(cands, w)) << "set " << i;
  }
}

TEST(Selection, RankHeadIsWinner) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 500; ++i) {
    const auto cands = oracle::random_candidates(rng, 1 + rng() % 50);
    const auto w = oracle::random_weights(rng);
    const auto ranked = rank(cands, w);
    const auto r = select(cands, w);
    if (ranked.empty()) {
      EXPECT_FALSE(r.winner.has_value());
    } else {
      EXPECT_EQ(ranked.front().first, r.winner);
    }
  }
}

TEST(Selection, ScaleInvariance) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> kappa(0.01, 100.0);
  for (int i = 0; i < 100; ++i) {
    const auto cands = oracle::random_candidates(rng, 1 + rng() % 50);
    const auto w = oracle::random_weights(rng);
    const auto a = select(cands, w);
    const auto b = select(cands, w.scaled(kappa(rng)));
    EXPECT_EQ(a.winner, b.winner);
    EXPECT_EQ(a.excluded, b.excluded);
  }
}

TEST(Selection, TieGoesToSmallestId) {
  const ObjectiveWeights w;
  const std::vector<CandidateMeasurement> cands{cand("h2", 0.5, 0.5, 0.5, 0.5, 0.1), cand("h1", 0.5, 0.5, 0.5, 0.5, 0.1)};
  const auto r = select(cands, w);
  EXPECT_EQ(r.winner, "h1");
  EXPECT_TRUE(r.tie_broken);
}

TEST(Selection, FlaggedCandidateNeverWins) {
  std::mt19937_64 rng(15);
  for (int i = 0; i < 300; ++i) {
    auto cands = oracle::random_candidates(rng, 1 + rng() % 30);
    const auto r = select(cands, oracle::random_weights(rng));
    for (const auto& c : cands) {
      if (!c.constraint_flags.empty()) EXPECT_NE(r.winner, c.config_id);
    }
  }
}

TEST(Selection, AllFlaggedGivesNoWinner) {
  auto a = cand("a", 1, 1, 1, 1, 0);
  a.constraint_flags.insert(ConstraintFlag::safety_violation);
  const std::vector<CandidateMeasurement> cands{a};
  const auto r = select(cands, ObjectiveWeights{});
  EXPECT_FALSE(r.winner.has_value());
  EXPECT_EQ(r.excluded.at("a"), std::set<ConstraintFlag>{ConstraintFlag::safety_violation});
}

TEST(Selection, Errors) {
  const ObjectiveWeights w;
  const std::vector<CandidateMeasurement> none;
  EXPECT_THROW(
      {
        try {
          select(none, w);
        } catch (const KernelError& e) {
          EXPECT_EQ(e.code(), ErrorCode::EmptyCandidateSet);
          throw;
        }
      },
      KernelError);
  auto expect_code = [](auto fn, ErrorCode code) {
    try {
      fn();
      ADD_FAILURE() << "no error";
    } catch (const KernelError& e) {
      EXPECT_EQ(e.code(), code) << e.what();
    }
  };
  const std::vector<CandidateMeasurement> dup{cand("x", .1, .1, .1, .1, 0), cand("x", .2, .2, .2, .2, 0)};
  expect_code([&] { select(dup, w); }, ErrorCode::DuplicateCandidate);
  const std::vector<CandidateMeasurement> bad{cand("x", 1.5, .1, .1, .1, 0)};
  expect_code([&] { select(bad, w); }, ErrorCode::InvalidMeasurement);
  const std::vector<CandidateMeasurement> neg_cost{cand("x", .1, .1, .1, .1, -1)};
  expect_code([&] { select(neg_cost, w); }, ErrorCode::InvalidMeasurement);
  const std::vector<CandidateMeasurement> ok{cand("x", .1, .1, .1, .1, 0)};
  expect_code([&] { select(ok, ObjectiveWeights{0, 0, 0, 0, 0}); }, ErrorCode::InvalidWeights);
  expect_code([&] { select(ok, ObjectiveWeights{-1, 1, 1, 1, 1}); }, ErrorCode::InvalidWeights);
  expect_code([&] { select(ok, ObjectiveWeights{NAN, 1, 1, 1, 1}); }, ErrorCode::InvalidWeights);
}
