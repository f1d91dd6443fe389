#include <gtest/gtest.h>

#include <random>

#include "mts/constructions.hpp"
#include "mts/dealer.hpp"
#include "oracles.hpp"

using namespace mts;

namespace {

StructurePair S(int n, std::vector<SubArray> g) { return make_structure(n, std::move(g)); }

SecretAssignment random_secrets(std::mt19937_64& rng, const LinearScheme& sc) {
  SecretAssignment out;
  for (int i = 0; i < sc.structure().array.total(); ++i) {
    std::vector<Element> v(sc.width(static_cast<std::size_t>(i)));
    for (Element& e : v) e = rng() % sc.modulus().value();
    out.push_back(v);
  }
  return out;
}

ShareBundle subset(const ShareBundle& b, std::vector<int> who) {
  ShareBundle out;
  out.fingerprint = b.fingerprint;
  for (int i : who) out.shares[i] = b.shares.at(i);
  return out;
}

}  // namespace

TEST(Deal, SingleThresholdRoundTrip) {
  LinearScheme sc = build_single_threshold(2, 2);
  ShareBundle b = deal(sc, {{3}}, 1);
  ASSERT_EQ(b.shares.size(), 2u);
  auto got = reconstruct(sc, b, 1);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].first, VariableId::secret(1, 1));
  EXPECT_EQ(got[0].second, (std::vector<Element>{3}));
}

TEST(Deal, SharesAreCodewordProjections) {
  // Shares of V(2,[3]) over F_5 lie on a line through the secret: s + r*x.
  LinearScheme sc = build_single_threshold(2, 2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ShareBundle b = deal(sc, {{4}}, seed);
    Element d = gf::sub(b.shares[1][0], 4, 5);
    EXPECT_EQ(b.shares[2][0], gf::add(4, gf::mul(2, d, 5), 5));
  }
}

TEST(Deal, ZeroSecretsWithoutRandomness) {
  LinearScheme sc = build_B(3, {3, 4}, {2, 1});
  ASSERT_EQ(sc.n_rows(), 5u);
  ShareBundle b = deal(sc, {{0}, {0}, {0}, {0}, {0}}, 7);
  for (const auto& [i, v] : b.shares) EXPECT_EQ(v, std::vector<Element>(v.size(), 0)) << i;
}

TEST(Deal, SeedsAreDeterministic) {
  LinearScheme sc = build_single_threshold(3, 4);
  EXPECT_EQ(deal(sc, {{2}}, 5), deal(sc, {{2}}, 5));
  bool differs = false;
  for (std::uint64_t seed = 6; seed < 12; ++seed) differs = differs || !(deal(sc, {{2}}, 5) == deal(sc, {{2}}, seed));
  EXPECT_TRUE(differs);
}

TEST(Deal, RejectsBadSecrets) {
  LinearScheme sc = build_single_threshold(2, 2);
  EXPECT_THROW(deal(sc, {}, 1), Error);
  EXPECT_THROW(deal(sc, {{1, 2}}, 1), Error);
  EXPECT_THROW(deal(sc, {{5}}, 1), Error);
}

TEST(Reconstruct, TwoThresholds) {
  StructurePair s = S(3, {{3, 1}, {2, 1}});
  LinearScheme sc = build_optimal(s, {Ratio::kSigma, Security::kStrong});
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    SecretAssignment secrets = random_secrets(rng, sc);
    ShareBundle all = deal(sc, secrets, rng());
    auto low = reconstruct(sc, subset(all, {1, 2}), 2);
    ASSERT_EQ(low.size(), 1u);
    EXPECT_EQ(low[0].first, VariableId::secret(2, 1));
    EXPECT_EQ(low[0].second, secrets[1]);
    auto both = reconstruct(sc, all, 1);
    ASSERT_EQ(both.size(), 2u);
    EXPECT_EQ(both[0].second, secrets[0]);
    EXPECT_EQ(both[1].second, secrets[1]);
    try {
      reconstruct(sc, subset(all, {2, 3}), 1);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(std::string(e.what()), "unqualified set");
    }
  }
}

TEST(Reconstruct, Errors) {
  LinearScheme sc = build_single_threshold(2, 3);
  ShareBundle b = deal(sc, {{1}}, 3);
  ShareBundle tampered = b;
  tampered.shares[3][0] = (tampered.shares[3][0] + 1) % sc.modulus().value();
  try {
    reconstruct(sc, tampered, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()), "inconsistent shares");
  }
  ShareBundle foreign = b;
  foreign.fingerprint ^= 1;
  try {
    reconstruct(sc, foreign, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()), "share bundle does not belong to this scheme");
  }
  EXPECT_THROW(reconstruct(sc, b, 2), Error);
  ShareBundle wide = b;
  wide.shares[1].push_back(0);
  EXPECT_THROW(reconstruct(sc, wide, 1), Error);
}

TEST(Census, SingleThreshold) {
  LinearScheme sc = build_single_threshold(2, 2);
  const StructurePair& s = sc.structure();
  CensusTable one = leakage_census(sc, 0b01, all_secrets_mask(s));
  EXPECT_EQ(one.codewords, 25u);
  EXPECT_TRUE(one.independent());
  EXPECT_EQ(one.joint.size(), 5u);
  for (const auto& [a, row] : one.joint) {
    EXPECT_EQ(row.size(), 5u);
    for (const auto& [t, n] : row) EXPECT_EQ(n, 1u);
  }
  EXPECT_FALSE(leakage_census(sc, 0b11, all_secrets_mask(s)).independent());
  EXPECT_TRUE(leakage_census(sc, 0, all_secrets_mask(s)).independent());
}

TEST(Census, WeakOnlyPairLeaksJointly) {
  LinearScheme sc = build_weak_block(3, 2, 2);
  const StructurePair& s = sc.structure();
  EXPECT_TRUE(leakage_census(sc, 0b001, bit(0)).independent());
  EXPECT_TRUE(leakage_census(sc, 0b001, bit(1)).independent());
  CensusTable pair = leakage_census(sc, 0b001, all_secrets_mask(s));
  EXPECT_FALSE(pair.independent());
  EXPECT_EQ(pair.target_marginal().size(), sc.modulus().value() * sc.modulus().value());
}

TEST(Census, MatchesRankCriterion) {
  std::mt19937_64 rng(52);
  int leaks = 0, safe = 0;
  for (int trial = 0; trial < 60; ++trial) {
    StructurePair s = oracle::random_structure(rng, 3, 2, 3);
    Prime q(3);
    std::size_t rows = 1 + rng() % 4;
    std::vector<MatrixFq> blocks;
    for (std::size_t i = 0; i < n_variables(s); ++i) {
      MatrixFq b = oracle::random_matrix(rng, q, rows, 1);
      if (rank(b) == 0) b(0, 0) = 1;
      blocks.push_back(b);
    }
    LinearScheme sc(s, q, rows, blocks);
    std::uint32_t a = static_cast<std::uint32_t>(rng() % (1u << s.n));
    VarMask target = (rng() & all_secrets_mask(s)) | bit(0);
    std::size_t ra = rank(sc.columns(shares_mask(s, a)));
    std::size_t rt = rank(sc.columns(target));
    bool want = rank(sc.columns(target | shares_mask(s, a))) == ra + rt;
    ASSERT_EQ(leakage_census(sc, a, target).independent(), want) << "trial " << trial;
    (want ? safe : leaks) += 1;
  }
  EXPECT_GT(leaks, 0);
  EXPECT_GT(safe, 0);
}

TEST(Census, ThreadCountDoesNotMatter) {
  LinearScheme sc = build_B(3, {3, 4}, {2, 1});
  const StructurePair& s = sc.structure();
  CensusTable one = leakage_census(sc, 0b011, all_secrets_mask(s), 1);
  CensusTable many = leakage_census(sc, 0b011, all_secrets_mask(s), 3);
  EXPECT_EQ(one.joint, many.joint);
  EXPECT_EQ(one.codewords, many.codewords);
}

TEST(Census, Errors) {
  LinearScheme sc = build_single_threshold(2, 2);
  EXPECT_THROW(leakage_census(sc, 1, 0), Error);
  EXPECT_THROW(leakage_census(sc, 1, bit(1)), Error);
  EXPECT_THROW(leakage_census(sc, 0b100, bit(0)), Error);
  try {
    leakage_census(build_A(4, {3, 5}, 2), 1, bit(0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()), "scheme too large for census");
  }
}

TEST(BundleText, RoundTrip) {
  LinearScheme sc = build_B(3, {3, 4}, {2, 1});
  std::mt19937_64 rng(53);
  ShareBundle b = deal(sc, random_secrets(rng, sc), 9);
  std::string text = serialize(b);
  EXPECT_EQ(text.rfind("mts-shares v1\nfingerprint ", 0), 0u);
  EXPECT_EQ(parse_bundle(text), b);
  ShareBundle part = subset(b, {2});
  EXPECT_EQ(parse_bundle(serialize(part)), part);
}

TEST(BundleText, RejectsMalformed) {
  EXPECT_THROW(parse_bundle(""), Error);
  EXPECT_THROW(parse_bundle("mts-shares v1\nfingerprint xyz\n"), Error);
  EXPECT_THROW(parse_bundle("mts-shares v1\nfingerprint 0000000000000001\nQ 1 : 2\n"), Error);
  EXPECT_THROW(parse_bundle("mts-shares v1\nfingerprint 0000000000000001\nP 1 : 2\nP 1 : 3\n"), Error);
  EXPECT_THROW(parse_bundle("mts-shares v1\nfingerprint 0000000000000001\nP 1 : x\n"), Error);
}

TEST(UniformElement, StaysInRange) {
  std::mt19937_64 rng(54);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 7000; ++i) {
    Element e = detail::uniform_element(rng, 7);
    ASSERT_LT(e, 7u);
    hist[e]++;
  }
  for (int h : hist) EXPECT_GT(h, 800);
}
