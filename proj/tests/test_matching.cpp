#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "camsel/matching.hpp"

using namespace camsel;

namespace {

std::vector<Descriptor256> random_descriptors(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Descriptor256> out(static_cast<std::size_t>(n));
  for (auto& d : out)
    for (auto& w : d.words) w = rng();
  return out;
}

Descriptor256 flip_bits(Descriptor256 d, int count, std::mt19937_64& rng) {
  std::vector<int> idx(256);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  for (int k = 0; k < count; ++k) d.set_bit(idx[k], !d.bit(idx[k]));
  return d;
}

// Bit-by-bit distance, independent of popcount.
int slow_hamming(const Descriptor256& a, const Descriptor256& b) {
  int n = 0;
  for (int k = 0; k < 256; ++k) n += a.bit(k) != b.bit(k);
  return n;
}

// All-pairs table, then the mutual-nearest rule with lowest-index ties.
std::vector<MatchPair> oracle_match(const std::vector<Descriptor256>& a,
                                    const std::vector<Descriptor256>& b, int max_distance) {
  const std::size_t na = a.size(), nb = b.size();
  std::vector<std::vector<int>> d(na, std::vector<int>(nb));
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) d[i][j] = slow_hamming(a[i], b[j]);
  std::vector<MatchPair> out;
  for (std::size_t i = 0; i < na; ++i) {
    if (nb == 0) break;
    std::size_t j = 0;
    for (std::size_t k = 1; k < nb; ++k)
      if (d[i][k] < d[i][j]) j = k;
    std::size_t back = 0;
    for (std::size_t k = 1; k < na; ++k)
      if (d[k][j] < d[back][j]) back = k;
    if (back == i && d[i][j] <= max_distance)
      out.push_back({static_cast<int>(i), static_cast<int>(j), d[i][j]});
  }
  return out;
}

}  // namespace

TEST(Hamming, MatchesBitwiseCount) {
  const auto ds = random_descriptors(50, 11);
  for (std::size_t i = 0; i + 1 < ds.size(); ++i)
    EXPECT_EQ(hamming_distance(ds[i], ds[i + 1]), slow_hamming(ds[i], ds[i + 1]));
}

TEST(Match, IdenticalSetsGiveIdentity) {
  const auto a = random_descriptors(40, 1);
  const auto m = match_descriptors(a, a);
  ASSERT_EQ(m.size(), a.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_EQ(m[i].index_a, static_cast<int>(i));
    EXPECT_EQ(m[i].index_b, static_cast<int>(i));
    EXPECT_EQ(m[i].distance, 0);
  }
}

TEST(Match, EmptySide) {
  const auto a = random_descriptors(10, 2);
  EXPECT_TRUE(match_descriptors(a, {}).empty());
  EXPECT_TRUE(match_descriptors({}, a).empty());
}

TEST(Match, CorruptedDescriptorsDropOut) {
  const auto a = random_descriptors(20, 3);
  auto b = a;
  std::mt19937_64 rng(4);
  for (int k : {2, 9, 15}) b[k] = flip_bits(b[k], 100, rng);
  const auto m = match_descriptors(a, b);
  EXPECT_EQ(m, oracle_match(a, b, kDefaultMaxMatchDistance));
  EXPECT_EQ(m.size(), 17u);
  for (const auto& p : m) EXPECT_TRUE(p.index_a != 2 && p.index_a != 9 && p.index_a != 15);
}

TEST(Match, AgreesWithAllPairsOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = random_descriptors(30 + trial, 100 + trial);
    std::vector<Descriptor256> b;
    for (const auto& d : a)
      if (rng() % 3) b.push_back(flip_bits(d, static_cast<int>(rng() % 60), rng));
    const auto extra = random_descriptors(10, 200 + trial);
    b.insert(b.end(), extra.begin(), extra.end());
    std::shuffle(b.begin(), b.end(), rng);
    const int max_d = 20 + trial;
    EXPECT_EQ(match_descriptors(a, b, max_d), oracle_match(a, b, max_d)) << "trial " << trial;
  }
}

TEST(Match, PartialInjection) {
  std::mt19937_64 rng(6);
  const auto a = random_descriptors(200, 7);
  std::vector<Descriptor256> b;
  for (int i = 0; i < 150; ++i) b.push_back(flip_bits(a[rng() % a.size()], static_cast<int>(rng() % 40), rng));
  const auto m = match_descriptors(a, b, 256);
  std::set<int> left, right;
  for (const auto& p : m) {
    EXPECT_TRUE(left.insert(p.index_a).second);
    EXPECT_TRUE(right.insert(p.index_b).second);
  }
  EXPECT_TRUE(std::is_sorted(m.begin(), m.end(),
                             [](const MatchPair& x, const MatchPair& y) { return x.index_a < y.index_a; }));
}
