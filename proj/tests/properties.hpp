#pragma once

// Randomised invariant checks shared by the property tests and the
// acceptance binary. Each returns how many cases ran and which failed.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "camsel/arbitration.hpp"
#include "camsel/epipolar.hpp"
#include "camsel/network.hpp"
#include "camsel/oracle.hpp"
#include "support.hpp"

namespace camsel::properties {

struct Outcome {
  explicit Outcome(std::string n) : name(std::move(n)) {}

  std::string name;
  int cases = 0;   // random inputs drawn
  int checks = 0;  // assertions made on them
  int failures = 0;
  int nontrivial = 0;  // cases that exercised more than the trivial branch
  std::string first_failure;

  void check(bool ok, const std::string& what) {
    ++checks;
    if (ok) return;
    if (failures++ == 0) first_failure = what;
  }
  bool passed() const { return failures == 0; }
};

inline Descriptor256 random_descriptor(std::mt19937_64& rng) {
  Descriptor256 d;
  for (auto& w : d.words) w = rng();
  return d;
}

inline Outcome hamming_metric(int cases, std::uint64_t seed) {
  Outcome o{"hamming metric"};
  std::mt19937_64 rng(seed);
  for (int i = 0; i < cases; ++i) {
    const auto a = random_descriptor(rng);
    auto b = random_descriptor(rng);
    if (i % 4 == 0) b = a;  // exercise the equal case
    const auto c = random_descriptor(rng);
    const int ab = hamming_distance(a, b), ba = hamming_distance(b, a);
    const int bc = hamming_distance(b, c), ac = hamming_distance(a, c);
    const std::string at = "case " + std::to_string(i);
    o.check(ab == ba, at + ": asymmetric");
    o.check((ab == 0) == (a == b), at + ": zero iff equal");
    o.check(ac <= ab + bc, at + ": triangle inequality");
    o.check(hamming_distance(a, a) == 0 && ab >= 0 && ab <= 256, at + ": range");
  }
  o.cases = cases;
  return o;
}

/// Crop of a smooth texture and the same texture moved by (dx, dy).
inline std::pair<GrayImage, GrayImage> shifted_pair(std::mt19937_64& rng, int size) {
  const int pad = 8;
  const auto base = fixtures::smooth_noise(size + 2 * pad, size + 2 * pad, 1 + static_cast<int>(rng() % 3), rng());
  const int dx = static_cast<int>(rng() % 13) - 6, dy = static_cast<int>(rng() % 13) - 6;
  GrayImage a(size, size), b(size, size);
  a.pixels() = base.pixels().block(pad, pad, size, size);
  b.pixels() = base.pixels().block(pad + dy, pad + dx, size, size);
  return {a, b};
}

inline OracleConfig small_oracle() {
  OracleConfig cfg;
  cfg.extract.levels = 3;
  cfg.extract.max_features = 300;
  cfg.ransac_iterations = 50;
  return cfg;
}

inline Outcome count_ordering(int cases, std::uint64_t seed) {
  Outcome o{"good <= matched <= extracted"};
  std::mt19937_64 rng(seed);
  const auto cfg = small_oracle();
  for (int i = 0; i < cases; ++i) {
    auto [a, b] = shifted_pair(rng, 96);
    if (i % 5 == 0) b = fixtures::random_image(96, 96, rng());  // unrelated successor
    const auto r = count_good_features(a, b, cfg);
    const std::string at = "case " + std::to_string(i) + " (good " + std::to_string(r.good) + ", matched " +
                           std::to_string(r.matched) + ", extracted " + std::to_string(r.extracted_a) + "/" +
                           std::to_string(r.extracted_b) + ")";
    o.nontrivial += r.good > 0;
    o.check(0 <= r.good && r.good <= r.matched && r.matched <= std::min(r.extracted_a, r.extracted_b), at);
    o.check(r.extracted_a <= cfg.extract.max_features && r.extracted_b <= cfg.extract.max_features, at);
  }
  o.cases = cases;
  return o;
}

inline bool is_rank2_unit(const Eigen::Matrix3d& m) {
  const Eigen::Vector3d sv = Eigen::JacobiSVD<Eigen::Matrix3d>(m).singularValues();
  return std::abs(m.norm() - 1.0) < 1e-9 && sv(2) <= 1e-9 * sv(0) && sv(1) > 0.0;
}

inline Outcome fundamental_rank2(int cases, std::uint64_t seed) {
  Outcome o{"rank-2 fundamental matrix"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 640.0), noise(-3.0, 3.0);
  for (int i = 0; i < cases; ++i) {
    // Arbitrary point sets, loosely related, so the raw estimate is full rank.
    std::vector<Correspondence<double>> pairs(8 + rng() % 40);
    for (auto& p : pairs) {
      p.a = {u(rng), u(rng) * 0.75};
      p.b = p.a + Eigen::Vector2d(noise(rng) + 4.0, noise(rng));
    }
    try {
      o.check(is_rank2_unit(eight_point(pairs).matrix()), "eight_point case " + std::to_string(i));
      ++o.nontrivial;
    } catch (const DegenerateConfiguration&) {
      o.check(true, "");
    }
    Eigen::Matrix3d raw = Eigen::Matrix3d::Random();
    o.check(is_rank2_unit(Fundamental::from_matrix(raw).matrix()), "projection case " + std::to_string(i));
  }
  o.cases = cases;
  return o;
}

inline Outcome softmax_invariants(int cases, std::uint64_t seed) {
  Outcome o{"softmax normalisation and shift invariance"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-40.0, 40.0), shift(-500.0, 500.0);
  for (int i = 0; i < cases; ++i) {
    const int rows = 1 + static_cast<int>(rng() % 4), cols = 2 + static_cast<int>(rng() % 6);
    Tensor<double> logits({rows, cols}), moved({rows, cols});
    for (int r = 0; r < rows; ++r) {
      const double c = shift(rng);
      for (int k = 0; k < cols; ++k) {
        logits[r * cols + k] = u(rng);
        moved[r * cols + k] = logits[r * cols + k] + c;
      }
    }
    const auto p = softmax_rows(logits), q = softmax_rows(moved);
    const std::string at = "case " + std::to_string(i);
    for (int r = 0; r < rows; ++r) {
      double sum = 0.0;
      int arg_logit = 0, arg_p = 0, arg_q = 0;
      for (int k = 0; k < cols; ++k) {
        const std::size_t j = static_cast<std::size_t>(r * cols + k);
        sum += p[j];
        o.check(p[j] >= 0.0 && p[j] <= 1.0 && std::abs(p[j] - q[j]) < 1e-9, at + ": shifted probabilities differ");
        if (logits[j] > logits[static_cast<std::size_t>(r * cols + arg_logit)]) arg_logit = k;
        if (p[j] > p[static_cast<std::size_t>(r * cols + arg_p)]) arg_p = k;
        if (q[j] > q[static_cast<std::size_t>(r * cols + arg_q)]) arg_q = k;
      }
      o.check(std::abs(sum - 1.0) < 1e-12, at + ": row sum " + std::to_string(sum));
      o.check(arg_logit == arg_p && arg_p == arg_q, at + ": argmax moved");
    }
  }
  o.cases = cases;
  return o;
}

inline Outcome selection_equivalence(int cases, std::uint64_t seed) {
  Outcome o{"zero-hysteresis selection equals argmax"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < cases; ++i) {
    const std::size_t n = 1 + rng() % 8;
    std::vector<double> s(n);
    std::vector<bool> present(n);
    for (std::size_t c = 0; c < n; ++c) {
      s[c] = i % 2 ? u(rng) : std::round(u(rng) * 5) / 5;  // half the cases carry ties
      present[c] = rng() % 4 != 0;
    }
    present[rng() % n] = true;
    int best = -1;
    for (std::size_t c = 0; c < n; ++c)
      if (present[c] && (best < 0 || s[c] > s[static_cast<std::size_t>(best)])) best = static_cast<int>(c);
    std::optional<int> current;
    if (rng() % 2) current = static_cast<int>(rng() % n);
    const auto got = select_camera(s, present, ArbitrationPolicy{}, current);
    o.check(got.size() == 1 && got.front() == best, "case " + std::to_string(i));
  }
  o.cases = cases;
  return o;
}

inline std::vector<Outcome> invariant_suite(int cases, std::uint64_t seed) {
  return {hamming_metric(cases, seed), count_ordering(cases, seed + 1), fundamental_rank2(cases, seed + 2),
          softmax_invariants(cases, seed + 3), selection_equivalence(cases, seed + 4)};
}

}  // namespace camsel::properties
