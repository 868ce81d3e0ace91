#pragma once

// Permutation test of H0: no direct causal effect X1 -> X2 against the
// one-sided alternative, based on the asymmetry Gamma_{1,2} - Gamma_{2,1} of
// the margins rescaled to the uniform scale.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tailcause/error.hpp"
#include "tailcause/parallel.hpp"
#include "tailcause/rng.hpp"
#include "tailcause/stats.hpp"
#include "tailcause/tail_coef.hpp"

namespace tailcause {

/// How Gamma-tilde is computed on the rescaled columns. Rank: mean empirical
/// rank of the effect over the k largest causes. Value: mean rescaled effect
/// over rows whose rescaled cause exceeds 1 - k/n.
enum class Statistic { Value, Rank };

struct TestSpec {
  EstimatorConfig estimator;
  Statistic statistic = Statistic::Value;
  std::size_t permutations = 1000;  // R
  std::uint64_t seed = 1;

  void validate() const {
    if (permutations < 1) throw InputError("permutation count R must be >= 1");
    estimator.validate();
  }
};

struct Rescaled {
  PairedSample data;  // both columns on [0,1]
  std::optional<GpdFit> fit1;
  std::optional<GpdFit> fit2;
};

/// Maps each column through its estimated (possibly H-conditional) CDF. The
/// margins are fitted here once; permutations never refit them.
inline Rescaled rescale(const PairedSample& s, const EstimatorConfig& cfg) {
  s.validate();
  cfg.validate();
  Rescaled out;
  if (cfg.variant == Variant::NonParametric) {
    out.data.x1 = stats::ecdf_values(s.x1);
    out.data.x2 = stats::ecdf_values(s.x2);
    return out;
  }
  const auto mm = fit_margins(s, cfg);
  auto [f1, f2] = margin_cdf_values(s, mm);
  out.data.x1 = std::move(f1);
  out.data.x2 = std::move(f2);
  out.fit1 = mm.m1.fit();
  out.fit2 = mm.m2.fit();
  return out;
}

namespace detail {

/// Coin for row i of replicate r: bit (i mod 64) of the (i / 64)-th draw.
class SwapCoins {
 public:
  SwapCoins(std::uint64_t seed, std::uint64_t replicate) : rng_(substream_seed(seed, replicate)) {}
  template <typename Fn>
  void for_each(std::size_t n, Fn&& fn) {
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % 64 == 0) bits = rng_();
      fn(i, ((bits >> (i % 64)) & 1U) != 0);
    }
  }

 private:
  CounterRng rng_;
};

}  // namespace detail

/// Swaps the two entries of row i wherever swap_mask[i] is nonzero.
inline PairedSample permute_pairs(const PairedSample& s, std::span<const std::uint8_t> swap_mask) {
  if (swap_mask.size() != s.size()) throw InputError("permute_pairs: mask length mismatch");
  PairedSample out{s.x1, s.x2, {}};
  for (std::size_t i = 0; i < s.size(); ++i)
    if (swap_mask[i]) std::swap(out.x1[i], out.x2[i]);
  return out;
}

/// Replicate r: each row swapped independently with probability 1/2.
inline PairedSample permute_pairs(const PairedSample& s, std::uint64_t replicate, std::uint64_t seed) {
  std::vector<std::uint8_t> mask(s.size());
  detail::SwapCoins(seed, replicate).for_each(s.size(), [&](std::size_t i, bool swap) { mask[i] = swap ? 1 : 0; });
  return permute_pairs(s, mask);
}

struct TestResult {
  double delta_obs = 0.0;
  std::vector<double> delta_perm;
  double p_mc = 1.0;
  std::size_t k = 0;
  std::size_t k_used12 = 0;
  std::size_t k_used21 = 0;
  std::size_t n = 0;
  TestSpec spec;
  std::optional<GpdFit> fit1;
  std::optional<GpdFit> fit2;
};

/// (1 + #{perm >= obs}) / (R + 1).
inline double monte_carlo_p(double observed, std::span<const double> permuted) {
  std::size_t ge = 0;
  for (double d : permuted)
    if (d >= observed) ++ge;
  return (1.0 + static_cast<double>(ge)) / (static_cast<double>(permuted.size()) + 1.0);
}

/// Runs the test; replicates are spread over `threads` workers (0 = all
/// cores) and the result does not depend on the thread count.
inline TestResult run_test(const PairedSample& s, const TestSpec& spec, unsigned threads = 0) {
  spec.validate();
  const Rescaled rs = rescale(s, spec.estimator);
  TestResult out;
  out.spec = spec;
  out.n = s.size();
  out.k = spec.estimator.k.resolve(s.size());
  out.fit1 = rs.fit1;
  out.fit2 = rs.fit2;

  const auto& a = rs.data.x1;
  const auto& b = rs.data.x2;
  const bool ranks = spec.statistic == Statistic::Rank;
  auto tail_mean = [&](std::span<const double> x, std::span<const double> y, detail::RankWorkspace& ws) {
    return ranks ? detail::upper_rank_mean(x, y, out.k, ws) : gamma_from_cdf_values(x, y, out.k);
  };
  {
    detail::RankWorkspace ws;
    const auto g12 = tail_mean(a, b, ws);
    const auto g21 = tail_mean(b, a, ws);
    out.delta_obs = delta(g12.value, g21.value);
    out.k_used12 = g12.count;
    out.k_used21 = g21.count;
  }

  out.delta_perm.assign(spec.permutations, 0.0);
  const std::size_t n = a.size();
  parallel_for(spec.permutations, threads, [&](std::size_t r) {
    thread_local detail::RankWorkspace ws;
    thread_local std::vector<double> c1, c2;
    c1.resize(n);
    c2.resize(n);
    detail::SwapCoins(spec.seed, r + 1).for_each(n, [&](std::size_t i, bool swap) {
      c1[i] = swap ? b[i] : a[i];
      c2[i] = swap ? a[i] : b[i];
    });
    const double g12 = tail_mean(c1, c2, ws).value;
    const double g21 = tail_mean(c2, c1, ws).value;
    out.delta_perm[r] = delta(g12, g21);
  });
  out.p_mc = monte_carlo_p(out.delta_obs, out.delta_perm);
  return out;
}

}  // namespace tailcause
