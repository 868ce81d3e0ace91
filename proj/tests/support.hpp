#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tailcause/tailcause.hpp"

namespace tc_test {

using namespace tailcause;

/// Inverse-CDF draws of GPD(sigma, xi) excesses.
inline std::vector<double> gpd_sample(std::size_t n, double sigma, double xi, std::uint64_t key) {
  CounterRng rng(key);
  std::vector<double> y(n);
  for (auto& v : y) {
    const double u = rng.uniform();
    v = std::abs(xi) < 1e-12 ? -sigma * std::log(u) : sigma * (std::pow(u, -xi) - 1.0) / xi;
  }
  return y;
}

inline PairedSample pair_of(const SimulatedData& d, bool with_h = true) {
  PairedSample s{d.column(kX1), d.column(kX2), Eigen::MatrixXd(static_cast<Eigen::Index>(d.rows()), with_h ? 1 : 0)};
  if (with_h) s.h.col(0) = Eigen::Map<const Eigen::VectorXd>(d.column(kH).data(), static_cast<Eigen::Index>(d.rows()));
  return s;
}

inline PairedSample simulate_pair(const CausalConfiguration& c, const NoiseSpec& x, const NoiseSpec& h, std::size_t n,
                                  std::uint64_t seed) {
  return pair_of(simulate(to_lscm(c, x, h), n, seed));
}

/// Random DAG on 2..10 nodes with positive weights, edges kept with prob 0.4.
inline Lscm random_dag(std::uint64_t key, std::size_t* size_out = nullptr) {
  CounterRng rng(key);
  const std::size_t k = 2 + rng() % 9;
  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < k; ++i) order[i] = i;
  for (std::size_t i = k; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  std::vector<std::string> nodes;
  std::map<std::string, NoiseSpec> noise;
  for (std::size_t i = 0; i < k; ++i) {
    nodes.push_back("v" + std::to_string(i));
    noise.emplace(nodes.back(), NoiseSpec(Pareto{1.0, 2.0}));
  }
  std::vector<Edge> edges;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b)
      if (rng.uniform() < 0.4) edges.push_back({nodes[order[a]], nodes[order[b]], 0.1 + 1.9 * rng.uniform()});
  if (size_out) *size_out = k;
  return Lscm(nodes, edges, noise);
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("tailcause_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace tc_test
