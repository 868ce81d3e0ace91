// Simulates a confounded causal pair and compares the estimators.
//   ./tailcause_quickstart [model.json] [n]

#include <cstdlib>
#include <iomanip>
#include <iostream>

#include "tailcause/tailcause.hpp"

using namespace tailcause;

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : TAILCAUSE_DEMO_DIR "/config_d.json";
  const std::size_t n = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 10000;
  try {
    const Lscm model = io::model_from_json(io::read_json_file(path));
    const SimulatedData d = simulate(model, n, 2024);
    PairedSample s{d.column(kX1), d.column(kX2), Eigen::MatrixXd(static_cast<Eigen::Index>(n), 1)};
    for (std::size_t i = 0; i < n; ++i) s.h(static_cast<Eigen::Index>(i), 0) = d.column(kH)[i];

    std::cout << "model " << io::model_hash(model) << ", n = " << n << ", population Gamma12 = "
              << theoretical_gamma(model, kX1, kX2, 2.0) << ", Gamma21 = " << theoretical_gamma(model, kX2, kX1, 2.0) << "\n\n";
    std::cout << std::left << std::setw(10) << "variant" << std::setw(10) << "G12" << std::setw(10) << "G21" << std::setw(10) << "p_mc"
              << "verdict\n";
    for (const char* v : {"np", "gpd", "lgpd-pfc", "lgpd-cf", "lgpd-exp"}) {
      const auto cfg = EstimatorConfig::preset(v);
      const GammaEstimate e = estimate(s, cfg);
      const TestResult t = run_test(s, TestSpec{cfg, Statistic::Value, 500, 1});
      std::cout << std::setw(10) << v << std::setw(10) << std::setprecision(4) << e.gamma12 << std::setw(10) << e.gamma21
                << std::setw(10) << t.p_mc << to_string(classify(e.gamma12, e.gamma21)) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
