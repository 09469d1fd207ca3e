// Fit the additive benchmark at the default schedule and print predictions at t = 0.
#include <iostream>

#include "dnamf/dnamf.hpp"

int main() {
  using namespace dnamf;
  const Schedule s = make_schedule(2.5, 0.7, 2.0, 1, 5);
  const MultiFidelityData data = generate_benchmark_data(BenchmarkFn::Additive, s, 1);
  const DnaModel model = fit(data, KernelKind::SqExp, OptimizerConfig{}, 1);
  std::cout << "beta " << model.hyper.beta << " delta " << model.hyper.delta << "\n";
  std::cout << "x,mean,sd,truth\n";
  for (int i = 0; i <= 10; ++i) {
    Eigen::VectorXd x(1);
    x << i / 10.0;
    const Prediction p = propagate(model, x, 0.0);
    std::cout << x(0) << ',' << p.mean << ',' << std::sqrt(p.var) << ','
              << eval_benchmark(BenchmarkFn::Additive, 0.0, x) << "\n";
  }
}
