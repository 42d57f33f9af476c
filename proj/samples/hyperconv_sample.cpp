// Three scalar features, eps = 2: {0, 1} share a ball, 10 sits alone.
#include <iostream>

#include "hyperyolo/hyperconv.hpp"

int main() {
  using namespace hyperyolo;
  FeatureMatrix<float> x(3, 1, std::vector<float>{0.0f, 1.0f, 10.0f});
  const Hypergraph g = build_epsilon_ball_hypergraph(x, EpsilonBallParams{2.0});
  const Theta<float> theta(1, 1, 1.0f);
  const FeatureMatrix<float> y = hyperconv(x, g, theta);

  std::cout << "hyperedges " << g.edge_count() << ", incidences " << g.incidence_count() << '\n';
  for (std::size_t v = 0; v < y.vertices(); ++v)
    std::cout << "x=" << x(v, 0) << " -> y=" << y(v, 0) << '\n';
  return y(0, 0) == 0.5f && y(1, 0) == 1.5f && y(2, 0) == 20.0f ? 0 : 1;
}
