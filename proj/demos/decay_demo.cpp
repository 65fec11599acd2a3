// Synchronous coupling of two ensembles under a blended double-well drift,
// then the same drift with an RL-driven adversary. Prints both curves and fits.
//
//   ./build/demos/decay_demo [n_paths]
#include <cstdio>
#include <cstdlib>

#include "fracslow/fracslow.hpp"

using namespace fracslow;
using namespace fracslow::ergodicity;

namespace {

void print_curve(const char* title, const DecayCurve& c, const ModelComparison& m) {
  std::printf("%s\n%8s %12s %12s\n", title, "t", c.metric.c_str(), "se");
  for (std::size_t i = 0; i < c.size(); ++i) std::printf("%8.3f %12.6f %12.6f\n", c.times[i], c.distances[i], c.se[i]);
  std::printf("exponential: rate %.4f  r2 %.4f\n", m.exponential.rate, m.exponential.r_squared);
  std::printf("algebraic:   rate %.4f  r2 %.4f\n", m.algebraic.rate, m.algebraic.r_squared);
  std::printf("better model: %s\n\n", to_string(m.best()).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n_paths = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 2000;
  const auto b = drift::DriftSpec::double_well(1.0, 0.05, 3.0);
  const Matrix sigma = Matrix::Identity(1, 1);

  WassersteinOptions w;
  w.seed = 1;
  w.dt = 1.0 / 256;
  // expansive at rate 0.1 inside |y| = 0.5, contracting at 0.5 outside
  w.certification = CertificationRequest{0.5, 0.5, 0.1};
  std::vector<double> t;
  for (int k = 0; k <= 16; ++k) t.push_back(0.25 * k);
  const auto r = wasserstein_decay_experiment(b, sigma, 0.7, Vector::Constant(1, 1.0), Vector::Constant(1, -1.0), t, n_paths, 1.0, w);
  std::printf("certificate: %s (worst margin %.4g)\n\n", r.certificate->passed() ? "passed" : "failed", r.certificate->worst_margin);
  print_curve("W1 between ensembles started at +1 and -1", r.curve, r.comparison);

  QuenchedOptions q;
  q.seed = 2;
  q.dt = 1.0 / 256;
  const auto s = quenched_decay_experiment(b, sigma, 0.7, QuenchedAdversary{1.0, 0.4, {}}, Vector::Constant(1, 0.0),
                                           {4.0, 8.0, 16.0, 32.0, 64.0}, n_paths, q);
  print_curve("W1 to the stationary cloud under an adversary t^-0.4", s.curve, s.comparison);
  return 0;
}
