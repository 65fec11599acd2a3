#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "fracslow/core/rng.hpp"
#include "fracslow/ergodicity/control.hpp"
#include "fracslow/ergodicity/coupling.hpp"
#include "fracslow/ergodicity/decay.hpp"
#include "fracslow/ergodicity/experiments.hpp"
#include "fracslow/noise/fbm.hpp"
#include "test_oracles.hpp"

using namespace fracslow;
using namespace fracslow::ergodicity;

namespace {

Vector vec1(double v) { return Vector::Constant(1, v); }
Matrix eye(std::size_t n = 1) { return Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)); }

std::vector<double> grid(double a, double step, int count) {
  std::vector<double> t;
  for (int k = 0; k < count; ++k) t.push_back(a + step * k);
  return t;
}

// C f(t) with multiplicative lognormal noise of relative size `noise`.
DecayCurve synthetic(const std::vector<double>& t, double C, double rate, RateModel model, double noise, std::uint64_t seed) {
  Rng rng(seed, 0);
  DecayCurve c;
  c.times = t;
  for (double s : t) {
    const double clean = model == RateModel::exponential ? C * std::exp(-rate * s) : C * std::pow(s, -rate);
    const double v = clean * std::exp(noise * rng.normal());
    c.distances.push_back(v);
    c.se.push_back(noise * v);
  }
  return c;
}

bool non_increasing_within(const DecayCurve& c, double k_se) {
  for (std::size_t i = 1; i < c.size(); ++i)
    if (c.distances[i] > c.distances[i - 1] + k_se * std::hypot(c.se[i], c.se[i - 1])) return false;
  return true;
}

}  // namespace

// ---------------------------------------------------------------- rate fits

TEST(RateFit, ExactExponentialRecovered) {
  DecayCurve c = synthetic(grid(0.0, 0.5, 12), 3.0, 0.7, RateModel::exponential, 0.0, 1);
  const auto f = fit_rate(c, RateModel::exponential);
  EXPECT_NEAR(f.rate, 0.7, 1e-12);
  EXPECT_NEAR(f.C, 3.0, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(f.slope(), -f.rate);
  EXPECT_EQ(f.n_points, 12u);
}

TEST(RateFit, DiscriminatesModelsUnderFivePercentNoise) {
  const auto t = grid(1.0, 1.0, 20);
  for (std::uint64_t s = 0; s < 25; ++s) {
    const auto e = compare_models(synthetic(t, 2.0, 0.3, RateModel::exponential, 0.05, 100 + s));
    EXPECT_EQ(e.best(), RateModel::exponential) << "seed " << s;
    EXPECT_NEAR(e.exponential.rate, 0.3, 0.03) << "seed " << s;
    const auto a = compare_models(synthetic(t, 2.0, 0.8, RateModel::algebraic, 0.05, 200 + s));
    EXPECT_EQ(a.best(), RateModel::algebraic) << "seed " << s;
    EXPECT_NEAR(a.algebraic.rate, 0.8, 0.08) << "seed " << s;
  }
}

TEST(RateFit, DropsSeDominatedAndZeroPoints) {
  DecayCurve c = synthetic(grid(0.0, 1.0, 6), 1.0, 1.0, RateModel::exponential, 0.0, 1);
  c.se = {0.0, 0.0, 0.0, 0.0, 1.0, 0.0};
  c.distances[5] = 0.0;
  const auto f = fit_rate(c, RateModel::exponential);
  EXPECT_EQ(f.n_dropped, 2u);
  EXPECT_EQ(f.n_points, 4u);
  EXPECT_NEAR(f.rate, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(f.t_last, 3.0);
}

TEST(RateFit, DegenerateCurvesGiveWarning) {
  DecayCurve c;
  c.times = {0.0, 1.0};
  c.distances = {0.0, 0.0};
  c.se = {0.0, 0.0};
  const auto f = fit_rate(c, RateModel::exponential);
  EXPECT_EQ(f.rate, 0.0);
  EXPECT_EQ(f.r_squared, 0.0);
  EXPECT_FALSE(f.warning.empty());

  DecayCurve bad = c;
  bad.times = {1.0, 1.0};
  EXPECT_THROW(fit_rate(bad, RateModel::exponential), ParameterError);
  bad = c;
  bad.distances = {-1.0, 0.0};
  EXPECT_THROW(fit_rate(bad, RateModel::exponential), ParameterError);
}

TEST(RateFit, AlgebraicSkipsNonPositiveTimes) {
  DecayCurve c = synthetic(grid(1.0, 1.0, 8), 1.0, 0.5, RateModel::algebraic, 0.0, 1);
  c.times.insert(c.times.begin(), 0.0);
  c.distances.insert(c.distances.begin(), 5.0);
  c.se.insert(c.se.begin(), 0.0);
  const auto f = fit_rate(c, RateModel::algebraic);
  EXPECT_EQ(f.n_points, 8u);
  EXPECT_NEAR(f.rate, 0.5, 1e-12);
}

TEST(DecayCurve, CsvHasStableHeader) {
  DecayCurve c = synthetic(grid(0.0, 1.0, 3), 1.0, 1.0, RateModel::exponential, 0.0, 1);
  std::ostringstream os;
  write_curve_csv(os, c);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, 14), "t,distance,se\n");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

// ------------------------------------------------- Wasserstein decay

TEST(WassersteinDecay, LinearDriftContractsAtUnitRate) {
  WassersteinOptions o;
  o.seed = 5;
  o.certification = CertificationRequest{1.0, 0.0, 0.0};
  const auto r = wasserstein_decay_experiment(drift::DriftSpec::linear(1.0), eye(), 0.7, vec1(5.0), vec1(-5.0), grid(0.0, 0.25, 21),
                                              1000, 1.0, o);
  ASSERT_TRUE(r.certificate && r.certificate->passed());
  EXPECT_NEAR(r.fit.rate, 1.0, 0.2);
  EXPECT_GT(r.fit.r_squared, 0.95);
  // shared noise cancels in the difference: W1 = 10 (1 - dt)^k on the Euler grid
  EXPECT_NEAR(r.curve.distances.back(), 10.0 * std::pow(1.0 - 1.0 / 64, 320), 1e-9);
  EXPECT_TRUE(non_increasing_within(r.curve, 2.0));
}

TEST(WassersteinDecay, IdenticalStartsGiveZeroCurve) {
  const auto r = wasserstein_decay_experiment(drift::DriftSpec::linear(1.0), eye(), 0.7, vec1(1.0), vec1(1.0), grid(0.0, 0.5, 5), 200);
  for (double d : r.curve.distances) EXPECT_EQ(d, 0.0);
}

TEST(WassersteinDecay, DoubleWellIsExponential) {
  WassersteinOptions o;
  o.seed = 9;
  o.dt = 1.0 / 256;
  // double well alpha = 1, beta = 0.05: expansive at rate 0.1 near 0, contracting outside |y| = 0.5
  o.certification = CertificationRequest{0.5, 0.5, 0.1};
  const auto r = wasserstein_decay_experiment(drift::DriftSpec::double_well(1.0, 0.05, 3.0), eye(), 0.7, vec1(1.0), vec1(-1.0),
                                              grid(0.0, 0.25, 25), 1000, 1.0, o);
  ASSERT_TRUE(r.certificate->passed());
  EXPECT_GT(r.fit.rate, 0.0);
  EXPECT_GT(r.comparison.exponential.r_squared, 0.9);
  EXPECT_GT(r.comparison.exponential.r_squared, r.comparison.algebraic.r_squared);
}

TEST(WassersteinDecay, UncertifiedDriftIsRefusedUnlessForced) {
  WassersteinOptions o;
  o.certification = CertificationRequest{1.0, 0.0, 0.0};
  const auto expansive = drift::DriftSpec::linear(-0.5);
  EXPECT_THROW(wasserstein_decay_experiment(expansive, eye(), 0.7, vec1(1.0), vec1(-1.0), grid(0.0, 0.5, 3), 50, 1.0, o),
               CertificationError);
  o.force = true;
  const auto r = wasserstein_decay_experiment(expansive, eye(), 0.7, vec1(1.0), vec1(-1.0), grid(0.0, 0.5, 3), 50, 1.0, o);
  EXPECT_FALSE(r.certificate->passed());
  EXPECT_FALSE(r.warning.empty());
}

TEST(WassersteinDecay, WorkerCountDoesNotChangeResults) {
  WassersteinOptions o;
  o.seed = 3;
  o.workers = 1;
  const auto b = drift::DriftSpec::double_well(1.0, 0.05, 3.0);
  o.dt = 1.0 / 256;
  const auto a = wasserstein_decay_experiment(b, eye(), 0.7, vec1(1.0), vec1(-1.0), grid(0.0, 0.5, 5), 300, 1.0, o);
  o.workers = 3;
  const auto c = wasserstein_decay_experiment(b, eye(), 0.7, vec1(1.0), vec1(-1.0), grid(0.0, 0.5, 5), 300, 1.0, o);
  EXPECT_EQ(a.curve.distances, c.curve.distances);
  EXPECT_EQ(a.curve.se, c.curve.se);
}

TEST(WassersteinDecay, SlicedInTwoDimensions) {
  WassersteinOptions o;
  o.seed = 2;
  Vector a(2), b(2);
  a << 3.0, 0.0;
  b << -3.0, 0.0;
  const auto r = wasserstein_decay_experiment(drift::DriftSpec::linear(1.0, 2), eye(2), 0.7, a, b, grid(0.0, 0.5, 7), 300, 1.0, o);
  EXPECT_EQ(r.curve.metric, "SW1");
  EXPECT_NEAR(r.fit.rate, 1.0, 0.2);
}

TEST(WassersteinDecay, RejectsOffGridTimes) {
  EXPECT_THROW(wasserstein_decay_experiment(drift::DriftSpec::linear(1.0), eye(), 0.7, vec1(1.0), vec1(0.0), {0.0, 0.01}, 10),
               ParameterError);
  EXPECT_THROW(wasserstein_decay_experiment(drift::DriftSpec::linear(1.0), eye(), 0.7, vec1(1.0), vec1(0.0), {1.0, 0.5}, 10),
               ParameterError);
}

// ------------------------------------------------- Girsanov coupling

TEST(Girsanov, EqualStatesNeedNoCorrection) {
  const auto r = girsanov_coupling_run(drift::DriftSpec::linear(1.0), eye(), 0.0, vec1(2.0), vec1(2.0));
  EXPECT_EQ(r.sup_phi, 0.0);
  EXPECT_EQ(r.terminal_gap, 0.0);
  EXPECT_TRUE(r.coalesced);
  EXPECT_EQ(r.pinsker_cost(), 0.0);
}

TEST(Girsanov, UnitGapCoalescesWithinEnvelope) {
  GirsanovOptions o;
  o.dt = 1e-4;
  const auto r = girsanov_coupling_run(drift::DriftSpec::linear(1.0), eye(), 0.0, vec1(1.0), vec1(0.0), o);
  EXPECT_LT(r.terminal_gap, 1e-6);
  EXPECT_TRUE(r.envelope_held());
  EXPECT_LE(r.worst_envelope_excess, 0.0);
  // |X-Z|^{1/2} falls at least at rate 2 |X_t-Z_t|^{1/2}: merged by t + 1/2
  EXPECT_LE(r.coalescence_time, 0.5);
}

TEST(Girsanov, HundredRandomPairsWithNoise) {
  const double dt = 1e-4;
  const auto steps = static_cast<std::size_t>(1.0 / dt);
  const noise::FbmGenerator gen(0.7, 2, steps, dt);
  const auto b = drift::DriftSpec::linear(1.0, 2);
  Rng rng(17, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const double gap = std::exp(std::log(1e-3) + rng.uniform() * std::log(1e5));
    Vector dir(2);
    dir << rng.normal(), rng.normal();
    Vector z(2);
    z << rng.normal(), rng.normal();
    const SamplePath W = gen.sample(17, static_cast<std::uint64_t>(trial));
    GirsanovOptions o;
    o.dt = dt;
    o.noise = &W;
    const auto r = girsanov_coupling_run(b, eye(2), 0.0, z + gap * dir.normalized(), z, o);
    EXPECT_LE(r.terminal_gap, 1e-6 * gap) << "trial " << trial;
    EXPECT_TRUE(r.envelope_held()) << "trial " << trial;
  }
}

TEST(Girsanov, CostConstantIsStableAcrossGaps) {
  // sup|phi| <= C (|X_t-Z_t| + |X_t-Z_t|^{1/2}); for b = -y the sup sits at s = t
  // and equals (4 + lambda) |X_t-Z_t| / sigma
  Rng rng(23, 0);
  const double lambda = 0.5;
  std::vector<double> C;
  for (int k = 0; k < 50; ++k) {
    const double gap = std::exp(std::log(1e-3) + rng.uniform() * std::log(1e4));
    GirsanovOptions o;
    o.dt = 1e-3;
    const auto r = girsanov_coupling_run(drift::DriftSpec::linear(1.0), eye(), lambda, vec1(gap), vec1(0.0), o);
    C.push_back(r.sup_phi / (gap + std::sqrt(gap)));
    EXPECT_NEAR(r.sup_phi / gap, 4.0 + lambda, 1e-9);
  }
  EXPECT_LE(*std::max_element(C.begin(), C.end()), 4.0 + lambda);
}

TEST(Girsanov, ExpansiveDriftBreaksEnvelope) {
  GirsanovOptions o;
  o.dt = 1e-3;
  EXPECT_THROW(girsanov_coupling_run(drift::DriftSpec::linear(-10.0), eye(), 0.0, vec1(1.0), vec1(0.0), o), CouplingError);
  o.throw_on_violation = false;
  const auto r = girsanov_coupling_run(drift::DriftSpec::linear(-10.0), eye(), 0.0, vec1(1.0), vec1(0.0), o);
  EXPECT_GT(r.envelope_violations, 0u);
  // the repulsivity budget lambda restores the mechanism
  o.throw_on_violation = true;
  EXPECT_NO_THROW(girsanov_coupling_run(drift::DriftSpec::linear(-10.0), eye(), 10.0, vec1(1.0), vec1(0.0), o));
}

TEST(Girsanov, RejectsBadInput) {
  Matrix singular = Matrix::Zero(1, 1);
  EXPECT_THROW(girsanov_coupling_run(drift::DriftSpec::linear(1.0), singular, 0.0, vec1(1.0), vec1(0.0)), ParameterError);
  EXPECT_THROW(girsanov_coupling_run(drift::DriftSpec::linear(1.0), eye(), 0.0, vec1(NAN), vec1(0.0)), ParameterError);
  EXPECT_THROW(girsanov_coupling_run(drift::DriftSpec::linear(1.0, 2), eye(2), 0.0, vec1(1.0), vec1(0.0)), DimensionError);
}

// ------------------------------------------------- TV decay

TEST(TvDecay, BoundDecaysAndDominatesEstimates) {
  TvOptions o;
  o.seed = 31;
  o.certification = CertificationRequest{1.0, 0.0, 0.0};
  const double H = 0.7, y0 = 1.0;
  // the bound is pinned at 1 until the Pinsker cost (about 5 |X_t - Z_t|) drops below 1
  const auto t = grid(2.0, 0.5, 8);
  const auto r = tv_decay_experiment(drift::DriftSpec::linear(1.0), eye(), H, vec1(y0), t, 4000, o);
  EXPECT_EQ(r.envelope_violations, 0u);
  EXPECT_NEAR(r.delta_rate, 1.0, 0.1);
  for (std::size_t i = 1; i < r.bound.size(); ++i) EXPECT_LT(r.bound.distances[i], r.bound.distances[i - 1]);
  EXPECT_GT(r.fit.rate, 0.3);
  EXPECT_GT(r.fit.r_squared, 0.85);
  const double v_inf = oracle::fou_variance_closed_form(H);
  for (std::size_t i = 0; i < r.bound.size(); ++i) {
    const double s = r.bound.times[i];
    EXPECT_GE(r.bound.distances[i], r.histogram.distances[i]) << "t = " << s;
    const double exact = oracle::gaussian_tv(y0 * std::exp(-s), std::sqrt(oracle::fou_variance_from_zero(H, s)), 0.0, std::sqrt(v_inf));
    EXPECT_GE(r.bound.distances[i], exact) << "t = " << s;
  }
}

TEST(TvDecay, BoundValidFromTimeZero) {
  TvOptions o;
  o.seed = 4;
  const auto r = tv_decay_experiment(drift::DriftSpec::linear(1.0), eye(), 0.7, vec1(3.0), {0.0, 0.5, 1.0}, 1000, o);
  for (std::size_t i = 0; i < r.bound.size(); ++i) EXPECT_GE(r.bound.distances[i], r.histogram.distances[i]);
  EXPECT_DOUBLE_EQ(r.bound.times.front(), 1.0);
}

TEST(TvDecay, FixedDeltaRateIsUsed) {
  TvOptions o;
  o.delta_rate = 0.2;
  const auto r = tv_decay_experiment(drift::DriftSpec::linear(1.0), eye(), 0.7, vec1(1.0), {2.0, 3.0}, 300, o);
  EXPECT_EQ(r.delta_rate, 0.2);
}

// ------------------------------------------------- universal control

TEST(UniversalControl, WorkedExample) {
  const auto u = build_universal_control(2.0, 0.25, 4, vec1(1.0));
  EXPECT_EQ(u.sup_norm(), 80.0);
  ASSERT_EQ(u.breakpoints.size(), 3u);
  EXPECT_EQ(u.breakpoints[0], 0.0);
  EXPECT_EQ(u.breakpoints[1], 0.125);
  EXPECT_EQ(u.breakpoints[2], 0.25);
  EXPECT_EQ(u.value_at(0.125)(0), 80.0);
  EXPECT_EQ(u.value_at(0.13)(0), -80.0);
  EXPECT_EQ(u.integral(0.25)(0), 0.0);
  EXPECT_EQ(u.integral(0.125)(0), 10.0);
  EXPECT_EQ(u.n_discontinuities(), 2u);
}

TEST(UniversalControl, MagnitudeIndependentOfDirection) {
  Vector e(3);
  e << 1.0, -2.0, 2.0;
  const auto u = build_universal_control(4.0, 0.25, 577, e);
  EXPECT_DOUBLE_EQ(u.sup_norm(), universal_control_magnitude(4.0, 0.25, 577));
  EXPECT_NEAR(u.integral(u.end()).norm(), 0.0, 1e-9);
}

TEST(UniversalControl, RejectsEtaAboveHalf) {
  EXPECT_THROW(build_universal_control(2.0, 0.5, 4, vec1(1.0)), ParameterError);
  EXPECT_THROW(build_universal_control(2.0, 0.0, 4, vec1(1.0)), ParameterError);
  EXPECT_THROW(build_universal_control(2.0, 0.25, 0, vec1(1.0)), ParameterError);
}

TEST(UniversalControl, SmallnessConditionN) {
  // brute-force search of the smallness inequality (python/mpmath): 577 and 178
  EXPECT_EQ(control_smallness_N(1.0, 4.0, 0.25, 1.0), 577u);
  EXPECT_EQ(control_smallness_N(1.0, 2.0, 0.25, 1.0), 178u);
  EXPECT_LT(control_smallness_lhs(1.0, 4.0, 0.25, 577), 1.0);
  EXPECT_GE(control_smallness_lhs(1.0, 4.0, 0.25, 576), 1.0);
}

TEST(ControlExperiment, FarOutsideNeverTriggers) {
  // b = -(y - 20) keeps y = 20 fixed, far outside B_4
  const auto b = drift::DriftSpec::linear(1.0, 1, 20.0);
  std::vector<integrate::AdversaryPath> adv{integrate::AdversaryPath::zero(1, 1.0 / 400, 400)};
  const auto rep = control_experiment(b, 4.0, 0.25, 20, adv, {vec1(20.0)});
  EXPECT_NEAR(rep.runs[0].occupation, 1.0, 1e-12);
  EXPECT_EQ(rep.runs[0].n_triggered, 0u);
  EXPECT_TRUE(rep.runs[0].success);
}

TEST(ControlExperiment, BatteryAlwaysReachesEta) {
  const auto b = drift::DriftSpec::linear(1.0);
  const double R_bar = drift::enlarge_radius(1.0, 0.5, 0.0, drift::lipschitz_on_ball(b, 1.0));
  // a-priori constant max(2D, 1/kappa_tilde) = 1 for b = -y (D = 0, kappa_tilde = 1)
  const std::size_t N = control_smallness_N(1.0, R_bar, 0.25, drift::lipschitz_bound(b));
  const std::size_t M = 20;
  const auto battery = adversary_battery(100, 0.7, N * M, 7);
  std::vector<Vector> x0;
  for (int i = 0; i < 100; ++i) x0.push_back(vec1(-10.0 + 20.0 * i / 99.0));
  const auto rep = control_experiment(b, R_bar, 0.25, N, battery, x0);
  EXPECT_EQ(rep.n_success(), 100u);
  EXPECT_GE(rep.min_occupation(), 0.25);
  EXPECT_EQ(rep.magnitude, (2.0 * R_bar + 1.0) / ((1.0 - 0.5) * (1.0 / (2.0 * N))));

  std::size_t triggered = 0;
  for (const auto& r : rep.runs) triggered += r.n_triggered > 0;
  EXPECT_GT(triggered, 0u);

}

TEST(ControlExperiment, DoublingMagnitudeNeverLowersTriggeredOccupation) {
  // Re-run every triggered subinterval from the same state with 2 u_hat and
  // compare time outside the ball on the open subinterval. The endpoint is
  // left out: the control integral returns to zero there, so that single
  // grid node can flip either way.
  const auto b = drift::DriftSpec::linear(1.0);
  const double R_bar = 4.0, eta = 0.25;
  const std::size_t N = 577, M = 20;
  const auto battery = adversary_battery(100, 0.7, N * M, 7);
  const auto u1 = build_universal_control(R_bar, eta, N, vec1(1.0));
  const auto u2 = u1.scaled(2.0);
  const Vector x = vec1(0.0);
  const auto interior = [&](const SamplePath& p) {
    double occ = 0.0;
    for (std::size_t k = 1; k + 1 < p.n_points(); ++k)
      if (p.row(k).norm() > R_bar) occ += p.dt();
    return occ;
  };
  std::size_t checked = 0;
  for (std::size_t i = 0; i < battery.size(); ++i) {
    Vector state = vec1(-10.0 + 20.0 * static_cast<double>(i) / 99.0);
    for (std::size_t k = 0; k < N; ++k) {
      const auto piece = ergodicity::detail::adversary_piece(battery[i], k * M, M);
      const auto step = control_step(b, x, piece, state, R_bar, eta / N, u1);
      if (step.triggered) {
        const double span = piece.path.t_end();
        const double o1 = interior(integrate::integrate_controlled_ode(b, x, piece, u1, state, span));
        const double o2 = interior(integrate::integrate_controlled_ode(b, x, piece, u2, state, span));
        EXPECT_GE(o2, o1) << "run " << i << " subinterval " << k;
        ++checked;
      }
      state = step.end_state;
    }
  }
  EXPECT_GT(checked, 0u);
}

TEST(ControlExperiment, RejectsIncompatibleGrid) {
  std::vector<integrate::AdversaryPath> adv{integrate::AdversaryPath::zero(1, 1.0 / 30, 30)};
  EXPECT_THROW(control_experiment(drift::DriftSpec::linear(1.0), 4.0, 0.25, 20, adv, {vec1(0.0)}), ParameterError);
  EXPECT_THROW(control_experiment(drift::DriftSpec::linear(1.0), 4.0, 0.25, 15, adv, {}), DimensionError);
}

TEST(AdversaryBattery, StartsAtZeroWithCyclingScales) {
  const auto bat = adversary_battery(15, 0.7, 200, 1);
  ASSERT_EQ(bat.size(), 15u);
  for (const auto& a : bat) {
    EXPECT_EQ(a.path.row(0).norm(), 0.0);
    EXPECT_EQ(a.path.n_steps(), 200u);
  }
  EXPECT_TRUE(bat[3].decay.has_value());
  EXPECT_EQ(*bat[3].decay, 0.4);
  EXPECT_EQ(bat[4].scale, 1.0);
  EXPECT_EQ(bat[9].scale, 10.0);
  EXPECT_EQ(bat[14].scale, 100.0);
}

// ------------------------------------------------- quenched decay

TEST(QuenchedDecay, AdversaryMakesDecayAlgebraic) {
  QuenchedOptions o;
  o.seed = 12;
  o.certification = CertificationRequest{1.0, 0.0, 0.0};
  const auto r = quenched_decay_experiment(drift::DriftSpec::linear(1.0), eye(), 0.7, QuenchedAdversary{1.0, 0.4, {}}, vec1(0.0),
                                           {4.0, 8.0, 16.0, 32.0, 64.0, 128.0}, 1000, o);
  EXPECT_TRUE(r.warning.empty());
  EXPECT_EQ(r.comparison.best(), RateModel::algebraic);
  EXPECT_LE(r.fit.slope(), -0.15);
  EXPECT_GT(r.adversary_seminorm, 0.0);
}

TEST(QuenchedDecay, NoAdversaryStillDecays) {
  QuenchedOptions o;
  o.seed = 13;
  const auto r =
      quenched_decay_experiment(drift::DriftSpec::linear(1.0), eye(), 0.7, QuenchedAdversary{}, vec1(0.0), {0.5, 1.0, 2.0, 4.0}, 2000, o);
  EXPECT_GE(r.fit.n_points, 3u);
  EXPECT_LE(r.fit.slope(), -0.15);
}

TEST(QuenchedDecay, StationaryStartIsNotStationary) {
  QuenchedOptions o;
  o.seed = 14;
  measures::InvariantOptions inv;
  inv.n_samples = 2000;
  inv.seed = 99;
  inv.dt = o.dt;
  inv.certified_kappa = 1.0;
  const auto b = drift::DriftSpec::linear(1.0);
  const auto pi0 = measures::estimate_invariant_measure(b, vec1(0.0), eye(), 0.7, inv);
  const auto r = quenched_decay_experiment(b, eye(), 0.7, QuenchedAdversary{}, pi0, {1.0, 2.0}, 2000, o);
  EXPECT_GT(r.curve.distances[0], 3.0 * r.curve.se[0]);
}
