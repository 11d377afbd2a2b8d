#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "cdint/cdint.hpp"
#include "testutil.hpp"

namespace {

using cdint::approx_prob;
using cdint::approx_z;
using cdint::choose_depth;
using cdint::ConditionalMarginals;
using cdint::ConstraintSet;
using cdint::DecayOptions;
using cdint::g_m_eval;
using cdint::Hypergraph;
using cdint::Model;
using cdint::Potential;
using cdint::ValidationError;

Model path3_table(double last = 1.01) {
  Hypergraph g(3, {{0, 1}, {1, 2}});
  std::vector<Potential> pots{
      Potential::table(2, 2, {1.0, 1.0, 1.0, last}),
      Potential::table(2, 2, {1.0, 1.0, 1.0, last})};
  return Model(std::move(g), std::move(pots), 2, 0.2);
}

TEST(ApproxProb, DepthZeroIsUniform) {
  Model m = path3_table();
  auto est = approx_prob(m, 1, 0, 0, ConstraintSet(3));
  EXPECT_EQ(est.value, 0.5);
  EXPECT_EQ(est.error_bound, 1.0);
  EXPECT_EQ(est.recursive_calls, 0u);
  EXPECT_EQ(est.depth, 0);
}

TEST(ApproxProb, ConstantPotentialsCollapseToUniform) {
  Hypergraph g(4, {{0, 1}, {1, 2}, {2, 3}});
  std::vector<Potential> pots(3, Potential::exp_bilinear(2, 1.7, 0.0));
  Model m(g, pots, 3, 0.3);
  for (int d = 0; d <= 4; ++d)
    for (int v = 0; v < 4; ++v)
      for (int level = 0; level < 3; ++level)
        EXPECT_NEAR(approx_prob(m, v, level, d, ConstraintSet(4)).value,
                    1.0 / 3.0, 1e-15);
}

TEST(ApproxProb, DecayContractOnThePath) {
  Model m = path3_table(1.04);
  ConstraintSet empty(3);
  for (int v = 0; v < 3; ++v)
    for (int level = 0; level < 2; ++level) {
      double exact = cdint::marginal_exact(m, v, level, empty);
      for (int d = 0; d <= 6; ++d) {
        auto est = approx_prob(m, v, level, d, empty);
        EXPECT_LE(std::abs(est.value - exact),
                  std::pow(0.8, d) + 1e-9)
            << "v=" << v << " m=" << level << " d=" << d;
        EXPECT_NEAR(est.error_bound, std::pow(0.8, d), 1e-15);
      }
    }
}

TEST(ApproxProb, DepthBeyondTheVertexCountIsExact) {
  Model m = path3_table();
  ConstraintSet empty(3);
  for (int v = 0; v < 3; ++v)
    for (int level = 0; level < 2; ++level) {
      double exact = cdint::marginal_exact(m, v, level, empty);
      for (int d : {3, 5, 9})
        EXPECT_NEAR(approx_prob(m, v, level, d, empty).value, exact, 1e-9);
    }
}

TEST(ApproxProb, IsolatedVertexIsUniformAtAnyDepth) {
  Hypergraph g(3, {{0, 1}});
  std::vector<Potential> pots{Potential::exp_bilinear(2, 1.0, 0.05)};
  Model m(g, pots, 2, 0.2);
  for (int d : {1, 2, 5})
    EXPECT_NEAR(approx_prob(m, 2, 0, d, ConstraintSet(3)).value, 0.5, 1e-15);
}

TEST(ApproxProb, UnaryEdgeIsAnExactRatio) {
  Hypergraph g(1, {{0}});
  std::vector<Potential> pots{Potential::table(1, 2, {1.0, 1.02})};
  Model m(g, pots, 2, 0.1);
  EXPECT_NEAR(approx_prob(m, 0, 1, 1, ConstraintSet(1)).value, 1.02 / 2.02,
              1e-15);
}

TEST(ApproxProb, ValidatesItsArguments) {
  Model m = path3_table();
  ConstraintSet beta(3);
  beta.pin(1, 0);
  EXPECT_THROW(approx_prob(m, 1, 0, 2, beta), ValidationError);
  EXPECT_THROW(approx_prob(m, 0, 2, 2, ConstraintSet(3)), ValidationError);
  EXPECT_THROW(approx_prob(m, 0, 0, -1, ConstraintSet(3)), ValidationError);
  EXPECT_THROW(approx_prob(m, 3, 0, 2, ConstraintSet(3)), ValidationError);
  DecayOptions bad;
  bad.threads = 0;
  EXPECT_THROW(approx_prob(m, 0, 0, 2, ConstraintSet(3), bad),
               ValidationError);
}

TEST(GmEval, NormalizesOverLevels) {
  std::mt19937 rng(42);
  for (std::uint32_t index = 0; index < 16; ++index) {
    auto instance = cdint_test::make_instance(index);
    const Model& m = instance.model;
    ConstraintSet empty(m.graph().vertex_count());
    for (int v = 0; v < m.graph().vertex_count(); ++v) {
      auto cm = cdint_test::random_stochastic_marginals(rng, m, v, empty);
      double sum = 0.0;
      for (int level = 0; level < m.num_levels(); ++level)
        sum += g_m_eval(m, v, empty, level, cm);
      EXPECT_NEAR(sum, 1.0, 1e-12) << instance.name << " vertex " << v;
    }
  }
}

TEST(GmEval, ExactConditionalsReproduceTheMarginal) {
  Model m = path3_table();
  ConstraintSet empty(3);
  auto cm = cdint::exact_conditional_marginals(m, 1, empty);
  EXPECT_TRUE(cm.is_row_stochastic());
  EXPECT_EQ(cm.neighbor_order, (std::vector<int>{0, 2}));
  double expected = 4.0 / 8.0401;
  EXPECT_NEAR(g_m_eval(m, 1, empty, 0, cm), expected, 1e-12);
  EXPECT_NEAR(g_m_eval(m, 1, empty, 0, cm),
              cdint::marginal_exact(m, 1, 0, empty), 1e-12);
}

TEST(GmEval, ValidatesTableShape) {
  Model m = path3_table();
  ConstraintSet empty(3);
  auto cm = cdint::exact_conditional_marginals(m, 1, empty);

  ConditionalMarginals wrong_order = cm;
  wrong_order.neighbor_order = {2, 0};
  EXPECT_THROW(g_m_eval(m, 1, empty, 0, wrong_order), ValidationError);

  ConditionalMarginals wrong_levels = cm;
  wrong_levels.num_levels = 3;
  EXPECT_THROW(g_m_eval(m, 1, empty, 0, wrong_levels), ValidationError);

  ConditionalMarginals short_tables = cm;
  short_tables.tables.pop_back();
  EXPECT_THROW(g_m_eval(m, 1, empty, 0, short_tables), ValidationError);

  ConditionalMarginals bad_size = cm;
  bad_size.tables[1].pop_back();
  EXPECT_THROW(g_m_eval(m, 1, empty, 0, bad_size), ValidationError);
}

TEST(GmEval, EmptyTablesForAVertexWithoutFreeNeighbors) {
  Hypergraph g(3, {{0, 1}});
  std::vector<Potential> pots{Potential::exp_bilinear(2, 1.0, 0.05)};
  Model m(g, pots, 2, 0.2);
  ConditionalMarginals empty_cm;
  empty_cm.num_levels = 2;
  EXPECT_NEAR(g_m_eval(m, 2, ConstraintSet(3), 0, empty_cm), 0.5, 1e-15);
}

TEST(ChooseDepth, WorkedExamples) {
  EXPECT_EQ(choose_depth(0.2, 2, 3), 15);
  EXPECT_EQ(choose_depth(0.5, 1, 1), 1);
}

TEST(ChooseDepth, GuaranteesThePerStepTarget) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> unit(0.05, 0.9);
  std::uniform_int_distribution<int> levels(1, 6);
  std::uniform_int_distribution<int> vertices(1, 40);
  for (int i = 0; i < 200; ++i) {
    double delta = unit(rng);
    int num_levels = levels(rng);
    int n = vertices(rng);
    int d = choose_depth(delta, num_levels, n);
    EXPECT_GE(d, 1);
    EXPECT_LE(std::sqrt(2.0) * num_levels * std::pow(1.0 - delta, d),
              1.0 / (static_cast<double>(n) * n) + 1e-15);
  }
}

TEST(ChooseDepth, RejectsMissingDecayMargin) {
  EXPECT_THROW(choose_depth(0.0, 2, 3), ValidationError);
  EXPECT_THROW(choose_depth(1.0, 2, 3), ValidationError);
  EXPECT_THROW(choose_depth(0.2, 0, 3), ValidationError);
  EXPECT_THROW(choose_depth(0.2, 2, 0), ValidationError);
}

TEST(ChooseDepth, ModelOverloadUsesTheModelParameters) {
  Model m = path3_table();
  EXPECT_EQ(choose_depth(m),
            choose_depth(m.delta(), m.num_levels(),
                         m.graph().vertex_count()));
}

TEST(CallCountEstimate, ClosedFormExamples) {
  Hypergraph chain(2, {{0, 1}});
  std::vector<Potential> one{Potential::exp_bilinear(2, 1.0, 0.02)};
  Model eta1(chain, one, 2, 0.2);
  EXPECT_EQ(cdint::call_count_estimate(eta1, 0), 1.0);
  EXPECT_EQ(cdint::call_count_estimate(eta1, 3), 8.0);

  Model eta2 = path3_table();
  EXPECT_EQ(cdint::call_count_estimate(eta2, 2), 36.0);
  EXPECT_THROW(cdint::call_count_estimate(eta2, -1), ValidationError);
}

TEST(CallCountEstimate, BoundsTheMeasuredCalls) {
  Hypergraph chain(2, {{0, 1}});
  std::vector<Potential> one{Potential::exp_bilinear(2, 1.0, 0.02)};
  Model eta1(chain, one, 2, 0.2);
  auto est = approx_prob(eta1, 0, 0, 3, ConstraintSet(2));
  EXPECT_LE(static_cast<double>(est.recursive_calls),
            cdint::call_count_estimate(eta1, 3));

  Model eta2 = path3_table();
  auto middle = approx_prob(eta2, 1, 0, 2, ConstraintSet(3));
  EXPECT_LE(static_cast<double>(middle.recursive_calls),
            cdint::call_count_estimate(eta2, 2));
  EXPECT_EQ(middle.recursive_calls, 6u);
}

TEST(ApproxZ, ConstantPotentialsAreExactAtDepthOne) {
  Hypergraph g(4, {{0, 1}, {1, 2}, {2, 3}});
  std::vector<Potential> pots(3, Potential::exp_bilinear(2, 1.5, 0.0));
  Model m(g, pots, 3, 0.3);
  auto est = approx_z(m, 1);
  EXPECT_NEAR(est.value, std::pow(3.0, 4.0) * std::pow(1.5, 3.0), 1e-10);
}

TEST(ApproxZ, DepthExactOnThePath) {
  Model m = path3_table();
  auto est = approx_z(m, 3);
  EXPECT_NEAR(est.value, 8.0401, 1e-9);
  EXPECT_NEAR(est.log_value, std::log(8.0401), 1e-12);

  double log_f0 = cdint::log_f_eval(m, std::vector<int>{0, 0, 0});
  double log_steps = 0.0;
  ASSERT_EQ(est.step_values.size(), 3u);
  for (double x : est.step_values) log_steps += std::log(x);
  EXPECT_NEAR(est.log_value, log_f0 - log_steps, 1e-13);
}

TEST(ApproxZ, CertificateFields) {
  Model m = path3_table();
  auto est = approx_z(m, 5);
  EXPECT_EQ(est.depth, 5);
  EXPECT_EQ(est.delta, 0.2);
  EXPECT_NEAR(est.per_step_error, std::sqrt(2.0) * 2.0 * std::pow(0.8, 5),
              1e-15);
  EXPECT_NEAR(est.per_step_lower, 1.0 / (std::sqrt(2.0) * 2.0), 1e-15);
  ASSERT_LT(est.per_step_error, 1.0);
  EXPECT_NEAR(est.rel_error_bound,
              std::pow(1.0 + est.per_step_error, 3.0) - 1.0, 1e-15);

  auto shallow = approx_z(m, 1);
  EXPECT_GE(shallow.per_step_error, 1.0);
  EXPECT_TRUE(std::isinf(shallow.rel_error_bound));

  EXPECT_THROW(approx_z(m, 0), ValidationError);
}

TEST(ApproxZ, StepValuesRespectTheLowerBound) {
  for (std::uint32_t index = 0; index < 40; ++index) {
    auto instance = cdint_test::make_instance(index);
    if (!instance.connected) continue;
    const Model& m = instance.model;
    auto est = approx_z(m, 3);
    double bound = 1.0 / (std::sqrt(2.0) * m.num_levels());
    for (double x : est.step_values)
      EXPECT_GE(x, bound - 1e-12) << instance.name;
  }
}

TEST(ScaleInvariance, MarginalsIgnoreUniformScaling) {
  double gamma = 5.0;
  Hypergraph g(3, {{0, 1}, {1, 2}});
  std::vector<Potential> base{
      Potential::table(2, 2, {1.0, 1.0, 1.0, 1.01}),
      Potential::exp_bilinear(2, 1.0, 0.02)};
  std::vector<Potential> scaled{
      Potential::table(2, 2, {gamma, gamma, gamma, gamma * 1.01}),
      Potential::exp_bilinear(2, gamma, 0.02)};
  Model m_base(g, base, 2, 0.2);
  Model m_scaled(g, scaled, 2, 0.2);
  ConstraintSet empty(3);
  for (int v = 0; v < 3; ++v)
    for (int d = 1; d <= 4; ++d)
      EXPECT_NEAR(approx_prob(m_base, v, 0, d, empty).value,
                  approx_prob(m_scaled, v, 0, d, empty).value, 1e-12);
  EXPECT_NEAR(approx_z(m_scaled, 3).log_value,
              approx_z(m_base, 3).log_value + 2.0 * std::log(gamma), 1e-12);
}

TEST(Determinism, RepeatedRunsAreBitIdentical) {
  for (std::uint32_t index = 0; index < 8; ++index) {
    auto instance = cdint_test::make_instance(index);
    const Model& m = instance.model;
    auto first = approx_z(m, 3);
    auto second = approx_z(m, 3);
    EXPECT_EQ(first.log_value, second.log_value);
    EXPECT_EQ(first.step_values, second.step_values);
    EXPECT_EQ(first.recursive_calls, second.recursive_calls);
  }
}

TEST(Determinism, CacheIsValueTransparent) {
  for (std::uint32_t index = 0; index < 12; ++index) {
    auto instance = cdint_test::make_instance(index);
    const Model& m = instance.model;
    DecayOptions cached;
    cached.use_cache = true;
    auto plain = approx_z(m, 4);
    auto with_cache = approx_z(m, 4, cached);
    EXPECT_EQ(plain.log_value, with_cache.log_value) << instance.name;
    EXPECT_EQ(plain.step_values, with_cache.step_values);
    EXPECT_LE(with_cache.recursive_calls, plain.recursive_calls);

    std::mt19937 rng(500 + index);
    ConstraintSet beta = cdint_test::random_beta(rng, m, 2);
    for (int v = 0; v < m.graph().vertex_count(); ++v) {
      if (beta.constrained(v)) continue;
      auto a = approx_prob(m, v, 0, 4, beta);
      auto b = approx_prob(m, v, 0, 4, beta, cached);
      EXPECT_EQ(a.value, b.value);
      EXPECT_LE(b.recursive_calls, a.recursive_calls);
    }
  }
}

TEST(Determinism, WorkerCountDoesNotChangeTheResult) {
  for (std::uint32_t index = 0; index < 6; ++index) {
    auto instance = cdint_test::make_instance(index);
    const Model& m = instance.model;
    auto baseline = approx_z(m, 4);
    for (int threads : {2, 8}) {
      DecayOptions opts;
      opts.threads = threads;
      auto parallel = approx_z(m, 4, opts);
      EXPECT_EQ(baseline.log_value, parallel.log_value)
          << instance.name << " threads=" << threads;
      EXPECT_EQ(baseline.step_values, parallel.step_values);
      EXPECT_EQ(baseline.recursive_calls, parallel.recursive_calls);
    }
  }
}

}  // namespace
