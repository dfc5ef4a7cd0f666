#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "vnrecur/classical.hpp"
#include "vnrecur/errors.hpp"
#include "vnrecur/recurrence.hpp"

using namespace vnrecur;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

std::vector<std::size_t> cyclic_shift(std::size_t m) {
  std::vector<std::size_t> map(m);
  for (std::size_t i = 0; i < m; ++i) map[i] = (i + 1) % m;
  return map;
}

ClassicalSystem uniform_cycle(std::size_t m) {
  return {std::vector<double>(m, 1.0 / static_cast<double>(m)), cyclic_shift(m)};
}

PointSet subset_from_bits(std::size_t bits, std::size_t m) {
  PointSet s;
  for (std::size_t i = 0; i < m; ++i) {
    if (bits & (std::size_t{1} << i)) s.push_back(i);
  }
  return s;
}

}  // namespace

TEST_CASE("ClassicalSystem validation") {
  CHECK(code_of([] { ClassicalSystem({0.5, 0.4}, {0, 1}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { ClassicalSystem({0.5, 0.5}, {0, 2}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { ClassicalSystem({0.5, 0.5}, {0}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { ClassicalSystem({1.5, -0.5}, {0, 1}); }) == ErrorCode::InvalidArgument);
  const ClassicalSystem sys = uniform_cycle(4);
  CHECK(code_of([&] { sys.mask({4}); }) == ErrorCode::InvalidArgument);
  CHECK(sys.orbit_point(1, 6) == 3);
}

TEST_CASE("koopman examples and homomorphism") {
  const ClassicalSystem identity({0.25, 0.25, 0.5}, {0, 1, 2});
  const ClassicalFunction g{1.0, Complex(2.0, 1.0), -3.0};
  CHECK(koopman(identity, g) == g);

  const ClassicalSystem cycle = uniform_cycle(4);
  // (chi_0 o T)[i] = 1 iff T(i) = 0, i.e. i = 3.
  CHECK(koopman(cycle, indicator(cycle, {0})) == ClassicalFunction{0.0, 0.0, 0.0, 1.0});
  const ClassicalFunction constant(4, Complex(0.7, -0.2));
  CHECK(koopman(cycle, constant) == constant);
  CHECK(code_of([&] { koopman(cycle, g); }) == ErrorCode::LengthMismatch);

  const ClassicalSystem folding({0.5, 0.25, 0.25}, {0, 0, 1});
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    ClassicalFunction a(3);
    ClassicalFunction b(3);
    for (std::size_t i = 0; i < 3; ++i) {
      a[i] = {standard_normal(rng), standard_normal(rng)};
      b[i] = {standard_normal(rng), standard_normal(rng)};
    }
    ClassicalFunction ab(3);
    ClassicalFunction abar(3);
    for (std::size_t i = 0; i < 3; ++i) {
      ab[i] = a[i] * b[i];
      abar[i] = std::conj(a[i]);
    }
    const ClassicalFunction ka = koopman(folding, a);
    const ClassicalFunction kb = koopman(folding, b);
    const ClassicalFunction kab = koopman(folding, ab);
    const ClassicalFunction kabar = koopman(folding, abar);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(kab[i] == ka[i] * kb[i]);
      CHECK(kabar[i] == std::conj(ka[i]));
    }
  }
  CHECK(koopman(folding, ClassicalFunction(3, 1.0)) == ClassicalFunction(3, 1.0));
}

TEST_CASE("check_prop31 examples") {
  const ClassicalSystem permuted({0.25, 0.25, 0.25, 0.25}, {2, 0, 3, 1});
  const Prop31Report uniform = check_prop31(permuted, 1e-12);
  CHECK(uniform.measure_preserving);
  CHECK(uniform.functional_invariant);
  CHECK(uniform.equivalent);

  const ClassicalSystem swap({0.7, 0.3}, {1, 0});
  const Prop31Report skewed = check_prop31(swap, 1e-12);
  CHECK_FALSE(skewed.measure_preserving);
  CHECK_FALSE(skewed.functional_invariant);
  CHECK(skewed.equivalent);

  const Prop31Report point = check_prop31(ClassicalSystem({1.0}, {0}), 1e-12);
  CHECK(point.measure_preserving);
  CHECK(point.functional_invariant);

  // Non-invertible but measure preserving: the null point 2 is collapsed.
  const Prop31Report folded = check_prop31(ClassicalSystem({0.5, 0.5, 0.0}, {1, 0, 0}), 1e-12);
  CHECK(folded.measure_preserving);
  CHECK(folded.functional_invariant);
}

TEST_CASE("check_prop31 agrees on seeded systems including non-invertible maps") {
  Rng rng(31);
  int preserving = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + static_cast<std::size_t>(uniform01(rng) * 10.0);
    std::vector<double> w(m);
    std::vector<std::size_t> map(m);
    if (trial % 2 == 0) {
      // A cycle on the support, with the null points folded into it.
      std::vector<std::size_t> perm(m);
      for (std::size_t i = 0; i < m; ++i) perm[i] = i;
      std::shuffle(perm.begin(), perm.end(), rng);
      const std::size_t support = 1 + static_cast<std::size_t>(uniform01(rng) * m);
      for (std::size_t i = 0; i < m; ++i) {
        w[i] = i < support ? 1.0 / static_cast<double>(support) : 0.0;
        map[i] = i < support ? (i + 1) % support : perm[i] % support;
      }
    } else {
      double total = 0.0;
      for (std::size_t i = 0; i < m; ++i) total += (w[i] = uniform01(rng) + 0.05);
      for (std::size_t i = 0; i < m; ++i) {
        w[i] /= total;
        map[i] = static_cast<std::size_t>(uniform01(rng) * m);
      }
    }
    double sum = 0.0;
    for (double x : w) sum += x;
    w[0] += 1.0 - sum;
    const Prop31Report report = check_prop31(ClassicalSystem(w, map), 1e-12, trial);
    CHECK(report.equivalent);
    CHECK(report.measure_preserving == report.functional_invariant);
    preserving += report.measure_preserving ? 1 : 0;
  }
  CHECK(preserving >= 100);
}

TEST_CASE("classical_recurrence examples") {
  const ClassicalSystem identity({0.25, 0.25, 0.5}, {0, 1, 2});
  const ClassicalRecurrence fixed = classical_recurrence(identity, {2}, 3);
  CHECK(fixed.first_n == 1);
  CHECK(fixed.overlaps[0] == 0.5);

  const ClassicalRecurrence c4 = classical_recurrence(uniform_cycle(4), {0}, 4);
  CHECK(c4.first_n == 4);
  CHECK(c4.overlaps == std::vector<double>{0.0, 0.0, 0.0, 0.25});

  const ClassicalRecurrence c5 = classical_recurrence(uniform_cycle(5), {0, 1}, 5);
  CHECK(c5.first_n == 1);
  CHECK(c5.overlaps[0] == doctest::Approx(0.2).epsilon(1e-15));

  CHECK(code_of([&] { classical_recurrence(ClassicalSystem({0.7, 0.3}, {1, 0}), {0}, 3); }) ==
        ErrorCode::NotMeasurePreserving);
  CHECK(code_of([&] { classical_recurrence(ClassicalSystem({1.0, 0.0}, {0, 0}), {1}, 3); }) ==
        ErrorCode::NullSet);
}

TEST_CASE("classical_recurrence matches the orbit oracle and the Poincare bound") {
  for (std::size_t m = 1; m <= 9; ++m) {
    const ClassicalSystem sys = uniform_cycle(m);
    for (std::size_t bits = 1; bits < (std::size_t{1} << m); ++bits) {
      const PointSet s = subset_from_bits(bits, m);
      const std::vector<bool> mask = sys.mask(s);
      const std::size_t n_max = 2 * m;
      const ClassicalRecurrence rec = classical_recurrence(sys, s, n_max);
      for (std::size_t n = 1; n <= n_max; ++n) {
        CHECK(rec.overlaps[n - 1] == oracle::orbit_overlap({sys.weights().begin(), sys.weights().end()},
                                                            {sys.map().begin(), sys.map().end()}, mask, n));
      }
      REQUIRE(rec.first_n.has_value());
      CHECK(static_cast<double>(*rec.first_n - 1) * sys.measure(s) <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("embed_diagonal reproduces classical overlaps") {
  const ClassicalSystem cycle = uniform_cycle(4);
  const DiagonalEmbedding emb = embed_diagonal(cycle);
  CHECK(emb.algebra.block_count() == 4);
  CHECK(emb.state(emb.algebra.identity()) == Complex(1.0));

  const CorrelationSequence seq = correlation_sequence(emb.state, emb.indicator({0}), emb.koopman, 8);
  CHECK(seq.values == std::vector<double>{0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 0.25});
  const CorrelationSequence whole =
      correlation_sequence(emb.state, emb.indicator({0, 1, 2, 3}), emb.koopman, 6);
  for (double c : whole.values) CHECK(c == 1.0);

  // Zero-weight points are dropped; the map restricted to the support survives.
  const ClassicalSystem folded({0.5, 0.5, 0.0}, {1, 0, 0});
  const DiagonalEmbedding small = embed_diagonal(folded);
  CHECK(small.algebra.block_count() == 2);
  CHECK(small.support == std::vector<std::size_t>{0, 1});
  CHECK(small.point_count == 3);
  const CorrelationSequence alt = correlation_sequence(small.state, small.indicator({0, 2}), small.koopman, 4);
  CHECK(alt.values == std::vector<double>{0.0, 0.5, 0.0, 0.5});

  CHECK(code_of([] { embed_diagonal(ClassicalSystem({0.5, 0.5, 0.0}, {2, 0, 0})); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("embedded correlation equals set overlap for all subsets of small systems") {
  Rng rng(44);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 2 + static_cast<std::size_t>(trial % 7);
    std::vector<std::size_t> perm(m);
    for (std::size_t i = 0; i < m; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> w(m);
    double total = 0.0;
    // Weights constant on cycles keep the permutation measure preserving.
    std::vector<std::size_t> cycle_id(m, m);
    std::vector<double> cycle_weight;
    for (std::size_t i = 0; i < m; ++i) {
      if (cycle_id[i] != m) continue;
      const double value = uniform01(rng) + 0.1;
      for (std::size_t j = i; cycle_id[j] == m; j = perm[j]) cycle_id[j] = cycle_weight.size();
      cycle_weight.push_back(value);
    }
    for (std::size_t i = 0; i < m; ++i) total += (w[i] = cycle_weight[cycle_id[i]]);
    for (double& x : w) x /= total;
    double sum = 0.0;
    for (double x : w) sum += x;
    if (std::abs(sum - 1.0) > 1e-12) continue;
    const ClassicalSystem sys(w, perm);
    if (!sys.is_measure_preserving()) continue;
    const DiagonalEmbedding emb = embed_diagonal(sys);
    for (std::size_t bits = 1; bits < (std::size_t{1} << m); ++bits) {
      const PointSet s = subset_from_bits(bits, m);
      const ClassicalRecurrence rec = classical_recurrence(sys, s, 12);
      const CorrelationSequence seq = correlation_sequence(emb.state, emb.indicator(s), emb.koopman, 12);
      for (std::size_t n = 1; n <= 12; ++n) CHECK(std::abs(seq.at(n) - rec.overlaps[n - 1]) <= 1e-14);
    }
  }
}
