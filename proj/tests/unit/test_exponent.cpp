#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "opertail/error.hpp"
#include "opertail/exponent.hpp"
#include "opertail/rng.hpp"

using namespace opertail;

namespace {

LiouvilleParams id2() { return LiouvilleParams({1.0, 1.0}, DrivingFunction::inverted_dirichlet(3.0)); }
const DiagExponent kId2({1.0, 1.0});

// Inclusion-exclusion on the inverted-Dirichlet joint survival (1 + x_1 + ... + x_d)^-1,
// whose scaled pairwise and triple terms tend to (sum_{i in S} 1/w_i)^-1.
double id_exponent_oracle(const std::vector<double>& w) {
  const std::size_t d = w.size();
  double total = 0.0;
  for (std::size_t mask = 1; mask < (std::size_t{1} << d); ++mask) {
    double inv = 0.0;
    int bits = 0;
    for (std::size_t i = 0; i < d; ++i)
      if (mask & (std::size_t{1} << i)) {
        inv += 1.0 / w[i];
        ++bits;
      }
    total += (bits % 2 ? 1.0 : -1.0) / inv;
  }
  return total;
}

}  // namespace

TEST_CASE("region predicates, cells and JSON") {
  const Region box = Box{{1.0, 2.0}};
  const double in[] = {0.5, 1.5}, out[] = {1.5, 0.5};
  CHECK(region_contains(box, in));
  CHECK_FALSE(region_contains(box, out));
  const Region lu = LowerUnion{{1.0, 1.0}};
  CHECK(region_contains(lu, out));
  const double far[] = {3.0, 3.0};
  CHECK_FALSE(region_contains(lu, far));
  CHECK(region_contains(UpperOrthant{{1.0, 1.0}}, far));
  CHECK(region_contains(BoxComplement{{1.0, 1.0}}, out));
  CHECK_FALSE(region_contains(BoxComplement{{1.0, 2.0}}, in));
  CHECK(region_dim(lu) == 2);
  CHECK(region_cells(Box{{0.0, 1.0}}).empty());
  CHECK(region_cells(lu).size() >= 2);
  for (const Region& r : {box, lu, Region{UpperOrthant{{1.0, 0.0}}}, Region{BoxComplement{{2.0, 1.0}}},
                          Region{Rectangle{{0.5, 0.0}, {2.0, INFINITY}}}}) {
    const Region back = region_from_json(region_to_json(r));
    CHECK(describe(back) == describe(r));
    CHECK(region_to_json(back) == region_to_json(r));
  }
  CHECK_THROWS_AS(region_from_json(nlohmann::json::parse(R"({"type":"sphere","w":[1]})")), ConfigError);
  CHECK_THROWS_AS(region_from_json(nlohmann::json::parse(R"({"type":"box"})")), ConfigError);
}

TEST_CASE("intensity_measure examples") {
  const auto p = id2();
  const auto limit = liouville_limit_form(p, kId2);
  const auto tail = liouville_copula_tail_form(p, kId2);
  const auto upper = intensity_measure(limit, UpperOrthant{{1.0, 1.0}});
  CHECK_FALSE(upper.divergent);
  CHECK(upper.value == doctest::Approx(0.5).epsilon(1e-9));
  const auto lower = intensity_measure(tail, LowerUnion{{1.0, 1.0}});
  CHECK(lower.value == doctest::Approx(1.5).epsilon(1e-9));
  const auto up_c = intensity_measure(tail, UpperOrthant{{1.0, 1.0}});
  CHECK(up_c.divergent);
  CHECK_FALSE(up_c.reason.empty());
  const auto bc = intensity_measure(tail, BoxComplement{{1.0, 1.0}});
  CHECK(bc.divergent);
  // Box [0,1]^2 of the copula tail density: 1/2, the joint-exceedance limit.
  CHECK(intensity_measure(tail, Box{{1.0, 1.0}}).value == doctest::Approx(0.5).epsilon(1e-9));
  // The original-frame limit is not integrable at the origin.
  CHECK(intensity_measure(limit, Box{{1.0, 1.0}}).divergent);
  CHECK(cell_divergence(tail, Rectangle{{0.0, 0.0}, {1.0, 1.0}}).empty());
  CHECK_FALSE(cell_divergence(limit, Rectangle{{0.0, 0.0}, {1.0, 1.0}}).empty());
}

TEST_CASE("finite additivity on random box partitions") {
  const LiouvilleParams q({0.7, 1.6}, DrivingFunction::generic_rv(4.0, 0.5));
  const DiagExponent e({1.0, 1.0});
  const auto tail = liouville_copula_tail_form(q, e);
  const auto limit = liouville_limit_form(q, e);
  CounterRng rng(5, 0);
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<double> cut_x{0.0, 3.0}, cut_y{0.0, 2.0};
    for (int k = 0; k < 2; ++k) {
      cut_x.push_back(3.0 * rng.uniform_open());
      cut_y.push_back(2.0 * rng.uniform_open());
    }
    std::sort(cut_x.begin(), cut_x.end());
    std::sort(cut_y.begin(), cut_y.end());
    double pieces = 0.0;
    for (std::size_t i = 0; i + 1 < cut_x.size(); ++i)
      for (std::size_t j = 0; j + 1 < cut_y.size(); ++j)
        pieces += intensity_measure(tail, Rectangle{{cut_x[i], cut_y[j]}, {cut_x[i + 1], cut_y[j + 1]}}, 1e-10).value;
    const double whole = intensity_measure(tail, Box{{3.0, 2.0}}, 1e-10).value;
    CHECK(pieces == doctest::Approx(whole).epsilon(1e-6));

    // Original frame away from the origin, one side unbounded.
    const double split = 1.0 + 2.0 * rng.uniform_open();
    const double a = intensity_measure(limit, Rectangle{{1.0, 0.5}, {split, INFINITY}}, 1e-10).value;
    const double b = intensity_measure(limit, Rectangle{{split, 0.5}, {INFINITY, INFINITY}}, 1e-10).value;
    CHECK(a + b == doctest::Approx(intensity_measure(limit, UpperOrthant{{1.0, 0.5}}, 1e-10).value).epsilon(1e-6));
  }
}

TEST_CASE("exponent_function examples, homogeneity, monotonicity and bounds") {
  const auto p = id2();
  const auto tail = liouville_copula_tail_form(p, kId2);
  const double w11[] = {1.0, 1.0}, w10[] = {1.0, 0.0}, w22[] = {2.0, 2.0};
  const double a11 = exponent_function(tail, w11);
  CHECK(a11 == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(exponent_function(tail, w10) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(exponent_function(tail, w22) == doctest::Approx(3.0).epsilon(1e-9));
  for (double a : {0.3, 1.0, 2.5})
    for (double b : {0.5, 1.7}) {
      const std::vector<double> w{a, b};
      const double v = exponent_function(tail, w);
      CHECK(v == doctest::Approx(id_exponent_oracle(w)).epsilon(1e-8));
      for (double t : {0.5, 2.0, 4.0}) {
        const double tw[] = {t * a, t * b};
        CHECK(exponent_function(tail, tw) == doctest::Approx(t * v).epsilon(1e-3));
      }
      const double bump[] = {a * 1.1, b};
      CHECK(exponent_function(tail, bump) >= v);
      CHECK(v >= std::max(a, b) - 1e-12);  // single-margin slab masses are 1
      CHECK(v <= a + b + 1e-12);
    }
  const double zero[] = {0.0, 0.0};
  CHECK_THROWS_AS(exponent_function(tail, zero), DomainError);
  CHECK_THROWS_AS(exponent_function(liouville_limit_form(p, kId2), w11), DivergenceError);
}

TEST_CASE("exponent_function d = 3 against inclusion-exclusion") {
  const LiouvilleParams p({1.0, 1.0, 1.0}, DrivingFunction::inverted_dirichlet(4.0));
  const auto tail = liouville_copula_tail_form(p, DiagExponent({1.0, 1.0, 1.0}));
  const std::vector<double> w{1.0, 1.0, 1.0};
  CHECK(id_exponent_oracle(w) == doctest::Approx(11.0 / 6.0));
  // Nested tanh-sinh in three dimensions is slow; a loose request still lands near 1e-5.
  CHECK(exponent_function(tail, w, 1e-2) == doctest::Approx(11.0 / 6.0).epsilon(1e-4));
}

TEST_CASE("mixed derivative of the exponent function") {
  const auto p = id2();
  const auto tail = liouville_copula_tail_form(p, kId2);
  const double w11[] = {1.0, 1.0}, w12[] = {1.0, 2.0};
  auto m = exponent_mixed_derivative_defect(tail, w11, 0.05);
  CHECK(m.defect < 0.02);
  CHECK(m.magnitude == doctest::Approx(0.25).epsilon(0.02));
  CHECK(m.sign == -1);
  CHECK_FALSE(m.step_too_small);
  m = exponent_mixed_derivative_defect(tail, w12, 0.05);
  CHECK(m.magnitude == doctest::Approx(4.0 / 27.0).epsilon(0.03));
  CHECK(m.sign == -1);
  m = exponent_mixed_derivative_defect(tail, w12, 1e-9);
  CHECK(m.step_too_small);
  CHECK_THROWS_AS(exponent_mixed_derivative_defect(tail, w11, 2.0), DomainError);
}

TEST_CASE("orthant convergence") {
  const auto p = id2();
  const std::vector<double> t_grid{10.0, 100.0};
  const auto rows = orthant_convergence(p, kId2, UpperOrthant{{1.0, 1.0}}, t_grid, 100000, 20240917);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    const double t = row.t;
    const double exact = (1.0 / (1.0 + 2.0 * t)) / (std::pow(1.0 + t, -3.0) * t * t);
    CHECK(row.target == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::abs(row.estimate - exact) <= 3.0 * row.stderr_);
    CHECK(row.hits > 0);
  }
  CHECK(std::abs(rows[1].estimate - 0.5) <= 3.0 * rows[1].stderr_);
  CHECK(rows[1].verdict == "within 3 stderr");
  // The finite-t targets decrease monotonically to the limit.
  double prev = INFINITY;
  for (double t : {1.0, 10.0, 100.0, 1e4}) {
    const double exact = (1.0 / (1.0 + 2.0 * t)) / (std::pow(1.0 + t, -3.0) * t * t);
    CHECK(exact < prev);
    CHECK(exact > 0.5);
    prev = exact;
  }

  const auto jobs = orthant_convergence(p, kId2, UpperOrthant{{1.0, 1.0}}, t_grid, 100000, 20240917, 3);
  CHECK(jobs[1].estimate == rows[1].estimate);

  const auto empty = orthant_convergence(p, kId2, Box{{0.0, 1.0}}, t_grid, 100000, 1);
  CHECK(empty[0].estimate == 0.0);
  CHECK(empty[0].target == 0.0);
  CHECK(empty[0].verdict == "empty region");

  const std::vector<double> huge{1e9};
  const auto none = orthant_convergence(p, kId2, UpperOrthant{{1.0, 1.0}}, huge, 1000, 1);
  CHECK(none[0].hits == 0);
  CHECK(none[0].verdict == "increase n or decrease t");

  CHECK_THROWS_AS(orthant_convergence(p, kId2, LowerUnion{{1.0, 1.0}}, t_grid, 1000, 1), DivergenceError);
}

TEST_CASE("marginal regular variation") {
  const auto p = id2();
  const auto res = marginal_tail_check(p, kId2, 0, 1000000, 1000, 20240917);
  CHECK(res.expected_alpha == doctest::Approx(1.0));
  CHECK(res.hill.alpha == doctest::Approx(1.0).epsilon(0.1));
  CHECK_FALSE(res.slab.divergent);
  CHECK(res.slab.value == doctest::Approx(1.0).epsilon(1e-8));

  // Unequal lambda: the slab of the limit density is not integrable.
  const auto uneq = marginal_tail_check(p, DiagExponent({1.0, 2.0}), 0, 1000, 100, 1);
  CHECK(uneq.slab.divergent);
}
