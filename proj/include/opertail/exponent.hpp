#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "opertail/copulatail.hpp"
#include "opertail/liouville.hpp"
#include "opertail/opscale.hpp"
#include "opertail/regvar.hpp"
#include "opertail/tail_form.hpp"

namespace opertail {

/// [0, w]
struct Box {
  std::vector<double> w;
};
/// prod_i (w_i, inf)
struct UpperOrthant {
  std::vector<double> w;
};
/// {x : x_i < w_i for some i}
struct LowerUnion {
  std::vector<double> w;
};
/// complement of [0, w] in the closed orthant
struct BoxComplement {
  std::vector<double> w;
};
/// prod_i (lo_i, hi_i]; hi_i may be +inf
struct Rectangle {
  std::vector<double> lo;
  std::vector<double> hi;
};

using Region = std::variant<Box, UpperOrthant, LowerUnion, BoxComplement, Rectangle>;

std::size_t region_dim(const Region& b);
bool region_contains(const Region& b, std::span<const double> x);
/// Disjoint rectangles whose union is the region (empty cells dropped).
std::vector<Rectangle> region_cells(const Region& b);
std::string describe(const Region& b);
nlohmann::json region_to_json(const Region& b);
Region region_from_json(const nlohmann::json& j);

struct IntensityResult {
  bool divergent = false;
  double value = 0.0;
  double error = 0.0;
  std::string reason;  // which cell and scaling direction failed
};

/// Lambda(B) = int_B lambda(x) dx. Each cell first goes through an exponent
/// analysis of the expression tree along power-law rays towards the axes and
/// infinity; a non-integrable cell makes the whole result "divergent" without
/// any cubature being attempted.
IntensityResult intensity_measure(const TailDensityForm& lambda, const Region& b, double rel_tol = 1e-9);

/// Integrability verdict for a single rectangle; empty string when integrable.
std::string cell_divergence(const TailDensityForm& lambda, const Rectangle& cell);

/// a_C(w; rho) = Lambda_C({x : x_i < w_i for some i}). Throws DivergenceError
/// if the integral diverges.
double exponent_function(const TailDensityForm& lambda_c, std::span<const double> w, double rel_tol = 1e-10);

struct MixedDerivativeResult {
  double magnitude = 0.0;  // |mixed central difference|
  int sign = 0;
  double defect = 0.0;     // | magnitude - lambda_C(w) | / lambda_C(w)
  bool step_too_small = false;
};

MixedDerivativeResult exponent_mixed_derivative_defect(const TailDensityForm& lambda_c, std::span<const double> w,
                                                       double h);

struct OrthantRow {
  double t = 0.0;
  double estimate = 0.0;  // P(X in t^E B) / U(t)
  double stderr_ = 0.0;   // binomial standard error of the estimate
  double target = 0.0;    // Lambda(B) under the limit density
  std::size_t hits = 0;
  std::string verdict;
};

/// Monte Carlo estimates of P(X in t^E B) / U(t) for each t, U(t) = V(t) with
/// slowly varying factors identically 1.
std::vector<OrthantRow> orthant_convergence(const LiouvilleParams& p, const DiagExponent& e, const Region& b,
                                            std::span<const double> t_grid, std::size_t n, std::uint64_t seed,
                                            unsigned jobs = 1);

struct MarginalTailCheck {
  TailIndexEstimate hill;
  double expected_alpha = 0.0;  // rho / lambda_i
  IntensityResult slab;         // Lambda({x_i > 1})
};

/// Hill estimate on margin i of a Liouville sample next to the tail index and
/// slab mass predicted by the operator limit.
MarginalTailCheck marginal_tail_check(const LiouvilleParams& p, const DiagExponent& e, std::size_t i,
                                      std::size_t n, std::size_t k, std::uint64_t seed, unsigned jobs = 1);

}  // namespace opertail
