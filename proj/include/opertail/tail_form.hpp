#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace opertail {

/// Immutable expression tree over coordinates: constants, variables, sums,
/// products and real powers. Tail densities are built from these nodes so they
/// can be evaluated, transformed, serialized and analysed for integrability.
///
/// All constants are expected to be positive; the asymptotic exponent analysis
/// relies on sums having no cancellation.
class Expr {
 public:
  enum class Kind { kConst, kVar, kSum, kProd, kPow };

  static Expr constant(double value);
  static Expr var(std::size_t index);
  static Expr sum(std::vector<Expr> terms);
  static Expr prod(std::vector<Expr> factors);
  static Expr pow(Expr base, double exponent);

  Kind kind() const;
  double eval(std::span<const double> x) const;

  /// Leading exponent of t under x_i -> t^(s_i) y_i as t -> inf.
  double scaling_exponent(std::span<const double> s) const;

  /// Replaces every var(i) by replacements[i].
  Expr substitute(const std::vector<Expr>& replacements) const;

  /// Largest variable index + 1 (0 for constant expressions).
  std::size_t arity() const;

  nlohmann::json to_json() const;
  static Expr from_json(const nlohmann::json& j);

  std::string to_string() const;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expr operator*(const Expr& a, const Expr& b);
Expr operator+(const Expr& a, const Expr& b);

enum class Frame {
  kOriginal,  // lambda(x) of an operator-regularly-varying density
  kCopula,    // lambda_C(w; kappa) of a copula
};

std::string to_string(Frame f);
Frame frame_from_string(const std::string& s);

/// A closed-form tail density together with its scaling data.
///
/// `scaling` holds the per-coordinate rates of the quasihomogeneity
/// lambda(t^scaling * w) = t^degree * lambda(w): the tail orders kappa in the
/// copula frame (degree 1 - sum kappa), the eigenvalues of E in the original
/// frame (degree -rho - tr E).
struct TailDensityForm {
  Frame frame = Frame::kCopula;
  Expr expr = Expr::constant(1.0);
  std::size_t dim = 0;
  std::vector<double> scaling;
  double degree = 0.0;
  std::string formula_tag;
  std::string normalization_note;

  double operator()(std::span<const double> x) const;

  nlohmann::json to_json() const;
  static TailDensityForm from_json(const nlohmann::json& j);
};

}  // namespace opertail
