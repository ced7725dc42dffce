#include "opertail/tail_form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "opertail/error.hpp"

namespace opertail {

struct Expr::Node {
  Kind kind;
  double value = 0.0;  // constant value or exponent
  std::size_t index = 0;
  std::vector<Expr> children;
};

Expr Expr::constant(double value) {
  if (!std::isfinite(value)) throw DomainError("Expr: constant must be finite");
  return Expr(std::make_shared<const Node>(Node{Kind::kConst, value, 0, {}}));
}

Expr Expr::var(std::size_t index) { return Expr(std::make_shared<const Node>(Node{Kind::kVar, 0.0, index, {}})); }

Expr Expr::sum(std::vector<Expr> terms) {
  if (terms.empty()) throw DomainError("Expr: empty sum");
  if (terms.size() == 1) return terms.front();
  return Expr(std::make_shared<const Node>(Node{Kind::kSum, 0.0, 0, std::move(terms)}));
}

Expr Expr::prod(std::vector<Expr> factors) {
  if (factors.empty()) return constant(1.0);
  if (factors.size() == 1) return factors.front();
  return Expr(std::make_shared<const Node>(Node{Kind::kProd, 0.0, 0, std::move(factors)}));
}

Expr Expr::pow(Expr base, double exponent) {
  if (!std::isfinite(exponent)) throw DomainError("Expr: exponent must be finite");
  if (exponent == 1.0) return base;
  // (x^a)^b = x^(ab) on the open orthant, where every tail density lives.
  if (base.kind() == Kind::kPow)
    return pow(base.node_->children.front(), base.node_->value * exponent);
  return Expr(std::make_shared<const Node>(Node{Kind::kPow, exponent, 0, {std::move(base)}}));
}

Expr operator*(const Expr& a, const Expr& b) { return Expr::prod({a, b}); }
Expr operator+(const Expr& a, const Expr& b) { return Expr::sum({a, b}); }

Expr::Kind Expr::kind() const { return node_->kind; }

double Expr::eval(std::span<const double> x) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::kConst:
      return n.value;
    case Kind::kVar:
      if (n.index >= x.size()) throw DomainError("Expr: variable index out of range");
      return x[n.index];
    case Kind::kSum: {
      double s = 0.0;
      for (const auto& c : n.children) s += c.eval(x);
      return s;
    }
    case Kind::kProd: {
      double p = 1.0;
      for (const auto& c : n.children) p *= c.eval(x);
      return p;
    }
    case Kind::kPow:
      return std::pow(n.children.front().eval(x), n.value);
  }
  return 0.0;
}

double Expr::scaling_exponent(std::span<const double> s) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::kConst:
      return n.value == 0.0 ? -std::numeric_limits<double>::infinity() : 0.0;
    case Kind::kVar:
      return n.index < s.size() ? s[n.index] : 0.0;
    case Kind::kSum: {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& c : n.children) best = std::max(best, c.scaling_exponent(s));
      return best;
    }
    case Kind::kProd: {
      double total = 0.0;
      for (const auto& c : n.children) total += c.scaling_exponent(s);
      return total;
    }
    case Kind::kPow:
      return n.value * n.children.front().scaling_exponent(s);
  }
  return 0.0;
}

Expr Expr::substitute(const std::vector<Expr>& replacements) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::kConst:
      return *this;
    case Kind::kVar:
      if (n.index >= replacements.size()) throw DomainError("Expr::substitute: missing replacement");
      return replacements[n.index];
    case Kind::kSum:
    case Kind::kProd: {
      std::vector<Expr> kids;
      kids.reserve(n.children.size());
      for (const auto& c : n.children) kids.push_back(c.substitute(replacements));
      return n.kind == Kind::kSum ? sum(std::move(kids)) : prod(std::move(kids));
    }
    case Kind::kPow:
      return pow(n.children.front().substitute(replacements), n.value);
  }
  return *this;
}

std::size_t Expr::arity() const {
  const Node& n = *node_;
  if (n.kind == Kind::kVar) return n.index + 1;
  std::size_t best = 0;
  for (const auto& c : n.children) best = std::max(best, c.arity());
  return best;
}

nlohmann::json Expr::to_json() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::kConst:
      return {{"const", n.value}};
    case Kind::kVar:
      return {{"var", n.index}};
    case Kind::kSum:
    case Kind::kProd: {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& c : n.children) arr.push_back(c.to_json());
      return {{n.kind == Kind::kSum ? "sum" : "prod", arr}};
    }
    case Kind::kPow:
      return {{"pow", n.children.front().to_json()}, {"exponent", n.value}};
  }
  return {};
}

Expr Expr::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("expression: expected an object");
  if (j.contains("const")) return constant(j.at("const").get<double>());
  if (j.contains("var")) return var(j.at("var").get<std::size_t>());
  if (j.contains("sum") || j.contains("prod")) {
    const bool is_sum = j.contains("sum");
    const auto& arr = j.at(is_sum ? "sum" : "prod");
    if (!arr.is_array()) throw ConfigError("expression: sum/prod expects an array");
    std::vector<Expr> kids;
    for (const auto& c : arr) kids.push_back(from_json(c));
    return is_sum ? sum(std::move(kids)) : prod(std::move(kids));
  }
  if (j.contains("pow")) {
    if (!j.contains("exponent")) throw ConfigError("expression: pow requires 'exponent'");
    return pow(from_json(j.at("pow")), j.at("exponent").get<double>());
  }
  throw ConfigError("expression: unknown node " + j.dump());
}

std::string Expr::to_string() const {
  const Node& n = *node_;
  std::ostringstream os;
  os.precision(17);
  switch (n.kind) {
    case Kind::kConst:
      os << n.value;
      break;
    case Kind::kVar:
      os << "x" << n.index + 1;
      break;
    case Kind::kSum:
    case Kind::kProd: {
      os << "(";
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) os << (n.kind == Kind::kSum ? " + " : " * ");
        os << n.children[i].to_string();
      }
      os << ")";
      break;
    }
    case Kind::kPow:
      os << n.children.front().to_string() << "^" << n.value;
      break;
  }
  return os.str();
}

std::string to_string(Frame f) { return f == Frame::kOriginal ? "original" : "copula"; }

Frame frame_from_string(const std::string& s) {
  if (s == "original") return Frame::kOriginal;
  if (s == "copula") return Frame::kCopula;
  throw ConfigError("unknown frame '" + s + "' (expected original|copula)");
}

double TailDensityForm::operator()(std::span<const double> x) const {
  if (x.size() != dim) throw DomainError("TailDensityForm: dimension mismatch");
  return expr.eval(x);
}

nlohmann::json TailDensityForm::to_json() const {
  return {{"frame", to_string(frame)},       {"dim", dim},
          {"scaling", scaling},              {"degree", degree},
          {"expr", expr.to_json()},          {"formula", formula_tag},
          {"normalization", normalization_note}};
}

TailDensityForm TailDensityForm::from_json(const nlohmann::json& j) {
  try {
    TailDensityForm f;
    f.frame = frame_from_string(j.at("frame").get<std::string>());
    f.expr = Expr::from_json(j.at("expr"));
    f.dim = j.at("dim").get<std::size_t>();
    f.scaling = j.value("scaling", std::vector<double>(f.dim, 1.0));
    f.degree = j.value("degree", 1.0 - static_cast<double>(f.dim));
    f.formula_tag = j.value("formula", std::string{});
    f.normalization_note = j.value("normalization", std::string{});
    if (f.expr.arity() > f.dim) throw ConfigError("tail form: expression uses more variables than 'dim'");
    if (f.scaling.size() != f.dim) throw ConfigError("tail form: 'scaling' must have 'dim' entries");
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("tail form: ") + e.what());
  }
}

}  // namespace opertail
