#pragma once

#include <span>
#include <string>

#include <json.hpp>

namespace tor {

enum class BernsteinKind { Identity, Stable, TemperedStable, DriftPlusStable };

/// Laplace exponent of a subordinator with closed form:
///   Identity          B(l) = l
///   Stable            B(l) = l^a
///   TemperedStable    B(l) = (1+l)^a - 1
///   DriftPlusStable   B(l) = b*l + l^a
class BernsteinFunction {
 public:
  BernsteinFunction() = default;

  static BernsteinFunction identity();
  static BernsteinFunction stable(double alpha);
  static BernsteinFunction tempered_stable(double alpha);
  static BernsteinFunction drift_plus_stable(double drift, double alpha);

  BernsteinKind kind() const { return kind_; }
  double drift() const { return drift_; }
  /// Stable index of the jump part; 1 for Identity.
  double alpha() const { return alpha_; }
  /// Index a with B in the classes B^a and B_a (large-lambda growth exponent).
  double growth_index() const;
  bool has_jumps() const { return kind_ != BernsteinKind::Identity; }

  double operator()(double lambda) const;
  double levy_density(double y) const;

  std::string name() const;

  friend bool operator==(const BernsteinFunction&, const BernsteinFunction&) = default;

 private:
  BernsteinFunction(BernsteinKind k, double drift, double alpha) : kind_(k), drift_(drift), alpha_(alpha) {}

  BernsteinKind kind_ = BernsteinKind::Identity;
  double drift_ = 1.0;
  double alpha_ = 1.0;
};

double eval(const BernsteinFunction& b, double lambda);
double levy_density(const BernsteinFunction& b, double y);

struct BoundScreen {
  bool lower_ok = false;
  bool upper_ok = false;
  double witness_c = 0.0;        // min of B(l)/min(l^a, l) over the grid
  double upper_witness_c = 0.0;  // max of B(l)/l^a over the grid
};

// Numeric screen of B(l) >= c*min(l^a, l) and B(l) <= c*l^a on a finite grid.
// A bound is accepted when its witness ratio over the top decade of the grid
// does not drift away by more than a factor 1.25 from the rest of the grid.
BoundScreen classify_bounds(const BernsteinFunction& b, double alpha, std::span<const double> lambda_grid);

void to_json(nlohmann::json& j, const BernsteinFunction& b);
void from_json(const nlohmann::json& j, BernsteinFunction& b);

}  // namespace tor
