#pragma once

#include <limits>

#include <json.hpp>

#include "dopt/core/types.hpp"

namespace dopt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Convex feasible set made of affine equalities `A x = b` and coordinate
/// bounds `lower <= x <= upper`. Either part may be absent.
class ConstraintSet {
 public:
  enum class Kind { kNone, kBox, kAffine, kComposite };

  ConstraintSet() = default;

  static ConstraintSet box(Vector lower, Vector upper);
  static ConstraintSet affine(SparseMatrix a, Vector b);

  ConstraintSet& set_box(Vector lower, Vector upper);
  ConstraintSet& set_affine(SparseMatrix a, Vector b);

  Kind kind() const;
  bool empty() const { return kind() == Kind::kNone; }
  bool has_box() const { return lower_.size() > 0; }
  bool has_equalities() const { return eq_matrix_.rows() > 0; }

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  const SparseMatrix& eq_matrix() const { return eq_matrix_; }
  const Vector& eq_rhs() const { return eq_rhs_; }

  /// Max-norm constraint violation; 0 for an empty set.
  double violation(const Vector& x) const;

  /// Closed-form Euclidean projection; only valid for pure box sets.
  Vector project_box(const Vector& x) const;

  /// Intersection of two sets over the same dimension.
  ConstraintSet intersect(const ConstraintSet& other, Eigen::Index dim) const;

 private:
  Vector lower_, upper_;
  SparseMatrix eq_matrix_;
  Vector eq_rhs_;
};

void to_json(nlohmann::json& j, const ConstraintSet& c);
void from_json(const nlohmann::json& j, ConstraintSet& c);

}  // namespace dopt
