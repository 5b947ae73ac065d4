#include "dopt/core/constraints.hpp"

#include <algorithm>
#include <cmath>

namespace dopt {

ConstraintSet ConstraintSet::box(Vector lower, Vector upper) {
  ConstraintSet c;
  c.set_box(std::move(lower), std::move(upper));
  return c;
}

ConstraintSet ConstraintSet::affine(SparseMatrix a, Vector b) {
  ConstraintSet c;
  c.set_affine(std::move(a), std::move(b));
  return c;
}

ConstraintSet& ConstraintSet::set_box(Vector lower, Vector upper) {
  if (lower.size() != upper.size()) throw ArgumentError("box bounds differ in size");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (lower[i] > upper[i]) throw ArgumentError("box lower bound exceeds upper bound");
  }
  if (eq_matrix_.rows() > 0 && eq_matrix_.cols() != lower.size())
    throw ArgumentError("box dimension does not match equality constraints");
  lower_ = std::move(lower);
  upper_ = std::move(upper);
  return *this;
}

ConstraintSet& ConstraintSet::set_affine(SparseMatrix a, Vector b) {
  if (a.rows() != b.size()) throw ArgumentError("equality matrix and rhs differ in rows");
  if (lower_.size() > 0 && a.cols() != lower_.size())
    throw ArgumentError("equality dimension does not match box");
  a.makeCompressed();
  eq_matrix_ = std::move(a);
  eq_rhs_ = std::move(b);
  return *this;
}

ConstraintSet::Kind ConstraintSet::kind() const {
  const bool box = has_box();
  const bool eq = has_equalities();
  if (box && eq) return Kind::kComposite;
  if (box) return Kind::kBox;
  if (eq) return Kind::kAffine;
  return Kind::kNone;
}

double ConstraintSet::violation(const Vector& x) const {
  double v = 0.0;
  if (has_box()) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      v = std::max(v, lower_[i] - x[i]);
      v = std::max(v, x[i] - upper_[i]);
    }
  }
  if (has_equalities()) {
    const Vector r = eq_matrix_ * x - eq_rhs_;
    v = std::max(v, r.cwiseAbs().maxCoeff());
  }
  return v;
}

Vector ConstraintSet::project_box(const Vector& x) const {
  if (has_equalities()) throw StateError("project_box called on a set with equalities");
  if (!has_box()) return x;
  return x.cwiseMax(lower_).cwiseMin(upper_);
}

ConstraintSet ConstraintSet::intersect(const ConstraintSet& other, Eigen::Index dim) const {
  ConstraintSet out;
  if (has_box() || other.has_box()) {
    Vector lo = Vector::Constant(dim, -kInf);
    Vector hi = Vector::Constant(dim, kInf);
    if (has_box()) {
      lo = lo.cwiseMax(lower_);
      hi = hi.cwiseMin(upper_);
    }
    if (other.has_box()) {
      lo = lo.cwiseMax(other.lower_);
      hi = hi.cwiseMin(other.upper_);
    }
    out.set_box(lo, hi);
  }
  if (has_equalities() || other.has_equalities()) {
    const Eigen::Index m1 = eq_matrix_.rows();
    const Eigen::Index m2 = other.eq_matrix_.rows();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(eq_matrix_.nonZeros() + other.eq_matrix_.nonZeros());
    for (int k = 0; k < eq_matrix_.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(eq_matrix_, k); it; ++it)
        trips.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < other.eq_matrix_.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(other.eq_matrix_, k); it; ++it)
        trips.emplace_back(m1 + it.row(), it.col(), it.value());
    SparseMatrix a(m1 + m2, dim);
    a.setFromTriplets(trips.begin(), trips.end());
    Vector b(m1 + m2);
    if (m1) b.head(m1) = eq_rhs_;
    if (m2) b.tail(m2) = other.eq_rhs_;
    out.set_affine(std::move(a), std::move(b));
  }
  return out;
}

namespace {

nlohmann::json bound_to_json(const Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (double x : v) {
    if (std::isinf(x)) arr.push_back(x > 0 ? "inf" : "-inf");
    else arr.push_back(x);
  }
  return arr;
}

Vector bound_from_json(const nlohmann::json& arr) {
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (arr[i].is_string()) v[i] = arr[i].get<std::string>() == "-inf" ? -kInf : kInf;
    else v[i] = arr[i].get<double>();
  }
  return v;
}

}  // namespace

void to_json(nlohmann::json& j, const ConstraintSet& c) {
  j = nlohmann::json::object();
  if (c.has_box()) {
    j["lower"] = bound_to_json(c.lower());
    j["upper"] = bound_to_json(c.upper());
  }
  if (c.has_equalities()) {
    nlohmann::json trips = nlohmann::json::array();
    const SparseMatrix& a = c.eq_matrix();
    for (int k = 0; k < a.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(a, k); it; ++it)
        trips.push_back({it.row(), it.col(), it.value()});
    j["eq_rows"] = a.rows();
    j["eq_cols"] = a.cols();
    j["eq_entries"] = trips;
    j["eq_rhs"] = std::vector<double>(c.eq_rhs().data(), c.eq_rhs().data() + c.eq_rhs().size());
  }
}

void from_json(const nlohmann::json& j, ConstraintSet& c) {
  c = ConstraintSet();
  if (j.contains("lower")) c.set_box(bound_from_json(j.at("lower")), bound_from_json(j.at("upper")));
  if (j.contains("eq_rows")) {
    SparseMatrix a(j.at("eq_rows").get<Eigen::Index>(), j.at("eq_cols").get<Eigen::Index>());
    std::vector<Eigen::Triplet<double>> trips;
    for (const auto& t : j.at("eq_entries"))
      trips.emplace_back(t[0].get<int>(), t[1].get<int>(), t[2].get<double>());
    a.setFromTriplets(trips.begin(), trips.end());
    auto rhs = j.at("eq_rhs").get<std::vector<double>>();
    c.set_affine(std::move(a), Eigen::Map<Vector>(rhs.data(), static_cast<Eigen::Index>(rhs.size())));
  }
}

}  // namespace dopt
