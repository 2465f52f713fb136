#include "orbit/core.hpp"

#include <cmath>

namespace orbit {

void require_dim(const Vector& v, std::size_t dim, const char* what) {
  if (static_cast<std::size_t>(v.size()) != dim) {
    throw Error(ErrorCode::DimMismatch, std::string(what) + " has length " +
                                            std::to_string(v.size()) + ", expected " +
                                            std::to_string(dim));
  }
}

double score(const Vector& w, const Vector& f) {
  if (w.size() != f.size()) {
    throw Error(ErrorCode::DimMismatch, "score: weights have length " + std::to_string(w.size()) +
                                            " but features have length " +
                                            std::to_string(f.size()));
  }
  return w.dot(f);
}

Vector normalized_or_zero(const Vector& v) {
  const double norm = v.norm();
  if (norm == 0.0 || !std::isfinite(norm)) return Vector::Zero(v.size());
  return v / norm;
}

}  // namespace orbit
