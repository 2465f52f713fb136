#pragma once

// Shared vocabulary for linear structured decoders: weight and feature
// vectors, the task concepts every loss and trainer is written against, and
// the feature-difference helpers used by the update rules.

#include <concepts>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "orbit/error.hpp"

namespace orbit {

/// Dense real vector used for both decoder weights w and feature maps phi(x, y).
using Vector = Eigen::VectorXd;

/// A structured task: a feature map over (input, label) pairs, an exact argmax
/// decoder, and the task's cost function. Decoders must return the smallest
/// maximizer under the task's documented label order.
template <typename T>
concept StructuredTask = requires(const T& task, const typename T::Input& x,
                                  const typename T::Label& y, const Vector& w) {
  typename T::Input;
  typename T::Label;
  { task.dim() } -> std::convertible_to<std::size_t>;
  { task.phi(x, y) } -> std::convertible_to<Vector>;
  { task.decode(w, x) } -> std::same_as<typename T::Label>;
  { task.cost(y, y) } -> std::convertible_to<double>;
  { y == y } -> std::convertible_to<bool>;
};

/// Tasks whose cost decomposes over the output so that
/// argmax_y' [w.phi(x, y') + scale * cost(y, y')] is tractable.
template <typename T>
concept CostAugmentedTask =
    StructuredTask<T> && requires(const T& task, const typename T::Input& x,
                                  const typename T::Label& y, const Vector& w, double scale) {
      { task.cost_augmented_decode(w, x, y, scale) } -> std::same_as<typename T::Label>;
    };

/// Tasks whose label space for an input can be counted and listed in
/// tie-break order.
template <typename T>
concept EnumerableTask =
    StructuredTask<T> && requires(const T& task, const typename T::Input& x) {
      { task.label_count(x) } -> std::convertible_to<std::size_t>;
      { task.enumerate_labels(x) } -> std::convertible_to<std::vector<typename T::Label>>;
    };

template <StructuredTask T>
struct Example {
  typename T::Input input;
  typename T::Label target;
};

template <StructuredTask T>
using Dataset = std::vector<Example<T>>;

/// w . f; throws DIM_MISMATCH when the lengths differ.
double score(const Vector& w, const Vector& f);

void require_dim(const Vector& v, std::size_t dim, const char* what);

/// v / ||v||, or the zero vector when ||v|| == 0.
Vector normalized_or_zero(const Vector& v);

/// Delta phi(y, y2) = phi(x, y) - phi(x, y2).
template <StructuredTask T>
Vector delta_phi(const T& task, const typename T::Input& x, const typename T::Label& y,
                 const typename T::Label& y2) {
  if (y == y2) return Vector::Zero(static_cast<Eigen::Index>(task.dim()));
  return task.phi(x, y) - task.phi(x, y2);
}

/// Normalized feature difference. Zero when the labels coincide, and also
/// when distinct labels have identical features (the direction is undefined).
template <StructuredTask T>
Vector delta_phi_hat(const T& task, const typename T::Input& x, const typename T::Label& y,
                     const typename T::Label& y2) {
  if (y == y2) return Vector::Zero(static_cast<Eigen::Index>(task.dim()));
  return normalized_or_zero(task.phi(x, y) - task.phi(x, y2));
}

}  // namespace orbit
