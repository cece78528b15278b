#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sepctl {

// Finite probability distribution over an ordered, labeled support.
// Invariants: labels unique and non-empty, masses non-negative, total mass
// within 1e-9 of one.  Construction validates; mutation goes through
// renormalized factories so a live object is always valid.
class Distribution {
 public:
  Distribution(std::vector<std::string> support, std::vector<double> mass);

  static Distribution point_mass(std::vector<std::string> support, std::size_t index);
  static Distribution uniform(std::vector<std::string> support);
  // Normalizes `weight` to total mass one.  Errors if the total is not
  // strictly positive.
  static Distribution from_weights(std::vector<std::string> support, std::vector<double> weight);

  std::size_t size() const { return mass_.size(); }
  const std::vector<std::string>& support() const { return support_; }
  const std::vector<double>& mass() const { return mass_; }
  double mass_at(std::size_t i) const;
  double mass_of(const std::string& label) const;  // errors on unknown label
  std::size_t index_of(const std::string& label) const;
  bool has_label(const std::string& label) const;

  // Index of the largest mass; ties resolve to the lowest index.
  std::size_t mode() const;

  bool same_support(const Distribution& other) const { return support_ == other.support_; }
  double max_abs_difference(const Distribution& other) const;  // requires same support

 private:
  std::vector<std::string> support_;
  std::vector<double> mass_;
};

// Scalar Gaussian law N(mean, variance); variance may be zero (point mass).
struct Gaussian1D {
  double mean = 0.0;
  double variance = 0.0;
};

}  // namespace sepctl
