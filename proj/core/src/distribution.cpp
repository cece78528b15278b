#include "sepctl/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "sepctl/errors.hpp"

namespace sepctl {

namespace {
constexpr double kMassTolerance = 1e-9;
}

Distribution::Distribution(std::vector<std::string> support, std::vector<double> mass)
    : support_(std::move(support)), mass_(std::move(mass)) {
  require(support_.size() == mass_.size(), ErrorClass::invariant,
          "distribution: support/mass length mismatch");
  require(!support_.empty(), ErrorClass::invariant, "distribution: empty support");
  std::unordered_set<std::string> seen;
  for (const auto& label : support_) {
    require(!label.empty(), ErrorClass::invariant, "distribution: empty label");
    require(seen.insert(label).second, ErrorClass::invariant,
            "distribution: duplicate label '" + label + "'");
  }
  double total = 0.0;
  for (double m : mass_) {
    require(std::isfinite(m), ErrorClass::invariant, "distribution: non-finite mass");
    require(m >= 0.0, ErrorClass::invariant, "distribution: negative mass");
    total += m;
  }
  require(std::abs(total - 1.0) <= kMassTolerance, ErrorClass::invariant,
          "distribution: normalization (total mass " + std::to_string(total) + ")");
}

Distribution Distribution::point_mass(std::vector<std::string> support, std::size_t index) {
  require(index < support.size(), ErrorClass::domain, "point_mass: index outside support");
  std::vector<double> mass(support.size(), 0.0);
  mass[index] = 1.0;
  return Distribution(std::move(support), std::move(mass));
}

Distribution Distribution::uniform(std::vector<std::string> support) {
  require(!support.empty(), ErrorClass::invariant, "uniform: empty support");
  std::vector<double> mass(support.size(), 1.0 / static_cast<double>(support.size()));
  return Distribution(std::move(support), std::move(mass));
}

Distribution Distribution::from_weights(std::vector<std::string> support,
                                        std::vector<double> weight) {
  double total = 0.0;
  for (double w : weight) {
    require(std::isfinite(w) && w >= 0.0, ErrorClass::invariant, "from_weights: bad weight");
    total += w;
  }
  require(total > 0.0, ErrorClass::invariant, "from_weights: total weight not positive");
  for (double& w : weight) w /= total;
  return Distribution(std::move(support), std::move(weight));
}

double Distribution::mass_at(std::size_t i) const {
  require(i < mass_.size(), ErrorClass::domain, "mass_at: index outside support");
  return mass_[i];
}

double Distribution::mass_of(const std::string& label) const { return mass_[index_of(label)]; }

std::size_t Distribution::index_of(const std::string& label) const {
  auto it = std::find(support_.begin(), support_.end(), label);
  require(it != support_.end(), ErrorClass::domain, "unknown label '" + label + "'");
  return static_cast<std::size_t>(it - support_.begin());
}

bool Distribution::has_label(const std::string& label) const {
  return std::find(support_.begin(), support_.end(), label) != support_.end();
}

std::size_t Distribution::mode() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < mass_.size(); ++i)
    if (mass_[i] > mass_[best]) best = i;
  return best;
}

double Distribution::max_abs_difference(const Distribution& other) const {
  require(same_support(other), ErrorClass::domain, "max_abs_difference: support mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < mass_.size(); ++i)
    worst = std::max(worst, std::abs(mass_[i] - other.mass_[i]));
  return worst;
}

const char* error_class_name(ErrorClass c) {
  switch (c) {
    case ErrorClass::usage: return "usage";
    case ErrorClass::parse: return "parse";
    case ErrorClass::invariant: return "invariant";
    case ErrorClass::domain: return "domain";
    case ErrorClass::impossible_observation: return "impossible-observation";
    case ErrorClass::resolution: return "resolution";
    case ErrorClass::insufficient_data: return "insufficient-data";
    case ErrorClass::verification: return "verification";
    case ErrorClass::unsupported: return "unsupported";
    case ErrorClass::too_large: return "too-large";
  }
  return "unknown";
}

}  // namespace sepctl
