#include "sepctl/learner.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <utility>

#include "sepctl/errors.hpp"
#include "sepctl/scenarios.hpp"
#include "sepctl/textio.hpp"
#include "sepctl/version.hpp"

namespace sepctl::learner {

std::vector<std::vector<std::size_t>> enumerate_observation_histories(std::size_t n_observations,
                                                                      std::size_t length) {
  require(n_observations >= 1, ErrorClass::invariant,
          "enumerate_observation_histories: empty observation space");
  double projected = 1.0;
  for (std::size_t i = 0; i < length; ++i) projected *= static_cast<double>(n_observations);
  require(projected <= 1e6, ErrorClass::too_large,
          "enumerate_observation_histories: more than 10^6 histories");

  std::vector<std::vector<std::size_t>> histories;
  std::vector<std::size_t> current(length, 0);
  while (true) {
    histories.push_back(current);
    // Odometer with the latest step fastest, so the earliest step is the most
    // significant lexicographic position.
    std::size_t pos = length;
    while (pos > 0) {
      if (++current[pos - 1] < n_observations) break;
      current[pos - 1] = 0;
      --pos;
    }
    if (pos == 0) break;
  }
  return histories;
}

std::string history_label(const LabeledSpace& space, const std::vector<std::size_t>& history) {
  if (history.empty()) return ".";
  std::string label;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (i > 0) label += '+';
    label += space.labels.at(history[i]);
  }
  return label;
}

EmpiricalConditional::EmpiricalConditional(std::uint64_t scenario_hash, double alpha)
    : scenario_hash_(scenario_hash), alpha_(alpha) {
  require(alpha >= 0.0, ErrorClass::invariant,
          "EmpiricalConditional: smoothing pseudo-count must be nonnegative");
}

void EmpiricalConditional::record(const std::vector<std::size_t>& u_history,
                                  const std::vector<std::size_t>& y_hat_history) {
  require(y_hat_history.size() == u_history.size() + 1, ErrorClass::invariant,
          "EmpiricalConditional::record: observation history must be one longer than the "
          "control history");
  ++counts_[u_history][y_hat_history];
  ++totals_[u_history];
  ++records_;
}

namespace {

std::string index_history_text(const std::vector<std::size_t>& history) {
  if (history.empty()) return ".";
  std::string text;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (i > 0) text += '+';
    text += std::to_string(history[i]);
  }
  return text;
}

}  // namespace

Distribution EmpiricalConditional::query(const std::vector<std::size_t>& u_history,
                                         const LabeledSpace& observations) const {
  const auto histories =
      enumerate_observation_histories(observations.size(), u_history.size() + 1);
  const auto total_it = totals_.find(u_history);
  const std::uint64_t total = total_it == totals_.end() ? 0 : total_it->second;
  require(total > 0 || alpha_ > 0.0, ErrorClass::insufficient_data,
          "no recorded samples for control history " + index_history_text(u_history) +
              " and no smoothing");

  const auto counts_it = counts_.find(u_history);
  std::vector<std::string> labels;
  std::vector<double> weights;
  labels.reserve(histories.size());
  weights.reserve(histories.size());
  for (const auto& history : histories) {
    labels.push_back(history_label(observations, history));
    double weight = alpha_;
    if (counts_it != counts_.end()) {
      const auto cell = counts_it->second.find(history);
      if (cell != counts_it->second.end()) weight += static_cast<double>(cell->second);
    }
    weights.push_back(weight);
  }
  return Distribution::from_weights(std::move(labels), std::move(weights));
}

std::uint64_t EmpiricalConditional::total(const std::vector<std::size_t>& u_history) const {
  const auto it = totals_.find(u_history);
  return it == totals_.end() ? 0 : it->second;
}

std::string EmpiricalConditional::serialize(const LabeledSpace& controls,
                                            const LabeledSpace& observations) const {
  std::ostringstream out;
  out << "# empirical-conditional v1\n";
  out << "# tool_version," << kVersion << "\n";
  out << "# scenario_hash," << to_hex64(scenario_hash_) << "\n";
  out << "# alpha," << format_double(alpha_) << "\n";
  out << "u_history,y_hat_history,count\n";
  for (const auto& [u_history, cells] : counts_)
    for (const auto& [y_history, count] : cells)
      out << history_label(controls, u_history) << "," << history_label(observations, y_history)
          << "," << count << "\n";
  return out.str();
}

namespace {

std::vector<std::size_t> parse_history_labels(const std::string& text, const LabeledSpace& space,
                                              const std::string& context) {
  std::vector<std::size_t> history;
  if (text == ".") return history;
  for (const std::string& label : split_char(text, '+')) {
    bool found = false;
    for (std::size_t i = 0; i < space.labels.size(); ++i)
      if (space.labels[i] == label) {
        history.push_back(i);
        found = true;
        break;
      }
    require(found, ErrorClass::parse, context + ": unknown label '" + label + "'");
  }
  return history;
}

std::uint64_t parse_hex64(const std::string& text, const std::string& context) {
  require(!text.empty(), ErrorClass::parse, context + ": empty hash");
  char* end = nullptr;
  const unsigned long long value = std::strtoull(text.c_str(), &end, 16);
  require(end == text.c_str() + text.size(), ErrorClass::parse,
          context + ": malformed hash '" + text + "'");
  return value;
}

}  // namespace

EmpiricalConditional EmpiricalConditional::parse(const std::string& text,
                                                 const LabeledSpace& controls,
                                                 const LabeledSpace& observations) {
  const std::vector<std::string> lines = split_char(text, '\n');
  std::size_t row = 0;
  const auto next_line = [&]() -> std::string {
    while (row < lines.size()) {
      const std::string line = trim(lines[row]);
      ++row;
      if (!line.empty()) return line;
    }
    fail(ErrorClass::parse, "empirical-conditional: unexpected end of input");
  };

  require(next_line() == "# empirical-conditional v1", ErrorClass::parse,
          "empirical-conditional: missing or unsupported format header");
  std::uint64_t hash = 0;
  double alpha = 0.0;
  bool saw_hash = false, saw_alpha = false;
  std::string line = next_line();
  while (!line.empty() && line[0] == '#') {
    const std::vector<std::string> parts = split_char(line, ',');
    if (parts[0] == "# scenario_hash" && parts.size() == 2) {
      hash = parse_hex64(trim(parts[1]), "empirical-conditional");
      saw_hash = true;
    } else if (parts[0] == "# alpha" && parts.size() == 2) {
      alpha = parse_double(trim(parts[1]));
      saw_alpha = true;
    }
    // other header lines (tool_version) are provenance only
    line = next_line();
  }
  require(saw_hash && saw_alpha, ErrorClass::parse,
          "empirical-conditional: header must carry scenario_hash and alpha");
  require(line == "u_history,y_hat_history,count", ErrorClass::parse,
          "empirical-conditional: missing column header");

  EmpiricalConditional emp(hash, alpha);
  while (row < lines.size()) {
    const std::string data = trim(lines[row]);
    ++row;
    if (data.empty()) continue;
    const std::vector<std::string> parts = split_char(data, ',');
    require(parts.size() == 3, ErrorClass::parse,
            "empirical-conditional: expected 3 columns, got '" + data + "'");
    const auto u_history = parse_history_labels(trim(parts[0]), controls, "u_history");
    const auto y_history = parse_history_labels(trim(parts[1]), observations, "y_hat_history");
    const long long count = parse_int(trim(parts[2]));
    require(count >= 0, ErrorClass::parse, "empirical-conditional: negative count");
    require(y_history.size() == u_history.size() + 1, ErrorClass::parse,
            "empirical-conditional: history lengths inconsistent in '" + data + "'");
    emp.counts_[u_history][y_history] += static_cast<std::uint64_t>(count);
    emp.totals_[u_history] += static_cast<std::uint64_t>(count);
    emp.records_ += static_cast<std::uint64_t>(count);
  }
  return emp;
}

double tv_distance(const Distribution& p, const Distribution& q) {
  require(p.same_support(q), ErrorClass::domain,
          "tv_distance: distributions have different supports");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    total += std::abs(p.mass_at(i) - q.mass_at(i));
  return 0.5 * total;
}

LearnedInformationState learned_information_state(
    const EmpiricalConditional& emp, int t, const std::vector<std::size_t>& u_history,
    const LabeledSpace& observations, const Distribution& model_belief,
    const std::vector<Distribution>& actual_belief_by_history) {
  require(static_cast<int>(u_history.size()) == t, ErrorClass::invariant,
          "learned_information_state: control history length must equal t");
  const Distribution weight = emp.query(u_history, observations);
  require(weight.size() == actual_belief_by_history.size(), ErrorClass::invariant,
          "learned_information_state: one actual-side belief required per enumerated "
          "observation history");
  filter::InformationState state =
      filter::factorize(t, model_belief, actual_belief_by_history, weight.mass());
  return {std::move(state), emp.total(u_history), emp.alpha(), emp.scenario_hash()};
}

namespace {

// Initial single-system belief: prior over states corrected by the first
// observation's likelihood.
Distribution initial_belief(const ModelView& view, std::size_t y0) {
  std::vector<double> weights(view.n_states(), 0.0);
  double total = 0.0;
  for (std::size_t x = 0; x < view.n_states(); ++x) {
    weights[x] = filter::observation_likelihood(view, 0, y0, x) * view.law().initial->mass_at(x);
    total += weights[x];
  }
  require(total > 0.0, ErrorClass::impossible_observation,
          "initial observation has zero probability under the prior");
  return Distribution::from_weights(view.states().labels, std::move(weights));
}

class ExactProvider final : public InformationStateProvider {
 public:
  explicit ExactProvider(const Scenario& s)
      : scenario_(s),
        kernel_(filter::JointKernel::exact(scenario_)),
        hash_(scenarios::scenario_hash(scenario_)) {}

  filter::InformationState state(int t, const std::vector<std::size_t>& y_history,
                                 const std::vector<std::size_t>& /*y_hat_history*/,
                                 const std::vector<std::size_t>& u_history) const override {
    require(y_history.size() == static_cast<std::size_t>(t) + 1 &&
                u_history.size() == static_cast<std::size_t>(t),
            ErrorClass::invariant, "ExactProvider: history lengths inconsistent with t");
    const ModelView view(scenario_);
    filter::InformationState pi = filter::initial_information_state(view, y_history[0]);
    for (int k = 1; k <= t; ++k)
      pi = filter::phi_update(view, kernel_, pi, y_history[static_cast<std::size_t>(k)],
                              u_history[static_cast<std::size_t>(k) - 1]);
    return pi;
  }

  std::uint64_t scenario_hash() const override { return hash_; }

 private:
  Scenario scenario_;
  filter::JointKernel kernel_;
  std::uint64_t hash_;
};

class LearnedProvider final : public InformationStateProvider {
 public:
  LearnedProvider(const Scenario& model_source, EmpiricalConditional emp,
                  filter::MarkovKernel actual_kernel)
      : scenario_(model_source), emp_(std::move(emp)), actual_(std::move(actual_kernel)) {
    require(scenario_.family == Family::finite, ErrorClass::unsupported,
            "learned_provider: finite family only");
  }

  filter::InformationState state(int t, const std::vector<std::size_t>& y_history,
                                 const std::vector<std::size_t>& /*y_hat_history*/,
                                 const std::vector<std::size_t>& u_history) const override {
    require(y_history.size() == static_cast<std::size_t>(t) + 1 &&
                u_history.size() == static_cast<std::size_t>(t),
            ErrorClass::invariant, "learned_provider: history lengths inconsistent with t");
    const ModelView view(scenario_);

    Distribution model_belief = initial_belief(view, y_history[0]);
    for (int k = 1; k <= t; ++k)
      model_belief =
          filter::theta_update(view, model_belief, k - 1, y_history[static_cast<std::size_t>(k)],
                               u_history[static_cast<std::size_t>(k) - 1]);

    const auto histories = enumerate_observation_histories(view.n_observations(),
                                                           static_cast<std::size_t>(t) + 1);
    std::vector<Distribution> actual_beliefs;
    actual_beliefs.reserve(histories.size());
    for (const auto& history : histories) {
      try {
        Distribution belief = initial_belief(view, history[0]);
        for (int k = 1; k <= t; ++k)
          belief = filter::theta_hat_update(view, actual_, belief, k - 1,
                                            history[static_cast<std::size_t>(k)],
                                            u_history[static_cast<std::size_t>(k) - 1]);
        actual_beliefs.push_back(std::move(belief));
      } catch (const Error& e) {
        if (e.error_class() != ErrorClass::impossible_observation) throw;
        // The kernel rules this history out; its weight is zero unless
        // smoothing is on, in which case the uninformative belief is used.
        actual_beliefs.push_back(Distribution::uniform(view.states().labels));
      }
    }
    return learned_information_state(emp_, t, u_history, view.observations(), model_belief,
                                     actual_beliefs)
        .state;
  }

  std::uint64_t scenario_hash() const override { return emp_.scenario_hash(); }

 private:
  Scenario scenario_;
  EmpiricalConditional emp_;
  filter::MarkovKernel actual_;
};

class SeparatedController final : public harness::Controller {
 public:
  SeparatedController(solver::SeparatedStrategy strategy, solver::BeliefGrid grid,
                      std::shared_ptr<const InformationStateProvider> provider, std::string id)
      : strategy_(std::move(strategy)),
        grid_(std::move(grid)),
        provider_(std::move(provider)),
        id_(std::move(id)) {}

  std::size_t decide(const harness::FiniteStep& step) const override {
    const filter::InformationState pi =
        provider_->state(step.t, step.y_history, step.y_hat_history, step.u_history);
    const solver::BeliefGrid::Projection projection = grid_.project(pi);
    const std::size_t slice = pi.actual_mode();
    const auto t = static_cast<std::size_t>(step.t);
    require(t < strategy_.action.size(), ErrorClass::invariant,
            "separated controller: decision epoch beyond the strategy horizon");
    return strategy_.action[t][projection.index][slice];
  }

  std::string id() const override { return id_; }

 private:
  solver::SeparatedStrategy strategy_;
  solver::BeliefGrid grid_;
  std::shared_ptr<const InformationStateProvider> provider_;
  std::string id_;
};

}  // namespace

std::unique_ptr<InformationStateProvider> exact_provider(const Scenario& s) {
  require(s.family == Family::finite, ErrorClass::unsupported,
          "exact_provider: finite family only");
  return std::make_unique<ExactProvider>(s);
}

std::unique_ptr<InformationStateProvider> learned_provider(const Scenario& model_source,
                                                           EmpiricalConditional emp,
                                                           filter::MarkovKernel actual_kernel) {
  return std::make_unique<LearnedProvider>(model_source, std::move(emp),
                                           std::move(actual_kernel));
}

std::unique_ptr<harness::Controller> instantiate_strategy(
    const solver::SeparatedStrategy& strategy, const solver::BeliefGrid& grid,
    std::shared_ptr<const InformationStateProvider> provider, std::string id) {
  require(provider != nullptr, ErrorClass::invariant,
          "instantiate_strategy: missing information-state provider");
  require(strategy.grid_based, ErrorClass::unsupported,
          "instantiate_strategy: closed-form strategies instantiate as linear controllers");
  require(strategy.scenario_hash == provider->scenario_hash(), ErrorClass::invariant,
          "instantiate_strategy: strategy and information-state provider disagree on the "
          "scenario hash");
  return std::make_unique<SeparatedController>(strategy, grid, std::move(provider),
                                               std::move(id));
}

}  // namespace sepctl::learner
