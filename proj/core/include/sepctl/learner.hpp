#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sepctl/distribution.hpp"
#include "sepctl/filter.hpp"
#include "sepctl/harness.hpp"
#include "sepctl/scenario.hpp"
#include "sepctl/solver.hpp"

namespace sepctl::learner {

// Every observation-index history of the given length over n_observations
// symbols, in lexicographic order with the earliest step most significant.
// This order is the alignment contract between empirical queries, per-history
// beliefs, and the factor assembly below.  Errors (too-large) beyond 10^6
// histories.
std::vector<std::vector<std::size_t>> enumerate_observation_histories(std::size_t n_observations,
                                                                      std::size_t length);

// '+'-joined labels of a history; "." for the empty history.
std::string history_label(const LabeledSpace& space, const std::vector<std::size_t>& history);

// Empirical estimate of the conditional law of the actual-side observation
// history given the applied control history, built by counting parallel-run
// records.  Counting is exact per key (no windowing); optional additive
// smoothing alpha spreads pseudo-counts over the full history space at query
// time.
class EmpiricalConditional {
 public:
  explicit EmpiricalConditional(std::uint64_t scenario_hash, double alpha = 0.0);

  // One observed pair of histories; requires |y_hat_history| = |u_history| + 1.
  void record(const std::vector<std::size_t>& u_history,
              const std::vector<std::size_t>& y_hat_history);

  // Normalized law over every observation history of length |u_history| + 1,
  // in enumerate_observation_histories order, labeled via history_label.
  // Unseen histories carry mass 0 (alpha = 0) or their smoothed share.
  // Errors (insufficient-data) when the control history has no recorded
  // samples and alpha = 0.
  Distribution query(const std::vector<std::size_t>& u_history,
                     const LabeledSpace& observations) const;

  // Raw sample count behind a control-history key (0 if unseen).
  std::uint64_t total(const std::vector<std::size_t>& u_history) const;

  std::uint64_t records() const { return records_; }
  double alpha() const { return alpha_; }
  std::uint64_t scenario_hash() const { return scenario_hash_; }

  // Sidecar text format: header (tool version, scenario hash, alpha), then
  // one "u_history,y_hat_history,count" row per key with '+'-joined labels
  // ("." for the empty control history).  parse(serialize(e)) reproduces the
  // table exactly.
  std::string serialize(const LabeledSpace& controls, const LabeledSpace& observations) const;
  static EmpiricalConditional parse(const std::string& text, const LabeledSpace& controls,
                                    const LabeledSpace& observations);

 private:
  std::uint64_t scenario_hash_;
  double alpha_;
  std::uint64_t records_ = 0;
  std::map<std::vector<std::size_t>, std::map<std::vector<std::size_t>, std::uint64_t>> counts_;
  std::map<std::vector<std::size_t>, std::uint64_t> totals_;
};

// An assembled joint information state plus the provenance of its learned
// weight factor.
struct LearnedInformationState {
  filter::InformationState state;
  std::uint64_t sample_count = 0;  // raw samples behind the queried control history
  double alpha = 0.0;
  std::uint64_t scenario_hash = 0;
};

// Assembles the joint from the factor form with EMPIRICAL history weights:
// the model-side belief, one actual-side belief per observation history of
// length t + 1 (aligned with enumerate_observation_histories order), and the
// weight law queried from `emp` for the given control history.
LearnedInformationState learned_information_state(
    const EmpiricalConditional& emp, int t, const std::vector<std::size_t>& u_history,
    const LabeledSpace& observations, const Distribution& model_belief,
    const std::vector<Distribution>& actual_belief_by_history);

// Total-variation distance (1/2)*sum|p - q|; requires identical supports.
double tv_distance(const Distribution& p, const Distribution& q);

// Reconstructs the joint information state at decision time from the
// histories a controller legitimately sees.  Implementations differ in where
// the actual-side knowledge comes from (exact coupling vs. learned factors).
class InformationStateProvider {
 public:
  virtual ~InformationStateProvider() = default;
  virtual filter::InformationState state(int t, const std::vector<std::size_t>& y_history,
                                         const std::vector<std::size_t>& y_hat_history,
                                         const std::vector<std::size_t>& u_history) const = 0;
  virtual std::uint64_t scenario_hash() const = 0;
};

// Oracle-grade provider: runs the exact joint filter (initial state plus the
// predict/correct chain under the exact coupled kernel).  Takes the full
// scenario because the coupling involves both dynamics; online deployments
// use learned_provider instead.
std::unique_ptr<InformationStateProvider> exact_provider(const Scenario& s);

// Online provider composing the factor form: model-side belief filtered from
// the y-history, one actual-side belief per enumerable observation history
// (chained through the supplied actual-system kernel estimate; histories the
// kernel rules out fall back to a uniform placeholder, which only matters
// under smoothing since their weight is otherwise zero), weighted by the
// empirical conditional.  Marginalizes over the actual-side history, so the
// y_hat_history argument is unused by construction.
std::unique_ptr<InformationStateProvider> learned_provider(const Scenario& model_source,
                                                           EmpiricalConditional emp,
                                                           filter::MarkovKernel actual_kernel);

// Binds an offline strategy table to an information-state provider: at each
// decision epoch the controller rebuilds the information state from its
// histories, projects it onto the strategy's belief grid, selects the
// actual-realization parameter slice by the belief's actual-marginal mode
// (ties to the lowest state index), and emits the stored control.  Errors
// (invariant) if strategy and provider disagree on the scenario hash;
// (unsupported) for non-grid strategies.
std::unique_ptr<harness::Controller> instantiate_strategy(
    const solver::SeparatedStrategy& strategy, const solver::BeliefGrid& grid,
    std::shared_ptr<const InformationStateProvider> provider, std::string id = "separated");

}  // namespace sepctl::learner
