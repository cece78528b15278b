#include "sepctl/enumeration.hpp"

#include "sepctl/errors.hpp"

namespace sepctl {

std::vector<Atom> enumerate_atoms(const Scenario& s) {
  require(s.family == Family::finite, ErrorClass::unsupported,
          "enumerate_atoms: finite family only");
  const auto T = static_cast<std::size_t>(s.horizon);
  double outcomes = static_cast<double>(s.n_states());
  for (std::size_t t = 0; t < T; ++t) outcomes *= static_cast<double>(s.disturbances.size());
  for (std::size_t t = 0; t <= T; ++t) outcomes *= static_cast<double>(s.noises.size());
  require(outcomes <= 1e6, ErrorClass::too_large,
          "enumerate_atoms: more than 10^6 primitive outcomes");

  std::vector<Atom> atoms;
  Atom a;
  a.w.assign(T, 0);
  a.z.assign(T + 1, 0);

  // Depth-first product over (x0, w_0..w_{T-1}, z_0..z_T), pruning zero mass.
  auto recurse_z = [&](auto&& self, std::size_t t, double p) -> void {
    if (t == T + 1) {
      a.prob = p;
      atoms.push_back(a);
      return;
    }
    for (std::size_t z = 0; z < s.noises.size(); ++z) {
      const double pz = s.law.noise[t].mass_at(z);
      if (pz == 0.0) continue;
      a.z[t] = z;
      self(self, t + 1, p * pz);
    }
  };
  auto recurse_w = [&](auto&& self, std::size_t t, double p) -> void {
    if (t == T) {
      recurse_z(recurse_z, 0, p);
      return;
    }
    for (std::size_t w = 0; w < s.disturbances.size(); ++w) {
      const double pw = s.law.disturbance[t].mass_at(w);
      if (pw == 0.0) continue;
      a.w[t] = w;
      self(self, t + 1, p * pw);
    }
  };
  for (std::size_t x0 = 0; x0 < s.n_states(); ++x0) {
    const double p0 = s.law.initial->mass_at(x0);
    if (p0 == 0.0) continue;
    a.x0 = x0;
    recurse_w(recurse_w, 0, p0);
  }
  return atoms;
}

ClosedLoopTrace closed_loop_trace(const Scenario& s, const DeterministicStrategy& strategy,
                                  const Atom& atom) {
  const auto T = static_cast<std::size_t>(s.horizon);
  ClosedLoopTrace tr;
  tr.x.resize(T + 1);
  tr.x_hat.resize(T + 1);
  tr.y.resize(T + 1);
  tr.y_hat.resize(T + 1);
  tr.u.resize(T);

  tr.x[0] = atom.x0;
  tr.x_hat[0] = atom.x0;  // both systems start in the shared initial state
  tr.y[0] = s.h_observe(0, tr.x[0], atom.z[0]);
  tr.y_hat[0] = s.h_observe(0, tr.x_hat[0], atom.z[0]);
  for (std::size_t t = 0; t < T; ++t) {
    const std::span<const std::size_t> y_hist(tr.y.data(), t + 1);
    tr.u[t] = strategy.decide(static_cast<int>(t), y_hist, s.n_observations());
    tr.x[t + 1] = s.f_model(static_cast<int>(t), tr.x[t], tr.u[t], atom.w[t]);
    tr.x_hat[t + 1] = s.f_actual(static_cast<int>(t), tr.x_hat[t], tr.u[t], atom.w[t]);
    tr.y[t + 1] = s.h_observe(static_cast<int>(t) + 1, tr.x[t + 1], atom.z[t + 1]);
    tr.y_hat[t + 1] = s.h_observe(static_cast<int>(t) + 1, tr.x_hat[t + 1], atom.z[t + 1]);
  }
  return tr;
}

double trace_model_cost(const Scenario& s, const ClosedLoopTrace& trace) {
  double total = 0.0;
  for (int t = 0; t < s.horizon; ++t)
    total += s.stage_cost(t, trace.x[static_cast<std::size_t>(t)],
                          trace.u[static_cast<std::size_t>(t)]);
  total += s.terminal_cost(trace.x[static_cast<std::size_t>(s.horizon)]);
  return total;
}

double trace_actual_cost(const Scenario& s, const ClosedLoopTrace& trace) {
  double total = 0.0;
  for (int t = 0; t < s.horizon; ++t)
    total += s.stage_cost(t, trace.x_hat[static_cast<std::size_t>(t)],
                          trace.u[static_cast<std::size_t>(t)]);
  total += s.terminal_cost(trace.x_hat[static_cast<std::size_t>(s.horizon)]);
  return total;
}

double trace_penalized_cost(const Scenario& s, const ClosedLoopTrace& trace) {
  double total = trace_model_cost(s, trace);
  for (int t = 1; t <= s.horizon; ++t)
    total += mismatch_penalty(s, trace.x[static_cast<std::size_t>(t)],
                              trace.x_hat[static_cast<std::size_t>(t)]);
  return total;
}

}  // namespace sepctl
