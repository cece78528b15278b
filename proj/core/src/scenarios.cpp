#include "sepctl/scenarios.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sepctl/errors.hpp"
#include "sepctl/textio.hpp"

namespace sepctl::scenarios {

namespace {

TransitionTable make_transition(std::size_t nx, std::size_t nu, std::size_t nw) {
  TransitionTable t;
  t.next.assign(nx, std::vector<std::vector<std::size_t>>(nu, std::vector<std::size_t>(nw, 0)));
  return t;
}

}  // namespace

Scenario builtin_discrete_toy() {
  Scenario s;
  s.name = "discrete_toy";
  s.family = Family::finite;
  s.horizon = 2;
  s.beta = 1.0;

  s.states = {{"s0", "s1"}, {0.0, 1.0}};
  s.controls = {{"a0", "a1"}, {}};
  s.observations = {{"o0", "o1"}, {}};
  s.disturbances = {{"w0", "w1"}, {}};
  s.noises = {{"keep", "flip"}, {}};

  // Model: control toggles the state, except that (s1, a1) sticks under the
  // rare disturbance.  Actual system: the toggle always happens, so the two
  // tables differ in exactly one entry.
  TransitionTable model = make_transition(2, 2, 2);
  TransitionTable actual = make_transition(2, 2, 2);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t u = 0; u < 2; ++u)
      for (std::size_t w = 0; w < 2; ++w) {
        model.next[x][u][w] = (x + u) % 2;
        actual.next[x][u][w] = (x + u) % 2;
      }
  model.next[1][1][1] = 1;
  s.model_step = {model, model};
  s.actual_step = {actual, actual};

  ObservationTable obs;
  obs.out = {{0, 1}, {1, 0}};  // keep reports the state, flip inverts it
  s.observe_map = {obs, obs, obs};

  s.costs.stage.assign(2, std::vector<std::vector<double>>(2, std::vector<double>(2, 0.0)));
  s.costs.terminal = {0.0, 1.0};

  s.law.initial = Distribution::point_mass(s.states.labels, 1);
  Distribution w({"w0", "w1"}, {0.6, 0.4});
  s.law.disturbance = {w, w};
  Distribution z({"keep", "flip"}, {0.9, 0.1});
  s.law.noise = {z, z, z};

  s.validate();
  return s;
}

Scenario builtin_lqg() {
  Scenario s;
  s.name = "lqg";
  s.family = Family::gaussian_linear;
  s.horizon = 2;
  s.beta = 1.0;

  s.model_lin = {{2.0, 3.0, 4.0}, {2.0, 4.0, 0.0}};
  s.actual_lin = {{1.0, 1.0, 1.0}, {1.0, 1.0, 0.0}};
  s.observe_gain = {0.0, 0.0, 0.0};  // y_t = x_t exactly

  s.stage_quad = {{0.0, 0.0}, {0.0, 0.5}};
  s.terminal_quad = 0.5;

  s.law.initial_g = {0.0, 1.0};
  s.law.disturbance_g = {{0.0, 1.0}, {0.0, 1.0}};
  s.law.noise_g = {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
  s.law.initial_disturbance_covariance = 0.5;

  s.reference_coefficients = {0.5, -0.25};

  s.validate();
  return s;
}

Scenario builtin(const std::string& id) {
  if (id == "discrete_toy") return builtin_discrete_toy();
  if (id == "lqg") return builtin_lqg();
  fail(ErrorClass::usage, "unknown builtin scenario '" + id + "'");
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void serialize_space(std::ostringstream& out, const char* header, const LabeledSpace& sp) {
  out << "[" << header << "]\n";
  for (std::size_t i = 0; i < sp.labels.size(); ++i) {
    out << sp.labels[i];
    if (!sp.values.empty()) out << " " << format_double(sp.values[i]);
    out << "\n";
  }
  out << "\n";
}

}  // namespace

std::string serialize(const Scenario& s) {
  s.validate();
  std::ostringstream out;
  out << "[meta]\n";
  out << "version = 1\n";
  out << "name = " << s.name << "\n";
  out << "family = " << family_name(s.family) << "\n";
  out << "horizon = " << s.horizon << "\n";
  out << "beta = " << format_double(s.beta) << "\n\n";

  if (s.family == Family::finite) {
    serialize_space(out, "states", s.states);
    serialize_space(out, "controls", s.controls);
    serialize_space(out, "observations", s.observations);
    serialize_space(out, "disturbances", s.disturbances);
    serialize_space(out, "noises", s.noises);

    auto write_dynamics = [&](const char* header,
                              const std::vector<TransitionTable>& tables) {
      out << "[" << header << "]\n";
      for (std::size_t t = 0; t < tables.size(); ++t)
        for (std::size_t x = 0; x < s.states.size(); ++x)
          for (std::size_t u = 0; u < s.controls.size(); ++u)
            for (std::size_t w = 0; w < s.disturbances.size(); ++w)
              out << t << " " << s.states.labels[x] << " " << s.controls.labels[u] << " "
                  << s.disturbances.labels[w] << " -> "
                  << s.states.labels[tables[t].next[x][u][w]] << "\n";
      out << "\n";
    };
    write_dynamics("model", s.model_step);
    write_dynamics("actual", s.actual_step);

    out << "[observation]\n";
    for (std::size_t t = 0; t < s.observe_map.size(); ++t)
      for (std::size_t x = 0; x < s.states.size(); ++x)
        for (std::size_t z = 0; z < s.noises.size(); ++z)
          out << t << " " << s.states.labels[x] << " " << s.noises.labels[z] << " -> "
              << s.observations.labels[s.observe_map[t].out[x][z]] << "\n";
    out << "\n";

    out << "[costs]\n";
    for (std::size_t t = 0; t < s.costs.stage.size(); ++t)
      for (std::size_t x = 0; x < s.states.size(); ++x)
        for (std::size_t u = 0; u < s.controls.size(); ++u)
          out << "stage " << t << " " << s.states.labels[x] << " " << s.controls.labels[u]
              << " " << format_double(s.costs.stage[t][x][u]) << "\n";
    for (std::size_t x = 0; x < s.states.size(); ++x)
      out << "terminal " << s.states.labels[x] << " " << format_double(s.costs.terminal[x])
          << "\n";
    out << "\n";

    out << "[primitives]\n";
    for (std::size_t x = 0; x < s.states.size(); ++x)
      out << "initial " << s.states.labels[x] << " "
          << format_double(s.law.initial->mass_at(x)) << "\n";
    for (std::size_t t = 0; t < s.law.disturbance.size(); ++t)
      for (std::size_t w = 0; w < s.disturbances.size(); ++w)
        out << "disturbance " << t << " " << s.disturbances.labels[w] << " "
            << format_double(s.law.disturbance[t].mass_at(w)) << "\n";
    for (std::size_t t = 0; t < s.law.noise.size(); ++t)
      for (std::size_t z = 0; z < s.noises.size(); ++z)
        out << "noise " << t << " " << s.noises.labels[z] << " "
            << format_double(s.law.noise[t].mass_at(z)) << "\n";
    out << "\n";
  } else {
    auto write_lin = [&](const char* header, const std::vector<LinearStep>& steps) {
      out << "[" << header << "]\n";
      for (std::size_t t = 0; t < steps.size(); ++t)
        out << t << " " << format_double(steps[t].a) << " " << format_double(steps[t].b) << " "
            << format_double(steps[t].c) << "\n";
      out << "\n";
    };
    write_lin("model", s.model_lin);
    write_lin("actual", s.actual_lin);

    out << "[observation]\n";
    for (std::size_t t = 0; t < s.observe_gain.size(); ++t)
      out << t << " " << format_double(s.observe_gain[t]) << "\n";
    out << "\n";

    out << "[costs]\n";
    for (std::size_t t = 0; t < s.stage_quad.size(); ++t)
      out << "stage " << t << " " << format_double(s.stage_quad[t].q) << " "
          << format_double(s.stage_quad[t].r) << "\n";
    out << "terminal " << format_double(s.terminal_quad) << "\n\n";

    out << "[primitives]\n";
    out << "initial " << format_double(s.law.initial_g.mean) << " "
        << format_double(s.law.initial_g.variance) << "\n";
    for (std::size_t t = 0; t < s.law.disturbance_g.size(); ++t)
      out << "disturbance " << t << " " << format_double(s.law.disturbance_g[t].mean) << " "
          << format_double(s.law.disturbance_g[t].variance) << "\n";
    for (std::size_t t = 0; t < s.law.noise_g.size(); ++t)
      out << "noise " << t << " " << format_double(s.law.noise_g[t].mean) << " "
          << format_double(s.law.noise_g[t].variance) << "\n";
    out << "covariance " << format_double(s.law.initial_disturbance_covariance) << "\n\n";
  }

  if (!s.reference_coefficients.empty()) {
    out << "[reference]\n";
    for (double c : s.reference_coefficients)
      out << "coefficient " << format_double(c) << "\n";
    out << "\n";
  }
  return out.str();
}

std::uint64_t scenario_hash(const Scenario& s) { return fnv1a64(serialize(s)); }

std::string scenario_hash_hex(const Scenario& s) { return to_hex64(scenario_hash(s)); }

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Line {
  int number;
  std::string text;
};

using Section = std::vector<Line>;

[[noreturn]] void parse_fail(const std::string& input, int line, const std::string& msg) {
  fail(ErrorClass::parse, input + ":" + std::to_string(line) + ": " + msg);
}

// Expands a time token that is either an integer in [0, limit) or the
// wildcard '*' meaning every time index.
std::vector<std::size_t> expand_time(const std::string& input, int lineno,
                                     const std::string& token, std::size_t limit) {
  if (token == "*") {
    std::vector<std::size_t> all(limit);
    for (std::size_t t = 0; t < limit; ++t) all[t] = t;
    return all;
  }
  long long t = 0;
  try {
    t = parse_int(token);
  } catch (const Error&) {
    parse_fail(input, lineno, "bad time index '" + token + "'");
  }
  if (t < 0 || static_cast<std::size_t>(t) >= limit)
    parse_fail(input, lineno,
               "time index " + token + " outside [0, " + std::to_string(limit) + ")");
  return {static_cast<std::size_t>(t)};
}

std::size_t lookup(const std::string& input, int lineno, const LabeledSpace& sp,
                   const std::string& label, const char* what) {
  for (std::size_t i = 0; i < sp.labels.size(); ++i)
    if (sp.labels[i] == label) return i;
  parse_fail(input, lineno, std::string("unknown ") + what + " label '" + label + "'");
}

double number(const std::string& input, int lineno, const std::string& token) {
  try {
    return parse_double(token);
  } catch (const Error&) {
    parse_fail(input, lineno, "bad number '" + token + "'");
  }
}

long long integer(const std::string& input, int lineno, const std::string& token) {
  try {
    return parse_int(token);
  } catch (const Error&) {
    parse_fail(input, lineno, "bad integer '" + token + "'");
  }
}

class Parser {
 public:
  Parser(const std::string& text, std::string input_name) : input_(std::move(input_name)) {
    collect_sections(text);
  }

  Scenario run() {
    parse_meta();
    if (scenario_.family == Family::finite)
      parse_finite();
    else
      parse_gaussian();
    parse_reference();
    for (const auto& [name, sec] : sections_)
      if (!consumed_.count(name))
        parse_fail(input_, header_line_.at(name), "section [" + name + "] not allowed here");
    try {
      scenario_.validate();
    } catch (const Error& e) {
      fail(ErrorClass::parse, input_ + ": " + e.what());
    }
    return scenario_;
  }

 private:
  void collect_sections(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    std::string current;
    while (std::getline(in, raw)) {
      ++lineno;
      if (auto cut = raw.find('#'); cut != std::string::npos) raw.erase(cut);
      const std::string line = trim(raw);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') parse_fail(input_, lineno, "unterminated section header");
        current = line.substr(1, line.size() - 2);
        if (current.empty()) parse_fail(input_, lineno, "empty section name");
        if (sections_.count(current))
          parse_fail(input_, lineno, "duplicate section [" + current + "]");
        sections_[current];  // create
        header_line_[current] = lineno;
        continue;
      }
      if (current.empty()) parse_fail(input_, lineno, "content before any section header");
      sections_[current].push_back({lineno, line});
    }
  }

  const Section& need(const std::string& name) {
    auto it = sections_.find(name);
    if (it == sections_.end())
      fail(ErrorClass::parse, input_ + ": missing section [" + name + "]");
    consumed_.insert(name);
    return it->second;
  }

  const Section* optional(const std::string& name) {
    auto it = sections_.find(name);
    if (it == sections_.end()) return nullptr;
    consumed_.insert(name);
    return &it->second;
  }

  void parse_meta() {
    const Section& meta = need("meta");
    std::map<std::string, std::string> kv;
    for (const auto& [lineno, text] : meta) {
      auto eq = text.find('=');
      if (eq == std::string::npos) parse_fail(input_, lineno, "expected 'key = value'");
      const std::string key = trim(text.substr(0, eq));
      const std::string value = trim(text.substr(eq + 1));
      if (key.empty() || value.empty()) parse_fail(input_, lineno, "expected 'key = value'");
      if (!kv.emplace(key, value).second)
        parse_fail(input_, lineno, "duplicate meta key '" + key + "'");
      meta_line_[key] = lineno;
    }
    for (const char* required : {"version", "family", "horizon", "beta"})
      if (!kv.count(required))
        fail(ErrorClass::parse, input_ + ": [meta] is missing key '" + std::string(required) + "'");
    for (const auto& [key, value] : kv)
      if (key != "version" && key != "family" && key != "horizon" && key != "beta" &&
          key != "name")
        parse_fail(input_, meta_line_[key], "unknown meta key '" + key + "'");

    if (integer(input_, meta_line_["version"], kv["version"]) != 1)
      parse_fail(input_, meta_line_["version"],
                 "unsupported format version '" + kv["version"] + "'");
    if (kv["family"] == "finite")
      scenario_.family = Family::finite;
    else if (kv["family"] == "gaussian_linear")
      scenario_.family = Family::gaussian_linear;
    else
      parse_fail(input_, meta_line_["family"], "unknown family '" + kv["family"] + "'");
    scenario_.horizon = static_cast<int>(integer(input_, meta_line_["horizon"], kv["horizon"]));
    scenario_.beta = number(input_, meta_line_["beta"], kv["beta"]);
    scenario_.name = kv.count("name") ? kv["name"] : input_;
  }

  LabeledSpace parse_space(const std::string& name, bool needs_values) {
    const Section& sec = need(name);
    LabeledSpace sp;
    for (const auto& [lineno, text] : sec) {
      const auto tok = split_whitespace(text);
      if (needs_values && tok.size() != 2)
        parse_fail(input_, lineno, "expected 'label value'");
      if (!needs_values && tok.size() != 1) parse_fail(input_, lineno, "expected 'label'");
      sp.labels.push_back(tok[0]);
      if (needs_values) sp.values.push_back(number(input_, lineno, tok[1]));
    }
    if (sp.labels.empty())
      parse_fail(input_, header_line_[name], "section [" + name + "] is empty");
    return sp;
  }

  void parse_finite_dynamics(const std::string& name, std::vector<TransitionTable>& tables) {
    const Section& sec = need(name);
    const Scenario& s = scenario_;
    const auto T = static_cast<std::size_t>(s.horizon);
    tables.assign(T, make_transition(s.states.size(), s.controls.size(), s.disturbances.size()));
    std::vector<std::vector<std::vector<std::vector<bool>>>> seen(
        T, std::vector<std::vector<std::vector<bool>>>(
               s.states.size(),
               std::vector<std::vector<bool>>(s.controls.size(),
                                              std::vector<bool>(s.disturbances.size(), false))));
    for (const auto& [lineno, text] : sec) {
      const auto tok = split_whitespace(text);
      if (tok.size() != 6 || tok[4] != "->")
        parse_fail(input_, lineno, "expected 't state control disturbance -> state'");
      const auto times = expand_time(input_, lineno, tok[0], T);
      const std::size_t x = lookup(input_, lineno, s.states, tok[1], "state");
      const std::size_t u = lookup(input_, lineno, s.controls, tok[2], "control");
      const std::size_t w = lookup(input_, lineno, s.disturbances, tok[3], "disturbance");
      const std::size_t x2 = lookup(input_, lineno, s.states, tok[5], "state");
      for (std::size_t t : times) {
        if (seen[t][x][u][w])
          parse_fail(input_, lineno, "duplicate entry for (t=" + std::to_string(t) + ", " +
                                          tok[1] + ", " + tok[2] + ", " + tok[3] + ")");
        seen[t][x][u][w] = true;
        tables[t].next[x][u][w] = x2;
      }
    }
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t x = 0; x < s.states.size(); ++x)
        for (std::size_t u = 0; u < s.controls.size(); ++u)
          for (std::size_t w = 0; w < s.disturbances.size(); ++w)
            if (!seen[t][x][u][w])
              fail(ErrorClass::parse,
                   input_ + ": [" + name + "] is missing entry (t=" + std::to_string(t) + ", " +
                       s.states.labels[x] + ", " + s.controls.labels[u] + ", " +
                       s.disturbances.labels[w] + ")");
  }

  void parse_finite() {
    Scenario& s = scenario_;
    s.states = parse_space("states", /*needs_values=*/true);
    s.controls = parse_space("controls", false);
    s.observations = parse_space("observations", false);
    s.disturbances = parse_space("disturbances", false);
    s.noises = parse_space("noises", false);

    parse_finite_dynamics("model", s.model_step);
    parse_finite_dynamics("actual", s.actual_step);

    const auto T = static_cast<std::size_t>(s.horizon);
    {
      const Section& sec = need("observation");
      ObservationTable empty;
      empty.out.assign(s.states.size(), std::vector<std::size_t>(s.noises.size(), 0));
      s.observe_map.assign(T + 1, empty);
      std::vector<std::vector<std::vector<bool>>> seen(
          T + 1, std::vector<std::vector<bool>>(s.states.size(),
                                                std::vector<bool>(s.noises.size(), false)));
      for (const auto& [lineno, text] : sec) {
        const auto tok = split_whitespace(text);
        if (tok.size() != 5 || tok[3] != "->")
          parse_fail(input_, lineno, "expected 't state noise -> observation'");
        const auto times = expand_time(input_, lineno, tok[0], T + 1);
        const std::size_t x = lookup(input_, lineno, s.states, tok[1], "state");
        const std::size_t z = lookup(input_, lineno, s.noises, tok[2], "noise");
        const std::size_t y = lookup(input_, lineno, s.observations, tok[4], "observation");
        for (std::size_t t : times) {
          if (seen[t][x][z])
            parse_fail(input_, lineno, "duplicate entry for (t=" + std::to_string(t) + ", " +
                                            tok[1] + ", " + tok[2] + ")");
          seen[t][x][z] = true;
          s.observe_map[t].out[x][z] = y;
        }
      }
      for (std::size_t t = 0; t <= T; ++t)
        for (std::size_t x = 0; x < s.states.size(); ++x)
          for (std::size_t z = 0; z < s.noises.size(); ++z)
            if (!seen[t][x][z])
              fail(ErrorClass::parse,
                   input_ + ": [observation] is missing entry (t=" + std::to_string(t) + ", " +
                       s.states.labels[x] + ", " + s.noises.labels[z] + ")");
    }

    {
      const Section& sec = need("costs");
      s.costs.stage.assign(T, std::vector<std::vector<double>>(
                                  s.states.size(), std::vector<double>(s.controls.size(), 0.0)));
      s.costs.terminal.assign(s.states.size(), 0.0);
      std::vector<std::vector<std::vector<bool>>> seen_stage(
          T, std::vector<std::vector<bool>>(s.states.size(),
                                            std::vector<bool>(s.controls.size(), false)));
      std::vector<bool> seen_term(s.states.size(), false);
      for (const auto& [lineno, text] : sec) {
        const auto tok = split_whitespace(text);
        if (tok.size() == 5 && tok[0] == "stage") {
          const auto times = expand_time(input_, lineno, tok[1], T);
          const std::size_t x = lookup(input_, lineno, s.states, tok[2], "state");
          const std::size_t u = lookup(input_, lineno, s.controls, tok[3], "control");
          const double c = number(input_, lineno, tok[4]);
          for (std::size_t t : times) {
            if (seen_stage[t][x][u])
              parse_fail(input_, lineno, "duplicate stage cost (t=" + std::to_string(t) + ", " +
                                              tok[2] + ", " + tok[3] + ")");
            seen_stage[t][x][u] = true;
            s.costs.stage[t][x][u] = c;
          }
        } else if (tok.size() == 3 && tok[0] == "terminal") {
          const std::size_t x = lookup(input_, lineno, s.states, tok[1], "state");
          if (seen_term[x]) parse_fail(input_, lineno, "duplicate terminal cost " + tok[1]);
          seen_term[x] = true;
          s.costs.terminal[x] = number(input_, lineno, tok[2]);
        } else {
          parse_fail(input_, lineno,
                     "expected 'stage t state control value' or 'terminal state value'");
        }
      }
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t x = 0; x < s.states.size(); ++x)
          for (std::size_t u = 0; u < s.controls.size(); ++u)
            if (!seen_stage[t][x][u])
              fail(ErrorClass::parse, input_ + ": [costs] is missing stage entry (t=" +
                                          std::to_string(t) + ", " + s.states.labels[x] + ", " +
                                          s.controls.labels[u] + ")");
      for (std::size_t x = 0; x < s.states.size(); ++x)
        if (!seen_term[x])
          fail(ErrorClass::parse,
               input_ + ": [costs] is missing terminal entry " + s.states.labels[x]);
    }

    {
      const Section& sec = need("primitives");
      std::vector<double> initial(s.states.size(), 0.0);
      std::vector<bool> seen_init(s.states.size(), false);
      std::vector<std::vector<double>> dist(T, std::vector<double>(s.disturbances.size(), 0.0));
      std::vector<std::vector<bool>> seen_dist(T,
                                               std::vector<bool>(s.disturbances.size(), false));
      std::vector<std::vector<double>> noise(T + 1, std::vector<double>(s.noises.size(), 0.0));
      std::vector<std::vector<bool>> seen_noise(T + 1, std::vector<bool>(s.noises.size(), false));
      for (const auto& [lineno, text] : sec) {
        const auto tok = split_whitespace(text);
        if (tok.size() == 3 && tok[0] == "initial") {
          const std::size_t x = lookup(input_, lineno, s.states, tok[1], "state");
          if (seen_init[x]) parse_fail(input_, lineno, "duplicate initial mass " + tok[1]);
          seen_init[x] = true;
          initial[x] = number(input_, lineno, tok[2]);
        } else if (tok.size() == 4 && tok[0] == "disturbance") {
          const auto times = expand_time(input_, lineno, tok[1], T);
          const std::size_t w = lookup(input_, lineno, s.disturbances, tok[2], "disturbance");
          const double m = number(input_, lineno, tok[3]);
          for (std::size_t t : times) {
            if (seen_dist[t][w])
              parse_fail(input_, lineno,
                         "duplicate disturbance mass (t=" + std::to_string(t) + ", " + tok[2] + ")");
            seen_dist[t][w] = true;
            dist[t][w] = m;
          }
        } else if (tok.size() == 4 && tok[0] == "noise") {
          const auto times = expand_time(input_, lineno, tok[1], T + 1);
          const std::size_t z = lookup(input_, lineno, s.noises, tok[2], "noise");
          const double m = number(input_, lineno, tok[3]);
          for (std::size_t t : times) {
            if (seen_noise[t][z])
              parse_fail(input_, lineno,
                         "duplicate noise mass (t=" + std::to_string(t) + ", " + tok[2] + ")");
            seen_noise[t][z] = true;
            noise[t][z] = m;
          }
        } else {
          parse_fail(input_, lineno,
                     "expected 'initial state mass', 'disturbance t label mass', or "
                     "'noise t label mass'");
        }
      }
      auto build = [&](const std::vector<std::string>& labels, std::vector<double> mass,
                       const std::string& what) {
        try {
          return Distribution(labels, std::move(mass));
        } catch (const Error& e) {
          fail(ErrorClass::parse, input_ + ": [primitives] " + what + ": " + e.what());
        }
      };
      s.law.initial = build(s.states.labels, initial, "initial law");
      s.law.disturbance.clear();
      for (std::size_t t = 0; t < T; ++t)
        s.law.disturbance.push_back(
            build(s.disturbances.labels, dist[t], "disturbance law t=" + std::to_string(t)));
      s.law.noise.clear();
      for (std::size_t t = 0; t <= T; ++t)
        s.law.noise.push_back(
            build(s.noises.labels, noise[t], "noise law t=" + std::to_string(t)));
    }
  }

  void parse_lin_block(const std::string& name, std::vector<LinearStep>& steps) {
    const Section& sec = need(name);
    const auto T = static_cast<std::size_t>(scenario_.horizon);
    steps.assign(T, LinearStep{});
    std::vector<bool> seen(T, false);
    for (const auto& [lineno, text] : sec) {
      const auto tok = split_whitespace(text);
      if (tok.size() != 4) parse_fail(input_, lineno, "expected 't a b c'");
      const auto times = expand_time(input_, lineno, tok[0], T);
      LinearStep st{number(input_, lineno, tok[1]), number(input_, lineno, tok[2]),
                    number(input_, lineno, tok[3])};
      for (std::size_t t : times) {
        if (seen[t]) parse_fail(input_, lineno, "duplicate row for t=" + std::to_string(t));
        seen[t] = true;
        steps[t] = st;
      }
    }
    for (std::size_t t = 0; t < T; ++t)
      if (!seen[t])
        fail(ErrorClass::parse,
             input_ + ": [" + name + "] is missing row t=" + std::to_string(t));
  }

  void parse_gaussian() {
    Scenario& s = scenario_;
    const auto T = static_cast<std::size_t>(s.horizon);
    parse_lin_block("model", s.model_lin);
    parse_lin_block("actual", s.actual_lin);

    {
      const Section& sec = need("observation");
      s.observe_gain.assign(T + 1, 0.0);
      std::vector<bool> seen(T + 1, false);
      for (const auto& [lineno, text] : sec) {
        const auto tok = split_whitespace(text);
        if (tok.size() != 2) parse_fail(input_, lineno, "expected 't gain'");
        const auto times = expand_time(input_, lineno, tok[0], T + 1);
        const double gain = number(input_, lineno, tok[1]);
        for (std::size_t t : times) {
          if (seen[t]) parse_fail(input_, lineno, "duplicate row for t=" + std::to_string(t));
          seen[t] = true;
          s.observe_gain[t] = gain;
        }
      }
      for (std::size_t t = 0; t <= T; ++t)
        if (!seen[t])
          fail(ErrorClass::parse, input_ + ": [observation] is missing row t=" + std::to_string(t));
    }

    {
      const Section& sec = need("costs");
      s.stage_quad.assign(T, QuadCost{});
      std::vector<bool> seen(T, false);
      bool seen_term = false;
      for (const auto& [lineno, text] : sec) {
        const auto tok = split_whitespace(text);
        if (tok.size() == 4 && tok[0] == "stage") {
          const auto times = expand_time(input_, lineno, tok[1], T);
          QuadCost q{number(input_, lineno, tok[2]), number(input_, lineno, tok[3])};
          for (std::size_t t : times) {
            if (seen[t]) parse_fail(input_, lineno, "duplicate stage row t=" + std::to_string(t));
            seen[t] = true;
            s.stage_quad[t] = q;
          }
        } else if (tok.size() == 2 && tok[0] == "terminal") {
          if (seen_term) parse_fail(input_, lineno, "duplicate terminal row");
          seen_term = true;
          s.terminal_quad = number(input_, lineno, tok[1]);
        } else {
          parse_fail(input_, lineno, "expected 'stage t q r' or 'terminal q'");
        }
      }
      for (std::size_t t = 0; t < T; ++t)
        if (!seen[t])
          fail(ErrorClass::parse, input_ + ": [costs] is missing stage row t=" + std::to_string(t));
      if (!seen_term) fail(ErrorClass::parse, input_ + ": [costs] is missing the terminal row");
    }

    {
      const Section& sec = need("primitives");
      s.law.disturbance_g.assign(T, Gaussian1D{});
      s.law.noise_g.assign(T + 1, Gaussian1D{});
      std::vector<bool> seen_d(T, false), seen_n(T + 1, false);
      bool seen_init = false, seen_cov = false;
      for (const auto& [lineno, text] : sec) {
        const auto tok = split_whitespace(text);
        if (tok.size() == 3 && tok[0] == "initial") {
          if (seen_init) parse_fail(input_, lineno, "duplicate initial row");
          seen_init = true;
          s.law.initial_g = {number(input_, lineno, tok[1]), number(input_, lineno, tok[2])};
        } else if (tok.size() == 4 && tok[0] == "disturbance") {
          const auto times = expand_time(input_, lineno, tok[1], T);
          Gaussian1D g{number(input_, lineno, tok[2]), number(input_, lineno, tok[3])};
          for (std::size_t t : times) {
            if (seen_d[t])
              parse_fail(input_, lineno, "duplicate disturbance row t=" + std::to_string(t));
            seen_d[t] = true;
            s.law.disturbance_g[t] = g;
          }
        } else if (tok.size() == 4 && tok[0] == "noise") {
          const auto times = expand_time(input_, lineno, tok[1], T + 1);
          Gaussian1D g{number(input_, lineno, tok[2]), number(input_, lineno, tok[3])};
          for (std::size_t t : times) {
            if (seen_n[t]) parse_fail(input_, lineno, "duplicate noise row t=" + std::to_string(t));
            seen_n[t] = true;
            s.law.noise_g[t] = g;
          }
        } else if (tok.size() == 2 && tok[0] == "covariance") {
          if (seen_cov) parse_fail(input_, lineno, "duplicate covariance row");
          seen_cov = true;
          s.law.initial_disturbance_covariance = number(input_, lineno, tok[1]);
        } else {
          parse_fail(input_, lineno,
                     "expected 'initial mean variance', 'disturbance t mean variance', "
                     "'noise t mean variance', or 'covariance value'");
        }
      }
      if (!seen_init) fail(ErrorClass::parse, input_ + ": [primitives] is missing the initial row");
      for (std::size_t t = 0; t < T; ++t)
        if (!seen_d[t])
          fail(ErrorClass::parse,
               input_ + ": [primitives] is missing disturbance row t=" + std::to_string(t));
      for (std::size_t t = 0; t <= T; ++t)
        if (!seen_n[t])
          fail(ErrorClass::parse,
               input_ + ": [primitives] is missing noise row t=" + std::to_string(t));
    }
  }

  void parse_reference() {
    const Section* sec = optional("reference");
    if (!sec) return;
    for (const auto& [lineno, text] : *sec) {
      const auto tok = split_whitespace(text);
      if (tok.size() != 2 || tok[0] != "coefficient")
        parse_fail(input_, lineno, "expected 'coefficient value'");
      scenario_.reference_coefficients.push_back(number(input_, lineno, tok[1]));
    }
  }

  std::string input_;
  std::map<std::string, Section> sections_;
  std::map<std::string, int> header_line_;
  std::map<std::string, int> meta_line_;
  std::set<std::string> consumed_;
  Scenario scenario_;
};

}  // namespace

Scenario parse(const std::string& text, const std::string& input_name) {
  return Parser(text, input_name).run();
}

Scenario load_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorClass::parse, "cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

}  // namespace sepctl::scenarios
