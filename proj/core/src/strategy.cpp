#include "sepctl/strategy.hpp"

#include "sepctl/errors.hpp"

namespace sepctl {

std::size_t history_code(std::span<const std::size_t> history, std::size_t n_obs) {
  std::size_t code = 0;
  std::size_t digit = 1;
  for (std::size_t y : history) {
    require(y < n_obs, ErrorClass::domain, "history_code: observation outside space");
    code += y * digit;
    digit *= n_obs;
  }
  return code;
}

std::vector<std::size_t> decode_history(std::size_t code, std::size_t length, std::size_t n_obs) {
  std::vector<std::size_t> h(length);
  for (std::size_t i = 0; i < length; ++i) {
    h[i] = code % n_obs;
    code /= n_obs;
  }
  require(code == 0, ErrorClass::domain, "decode_history: code outside range");
  return h;
}

std::size_t DeterministicStrategy::decide(int t, std::span<const std::size_t> y_history,
                                          std::size_t n_obs) const {
  require(t >= 0 && static_cast<std::size_t>(t) < table.size(), ErrorClass::domain,
          "strategy: time index outside horizon");
  require(y_history.size() == static_cast<std::size_t>(t) + 1, ErrorClass::usage,
          "strategy: history length must be t + 1");
  const std::size_t code = history_code(y_history, n_obs);
  const auto& row = table[static_cast<std::size_t>(t)];
  require(code < row.size(), ErrorClass::domain, "strategy: history code outside table");
  return row[code];
}

std::uint64_t DeterministicStrategy::count(const ModelView& view) {
  require(view.family() == Family::finite, ErrorClass::unsupported,
          "strategy enumeration: finite family only");
  constexpr std::uint64_t kLimit = 1000000;
  const std::uint64_t nu = view.n_controls();
  const std::uint64_t ny = view.n_observations();
  std::uint64_t total = 1;
  std::uint64_t histories = 1;
  for (int t = 0; t < view.horizon(); ++t) {
    histories *= ny;  // number of histories (y_0..y_t)
    for (std::uint64_t i = 0; i < histories; ++i) {
      require(total <= kLimit / (nu == 0 ? 1 : nu), ErrorClass::too_large,
              "strategy enumeration: more than 10^6 strategies");
      total *= nu;
    }
  }
  return total;
}

DeterministicStrategy DeterministicStrategy::from_ordinal(const ModelView& view,
                                                          std::uint64_t k) {
  const std::uint64_t total = count(view);
  require(k < total, ErrorClass::domain, "strategy ordinal outside range");
  const std::size_t nu = view.n_controls();
  const std::size_t ny = view.n_observations();

  DeterministicStrategy g;
  g.table.resize(static_cast<std::size_t>(view.horizon()));
  std::size_t histories = 1;
  for (int t = 0; t < view.horizon(); ++t) {
    histories *= ny;
    g.table[static_cast<std::size_t>(t)].resize(histories);
  }
  // Peel base-|U| digits, least significant digit = latest time, highest
  // history code; this makes the order lexicographic as documented.
  for (int t = view.horizon() - 1; t >= 0; --t) {
    auto& row = g.table[static_cast<std::size_t>(t)];
    for (std::size_t i = row.size(); i-- > 0;) {
      row[i] = static_cast<std::size_t>(k % nu);
      k /= nu;
    }
  }
  return g;
}

}  // namespace sepctl
