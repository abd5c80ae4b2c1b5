#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fairevo/data.hpp"

namespace fixtures {

// Synthetic tabular data with a learnable label, two sensitive attributes
// (sex, race) and `extra_numeric` noise columns. The label leans on sex so
// unconstrained models pick up a DP gap.
inline fairevo::TabularDataset synthetic(std::size_t n, std::uint64_t seed, std::size_t extra_numeric = 0,
                                         double sex_bias = 0.8) {
  using fairevo::Cell;
  using fairevo::ColumnKind;
  using fairevo::ColumnSpec;
  std::vector<ColumnSpec> cols = {{"x0", ColumnKind::numeric, false, false},
                                  {"x1", ColumnKind::numeric, false, false},
                                  {"color", ColumnKind::categorical, false, false},
                                  {"sex", ColumnKind::categorical, true, false},
                                  {"race", ColumnKind::categorical, true, false}};
  for (std::size_t e = 0; e < extra_numeric; ++e) cols.push_back({"n" + std::to_string(e), ColumnKind::numeric, false, false});
  cols.push_back({"label", ColumnKind::categorical, false, true});

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<std::string> colors = {"red", "green", "blue"};
  const std::vector<std::string> races = {"a", "b", "c"};
  std::vector<Cell> cells;
  for (std::size_t r = 0; r < n; ++r) {
    const double x0 = z(rng), x1 = z(rng);
    const bool male = u(rng) < 0.6;
    const double ur = u(rng);
    const std::string race = ur < 0.6 ? races[0] : ur < 0.85 ? races[1] : races[2];
    const std::string color = colors[static_cast<std::size_t>(u(rng) * 3.0) % 3];
    const double logit = 1.5 * x0 - 1.0 * x1 + (male ? sex_bias : -sex_bias) - 1.0 + 0.5 * z(rng);
    const bool y = logit > 0.0;
    cells.emplace_back(x0);
    cells.emplace_back(x1);
    cells.emplace_back(color);
    cells.emplace_back(std::string(male ? "M" : "F"));
    cells.emplace_back(race);
    for (std::size_t e = 0; e < extra_numeric; ++e) cells.emplace_back(z(rng));
    cells.emplace_back(std::string(y ? "yes" : "no"));
  }
  return fairevo::TabularDataset(std::move(cols), std::move(cells), std::string("yes"));
}

inline std::vector<std::size_t> iota_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = i;
  return r;
}

}  // namespace fixtures
