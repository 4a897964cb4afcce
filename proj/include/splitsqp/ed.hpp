#pragma once

#include <array>
#include <string>
#include <vector>

#include "splitsqp/problem.hpp"

namespace splitsqp::ed {

/// One generating unit: cubic cost a p^3 + b p^2 + c p + d per period, output
/// limits, ramp limits per period and the pre-horizon output p_initial.
struct UnitParams {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  double p_min = 0.0, p_max = 0.0;
  double ramp_down = 0.0, ramp_up = 0.0;
  double p_initial = 0.0;

  void validate() const;
};

struct EDInstance {
  std::vector<UnitParams> units;
  std::size_t T = 0;
  Vec demand;  // length T, MW per period

  std::size_t n_units() const { return units.size(); }
  void validate() const;
};

/// Multi-period dispatch as a two-block problem: units are split N1 = floor(N/2)
/// into x and the rest into y (unit-major, T periods per unit). A carries the
/// per-period power balance, C/D the per-unit first differences over periods
/// (row t=1 is just p_{i,1}); ramp bounds fold p_initial into the t=1 rows.
TwoBlockProblem build_ed_problem(const EDInstance& inst);

/// Instance built by repeating base unit i counts[i] times; demand is the
/// profile (fractions, length T; empty selects the default daily curve)
/// scaled by the replicated system's total p_max.
EDInstance replicate_instance(const std::vector<UnitParams>& base5,
                              const std::array<int, 5>& counts, std::size_t T,
                              const Vec& demand_profile = {});

struct StartPoint {
  Vec x0, y0, z0;
};

/// Outputs at their lower bounds; z0 is the box projection of the implied
/// first differences of that trajectory.
StartPoint feasible_start(const EDInstance& inst);

std::string instance_to_json(const EDInstance& inst, int indent = -1);
EDInstance instance_from_json(const std::string& text);
void save_instance(const EDInstance& inst, const std::string& path);
EDInstance load_instance(const std::string& path);

/// Synthetic 5-unit default (committed data; stands in for the external unit
/// table the benchmark family is derived from).
const std::vector<UnitParams>& synthetic_five_units();

/// Daily demand shape: fractions of total p_max between 0.55 and 0.85.
Vec default_demand_profile(std::size_t T);

/// Replication counts of the 20 benchmark structures (row 1..20).
std::array<int, 5> table1_counts(int row);

/// Solved schedule as CSV rows (unit, period, output MW).
std::string schedule_csv(const EDInstance& inst, const Vec& x, const Vec& y);

}  // namespace splitsqp::ed
