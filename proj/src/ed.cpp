#include "splitsqp/ed.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace splitsqp::ed {

namespace {

using nlohmann::json;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

void UnitParams::validate() const {
  require(0.0 < p_min && p_min < p_max, "unit: requires 0 < p_min < p_max");
  require(ramp_down > 0.0 && ramp_up > 0.0, "unit: ramp limits must be positive");
  require(a > 0.0 || (a >= 0.0 && b > 0.0),
          "unit: cubic coefficients must give a convex cost (a > 0, or a = 0 and b > 0)");
  require(6.0 * a * p_min + 2.0 * b > 0.0,
          "unit: cost Hessian 6 a p + 2 b must be positive at p_min");
}

void EDInstance::validate() const {
  require(T >= 1, "instance: T must be at least 1");
  require(!units.empty(), "instance: no units");
  require(demand.size() == T, "instance: demand length differs from T");
  for (const auto& u : units) u.validate();
  double lo = 0.0, hi = 0.0;
  for (const auto& u : units) {
    lo += u.p_min;
    hi += u.p_max;
  }
  for (std::size_t t = 0; t < T; ++t)
    require(lo <= demand[t] && demand[t] <= hi,
            "instance: demand at period " + std::to_string(t + 1) +
                " lies outside [sum p_min, sum p_max]");
}

TwoBlockProblem build_ed_problem(const EDInstance& inst) {
  inst.validate();
  const std::size_t N = inst.n_units(), T = inst.T;
  const std::size_t N1 = N / 2, N2 = N - N1;
  const std::size_t n1 = N1 * T, n2 = N2 * T, m1 = T, m2 = N * T;

  TwoBlockProblem p;
  p.A = Mat(m1, n1);
  p.B = Mat(m1, n2);
  p.C = Mat(m2, n1);
  p.D = Mat(m2, n2);
  p.b = inst.demand;
  p.r = Vec(m2);
  p.s = Vec(m2);
  p.l = Vec(n1);
  p.u = Vec(n1);
  p.p = Vec(n2);
  p.q = Vec(n2);

  // Power balance: each period's outputs sum to the demand.
  for (std::size_t i = 0; i < N1; ++i)
    for (std::size_t t = 0; t < T; ++t) p.A(t, i * T + t) = 1.0;
  for (std::size_t i = 0; i < N2; ++i)
    for (std::size_t t = 0; t < T; ++t) p.B(t, i * T + t) = 1.0;

  // First differences per unit; the t=1 row carries p_{i,1} with p_initial
  // folded into the band bounds.
  for (std::size_t i = 0; i < N; ++i) {
    const UnitParams& unit = inst.units[i];
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t row = i * T + t;
      const std::size_t col = (i < N1 ? i : i - N1) * T + t;
      Mat& ramp = i < N1 ? p.C : p.D;
      ramp(row, col) = 1.0;
      if (t > 0) ramp(row, col - 1) = -1.0;
      const double offset = t == 0 ? unit.p_initial : 0.0;
      p.r[row] = -unit.ramp_down + offset;
      p.s[row] = unit.ramp_up + offset;
    }
  }

  Vec ax(n1), bx(n1), cx(n1), ay(n2), by(n2), cy(n2);
  double dx = 0.0, dy = 0.0;
  for (std::size_t i = 0; i < N1; ++i) {
    const UnitParams& unit = inst.units[i];
    dx += static_cast<double>(T) * unit.d;
    for (std::size_t t = 0; t < T; ++t) {
      ax[i * T + t] = unit.a;
      bx[i * T + t] = unit.b;
      cx[i * T + t] = unit.c;
      p.l[i * T + t] = unit.p_min;
      p.u[i * T + t] = unit.p_max;
    }
  }
  for (std::size_t i = 0; i < N2; ++i) {
    const UnitParams& unit = inst.units[N1 + i];
    dy += static_cast<double>(T) * unit.d;
    for (std::size_t t = 0; t < T; ++t) {
      ay[i * T + t] = unit.a;
      by[i * T + t] = unit.b;
      cy[i * T + t] = unit.c;
      p.p[i * T + t] = unit.p_min;
      p.q[i * T + t] = unit.p_max;
    }
  }
  p.f = make_cubic_separable_objective(std::move(ax), std::move(bx), std::move(cx), dx);
  p.theta = make_cubic_separable_objective(std::move(ay), std::move(by), std::move(cy), dy);

  p.validate();
  return p;
}

EDInstance replicate_instance(const std::vector<UnitParams>& base5,
                              const std::array<int, 5>& counts, std::size_t T,
                              const Vec& demand_profile) {
  require(base5.size() == 5, "replicate: base system must have 5 units");
  int total = 0;
  for (int c : counts) {
    require(c >= 0, "replicate: counts must be nonnegative");
    total += c;
  }
  require(total > 0, "replicate: at least one unit required");
  require(T >= 1, "replicate: T must be at least 1");

  EDInstance inst;
  inst.T = T;
  for (std::size_t k = 0; k < 5; ++k)
    for (int c = 0; c < counts[k]; ++c) inst.units.push_back(base5[k]);

  double hi = 0.0;
  for (const auto& u : inst.units) hi += u.p_max;
  Vec profile = demand_profile.empty() ? default_demand_profile(T) : demand_profile;
  require(profile.size() == T, "replicate: demand profile length differs from T");
  inst.demand.resize(T);
  for (std::size_t t = 0; t < T; ++t) inst.demand[t] = profile[t] * hi;

  inst.validate();
  return inst;
}

StartPoint feasible_start(const EDInstance& inst) {
  inst.validate();
  const std::size_t N = inst.n_units(), T = inst.T;
  const std::size_t N1 = N / 2, N2 = N - N1;

  StartPoint sp;
  sp.x0.resize(N1 * T);
  sp.y0.resize(N2 * T);
  sp.z0.resize(N * T);
  for (std::size_t i = 0; i < N1; ++i)
    for (std::size_t t = 0; t < T; ++t) sp.x0[i * T + t] = inst.units[i].p_min;
  for (std::size_t i = 0; i < N2; ++i)
    for (std::size_t t = 0; t < T; ++t) sp.y0[i * T + t] = inst.units[N1 + i].p_min;

  // Implied first differences of the constant lower-bound trajectory are zero
  // for t >= 2 and p_min at t = 1; project onto the (offset) ramp band.
  for (std::size_t i = 0; i < N; ++i) {
    const UnitParams& u = inst.units[i];
    for (std::size_t t = 0; t < T; ++t) {
      const double value = t == 0 ? u.p_min : 0.0;
      const double lo = -u.ramp_down + (t == 0 ? u.p_initial : 0.0);
      const double hi = u.ramp_up + (t == 0 ? u.p_initial : 0.0);
      sp.z0[i * T + t] = std::min(std::max(value, lo), hi);
    }
  }
  return sp;
}

namespace {

double field_number(const json& j, const char* field, const std::string& where) {
  if (!j.contains(field))
    throw std::invalid_argument("instance json: missing field \"" + std::string(field) +
                                "\" in " + where);
  const auto& v = j.at(field);
  if (!v.is_number())
    throw std::invalid_argument("instance json: field \"" + std::string(field) + "\" in " +
                                where + " is not a number");
  return v.get<double>();
}

}  // namespace

std::string instance_to_json(const EDInstance& inst, int indent) {
  json j;
  j["version"] = 1;
  j["T"] = inst.T;
  j["units"] = json::array();
  for (const auto& u : inst.units) {
    j["units"].push_back({{"a", u.a},
                          {"b", u.b},
                          {"c", u.c},
                          {"d", u.d},
                          {"p_min", u.p_min},
                          {"p_max", u.p_max},
                          {"ramp_down", u.ramp_down},
                          {"ramp_up", u.ramp_up},
                          {"p_initial", u.p_initial}});
  }
  j["demand"] = inst.demand;
  return j.dump(indent);
}

EDInstance instance_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("instance json: parse error: ") + e.what());
  }
  if (!j.contains("version") || j.at("version").get<int>() != 1)
    throw std::invalid_argument("instance json: missing or unsupported version");
  if (!j.contains("T")) throw std::invalid_argument("instance json: missing field \"T\"");
  if (!j.contains("units") || !j.at("units").is_array())
    throw std::invalid_argument("instance json: missing field \"units\"");
  if (!j.contains("demand") || !j.at("demand").is_array())
    throw std::invalid_argument("instance json: missing field \"demand\"");

  EDInstance inst;
  inst.T = j.at("T").get<std::size_t>();
  std::size_t idx = 0;
  for (const auto& ju : j.at("units")) {
    const std::string where = "units[" + std::to_string(idx++) + "]";
    UnitParams u;
    u.a = field_number(ju, "a", where);
    u.b = field_number(ju, "b", where);
    u.c = field_number(ju, "c", where);
    u.d = field_number(ju, "d", where);
    u.p_min = field_number(ju, "p_min", where);
    u.p_max = field_number(ju, "p_max", where);
    u.ramp_down = field_number(ju, "ramp_down", where);
    u.ramp_up = field_number(ju, "ramp_up", where);
    u.p_initial = field_number(ju, "p_initial", where);
    inst.units.push_back(u);
  }
  inst.demand = j.at("demand").get<Vec>();
  inst.validate();
  return inst;
}

void save_instance(const EDInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << instance_to_json(inst, 2) << "\n";
}

EDInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return instance_from_json(buf.str());
}

const std::vector<UnitParams>& synthetic_five_units() {
  // Synthetic data, drawn once and committed: a homogeneous fleet of five
  // replicated units that differ only in fixed cost. The even demand split
  // stays inside every unit's feasible band, and copies of a unit stay
  // synchronized through the solver, which keeps the benchmark family's
  // behavior stable as instances are replicated up.
  static const std::vector<UnitParams> units = {
      {4.5e-5, 0.005, 25.0, 310.0, 35.0, 200.0, 55.0, 55.0, 120.0},
      {4.5e-5, 0.005, 25.0, 286.0, 35.0, 200.0, 55.0, 55.0, 120.0},
      {4.5e-5, 0.005, 25.0, 332.0, 35.0, 200.0, 55.0, 55.0, 120.0},
      {4.5e-5, 0.005, 25.0, 298.0, 35.0, 200.0, 55.0, 55.0, 120.0},
      {4.5e-5, 0.005, 25.0, 305.0, 35.0, 200.0, 55.0, 55.0, 120.0},
  };
  return units;
}

Vec default_demand_profile(std::size_t T) {
  Vec profile(T);
  for (std::size_t t = 0; t < T; ++t) {
    const double phase =
        2.0 * std::numbers::pi * static_cast<double>(t + 1) / static_cast<double>(T);
    profile[t] = 0.70 - 0.15 * std::cos(phase);
  }
  return profile;
}

std::array<int, 5> table1_counts(int row) {
  static const std::array<std::array<int, 5>, 20> rows = {{
      {1, 2, 3, 2, 2},      // 10
      {3, 3, 3, 3, 3},      // 15
      {4, 4, 4, 4, 4},      // 20
      {5, 6, 7, 7, 5},      // 30
      {5, 10, 10, 5, 10},   // 40
      {8, 11, 12, 9, 10},   // 50
      {10, 14, 16, 15, 15}, // 70
      {13, 18, 18, 13, 18}, // 80
      {12, 20, 25, 20, 13}, // 90
      {18, 22, 25, 18, 17}, // 100
      {20, 24, 27, 20, 19}, // 110
      {22, 26, 29, 22, 21}, // 120
      {26, 30, 30, 22, 22}, // 130
      {30, 33, 32, 25, 30}, // 150
      {34, 37, 36, 29, 34}, // 170
      {36, 39, 38, 30, 37}, // 180
      {40, 44, 41, 34, 41}, // 200
      {44, 48, 45, 38, 45}, // 220
      {48, 52, 48, 40, 52}, // 240
      {50, 54, 50, 42, 54}, // 250
  }};
  if (row < 1 || row > 20)
    throw std::invalid_argument("table1 row must lie in 1..20");
  return rows[static_cast<std::size_t>(row - 1)];
}

std::string schedule_csv(const EDInstance& inst, const Vec& x, const Vec& y) {
  const std::size_t N = inst.n_units(), T = inst.T, N1 = N / 2;
  if (x.size() != N1 * T || y.size() != (N - N1) * T)
    throw std::invalid_argument("schedule csv: block sizes do not match the instance");
  std::ostringstream out;
  out << "unit,period,output_mw\n";
  out.precision(10);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t t = 0; t < T; ++t) {
      const double value = i < N1 ? x[i * T + t] : y[(i - N1) * T + t];
      out << (i + 1) << "," << (t + 1) << "," << value << "\n";
    }
  return out.str();
}

}  // namespace splitsqp::ed
