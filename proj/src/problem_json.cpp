#include <fstream>
#include <sstream>

#include "json.hpp"
#include "splitsqp/problem.hpp"

namespace splitsqp {

namespace {

using nlohmann::json;

json mat_to_json(const Mat& m) {
  return json{{"rows", m.rows()},
              {"cols", m.cols()},
              {"data", std::vector<double>(m.data(), m.data() + m.rows() * m.cols())}};
}

Mat mat_from_json(const json& j, const std::string& name) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw std::invalid_argument("problem json: matrix \"" + name +
                                "\" needs rows/cols/data");
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != rows * cols)
    throw std::invalid_argument("problem json: matrix \"" + name +
                                "\" data length differs from rows*cols");
  Mat m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

json bound_entry(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

json bounds_to_json(const Vec& v) {
  json arr = json::array();
  for (double t : v) arr.push_back(bound_entry(t));
  return arr;
}

Vec bounds_from_json(const json& j, const std::string& name) {
  if (!j.is_array())
    throw std::invalid_argument("problem json: bound \"" + name + "\" must be an array");
  Vec out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (e.is_number()) {
      out.push_back(e.get<double>());
    } else if (e.is_string()) {
      const std::string s = e.get<std::string>();
      if (s == "inf" || s == "+inf")
        out.push_back(kInf);
      else if (s == "-inf")
        out.push_back(-kInf);
      else
        throw std::invalid_argument("problem json: bound \"" + name +
                                    "\" has unrecognized entry \"" + s + "\"");
    } else {
      throw std::invalid_argument("problem json: bound \"" + name +
                                  "\" entries must be numbers or inf strings");
    }
  }
  return out;
}

json objective_to_json(const BlockObjective& o) {
  if (const auto* qp = std::get_if<QuadraticParams>(&o.params)) {
    return json{{"family", "quadratic"},
                {"Q", mat_to_json(qp->q_mat)},
                {"linear", qp->lin},
                {"constant", qp->constant}};
  }
  if (const auto* cp = std::get_if<CubicSeparableParams>(&o.params)) {
    return json{{"family", "cubic-separable"},
                {"a", cp->a},
                {"b", cp->b},
                {"c", cp->c},
                {"constant", cp->constant}};
  }
  return json{{"family", "custom-unserializable"}};
}

BlockObjective objective_from_json(const json& j, const std::string& name) {
  if (!j.is_object() || !j.contains("family"))
    throw std::invalid_argument("problem json: objective \"" + name +
                                "\" needs a family tag");
  const std::string family = j.at("family").get<std::string>();
  if (family == "quadratic") {
    return make_quadratic_objective(mat_from_json(j.at("Q"), name + ".Q"),
                                    j.at("linear").get<Vec>(),
                                    j.value("constant", 0.0));
  }
  if (family == "cubic-separable") {
    return make_cubic_separable_objective(j.at("a").get<Vec>(), j.at("b").get<Vec>(),
                                          j.at("c").get<Vec>(), j.value("constant", 0.0));
  }
  if (family == "custom-unserializable")
    throw std::runtime_error("problem json: objective \"" + name +
                             "\" is custom-unserializable and cannot be reconstructed");
  throw std::invalid_argument("problem json: objective \"" + name +
                              "\" has unknown family \"" + family + "\"");
}

}  // namespace

std::string problem_to_json(const TwoBlockProblem& p, int indent) {
  json j;
  j["version"] = 1;
  j["A"] = mat_to_json(p.A);
  j["B"] = mat_to_json(p.B);
  j["C"] = mat_to_json(p.C);
  j["D"] = mat_to_json(p.D);
  j["b"] = p.b;
  j["r"] = bounds_to_json(p.r);
  j["s"] = bounds_to_json(p.s);
  j["l"] = bounds_to_json(p.l);
  j["u"] = bounds_to_json(p.u);
  j["p"] = bounds_to_json(p.p);
  j["q"] = bounds_to_json(p.q);
  j["objective"] = json{{"x", objective_to_json(p.f)}, {"y", objective_to_json(p.theta)}};
  return j.dump(indent);
}

TwoBlockProblem problem_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("problem json: parse error: ") + e.what());
  }
  if (!j.contains("version") || j.at("version").get<int>() != 1)
    throw std::invalid_argument("problem json: missing or unsupported version");
  for (const char* field : {"A", "B", "C", "D", "b", "r", "s", "l", "u", "p", "q",
                            "objective"})
    if (!j.contains(field))
      throw std::invalid_argument("problem json: missing field \"" + std::string(field) +
                                  "\"");
  TwoBlockProblem p;
  p.A = mat_from_json(j.at("A"), "A");
  p.B = mat_from_json(j.at("B"), "B");
  p.C = mat_from_json(j.at("C"), "C");
  p.D = mat_from_json(j.at("D"), "D");
  p.b = j.at("b").get<Vec>();
  p.r = bounds_from_json(j.at("r"), "r");
  p.s = bounds_from_json(j.at("s"), "s");
  p.l = bounds_from_json(j.at("l"), "l");
  p.u = bounds_from_json(j.at("u"), "u");
  p.p = bounds_from_json(j.at("p"), "p");
  p.q = bounds_from_json(j.at("q"), "q");
  p.f = objective_from_json(j.at("objective").at("x"), "x");
  p.theta = objective_from_json(j.at("objective").at("y"), "y");
  p.validate();
  return p;
}

void save_problem(const TwoBlockProblem& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << problem_to_json(p, 2) << "\n";
}

TwoBlockProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return problem_from_json(buf.str());
}

}  // namespace splitsqp
