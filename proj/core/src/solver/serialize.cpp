#include <cmath>

#include <json.hpp>

#include "uavmec/common.hpp"
#include "uavmec/solver.hpp"

namespace uavmec {

namespace {

using nlohmann::json;

json number(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

double number(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw ConfigError("solver json: unexpected string '" + s + "'");
  }
  return j.get<double>();
}

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

json mat(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec(m.row(r).transpose()));
  return a;
}

Eigen::VectorXd vec(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i]);
  return v;
}

Eigen::MatrixXd mat(const json& j, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), j.empty() ? cols : static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t r = 0; r < j.size(); ++r) m.row(static_cast<Eigen::Index>(r)) = vec(j[r]).transpose();
  return m;
}

json lp_json(const LinearProgram& lp) {
  return json{{"c", vec(lp.c)},         {"A_ineq", mat(lp.A_ineq)}, {"b_ineq", vec(lp.b_ineq)},
              {"A_eq", mat(lp.A_eq)},   {"b_eq", vec(lp.b_eq)},     {"lower", vec(lp.lower)},
              {"upper", vec(lp.upper)}, {"objective_offset", lp.objective_offset}};
}

LinearProgram lp_from(const json& j) {
  LinearProgram lp;
  lp.c = vec(j.at("c"));
  const Eigen::Index n = lp.c.size();
  lp.A_ineq = mat(j.at("A_ineq"), n);
  lp.b_ineq = vec(j.at("b_ineq"));
  lp.A_eq = mat(j.at("A_eq"), n);
  lp.b_eq = vec(j.at("b_eq"));
  lp.lower = vec(j.at("lower"));
  lp.upper = vec(j.at("upper"));
  lp.objective_offset = j.value("objective_offset", 0.0);
  return lp;
}

}  // namespace

std::string to_json(const LinearProgram& lp) { return lp_json(lp).dump(); }

std::string to_json(const ConeProgram& cp) {
  json cones = json::array();
  for (const SecondOrderCone& q : cp.cones)
    cones.push_back(json{{"A", mat(q.A)}, {"b", vec(q.b)}, {"c", vec(q.c)}, {"d", q.d}});
  return json{{"core", lp_json(cp.core)}, {"cones", cones}, {"Q", mat(cp.Q)}}.dump();
}

LinearProgram linear_program_from_json(const std::string& text) {
  try {
    return lp_from(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("solver json: ") + e.what());
  }
}

ConeProgram cone_program_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    ConeProgram cp;
    cp.core = lp_from(j.at("core"));
    const Eigen::Index n = cp.core.c.size();
    for (const json& q : j.at("cones")) {
      SecondOrderCone c;
      c.A = mat(q.at("A"), n);
      c.b = vec(q.at("b"));
      c.c = vec(q.at("c"));
      c.d = q.at("d").get<double>();
      cp.cones.push_back(std::move(c));
    }
    cp.Q = j.at("Q").empty() ? Eigen::MatrixXd() : mat(j.at("Q"), n);
    return cp;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("solver json: ") + e.what());
  }
}

}  // namespace uavmec
