#include "cspf/params_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cspf {

namespace {

using nlohmann::json;

std::array<double, 4> read_poly(const json& j, const char* name) {
  const auto& arr = j.at(name);
  if (!arr.is_array() || arr.size() > 4) {
    throw std::runtime_error(std::string("params: ") + name +
                             " must be an array of at most 4 coefficients");
  }
  std::array<double, 4> out{};
  for (std::size_t i = 0; i < arr.size(); ++i) out[i] = arr[i].get<double>();
  return out;
}

}  // namespace

FieldParams params_from_json(const std::string& json_text) {
  const json doc = json::parse(json_text);
  FieldParams p;
  if (doc.contains("s_field")) {
    const auto& s = doc["s_field"];
    p.s_field.gamma_x_poly = read_poly(s, "gamma_x_poly");
    p.s_field.beta_x_poly = read_poly(s, "beta_x_poly");
    p.s_field.gamma_y = s.at("gamma_y").get<double>();
    p.s_field.beta_y = s.at("beta_y").get<double>();
    p.s_field.gamma_l = s.at("gamma_l").get<double>();
    p.s_field.beta_l = s.at("beta_l").get<double>();
    p.s_field.gamma_b = s.at("gamma_b").get<double>();
    p.s_field.beta_b = s.at("beta_b").get<double>();
    p.s_field.kappa_l = s.value("kappa_l", 0.25);
    p.s_field.kappa_b = s.value("kappa_b", 0.25);
    if (p.s_field.kappa_l < 0.0 || p.s_field.kappa_l > 1.0 || p.s_field.kappa_b < 0.0 ||
        p.s_field.kappa_b > 1.0) {
      throw std::runtime_error("params: kappa_l and kappa_b must lie in [0, 1]");
    }
  }
  if (doc.contains("o_field")) {
    const auto& o = doc["o_field"];
    p.o_field.beta_p = o.contains("beta_p") ? o["beta_p"].get<double>()
                                            : o.value("beta_d", 10.0);
    p.o_field.beta_t = o.value("beta_t", 2.0);
    p.o_field.t_star = o.contains("t_star") ? o["t_star"].get<double>()
                                            : o.value("gamma_t", 7.5);
    const std::string rule = o.value("d_star_rule", "half_width_sum");
    if (rule == "half_width_sum") {
      p.o_field.d_star_rule = OFieldParams::DStarRule::half_width_sum;
    } else if (rule == "fixed") {
      p.o_field.d_star_rule = OFieldParams::DStarRule::fixed;
    } else {
      throw std::runtime_error("params: unknown d_star_rule '" + rule + "'");
    }
    p.o_field.d_star_fixed = o.contains("d_star") ? o["d_star"].get<double>()
                                                  : o.value("gamma_d", 2.0);
    if (!(p.o_field.beta_p >= 1.0) || !(p.o_field.beta_t >= 1.0) ||
        !(p.o_field.t_star > 0.0) || !(p.o_field.d_star_fixed > 0.0)) {
      throw std::runtime_error(
          "params: require beta_p, beta_t >= 1, t_star > 0, d_star > 0");
    }
  }
  return p;
}

std::string params_to_json(const FieldParams& params) {
  json s;
  s["gamma_x_poly"] = params.s_field.gamma_x_poly;
  s["beta_x_poly"] = params.s_field.beta_x_poly;
  s["gamma_y"] = params.s_field.gamma_y;
  s["beta_y"] = params.s_field.beta_y;
  s["gamma_l"] = params.s_field.gamma_l;
  s["beta_l"] = params.s_field.beta_l;
  s["gamma_b"] = params.s_field.gamma_b;
  s["beta_b"] = params.s_field.beta_b;
  s["kappa_l"] = params.s_field.kappa_l;
  s["kappa_b"] = params.s_field.kappa_b;

  json o;
  o["beta_p"] = params.o_field.beta_p;
  o["beta_t"] = params.o_field.beta_t;
  o["t_star"] = params.o_field.t_star;
  o["d_star_rule"] = params.o_field.d_star_rule == OFieldParams::DStarRule::fixed
                         ? "fixed"
                         : "half_width_sum";
  o["d_star"] = params.o_field.d_star_fixed;

  json doc;
  doc["s_field"] = s;
  doc["o_field"] = o;
  return doc.dump(2) + "\n";
}

FieldParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open params file: " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return params_from_json(ss.str());
}

void save_params(const FieldParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write params file: " + path);
  }
  out << params_to_json(params);
}

}  // namespace cspf
