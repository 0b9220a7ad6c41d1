#pragma once

#include <string>

#include "cspf/o_field.hpp"
#include "cspf/s_field.hpp"

namespace cspf {

struct FieldParams {
  SFieldParams s_field = SFieldParams::highway_defaults();
  OFieldParams o_field;
};

// JSON parameter file. Polynomial coefficients are stored in ascending
// order. The o_field section also accepts the aliases beta_d (beta_p),
// gamma_t (t_star), and gamma_d (fixed d*). Doubles round-trip exactly.
FieldParams params_from_json(const std::string& json_text);
std::string params_to_json(const FieldParams& params);

FieldParams load_params(const std::string& path);
void save_params(const FieldParams& params, const std::string& path);

}  // namespace cspf
