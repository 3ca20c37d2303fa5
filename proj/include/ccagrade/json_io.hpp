#pragma once

#include <string>

#include "ccagrade/cca.hpp"
#include "ccagrade/pcca.hpp"

namespace ccagrade {

/// JSON layout: matrices as row-major nested arrays, vectors as flat arrays.
/// CcaModel keys: u_a, u_b, rho, mean_a, mean_b, dim.
/// PccaParams keys: w_a, w_b, psi_a, psi_b, mu_a, mu_b, dim.
std::string cca_model_to_json(const CcaModel& model, int indent = 2);
CcaModel cca_model_from_json(const std::string& text);

std::string pcca_params_to_json(const PccaParams& params, int indent = 2);
PccaParams pcca_params_from_json(const std::string& text);

void save_cca_model(const CcaModel& model, const std::string& path);
CcaModel load_cca_model(const std::string& path);

}  // namespace ccagrade
