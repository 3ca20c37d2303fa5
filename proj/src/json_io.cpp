#include "ccagrade/json_io.hpp"

#include <fstream>

#include "json.hpp"

#include "ccagrade/errors.hpp"

namespace ccagrade {
namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* key) {
  if (!j.is_array()) throw InvalidInput(std::string(key) + " must be an array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Eigen::MatrixXd m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array()) throw InvalidInput(std::string(key) + " rows must be arrays");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw InvalidInput(std::string(key) + " rows have inconsistent lengths");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& cell = row[static_cast<std::size_t>(c)];
      if (!cell.is_number()) throw InvalidInput(std::string(key) + " entries must be numbers");
      m(r, c) = cell.get<double>();
    }
  }
  if (rows == 0) m.resize(0, 0);
  return m;
}

Eigen::VectorXd vector_from_json(const json& j, const char* key) {
  if (!j.is_array()) throw InvalidInput(std::string(key) + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const json& cell = j[static_cast<std::size_t>(i)];
    if (!cell.is_number()) throw InvalidInput(std::string(key) + " entries must be numbers");
    v(i) = cell.get<double>();
  }
  return v;
}

json parse(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw InvalidInput("malformed JSON");
  if (!j.is_object()) throw InvalidInput("expected a JSON object");
  return j;
}

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw InvalidInput(std::string("missing JSON key: ") + key);
  return *it;
}

}  // namespace

std::string cca_model_to_json(const CcaModel& model, int indent) {
  json j;
  j["u_a"] = matrix_to_json(model.u_a);
  j["u_b"] = matrix_to_json(model.u_b);
  j["rho"] = vector_to_json(model.rho);
  j["mean_a"] = vector_to_json(model.mean_a);
  j["mean_b"] = vector_to_json(model.mean_b);
  j["dim"] = model.dim;
  return j.dump(indent);
}

CcaModel cca_model_from_json(const std::string& text) {
  const json j = parse(text);
  CcaModel model;
  model.u_a = matrix_from_json(field(j, "u_a"), "u_a");
  model.u_b = matrix_from_json(field(j, "u_b"), "u_b");
  model.rho = vector_from_json(field(j, "rho"), "rho");
  model.rho_raw = model.rho;
  model.mean_a = vector_from_json(field(j, "mean_a"), "mean_a");
  model.mean_b = vector_from_json(field(j, "mean_b"), "mean_b");
  const json& dim = field(j, "dim");
  if (!dim.is_number_integer()) throw InvalidInput("dim must be an integer");
  model.dim = dim.get<Eigen::Index>();
  if (model.dim != model.rho.size() || model.u_a.cols() != model.dim ||
      model.u_b.cols() != model.dim)
    throw InvalidInput("dim disagrees with matrix shapes");
  return model;
}

std::string pcca_params_to_json(const PccaParams& params, int indent) {
  json j;
  j["w_a"] = matrix_to_json(params.w_a);
  j["w_b"] = matrix_to_json(params.w_b);
  j["psi_a"] = matrix_to_json(params.psi_a);
  j["psi_b"] = matrix_to_json(params.psi_b);
  j["mu_a"] = vector_to_json(params.mu_a);
  j["mu_b"] = vector_to_json(params.mu_b);
  j["dim"] = params.dim;
  return j.dump(indent);
}

PccaParams pcca_params_from_json(const std::string& text) {
  const json j = parse(text);
  PccaParams params;
  params.w_a = matrix_from_json(field(j, "w_a"), "w_a");
  params.w_b = matrix_from_json(field(j, "w_b"), "w_b");
  params.psi_a = matrix_from_json(field(j, "psi_a"), "psi_a");
  params.psi_b = matrix_from_json(field(j, "psi_b"), "psi_b");
  params.mu_a = vector_from_json(field(j, "mu_a"), "mu_a");
  params.mu_b = vector_from_json(field(j, "mu_b"), "mu_b");
  const json& dim = field(j, "dim");
  if (!dim.is_number_integer()) throw InvalidInput("dim must be an integer");
  params.dim = dim.get<Eigen::Index>();
  if (params.w_a.cols() != params.dim || params.w_b.cols() != params.dim)
    throw InvalidInput("dim disagrees with matrix shapes");
  return params;
}

void save_cca_model(const CcaModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << cca_model_to_json(model) << '\n';
  out.flush();
  if (!out) throw IoError("write failure: " + path);
}

CcaModel load_cca_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw IoError("read failure: " + path);
  return cca_model_from_json(text);
}

}  // namespace ccagrade
