#pragma once

#include <Eigen/Dense>
#include <utility>

#include "ccagrade/errors.hpp"

namespace ccagrade {

/// Dense real data matrix: rows are samples, columns are variables.
/// All entries must be finite; fitting operations additionally require
/// at least two samples.
struct DataMatrix {
  Eigen::MatrixXd values;

  DataMatrix() = default;

  explicit DataMatrix(Eigen::MatrixXd v) : values(std::move(v)) {
    if (values.cols() < 1) throw InvalidInput("DataMatrix needs at least one variable");
    if (!values.allFinite()) throw InvalidInput("DataMatrix entries must be finite");
  }

  Eigen::Index n_samples() const { return values.rows(); }
  Eigen::Index n_variables() const { return values.cols(); }
};

}  // namespace ccagrade
