#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace pfl {

/// One client's private training data. Client-side only; the server never sees it.
struct ClientDataset {
  Eigen::MatrixXd features;  // n x (K+1), first column all ones
  Eigen::VectorXd responses; // log time-to-failure
  std::string client_id;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index num_features() const { return features.cols() - 1; }

  void validate() const;

  /// Rows [keep] in order; used for cross-validation folds.
  ClientDataset subset(const std::vector<Eigen::Index>& keep) const;
};

}  // namespace pfl
