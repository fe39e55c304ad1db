#include "pfl/dataset.hpp"

#include <stdexcept>

namespace pfl {

void ClientDataset::validate() const {
  if (features.rows() < 1) throw std::invalid_argument("ClientDataset " + client_id + ": no rows");
  if (features.cols() < 1)
    throw std::invalid_argument("ClientDataset " + client_id + ": no feature columns");
  if (responses.size() != features.rows())
    throw std::invalid_argument("ClientDataset " + client_id + ": response length mismatch");
  if (!features.allFinite() || !responses.allFinite())
    throw std::invalid_argument("ClientDataset " + client_id + ": non-finite entries");
  for (Eigen::Index j = 0; j < features.rows(); ++j)
    if (features(j, 0) != 1.0)
      throw std::invalid_argument("ClientDataset " + client_id +
                                  ": first feature column must be identically 1 (row " +
                                  std::to_string(j) + ")");
}

ClientDataset ClientDataset::subset(const std::vector<Eigen::Index>& keep) const {
  ClientDataset out;
  out.client_id = client_id;
  out.features.resize(static_cast<Eigen::Index>(keep.size()), features.cols());
  out.responses.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    out.features.row(r) = features.row(keep[k]);
    out.responses(r) = responses(keep[k]);
  }
  return out;
}

}  // namespace pfl
