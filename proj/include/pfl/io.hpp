#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pfl/dataset.hpp"
#include "pfl/params.hpp"

namespace pfl {

/// Reads a client table with a y_log column. Features are (1, feature_c_hat) when that
/// column exists, otherwise (1, f1, ..., fK). With a role column, only rows whose role
/// equals role_filter are kept (all rows when the filter is empty).
ClientDataset read_feature_csv(std::istream& in, const std::string& client_id,
                               const std::string& role_filter = "");
ClientDataset read_feature_csv_file(const std::string& path, const std::string& client_id,
                                    const std::string& role_filter = "");

struct ModelEntry {
  std::string client_id;
  ClientParams params;
};

void write_model_json(std::ostream& out, const std::string& method,
                      const std::vector<ModelEntry>& models);
std::vector<ModelEntry> read_model_json(std::istream& in);

}  // namespace pfl
