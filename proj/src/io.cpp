#include "pfl/io.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

#include "pfl/csv.hpp"

namespace pfl {

ClientDataset read_feature_csv(std::istream& in, const std::string& client_id,
                               const std::string& role_filter) {
  const CsvTable t = read_csv(in);
  std::vector<std::size_t> feature_cols;
  bool has_c_hat = false;
  for (std::size_t k = 0; k < t.header.size(); ++k)
    if (t.header[k] == "feature_c_hat") {
      feature_cols.push_back(k);
      has_c_hat = true;
    }
  if (!has_c_hat) {
    for (int f = 1;; ++f) {
      const std::string name = "f" + std::to_string(f);
      auto it = std::find(t.header.begin(), t.header.end(), name);
      if (it == t.header.end()) break;
      feature_cols.push_back(static_cast<std::size_t>(it - t.header.begin()));
    }
  }
  if (feature_cols.empty())
    throw std::runtime_error("feature table has neither feature_c_hat nor f1..fK columns");
  const std::size_t y_col = t.index_of("y_log");
  const auto role_it = std::find(t.header.begin(), t.header.end(), "role");
  const bool filter = !role_filter.empty() && role_it != t.header.end();
  const auto role_col = static_cast<std::size_t>(role_it - t.header.begin());

  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    if (!filter || t.rows[r][role_col] == role_filter) rows.push_back(r);

  ClientDataset d;
  d.client_id = client_id;
  d.features.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(feature_cols.size() + 1));
  d.responses.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = t.rows[rows[i]];
    const auto r = static_cast<Eigen::Index>(i);
    d.features(r, 0) = 1.0;
    for (std::size_t k = 0; k < feature_cols.size(); ++k)
      d.features(r, static_cast<Eigen::Index>(k + 1)) =
          parse_double(row[feature_cols[k]], rows[i] + 2);
    d.responses(r) = parse_double(row[y_col], rows[i] + 2);
  }
  d.validate();
  return d;
}

ClientDataset read_feature_csv_file(const std::string& path, const std::string& client_id,
                                    const std::string& role_filter) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file '" + path + "'");
  return read_feature_csv(in, client_id, role_filter);
}

void write_model_json(std::ostream& out, const std::string& method,
                      const std::vector<ModelEntry>& models) {
  nlohmann::ordered_json j;
  j["method"] = method;
  j["clients"] = nlohmann::ordered_json::array();
  for (const auto& m : models) {
    std::vector<double> beta(m.params.beta.data(), m.params.beta.data() + m.params.beta.size());
    j["clients"].push_back({{"client_id", m.client_id}, {"beta", beta}, {"sigma", m.params.sigma}});
  }
  out << j.dump(2) << '\n';
}

std::vector<ModelEntry> read_model_json(std::istream& in) {
  const auto j = nlohmann::json::parse(in);
  std::vector<ModelEntry> out;
  for (const auto& c : j.at("clients")) {
    ModelEntry e;
    e.client_id = c.at("client_id").get<std::string>();
    const auto beta = c.at("beta").get<std::vector<double>>();
    e.params.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(),
                                                      static_cast<Eigen::Index>(beta.size()));
    e.params.sigma = c.at("sigma").get<double>();
    e.params.validate();
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace pfl
