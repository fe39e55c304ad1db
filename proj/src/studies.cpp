#include "pfl/studies.hpp"

#include <utility>

namespace pfl {

ReplicationData replication_from_study(const simgen::Study& study) {
  ReplicationData out;
  for (const auto& c : study.clients) {
    out.train.push_back(simgen::to_dataset(c.train, c.client_id));
    out.test.push_back(eval_from_log_responses(simgen::to_dataset(c.test, c.client_id)));
  }
  return out;
}

DataProvider study1_provider(double sigma_scenario) {
  return [sigma_scenario](std::uint64_t seed) {
    return replication_from_study(simgen::build_study1(sigma_scenario, seed));
  };
}

DataProvider study2_balanced_provider(int n_per_client) {
  return [n_per_client](std::uint64_t seed) {
    return replication_from_study(simgen::build_study2_balanced(n_per_client, seed));
  };
}

DataProvider study2_imbalanced_provider(std::vector<int> sizes) {
  return [sizes = std::move(sizes)](std::uint64_t seed) {
    return replication_from_study(simgen::build_study2_imbalanced(sizes, seed));
  };
}

DataProvider three_client_provider() {
  return [](std::uint64_t seed) {
    return replication_from_study(simgen::build_three_client(seed));
  };
}

ReplicationData replication_from_case(const cmapss::CaseData& data) {
  ReplicationData out;
  out.train = data.train;
  for (const auto& t : data.test) {
    EvalSet e;
    e.data = t.data;
    e.truth = t.rul_truth;
    e.offset = t.observed;
    out.test.push_back(std::move(e));
  }
  return out;
}

DataProvider case_study_provider(std::shared_ptr<const cmapss::FeatureCache> cache,
                                 cmapss::FailureModes modes) {
  return [cache = std::move(cache), modes = std::move(modes)](std::uint64_t seed) {
    return replication_from_case(cmapss::build_case_split(*cache, modes, seed));
  };
}

}  // namespace pfl
