#pragma once

#include <memory>
#include <vector>

#include "pfl/cmapss.hpp"
#include "pfl/harness.hpp"
#include "pfl/simgen.hpp"

namespace pfl {

/// Training sets and evaluation sets (truth exp(y_log)) of a simulated study.
ReplicationData replication_from_study(const simgen::Study& study);

DataProvider study1_provider(double sigma_scenario);
DataProvider study2_balanced_provider(int n_per_client);
DataProvider study2_imbalanced_provider(std::vector<int> sizes);
DataProvider three_client_provider();

/// Case-study replications: a fresh split per seed over precomputed engine features.
/// Truth is the remaining useful life of each truncated test engine.
DataProvider case_study_provider(std::shared_ptr<const cmapss::FeatureCache> cache,
                                 cmapss::FailureModes modes);
ReplicationData replication_from_case(const cmapss::CaseData& data);

}  // namespace pfl
