#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pfl/dataset.hpp"
#include "pfl/fed_config.hpp"
#include "pfl/params.hpp"
#include "pfl/server.hpp"

namespace pfl {

struct FedResult {
  std::vector<ClientParams> params;           // untransformed final local models
  std::vector<TransformedParams> final_w;     // w_i*
  std::vector<TransformedParams> personalized;// s_i* from the last round
  std::vector<ParamsBoard> trace;             // board after init and every iteration
  int iterations = 0;
  bool early_stopped = false;
  WeightAudit audit;
  std::size_t floats_sent = 0;                // total doubles that crossed the channel
};

/// Personalized federated estimation: each round the server aggregates uploads into
/// s_i, then every client solves its proximal problem from s_i. Stops after
/// cfg.max_iter rounds or when no parameter moves more than cfg.early_stop_tol.
FedResult run_federated(const std::vector<ClientDataset>& datasets, const FedConfig& cfg);

/// Same loop started from the given board instead of the seeded random initialization.
FedResult run_federated(const std::vector<ClientDataset>& datasets, const FedConfig& cfg,
                        const std::vector<TransformedParams>& warm_start);

/// One CSV line per (iteration, client): iteration,client_id,w0..w{K+1}.
void write_board_trace(std::ostream& out, const std::vector<ParamsBoard>& trace,
                       const std::vector<std::string>& client_ids);

}  // namespace pfl
