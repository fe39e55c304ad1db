#pragma once

// Server side of the personalized federated loop. Works on parameter vectors only;
// nothing here can name or reach a client's training data.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pfl/fed_config.hpp"
#include "pfl/params.hpp"

namespace pfl {

/// Snapshot of every client's transformed parameters at one iteration.
struct ParamsBoard {
  std::vector<TransformedParams> columns;
  int iteration = 0;

  std::size_t size() const { return columns.size(); }
  void validate() const;
};

/// Aggregation weights a_{i,1..m} for one client; a probability vector.
struct WeightVector {
  std::vector<double> weights;
};

/// a_{i,h} = gamma A'(||w_i - w_h||^2) for h != i, a_{i,i} = 1 - sum of the others.
WeightVector compute_weights(const ParamsBoard& board, std::size_t i, const FedConfig& cfg);

/// s_i = sum_h a_{i,h} w_h: one gradient step on the client's similarity penalty.
TransformedParams aggregate(const ParamsBoard& board, std::size_t i, const FedConfig& cfg);

/// Running extremes of every weight vector the server produced.
struct WeightAudit {
  double min_weight = 1.0;
  double max_sum_error = 0.0;
  std::size_t vectors_checked = 0;

  void record(const WeightVector& wv);
  void merge(const WeightAudit& other);
  bool simplex_ok(double tol = 1e-12) const {
    return min_weight >= 0.0 && max_sum_error <= tol;
  }
};

/// Personalized cloud: one aggregated model per client, recomputed each round.
class PersonalizedServer {
 public:
  explicit PersonalizedServer(FedConfig cfg) : cfg_(std::move(cfg)) {}

  /// Receives every client's upload for a round and returns s_1..s_m.
  std::vector<TransformedParams> personalize(const ParamsBoard& uploads);

  const WeightAudit& audit() const { return audit_; }

 private:
  FedConfig cfg_;
  WeightAudit audit_;
};

/// Wire format of one round: little-endian header (m, dim, iteration) followed by
/// m * dim doubles in packed parameter order.
std::vector<std::uint8_t> encode_board(const ParamsBoard& board);
ParamsBoard decode_board(const std::vector<std::uint8_t>& bytes);

/// In-process message channel between clients and the server. Everything crossing it
/// is serialized, so only parameter vectors can travel.
class Channel {
 public:
  ParamsBoard transmit(const ParamsBoard& board);

  std::size_t messages() const { return messages_; }
  std::size_t floats_sent() const { return floats_; }

 private:
  std::size_t messages_ = 0;
  std::size_t floats_ = 0;
};

}  // namespace pfl
