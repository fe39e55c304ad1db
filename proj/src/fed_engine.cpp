#include "pfl/fed_engine.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pfl/client.hpp"

namespace pfl {

FedResult run_federated(const std::vector<ClientDataset>& datasets, const FedConfig& cfg) {
  return run_federated(datasets, cfg, {});
}

FedResult run_federated(const std::vector<ClientDataset>& datasets, const FedConfig& cfg,
                        const std::vector<TransformedParams>& warm_start) {
  if (datasets.empty()) throw std::invalid_argument("run_federated: no clients");
  cfg.validate();
  const std::size_t m = datasets.size();
  cfg.check_feasible(m);

  std::vector<FederatedClient> clients;
  clients.reserve(m);
  for (const auto& d : datasets) {
    if (d.features.cols() != datasets.front().features.cols())
      throw std::invalid_argument("run_federated: clients disagree on feature count");
    clients.emplace_back(d);
  }

  PersonalizedServer server(cfg);
  Channel uplink, downlink;
  FedResult res;

  ParamsBoard board;
  board.iteration = 0;
  if (warm_start.empty()) {
    for (const auto& c : clients) board.columns.push_back(c.initialize(cfg.seed));
  } else {
    if (warm_start.size() != m)
      throw std::invalid_argument("run_federated: warm start has wrong client count");
    for (std::size_t i = 0; i < m; ++i) {
      warm_start[i].validate();
      if (warm_start[i].dim() != clients[i].dim())
        throw std::invalid_argument("run_federated: warm start has wrong dimension");
      board.columns.push_back(warm_start[i]);
    }
  }
  if (cfg.record_trace) res.trace.push_back(board);

  for (int t = 1; t <= cfg.max_iter; ++t) {
    const ParamsBoard received = uplink.transmit(board);
    ParamsBoard personalized{server.personalize(received), t};
    personalized = downlink.transmit(personalized);

    ParamsBoard next;
    next.iteration = t;
    next.columns.reserve(m);
    double max_move = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      TransformedParams w = clients[i].refine(personalized.columns[i], cfg);
      const Eigen::VectorXd packed = w.packed();
      if (!packed.allFinite() || !(w.sigma_t > 0.0)) {
        std::ostringstream msg;
        msg << "run_federated: non-finite iterate for client '" << clients[i].id()
            << "' at iteration " << t;
        throw std::runtime_error(msg.str());
      }
      max_move = std::max(max_move,
                          (packed - board.columns[i].packed()).lpNorm<Eigen::Infinity>());
      next.columns.push_back(std::move(w));
    }
    board = std::move(next);
    res.personalized = std::move(personalized.columns);
    res.iterations = t;
    if (cfg.record_trace) res.trace.push_back(board);
    if (max_move < cfg.early_stop_tol) {
      res.early_stopped = true;
      break;
    }
  }

  res.final_w = board.columns;
  res.params.reserve(m);
  for (const auto& w : res.final_w) res.params.push_back(untransform(w));
  res.audit = server.audit();
  res.floats_sent = uplink.floats_sent() + downlink.floats_sent();
  return res;
}

void write_board_trace(std::ostream& out, const std::vector<ParamsBoard>& trace,
                       const std::vector<std::string>& client_ids) {
  if (trace.empty()) return;
  const auto dim = trace.front().columns.front().dim();
  out << "iteration,client_id";
  for (Eigen::Index k = 0; k < dim; ++k) out << ",w" << k;
  out << '\n';
  out << std::setprecision(17);
  for (const auto& board : trace) {
    if (board.size() != client_ids.size())
      throw std::invalid_argument("write_board_trace: client id count mismatch");
    for (std::size_t i = 0; i < board.size(); ++i) {
      out << board.iteration << ',' << client_ids[i];
      const Eigen::VectorXd w = board.columns[i].packed();
      for (Eigen::Index k = 0; k < w.size(); ++k) out << ',' << w(k);
      out << '\n';
    }
  }
}

}  // namespace pfl
