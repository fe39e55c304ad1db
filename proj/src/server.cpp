#include "pfl/server.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace pfl {

void ParamsBoard::validate() const {
  if (columns.empty()) throw std::invalid_argument("ParamsBoard: no clients");
  const auto dim = columns.front().dim();
  for (const auto& c : columns) {
    c.validate();
    if (c.dim() != dim) throw std::invalid_argument("ParamsBoard: ragged parameter dimensions");
  }
}

namespace {

Eigen::MatrixXd pack_columns(const ParamsBoard& board) {
  Eigen::MatrixXd w(board.columns.front().dim(), static_cast<Eigen::Index>(board.size()));
  for (std::size_t h = 0; h < board.size(); ++h)
    w.col(static_cast<Eigen::Index>(h)) = board.columns[h].packed();
  return w;
}

WeightVector weights_from_packed(const Eigen::MatrixXd& w, std::size_t i, const FedConfig& cfg) {
  const auto m = static_cast<std::size_t>(w.cols());
  const auto ci = static_cast<Eigen::Index>(i);
  WeightVector wv;
  wv.weights.assign(m, 0.0);
  const double gamma = cfg.gamma();
  double others = 0.0;
  for (std::size_t h = 0; h < m; ++h) {
    if (h == i) continue;
    const double d2 = (w.col(ci) - w.col(static_cast<Eigen::Index>(h))).squaredNorm();
    wv.weights[h] = gamma * cfg.kernel.deriv(d2);
    others += wv.weights[h];
  }
  double self = 1.0 - others;
  if (self < 0.0) {
    if (self < -1e-14) {
      std::ostringstream msg;
      msg << "negative self-weight " << self << " for client " << i
          << "; maximal admissible gamma = " << cfg.max_feasible_gamma(m);
      throw ConfigError(msg.str());
    }
    self = 0.0;
  }
  wv.weights[i] = self;
  return wv;
}

Eigen::VectorXd combine(const Eigen::MatrixXd& w, const WeightVector& wv) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(w.rows());
  for (std::size_t h = 0; h < wv.weights.size(); ++h)
    if (wv.weights[h] != 0.0) s += wv.weights[h] * w.col(static_cast<Eigen::Index>(h));
  return s;
}

}  // namespace

WeightVector compute_weights(const ParamsBoard& board, std::size_t i, const FedConfig& cfg) {
  if (i >= board.size()) throw std::out_of_range("compute_weights: client index out of range");
  board.validate();
  cfg.check_feasible(board.size());
  return weights_from_packed(pack_columns(board), i, cfg);
}

TransformedParams aggregate(const ParamsBoard& board, std::size_t i, const FedConfig& cfg) {
  if (i >= board.size()) throw std::out_of_range("aggregate: client index out of range");
  board.validate();
  cfg.check_feasible(board.size());
  const Eigen::MatrixXd w = pack_columns(board);
  return TransformedParams::unpack(combine(w, weights_from_packed(w, i, cfg)));
}

void WeightAudit::record(const WeightVector& wv) {
  double sum = 0.0;
  for (double a : wv.weights) {
    min_weight = std::min(min_weight, a);
    sum += a;
  }
  max_sum_error = std::max(max_sum_error, std::abs(sum - 1.0));
  ++vectors_checked;
}

void WeightAudit::merge(const WeightAudit& other) {
  min_weight = std::min(min_weight, other.min_weight);
  max_sum_error = std::max(max_sum_error, other.max_sum_error);
  vectors_checked += other.vectors_checked;
}

std::vector<TransformedParams> PersonalizedServer::personalize(const ParamsBoard& uploads) {
  uploads.validate();
  cfg_.check_feasible(uploads.size());
  const Eigen::MatrixXd w = pack_columns(uploads);
  std::vector<TransformedParams> out;
  out.reserve(uploads.size());
  for (std::size_t i = 0; i < uploads.size(); ++i) {
    const WeightVector wv = weights_from_packed(w, i, cfg_);
    audit_.record(wv);
    out.push_back(TransformedParams::unpack(combine(w, wv)));
  }
  return out;
}

namespace {

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

template <typename T>
T get(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw std::invalid_argument("decode_board: truncated message");
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  pos += sizeof(T);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_board(const ParamsBoard& board) {
  board.validate();
  const auto m = static_cast<std::uint32_t>(board.size());
  const auto dim = static_cast<std::uint32_t>(board.columns.front().dim());
  std::vector<std::uint8_t> out;
  out.reserve(12 + sizeof(double) * m * dim);
  put(out, m);
  put(out, dim);
  put(out, static_cast<std::int32_t>(board.iteration));
  for (const auto& c : board.columns) {
    const Eigen::VectorXd w = c.packed();
    for (Eigen::Index k = 0; k < w.size(); ++k) put(out, w(k));
  }
  return out;
}

ParamsBoard decode_board(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  const auto m = get<std::uint32_t>(bytes, pos);
  const auto dim = get<std::uint32_t>(bytes, pos);
  ParamsBoard board;
  board.iteration = get<std::int32_t>(bytes, pos);
  if (dim < 2) throw std::invalid_argument("decode_board: parameter dimension < 2");
  board.columns.reserve(m);
  for (std::uint32_t i = 0; i < m; ++i) {
    Eigen::VectorXd w(dim);
    for (std::uint32_t k = 0; k < dim; ++k) w(k) = get<double>(bytes, pos);
    board.columns.push_back(TransformedParams::unpack(w));
  }
  if (pos != bytes.size()) throw std::invalid_argument("decode_board: trailing bytes");
  return board;
}

ParamsBoard Channel::transmit(const ParamsBoard& board) {
  const auto bytes = encode_board(board);
  ++messages_;
  floats_ += (bytes.size() - 12) / sizeof(double);
  return decode_board(bytes);
}

}  // namespace pfl
