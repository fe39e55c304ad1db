#include "pfl/cmapss.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Sparse>

#include "pfl/csv.hpp"
#include "pfl/rng.hpp"

namespace pfl::cmapss {

namespace {

constexpr int kColumns = 26;
constexpr int kSensors = 21;

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw std::runtime_error("cmapss: line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<EngineUnit> parse_cmapss(std::istream& in) {
  struct Rows {
    std::vector<int> cycles;
    std::vector<std::array<double, 24>> values;
    std::size_t first_line = 0;
  };
  std::map<int, Rows> grouped;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::vector<std::string> fields;
    for (std::string f; ss >> f;) fields.push_back(f);
    if (fields.empty()) continue;
    if (static_cast<int>(fields.size()) != kColumns)
      parse_error(lineno, "expected 26 columns, got " + std::to_string(fields.size()));
    double nums[kColumns];
    for (int k = 0; k < kColumns; ++k) {
      char* end = nullptr;
      nums[k] = std::strtod(fields[k].c_str(), &end);
      if (end != fields[k].c_str() + fields[k].size() || !std::isfinite(nums[k]))
        parse_error(lineno, "column " + std::to_string(k + 1) + " is not a number");
    }
    if (nums[0] != std::floor(nums[0]) || nums[1] != std::floor(nums[1]) || nums[0] < 1)
      parse_error(lineno, "unit and cycle must be positive integers");
    const int unit = static_cast<int>(nums[0]);
    const int cycle = static_cast<int>(nums[1]);
    Rows& rows = grouped[unit];
    if (rows.cycles.empty()) rows.first_line = lineno;
    const int expected = static_cast<int>(rows.cycles.size()) + 1;
    if (cycle != expected)
      parse_error(lineno, "unit " + std::to_string(unit) + ": cycle " + std::to_string(cycle) +
                              " breaks the contiguous sequence (expected " +
                              std::to_string(expected) + ")");
    rows.cycles.push_back(cycle);
    std::array<double, 24> v;
    std::copy(nums + 2, nums + kColumns, v.begin());
    rows.values.push_back(v);
  }

  std::vector<EngineUnit> units;
  for (auto& [id, rows] : grouped) {
    const auto len = static_cast<Eigen::Index>(rows.cycles.size());
    if (len < 2)
      parse_error(rows.first_line, "unit " + std::to_string(id) + " has fewer than 2 cycles");
    EngineUnit u;
    u.unit_id = id;
    u.cycles = std::move(rows.cycles);
    u.op_settings.resize(len, 3);
    u.sensors.resize(len, kSensors);
    for (Eigen::Index r = 0; r < len; ++r) {
      const auto& v = rows.values[static_cast<std::size_t>(r)];
      for (int k = 0; k < 3; ++k) u.op_settings(r, k) = v[static_cast<std::size_t>(k)];
      for (int k = 0; k < kSensors; ++k) u.sensors(r, k) = v[static_cast<std::size_t>(3 + k)];
    }
    units.push_back(std::move(u));
  }
  return units;
}

std::vector<EngineUnit> parse_cmapss_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cmapss: cannot open data file '" + path + "'");
  return parse_cmapss(in);
}

void serialize_cmapss(std::ostream& out, const std::vector<EngineUnit>& units) {
  out << std::setprecision(17);
  for (const auto& u : units) {
    for (std::size_t r = 0; r < u.cycles.size(); ++r) {
      const auto i = static_cast<Eigen::Index>(r);
      out << u.unit_id << ' ' << u.cycles[r];
      for (int k = 0; k < 3; ++k) out << ' ' << u.op_settings(i, k);
      for (int k = 0; k < kSensors; ++k) out << ' ' << u.sensors(i, k);
      out << '\n';
    }
  }
}

Eigen::MatrixXd select_sensors(const EngineUnit& unit) {
  Eigen::MatrixXd out(unit.sensors.rows(), static_cast<Eigen::Index>(kSelectedSensors.size()));
  for (std::size_t k = 0; k < kSelectedSensors.size(); ++k)
    out.col(static_cast<Eigen::Index>(k)) = unit.sensors.col(kSelectedSensors[k] - 1);
  return out;
}

FailureModes read_labels(std::istream& in) {
  const CsvTable table = read_csv(in);
  const auto ids = table.column("unit_id");
  const auto fm = table.column("fm");
  FailureModes modes;
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (fm[r] != 1.0 && fm[r] != 2.0)
      throw std::runtime_error("labels: line " + std::to_string(r + 2) + ": fm must be 1 or 2");
    if (!modes.emplace(static_cast<int>(ids[r]), static_cast<int>(fm[r])).second)
      throw std::runtime_error("labels: duplicate unit id " +
                               std::to_string(static_cast<int>(ids[r])));
  }
  return modes;
}

FailureModes assign_failure_modes(const std::vector<EngineUnit>& units,
                                  const FailureModes* labels) {
  if (units.empty()) throw std::invalid_argument("assign_failure_modes: no units");
  if (labels) {
    FailureModes out;
    for (const auto& [id, fm] : *labels) {
      const bool known = std::any_of(units.begin(), units.end(),
                                     [id = id](const EngineUnit& u) { return u.unit_id == id; });
      if (!known)
        throw std::invalid_argument("labels reference unknown unit id " + std::to_string(id));
    }
    for (const auto& u : units) {
      const auto it = labels->find(u.unit_id);
      if (it == labels->end())
        throw std::invalid_argument("labels do not cover unit id " + std::to_string(u.unit_id));
      out[u.unit_id] = it->second;
    }
    return out;
  }

  // Work in unit-id order so the result does not depend on input order.
  std::vector<const EngineUnit*> sorted;
  for (const auto& u : units) sorted.push_back(&u);
  std::sort(sorted.begin(), sorted.end(),
            [](const EngineUnit* a, const EngineUnit* b) { return a->unit_id < b->unit_id; });
  const auto n = static_cast<Eigen::Index>(sorted.size());
  Eigen::MatrixXd x(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::MatrixXd s = select_sensors(*sorted[static_cast<std::size_t>(i)]);
    const Eigen::Index tail = std::min<Eigen::Index>(5, s.rows());
    x.row(i) = s.bottomRows(tail).colwise().mean();
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  for (Eigen::Index k = 0; k < 4; ++k) {
    const double sd = std::sqrt(x.col(k).squaredNorm() / static_cast<double>(n));
    if (sd > 1e-12 * std::max(1.0, std::abs(mean(k))))
      x.col(k) /= sd;
    else
      x.col(k).setZero();
  }
  if (n < 2 || x.squaredNorm() == 0.0)
    throw std::runtime_error("assign_failure_modes: end-of-life signatures are identical; "
                             "cannot split into two modes");

  // Seed the centers with the two mutually farthest points reachable from the centroid.
  Eigen::Index a = 0, b = 0;
  x.rowwise().squaredNorm().maxCoeff(&a);
  (x.rowwise() - x.row(a)).rowwise().squaredNorm().maxCoeff(&b);
  Eigen::RowVectorXd c0 = x.row(a), c1 = x.row(b);
  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < 1000; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int k = (x.row(i) - c1).squaredNorm() < (x.row(i) - c0).squaredNorm() ? 1 : 0;
      if (assign[static_cast<std::size_t>(i)] != k) {
        assign[static_cast<std::size_t>(i)] = k;
        changed = true;
      }
    }
    Eigen::RowVectorXd s0 = Eigen::RowVectorXd::Zero(4), s1 = Eigen::RowVectorXd::Zero(4);
    int n0 = 0, n1 = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (assign[static_cast<std::size_t>(i)] == 1) {
        s1 += x.row(i);
        ++n1;
      } else {
        s0 += x.row(i);
        ++n0;
      }
    }
    if (n0 == 0 || n1 == 0)
      throw std::runtime_error("assign_failure_modes: clustering produced an empty mode");
    c0 = s0 / n0;
    c1 = s1 / n1;
    if (!changed) break;
  }
  const auto n1 = std::count(assign.begin(), assign.end(), 1);
  const int larger = n1 > n - n1 ? 1 : 0;
  FailureModes out;
  for (Eigen::Index i = 0; i < n; ++i)
    out[sorted[static_cast<std::size_t>(i)]->unit_id] =
        assign[static_cast<std::size_t>(i)] == larger ? 1 : 2;
  return out;
}

SplineFit smooth_spline_fit(const Eigen::VectorXd& t, const Eigen::VectorXd& z, double rho) {
  if (!(rho >= 0.0) || !std::isfinite(rho))
    throw std::invalid_argument("smooth_spline_fit: rho must be finite and >= 0");
  const Eigen::Index n = t.size();
  if (z.size() != n) throw std::invalid_argument("smooth_spline_fit: size mismatch");
  if (n < 4) throw std::invalid_argument("smooth_spline_fit: need at least 4 points");
  Eigen::VectorXd h(n - 1);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    h(i) = t(i + 1) - t(i);
    if (!(h(i) > 0.0))
      throw std::invalid_argument("smooth_spline_fit: times must be strictly increasing "
                                  "(duplicate or unordered time at index " +
                                  std::to_string(i + 1) + ")");
  }

  const Eigen::Index m = n - 2;
  using Sparse = Eigen::SparseMatrix<double>;
  std::vector<Eigen::Triplet<double>> qt, rt;
  for (Eigen::Index j = 1; j <= m; ++j) {
    qt.emplace_back(j - 1, j - 1, 1.0 / h(j - 1));
    qt.emplace_back(j, j - 1, -1.0 / h(j - 1) - 1.0 / h(j));
    qt.emplace_back(j + 1, j - 1, 1.0 / h(j));
    rt.emplace_back(j - 1, j - 1, (h(j - 1) + h(j)) / 3.0);
    if (j < m) {
      rt.emplace_back(j - 1, j, h(j) / 6.0);
      rt.emplace_back(j, j - 1, h(j) / 6.0);
    }
  }
  Sparse q(n, m), r(m, m);
  q.setFromTriplets(qt.begin(), qt.end());
  r.setFromTriplets(rt.begin(), rt.end());
  const Sparse a = r + rho * Sparse(q.transpose() * q);
  Eigen::SimplicialLDLT<Sparse> solver(a);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("smooth_spline_fit: banded factorization failed");
  const Eigen::VectorXd gamma = solver.solve(q.transpose() * z);

  SplineFit fit;
  fit.knots = t;
  fit.penalty = rho;
  fit.values = z - rho * (q * gamma);
  fit.second = Eigen::VectorXd::Zero(n);
  fit.second.segment(1, m) = gamma;
  return fit;
}

namespace {

Eigen::Index interval_of(const Eigen::VectorXd& knots, double t) {
  const auto* begin = knots.data();
  const auto* end = begin + knots.size();
  auto it = std::upper_bound(begin, end, t);
  auto i = static_cast<Eigen::Index>(it - begin) - 1;
  return std::clamp<Eigen::Index>(i, 0, knots.size() - 2);
}

}  // namespace

double SplineFit::operator()(double t) const {
  const Eigen::Index n = knots.size();
  if (t <= knots(0)) return values(0) + derivative(knots(0)) * (t - knots(0));
  if (t >= knots(n - 1)) return values(n - 1) + derivative(knots(n - 1)) * (t - knots(n - 1));
  const Eigen::Index i = interval_of(knots, t);
  const double h = knots(i + 1) - knots(i);
  const double a = knots(i + 1) - t, b = t - knots(i);
  return second(i) * a * a * a / (6 * h) + second(i + 1) * b * b * b / (6 * h) +
         (values(i) - second(i) * h * h / 6) * a / h +
         (values(i + 1) - second(i + 1) * h * h / 6) * b / h;
}

double SplineFit::derivative(double t) const {
  const Eigen::Index n = knots.size();
  const double tc = std::clamp(t, knots(0), knots(n - 1));
  const Eigen::Index i = interval_of(knots, tc);
  const double h = knots(i + 1) - knots(i);
  const double a = knots(i + 1) - tc, b = tc - knots(i);
  return -second(i) * a * a / (2 * h) + second(i + 1) * b * b / (2 * h) +
         (values(i + 1) - values(i)) / h - (second(i + 1) - second(i)) * h / 6;
}

std::vector<double> default_rho_grid() { return {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2}; }

double select_rho(const Eigen::VectorXd& t, const Eigen::VectorXd& z,
                  const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("select_rho: empty grid");
  constexpr int kFolds = 5;
  const Eigen::Index n = t.size();
  // Too few points to leave a fold out and still fit: take the smoothest candidate.
  if (n - (n + kFolds - 1) / kFolds < 4) return *std::max_element(grid.begin(), grid.end());
  double best_rho = grid.front();
  double best = std::numeric_limits<double>::infinity();
  for (double rho : grid) {
    double sse = 0.0;
    for (int f = 0; f < kFolds; ++f) {
      std::vector<Eigen::Index> keep, held;
      for (Eigen::Index i = 0; i < n; ++i) (i % kFolds == f ? held : keep).push_back(i);
      const SplineFit fit = smooth_spline_fit(t(keep), z(keep), rho);
      for (auto i : held) {
        const double e = fit(t(i)) - z(i);
        sse += e * e;
      }
    }
    if (sse < best || (sse == best && rho > best_rho)) {
      best = sse;
      best_rho = rho;
    }
  }
  return best_rho;
}

Eigen::VectorXd extract_case_features(const EngineUnit& unit, int observed_up_to) {
  if (observed_up_to < 4)
    throw std::invalid_argument("extract_case_features: window shorter than 4 cycles");
  if (observed_up_to > unit.failure_time())
    throw std::invalid_argument("extract_case_features: window exceeds the unit's record");
  const Eigen::MatrixXd s = select_sensors(unit).topRows(observed_up_to);
  const double span = observed_up_to;
  Eigen::VectorXd t(observed_up_to);
  for (int k = 0; k < observed_up_to; ++k) t(k) = unit.cycles[static_cast<std::size_t>(k)] / span;
  Eigen::VectorXd f(1 + 2 * s.cols());
  f(0) = 1.0;
  const auto grid = default_rho_grid();
  for (Eigen::Index c = 0; c < s.cols(); ++c) {
    const Eigen::VectorXd z = s.col(c);
    const SplineFit fit = smooth_spline_fit(t, z, select_rho(t, z, grid));
    f(1 + 2 * c) = fit(1.0);
    f(2 + 2 * c) = fit.derivative(1.0) / span;
  }
  return f;
}

int truncated_length(int failure_time) {
  return static_cast<int>(std::floor(kTruncation * failure_time + 1e-9));
}

FeatureCache build_feature_cache(const std::vector<EngineUnit>& units) {
  FeatureCache cache;
  for (const auto& u : units) {
    const int len = u.failure_time();
    cache.failure_time[u.unit_id] = len;
    cache.full[u.unit_id] = extract_case_features(u, len);
    cache.truncated[u.unit_id] = extract_case_features(u, truncated_length(len));
  }
  return cache;
}

CaseData build_case_split(const FeatureCache& cache, const FailureModes& modes,
                          std::uint64_t seed) {
  std::array<std::vector<int>, 2> by_mode;
  for (const auto& [id, len] : cache.failure_time) {
    const auto it = modes.find(id);
    if (it == modes.end())
      throw std::invalid_argument("build_case_split: no failure mode for unit " +
                                  std::to_string(id));
    by_mode[static_cast<std::size_t>(it->second - 1)].push_back(id);
  }

  CaseData out;
  for (std::size_t fm = 0; fm < 2; ++fm) {
    auto ids = by_mode[fm];
    Rng rng(derive_seed(seed, fm == 0 ? "fm1" : "fm2"));
    std::shuffle(ids.begin(), ids.end(), rng);
    const std::size_t half = (ids.size() + 1) / 2;
    for (std::size_t c = 0; c < 2; ++c) {
      const std::size_t lo = c == 0 ? 0 : half;
      const std::size_t hi = c == 0 ? half : ids.size();
      const std::size_t n_c = hi - lo;
      const auto n_train = static_cast<std::size_t>(std::floor(kTrainFraction * n_c + 1e-9));
      if (n_train == 0)
        throw std::invalid_argument("build_case_split: client " + std::to_string(2 * fm + c + 1) +
                                    " has no training units");
      auto& train = out.split.train_ids[2 * fm + c];
      train.assign(ids.begin() + static_cast<std::ptrdiff_t>(lo),
                   ids.begin() + static_cast<std::ptrdiff_t>(lo + n_train));
      std::sort(train.begin(), train.end());
      out.split.test_pool[fm].insert(out.split.test_pool[fm].end(),
                                     ids.begin() + static_cast<std::ptrdiff_t>(lo + n_train),
                                     ids.begin() + static_cast<std::ptrdiff_t>(hi));
    }
    std::sort(out.split.test_pool[fm].begin(), out.split.test_pool[fm].end());
  }

  // Standardize the non-constant features with statistics of the pooled training units.
  const Eigen::Index dim = cache.full.begin()->second.size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim), sd = Eigen::VectorXd::Ones(dim);
  {
    std::vector<Eigen::VectorXd> rows;
    for (const auto& ids : out.split.train_ids)
      for (int id : ids) rows.push_back(cache.full.at(id));
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows) mean += r / n;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(dim);
    for (const auto& r : rows) var += (r - mean).cwiseAbs2() / n;
    for (Eigen::Index k = 1; k < dim; ++k) sd(k) = var(k) > 0.0 ? std::sqrt(var(k)) : 1.0;
    mean(0) = 0.0;
  }
  const auto standardize = [&](const Eigen::VectorXd& f) -> Eigen::VectorXd {
    return (f - mean).cwiseQuotient(sd);
  };

  for (std::size_t c = 0; c < 4; ++c) {
    const auto& ids = out.split.train_ids[c];
    ClientDataset d;
    d.client_id = "client" + std::to_string(c + 1);
    d.features.resize(static_cast<Eigen::Index>(ids.size()), dim);
    d.responses.resize(static_cast<Eigen::Index>(ids.size()));
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const auto r = static_cast<Eigen::Index>(j);
      d.features.row(r) = standardize(cache.full.at(ids[j])).transpose();
      d.responses(r) = std::log(static_cast<double>(cache.failure_time.at(ids[j])));
    }
    d.validate();
    out.train.push_back(std::move(d));

    const auto& pool = out.split.test_pool[c / 2];
    ClientTest test;
    test.data.client_id = "client" + std::to_string(c + 1);
    test.data.features.resize(static_cast<Eigen::Index>(pool.size()), dim);
    test.data.responses.resize(static_cast<Eigen::Index>(pool.size()));
    for (std::size_t j = 0; j < pool.size(); ++j) {
      const auto r = static_cast<Eigen::Index>(j);
      const int len = cache.failure_time.at(pool[j]);
      const int seen = truncated_length(len);
      test.data.features.row(r) = standardize(cache.truncated.at(pool[j])).transpose();
      test.data.responses(r) = std::log(static_cast<double>(len));
      test.unit_ids.push_back(pool[j]);
      test.observed.push_back(seen);
      test.rul_truth.push_back(len - seen);
    }
    out.test.push_back(std::move(test));
  }
  return out;
}

CaseData build_case_split(const std::vector<EngineUnit>& units, const FailureModes& modes,
                          std::uint64_t seed) {
  return build_case_split(build_feature_cache(units), modes, seed);
}

void write_case_features_csv(std::ostream& out, const ClientDataset& train,
                             const ClientTest& test, const std::vector<int>& train_ids) {
  out << "unit_id,role,y_log";
  for (Eigen::Index k = 1; k < train.features.cols(); ++k) out << ",f" << k;
  out << ",rul_truth\n" << std::setprecision(17);
  for (Eigen::Index r = 0; r < train.rows(); ++r) {
    out << train_ids.at(static_cast<std::size_t>(r)) << ",train," << train.responses(r);
    for (Eigen::Index k = 1; k < train.features.cols(); ++k) out << ',' << train.features(r, k);
    out << ",\n";
  }
  for (Eigen::Index r = 0; r < test.data.rows(); ++r) {
    const auto j = static_cast<std::size_t>(r);
    out << test.unit_ids[j] << ",test," << test.data.responses(r);
    for (Eigen::Index k = 1; k < test.data.features.cols(); ++k)
      out << ',' << test.data.features(r, k);
    out << ',' << test.rul_truth[j] << '\n';
  }
}

}  // namespace pfl::cmapss
