#include "modhtan/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "modhtan/errors.hpp"
#include "text_format.hpp"

namespace modhtan {

namespace {

std::vector<Real> column_of(const Matrix& m, Eigen::Index c) {
  std::vector<Real> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = m(r, c);
  return out;
}

Dataset take_rows(const Dataset& ds, std::span<const Eigen::Index> rows) {
  Dataset out;
  out.kind = ds.kind;
  out.feature_scale = ds.feature_scale;
  out.target_scale = ds.target_scale;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), ds.X.cols());
  out.T.resize(static_cast<Eigen::Index>(rows.size()), ds.T.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = ds.X.row(rows[i]);
    out.T.row(static_cast<Eigen::Index>(i)) = ds.T.row(rows[i]);
  }
  return out;
}

}  // namespace

std::pair<std::vector<Real>, ScaleParams> linear_scale(std::span<const Real> column, Real lo,
                                                       Real hi) {
  if (column.empty()) throw DomainError("linear_scale: empty column");
  if (!std::all_of(column.begin(), column.end(), [](Real v) { return std::isfinite(v); }))
    throw DomainError("linear_scale: non-finite value");
  const auto [min_it, max_it] = std::minmax_element(column.begin(), column.end());
  ScaleParams params{*min_it, *max_it, lo, hi};
  std::vector<Real> scaled(column.size());
  std::transform(column.begin(), column.end(), scaled.begin(),
                 [&](Real v) { return apply_scale(v, params); });
  return {std::move(scaled), params};
}

Real apply_scale(Real value, const ScaleParams& p) {
  if (p.max == p.min) return (p.lo + p.hi) / 2;
  return p.lo + (value - p.min) * (p.hi - p.lo) / (p.max - p.min);
}

Real unscale(Real scaled, const ScaleParams& p) {
  if (p.max == p.min) return p.min;
  return p.min + (scaled - p.lo) * (p.max - p.min) / (p.hi - p.lo);
}

std::vector<Real> unscale(std::span<const Real> scaled, const ScaleParams& params) {
  std::vector<Real> out(scaled.size());
  std::transform(scaled.begin(), scaled.end(), out.begin(),
                 [&](Real v) { return unscale(v, params); });
  return out;
}

Dataset gen_quadratic(Eigen::Index n, bool random_x, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_quadratic: n must be >= 2");
  std::vector<Real> x(static_cast<std::size_t>(n));
  if (random_x) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<Real> uniform(-1, 1);
    for (auto& v : x) v = uniform(rng);
  } else {
    for (Eigen::Index i = 0; i < n; ++i)
      x[static_cast<std::size_t>(i)] = -1 + 2 * static_cast<Real>(i) / static_cast<Real>(n - 1);
  }
  std::vector<Real> t(x.size());
  std::transform(x.begin(), x.end(), t.begin(), [](Real v) { return v * v - 2; });

  auto [xs, x_params] = linear_scale(x);
  auto [ts, t_params] = linear_scale(t);

  Dataset ds;
  ds.kind = TaskKind::kRegression;
  ds.X.resize(n, 1);
  ds.T.resize(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    ds.X(i, 0) = xs[static_cast<std::size_t>(i)];
    ds.T(i, 0) = ts[static_cast<std::size_t>(i)];
  }
  ds.feature_scale = {x_params};
  ds.target_scale = {t_params};
  return ds;
}

Dataset parse_heart(std::istream& in) {
  std::vector<std::array<Real, kHeartFeatures + 1>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != kHeartFeatures + 1)
      throw ParseError(line_no, "expected 14 fields, found " + std::to_string(fields.size()));
    std::array<Real, kHeartFeatures + 1> row{};
    for (std::size_t i = 0; i < fields.size(); ++i) {
      try {
        row[i] = detail::parse_real(fields[i]);
      } catch (const std::invalid_argument&) {
        throw ParseError(line_no, "field " + std::to_string(i + 1) + " is not a number: '" +
                                      fields[i] + "'");
      }
      if (!std::isfinite(row[i]))
        throw ParseError(line_no, "field " + std::to_string(i + 1) + " is not finite");
    }
    const Real label = row[kHeartFeatures];
    if (label != 1 && label != 2)
      throw LabelDomainError(line_no, "label " + fields.back() + " is outside {1, 2}");
    rows.push_back(row);
  }
  if (rows.empty()) throw ParseError(line_no, "no samples");
  if (static_cast<Eigen::Index>(rows.size()) != kHeartSamples)
    std::cerr << "warning: heart data has " << rows.size() << " samples, expected "
              << kHeartSamples << '\n';

  Dataset ds;
  ds.kind = TaskKind::kBinaryClassification;
  const auto n = static_cast<Eigen::Index>(rows.size());
  ds.X.resize(n, kHeartFeatures);
  ds.T.resize(n, 1);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < kHeartFeatures; ++c) ds.X(r, c) = row[static_cast<std::size_t>(c)];
    ds.T(r, 0) = row[kHeartFeatures] == 2 ? 1 : 0;
  }
  return ds;
}

Dataset load_heart(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open heart data file '" + path.string() + "'");
  return parse_heart(in);
}

std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0 && spec.test_fraction < 1))
    throw std::invalid_argument("split: test_fraction must be in (0, 1)");
  const Eigen::Index n = ds.size();
  // The epsilon keeps exact products such as 0.8 * 270 from rounding up.
  const auto n_train = static_cast<Eigen::Index>(
      std::ceil((1 - spec.test_fraction) * static_cast<Real>(n) - 1e-9L));
  if (n_train < 1 || n_train >= n)
    throw std::invalid_argument("split: both partitions must be non-empty");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(spec.seed);
  std::shuffle(order.begin(), order.end(), rng);

  const std::span<const Eigen::Index> all(order);
  Dataset train = take_rows(ds, all.first(static_cast<std::size_t>(n_train)));
  Dataset test = take_rows(ds, all.subspan(static_cast<std::size_t>(n_train)));

  if (ds.feature_scale.empty()) {
    for (Eigen::Index c = 0; c < ds.X.cols(); ++c) {
      auto [scaled, params] = linear_scale(column_of(train.X, c));
      for (Eigen::Index r = 0; r < train.X.rows(); ++r)
        train.X(r, c) = scaled[static_cast<std::size_t>(r)];
      for (Eigen::Index r = 0; r < test.X.rows(); ++r) test.X(r, c) = apply_scale(test.X(r, c), params);
      train.feature_scale.push_back(params);
    }
    test.feature_scale = train.feature_scale;
  }
  return {std::move(train), std::move(test)};
}

void write_dataset_csv(const Dataset& ds, std::ostream& out) {
  for (Eigen::Index c = 0; c < ds.X.cols(); ++c) out << (c ? ",x" : "x") << (c + 1);
  for (Eigen::Index c = 0; c < ds.T.cols(); ++c) out << ",t" << (c + 1);
  out << '\n';
  for (Eigen::Index r = 0; r < ds.size(); ++r) {
    for (Eigen::Index c = 0; c < ds.X.cols(); ++c)
      out << (c ? "," : "") << detail::compact(ds.X(r, c), 17);
    for (Eigen::Index c = 0; c < ds.T.cols(); ++c) out << ',' << detail::compact(ds.T(r, c), 17);
    out << '\n';
  }
}

}  // namespace modhtan
