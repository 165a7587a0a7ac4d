#include "modhtan/network.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "modhtan/errors.hpp"
#include "text_format.hpp"

namespace modhtan {

Eigen::Index MlpModel::parameter_count() const {
  return params.W1.size() + params.b1.size() + params.W2.size() + params.b2.size();
}

Vector flatten(const MlpParameters& p) {
  Vector theta(p.W1.size() + p.b1.size() + p.W2.size() + p.b2.size());
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < p.W1.rows(); ++r)
    for (Eigen::Index c = 0; c < p.W1.cols(); ++c) theta[k++] = p.W1(r, c);
  for (Eigen::Index r = 0; r < p.b1.size(); ++r) theta[k++] = p.b1[r];
  for (Eigen::Index r = 0; r < p.W2.rows(); ++r)
    for (Eigen::Index c = 0; c < p.W2.cols(); ++c) theta[k++] = p.W2(r, c);
  for (Eigen::Index r = 0; r < p.b2.size(); ++r) theta[k++] = p.b2[r];
  return theta;
}

Vector MlpModel::flatten() const { return modhtan::flatten(params); }

void MlpModel::assign(const Vector& theta) {
  if (theta.size() != parameter_count())
    throw std::invalid_argument("MlpModel::assign: parameter vector has wrong length");
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < params.W1.rows(); ++r)
    for (Eigen::Index c = 0; c < params.W1.cols(); ++c) params.W1(r, c) = theta[k++];
  for (Eigen::Index r = 0; r < params.b1.size(); ++r) params.b1[r] = theta[k++];
  for (Eigen::Index r = 0; r < params.W2.rows(); ++r)
    for (Eigen::Index c = 0; c < params.W2.cols(); ++c) params.W2(r, c) = theta[k++];
  for (Eigen::Index r = 0; r < params.b2.size(); ++r) params.b2[r] = theta[k++];
}

MlpModel make_model(Eigen::Index n_in, Eigen::Index n_hidden, Eigen::Index n_out,
                    ActivationKind hidden_kind) {
  if (n_in < 1 || n_hidden < 1 || n_out < 1)
    throw std::invalid_argument("make_model: dimensions must be >= 1");
  validate(hidden_kind);
  MlpModel model;
  model.params.W1 = Matrix::Zero(n_hidden, n_in);
  model.params.b1 = Vector::Zero(n_hidden);
  model.params.W2 = Matrix::Zero(n_out, n_hidden);
  model.params.b2 = Vector::Zero(n_out);
  model.hidden_kind = std::move(hidden_kind);
  return model;
}

MlpModel nguyen_widrow_init(Eigen::Index n_in, Eigen::Index n_hidden, Eigen::Index n_out,
                            ActivationKind hidden_kind, std::uint64_t seed) {
  MlpModel model = make_model(n_in, n_hidden, n_out, std::move(hidden_kind));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Real> unit(-1, 1);
  std::uniform_real_distribution<Real> half(-0.5L, 0.5L);

  const Real beta = 0.7L * std::pow(static_cast<Real>(n_hidden), 1 / static_cast<Real>(n_in));
  auto& p = model.params;
  for (Eigen::Index h = 0; h < n_hidden; ++h) {
    Real norm = 0;
    while (norm == 0) {
      for (Eigen::Index i = 0; i < n_in; ++i) p.W1(h, i) = unit(rng);
      norm = p.W1.row(h).norm();
    }
    p.W1.row(h) *= beta / norm;
  }
  for (Eigen::Index h = 0; h < n_hidden; ++h) p.b1[h] = beta * unit(rng);
  for (Eigen::Index o = 0; o < n_out; ++o)
    for (Eigen::Index h = 0; h < n_hidden; ++h) p.W2(o, h) = half(rng);
  for (Eigen::Index o = 0; o < n_out; ++o) p.b2[o] = half(rng);
  return model;
}

ForwardCache forward(const MlpModel& model, const Matrix& X) {
  if (X.cols() != model.n_in())
    throw std::invalid_argument("forward: input width does not match the model");
  const auto& p = model.params;
  const Eigen::Index n = X.rows();
  const Eigen::Index hidden = model.n_hidden();

  ForwardCache cache;
  cache.pre_activations = (X * p.W1.transpose()).rowwise() + p.b1.transpose();
  cache.activations.resize(n, hidden);
  cache.gradients.resize(n, hidden);
  cache.offsets.assign(static_cast<std::size_t>(hidden), std::nullopt);

  const auto count = static_cast<std::size_t>(n);
  for (Eigen::Index h = 0; h < hidden; ++h) {
    // Columns of a column-major matrix are contiguous.
    std::span<const Real> column(cache.pre_activations.col(h).data(), count);
    std::span<Real> values(cache.activations.col(h).data(), count);
    std::span<Real> grads(cache.gradients.col(h).data(), count);
    if (!cache.pre_activations.col(h).allFinite()) {
      cache.activations.col(h).setConstant(std::nan(""));
      cache.gradients.col(h).setConstant(std::nan(""));
      continue;
    }
    cache.offsets[static_cast<std::size_t>(h)] =
        activate_into(model.hidden_kind, column, values, grads);
  }
  cache.outputs = (cache.activations * p.W2.transpose()).rowwise() + p.b2.transpose();
  return cache;
}

MlpParameters backward(const MlpModel& model, const Matrix& X, const Matrix& T,
                       const ForwardCache& cache) {
  if (T.rows() != X.rows() || T.cols() != model.n_out())
    throw std::invalid_argument("backward: target shape does not match");
  const Real n = static_cast<Real>(X.rows());
  const Matrix residual = (cache.outputs - T) / n;                         // N x O
  const Matrix delta = (residual * model.params.W2).cwiseProduct(cache.gradients);  // N x H

  MlpParameters grad;
  grad.W2 = residual.transpose() * cache.activations;
  grad.b2 = residual.colwise().sum().transpose();
  grad.W1 = delta.transpose() * X;
  grad.b1 = delta.colwise().sum().transpose();
  return grad;
}

ResidualJacobian jacobian(const MlpModel& model, const Matrix& X, const Matrix& T,
                          const ForwardCache& cache) {
  if (T.rows() != X.rows() || T.cols() != model.n_out())
    throw std::invalid_argument("jacobian: target shape does not match");
  const auto& p = model.params;
  const Eigen::Index n = X.rows();
  const Eigen::Index n_in = model.n_in();
  const Eigen::Index hidden = model.n_hidden();
  const Eigen::Index outs = model.n_out();

  const Eigen::Index w1_at = 0;
  const Eigen::Index b1_at = hidden * n_in;
  const Eigen::Index w2_at = b1_at + hidden;
  const Eigen::Index b2_at = w2_at + outs * hidden;

  ResidualJacobian out;
  out.J = Matrix::Zero(n * outs, model.parameter_count());
  out.e.resize(n * outs);
  for (Eigen::Index s = 0; s < n; ++s) {
    for (Eigen::Index o = 0; o < outs; ++o) {
      const Eigen::Index row = s * outs + o;
      out.e[row] = cache.outputs(s, o) - T(s, o);
      for (Eigen::Index h = 0; h < hidden; ++h) {
        const Real upstream = p.W2(o, h) * cache.gradients(s, h);
        for (Eigen::Index i = 0; i < n_in; ++i)
          out.J(row, w1_at + h * n_in + i) = upstream * X(s, i);
        out.J(row, b1_at + h) = upstream;
        out.J(row, w2_at + o * hidden + h) = cache.activations(s, h);
      }
      out.J(row, b2_at + o) = 1;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

void write_row(std::ostream& out, const char* key, const Vector& values) {
  out << key;
  for (Eigen::Index i = 0; i < values.size(); ++i) out << ' ' << detail::exact(values[i]);
  out << '\n';
}

void write_matrix(std::ostream& out, const char* key, const Matrix& m) {
  out << key;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << ' ' << detail::exact(m(r, c));
  out << '\n';
}

void write_kind(std::ostream& out, const ActivationKind& kind) {
  out << "activation " << activation_name(kind) << '\n';
  if (const auto* elu = std::get_if<EluParams>(&kind)) {
    out << "elu.alpha " << detail::exact(elu->alpha) << '\n';
  } else if (const auto* mh = std::get_if<ModHtanParams>(&kind)) {
    out << "modhtan.k_o " << detail::exact(mh->k_o) << '\n';
    out << "modhtan.x_cutoff " << detail::exact(mh->x_cutoff) << '\n';
    if (const auto* fixed = std::get_if<FixedOffset>(&mh->offset)) {
      out << "modhtan.offset_mode fixed\n";
      out << "modhtan.offset " << detail::exact(fixed->value) << '\n';
    } else {
      const auto& adaptive = std::get<AdaptiveOffset>(mh->offset);
      out << "modhtan.offset_mode adaptive\n";
      out << "modhtan.delta " << detail::exact(adaptive.delta) << '\n';
      out << "modhtan.kappa " << detail::exact(adaptive.kappa) << '\n';
    }
    out << "modhtan.rnf_a " << mh->rnf.a << '\n';
    out << "modhtan.rnf_n " << detail::exact(mh->rnf.n) << '\n';
    out << "modhtan.rnf_m " << detail::exact(mh->rnf.m) << '\n';
    out << "modhtan.x_norm_clamp " << detail::exact(mh->x_norm_clamp) << '\n';
    out << "modhtan.center_normalize " << (mh->center_normalize ? "on" : "off") << '\n';
    out << "modhtan.euler_mode "
        << (mh->euler_mode == EulerMode::kConstant ? "constant" : "direct") << '\n';
  }
}

}  // namespace

void save_model(const MlpModel& model, std::ostream& out) {
  out << "n_in " << model.n_in() << '\n';
  out << "n_hidden " << model.n_hidden() << '\n';
  out << "n_out " << model.n_out() << '\n';
  write_kind(out, model.hidden_kind);
  write_matrix(out, "W1", model.params.W1);
  write_row(out, "b1", model.params.b1);
  write_matrix(out, "W2", model.params.W2);
  write_row(out, "b2", model.params.b2);
}

MlpModel load_model(std::istream& in) {
  std::map<std::string, std::vector<std::string>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    std::vector<std::string> values;
    for (std::string v; fields >> v;) values.push_back(v);
    if (values.empty()) throw ParseError(line_no, "key '" + key + "' has no value");
    entries[key] = std::move(values);
  }

  auto text = [&](const std::string& key) -> const std::string& {
    auto it = entries.find(key);
    if (it == entries.end()) throw std::runtime_error("model file: missing key '" + key + "'");
    return it->second.front();
  };
  auto number = [&](const std::string& key) { return detail::parse_real(text(key)); };
  auto dimension = [&](const std::string& key) {
    return static_cast<Eigen::Index>(std::stoll(text(key)));
  };

  ActivationKind kind;
  const std::string name = text("activation");
  if (name == "elu") {
    kind = EluParams{number("elu.alpha")};
  } else if (name == "modhtan") {
    ModHtanParams p;
    p.k_o = number("modhtan.k_o");
    p.x_cutoff = number("modhtan.x_cutoff");
    if (text("modhtan.offset_mode") == "fixed")
      p.offset = FixedOffset{number("modhtan.offset")};
    else
      p.offset = AdaptiveOffset{number("modhtan.delta"), number("modhtan.kappa")};
    p.rnf.a = std::stoull(text("modhtan.rnf_a"));
    p.rnf.n = number("modhtan.rnf_n");
    p.rnf.m = number("modhtan.rnf_m");
    p.x_norm_clamp = number("modhtan.x_norm_clamp");
    p.center_normalize = text("modhtan.center_normalize") == "on";
    p.euler_mode = text("modhtan.euler_mode") == "direct" ? EulerMode::kDirect
                                                           : EulerMode::kConstant;
    kind = p;
  } else {
    kind = parse_activation(name);
  }

  MlpModel model = make_model(dimension("n_in"), dimension("n_hidden"), dimension("n_out"), kind);
  const auto& mp = model.params;
  const std::pair<const char*, Eigen::Index> blocks[] = {
      {"W1", mp.W1.size()}, {"b1", mp.b1.size()}, {"W2", mp.W2.size()}, {"b2", mp.b2.size()}};
  Vector theta(model.parameter_count());
  Eigen::Index k = 0;
  for (const auto& [key, size] : blocks) {
    auto it = entries.find(key);
    if (it == entries.end()) throw std::runtime_error(std::string("model file: missing ") + key);
    if (static_cast<Eigen::Index>(it->second.size()) != size)
      throw std::runtime_error(std::string("model file: wrong value count for ") + key);
    for (const auto& v : it->second) theta[k++] = detail::parse_real(v);
  }
  model.assign(theta);
  return model;
}

}  // namespace modhtan
