#pragma once

// Integrated Gradients over any differentiable scalar score, plus a small
// seeded reference model used to produce attributions without a real
// encoder-decoder.

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mtbias/attribution.hpp"
#include "mtbias/error.hpp"
#include "mtbias/rng.hpp"
#include "mtbias/text.hpp"

namespace mtbias {

inline constexpr int kDefaultIgSteps = 16;

// A model maps source embeddings (tokens x width) and a target selector to a
// scalar score with an analytic gradient of the same shape as the input.
template <typename M>
concept DifferentiableScore = requires(const M& m, const Eigen::MatrixXd& x,
                                       const typename M::Target& target) {
  { m.score(x, target) } -> std::convertible_to<double>;
  { m.gradient(x, target) } -> std::convertible_to<Eigen::MatrixXd>;
};

// (x - x') * (1/m) * sum_{k=1..m} grad F(x' + (k/m)(x - x')).
template <DifferentiableScore Model>
Eigen::MatrixXd integrated_gradients(const Model& model, const Eigen::MatrixXd& input,
                                     const Eigen::MatrixXd& baseline, int steps,
                                     const typename Model::Target& target) {
  if (steps <= 0) throw DomainError("integrated gradients needs at least one step");
  if (input.rows() != baseline.rows() || input.cols() != baseline.cols()) {
    throw DomainError("input and baseline shapes differ");
  }
  if (!std::isfinite(model.score(input, target)) || !std::isfinite(model.score(baseline, target))) {
    throw DomainError("model score is not finite");
  }
  const Eigen::MatrixXd delta = input - baseline;
  Eigen::MatrixXd grad_sum = Eigen::MatrixXd::Zero(input.rows(), input.cols());
  for (int k = 1; k <= steps; ++k) {
    const double alpha = static_cast<double>(k) / steps;
    grad_sum += model.gradient(baseline + alpha * delta, target);
  }
  if (!grad_sum.allFinite()) throw DomainError("gradient is not finite");
  return delta.cwiseProduct(grad_sum) / static_cast<double>(steps);
}

template <DifferentiableScore Model>
Eigen::MatrixXd integrated_gradients(const Model& model, const Eigen::MatrixXd& input, int steps,
                                     const typename Model::Target& target) {
  return integrated_gradients(model, input, Eigen::MatrixXd::Zero(input.rows(), input.cols()),
                              steps, target);
}

// F(x) = sum w .* x
struct LinearModel {
  using Target = int;  // unused
  Eigen::MatrixXd weights;

  double score(const Eigen::MatrixXd& x, const Target&) const { return weights.cwiseProduct(x).sum(); }
  Eigen::MatrixXd gradient(const Eigen::MatrixXd&, const Target&) const { return weights; }
};

struct ReferenceModelShape {
  std::size_t embedding_width = 8;
  std::size_t hidden_units = 16;
  std::size_t max_positions = 64;
  double input_scale = 1.0;
};

// One hidden tanh layer over position-specific projections:
//
//   F_v(x) = v . tanh(sum_i W_i x_i + b)
//
// where v is the output vector of the target token. Every parameter,
// including token embeddings, is a pure function of the seed, so the model
// needs no storage beyond the position weights and stays immutable.
class ReferenceModel {
 public:
  using Target = Eigen::VectorXd;

  explicit ReferenceModel(std::uint64_t seed, ReferenceModelShape shape = {})
      : seed_(seed), shape_(shape) {
    if (shape.embedding_width == 0 || shape.hidden_units == 0 || shape.max_positions == 0) {
      throw DomainError("reference model dimensions must be positive");
    }
    // Linear-layer default init over the flattened input: U(±1/sqrt(fan_in)).
    const double w_scale =
        1.0 / std::sqrt(static_cast<double>(shape.max_positions * shape.embedding_width));
    Rng rng(derive_seed(seed, 1));
    weights_.reserve(shape.max_positions);
    for (std::size_t p = 0; p < shape.max_positions; ++p) {
      weights_.push_back(uniform_matrix(rng, shape.hidden_units, shape.embedding_width, w_scale));
    }
    bias_ = uniform_matrix(rng, shape.hidden_units, 1, w_scale);
  }

  std::uint64_t seed() const { return seed_; }
  const ReferenceModelShape& shape() const { return shape_; }

  Eigen::VectorXd embed(std::string_view token) const {
    Rng rng(derive_seed(seed_ ^ fnv1a(token), 2));
    return uniform_matrix(rng, shape_.embedding_width, 1, shape_.input_scale);
  }

  Eigen::MatrixXd embed_all(const std::vector<std::string>& tokens) const {
    check_length(tokens.size());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(tokens.size()),
                      static_cast<Eigen::Index>(shape_.embedding_width));
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = embed(tokens[i]).transpose();
    }
    return x;
  }

  // Output vector for a target token at a target position.
  Target target(std::string_view token, std::size_t position) const {
    Rng rng(derive_seed(seed_ ^ fnv1a(token), 3 + position));
    return uniform_matrix(rng, shape_.hidden_units, 1, 1.0);
  }

  double score(const Eigen::MatrixXd& x, const Target& v) const {
    return v.dot(pre_activation(x).array().tanh().matrix());
  }

  Eigen::MatrixXd gradient(const Eigen::MatrixXd& x, const Target& v) const {
    const Eigen::VectorXd act = pre_activation(x).array().tanh().matrix();
    const Eigen::VectorXd upstream = v.cwiseProduct((1.0 - act.array().square()).matrix());
    Eigen::MatrixXd grad(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      grad.row(i) = (weights_[static_cast<std::size_t>(i)].transpose() * upstream).transpose();
    }
    return grad;
  }

 private:
  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001B3ULL;
    }
    return h;
  }

  // Uniform in [-scale, scale) from the top 53 bits of each draw.
  static Eigen::MatrixXd uniform_matrix(Rng& rng, std::size_t rows, std::size_t cols,
                                        double scale) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const double u = static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
        m(r, c) = (2.0 * u - 1.0) * scale;
      }
    }
    return m;
  }

  void check_length(std::size_t n) const {
    if (n > shape_.max_positions) {
      throw DomainError("sequence of " + std::to_string(n) + " tokens exceeds the model's " +
                        std::to_string(shape_.max_positions) + " positions");
    }
  }

  Eigen::VectorXd pre_activation(const Eigen::MatrixXd& x) const {
    check_length(static_cast<std::size_t>(x.rows()));
    if (static_cast<std::size_t>(x.cols()) != shape_.embedding_width) {
      throw DomainError("embedding width mismatch");
    }
    Eigen::VectorXd z = bias_;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      z += weights_[static_cast<std::size_t>(i)] * x.row(i).transpose();
    }
    return z;
  }

  std::uint64_t seed_;
  ReferenceModelShape shape_;
  std::vector<Eigen::MatrixXd> weights_;
  Eigen::VectorXd bias_;
};

struct Tokenization {
  std::vector<std::string> tokens;
  std::vector<std::size_t> word_map;
};

// Splits every whitespace word into pieces of at most `piece` code points, so
// long words yield several sub-tokens mapped to the same word.
inline Tokenization subword_tokenize(std::string_view text, std::size_t piece = 4) {
  Tokenization out;
  const auto ws = words(text);
  for (std::size_t w = 0; w < ws.size(); ++w) {
    const std::string& word = ws[w];
    std::size_t start = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < word.size();) {
      const auto cp = detail::decode_at(word, i);
      i = cp.end;
      if (++count == piece || i == word.size()) {
        out.tokens.push_back(word.substr(start, i - start));
        out.word_map.push_back(w);
        start = i;
        count = 0;
      }
    }
  }
  return out;
}

// Full S_r x T_r x h tensor for one translation pair, zero baseline.
inline AttributionTensor attribute_with_reference(const ReferenceModel& model,
                                                  std::string instance_id,
                                                  std::string_view source,
                                                  std::string_view translation,
                                                  int steps = kDefaultIgSteps) {
  auto src = subword_tokenize(source);
  auto tgt = subword_tokenize(translation);
  if (src.tokens.empty() || tgt.tokens.empty()) {
    throw DomainError("instance " + instance_id + ": empty source or translation");
  }
  const Eigen::MatrixXd x = model.embed_all(src.tokens);
  AttributionTensor tensor;
  tensor.instance_id = std::move(instance_id);
  tensor.hidden_size = model.shape().embedding_width;
  tensor.scores.resize(src.tokens.size() * tgt.tokens.size() * tensor.hidden_size);
  tensor.source_tokens = std::move(src.tokens);
  tensor.target_tokens = std::move(tgt.tokens);
  tensor.source_word_map = std::move(src.word_map);
  tensor.target_word_map = std::move(tgt.word_map);

  for (std::size_t t = 0; t < tensor.target_len(); ++t) {
    const auto target = model.target(tensor.target_tokens[t], t);
    const Eigen::MatrixXd slice = integrated_gradients(model, x, steps, target);
    for (std::size_t s = 0; s < tensor.source_len(); ++s) {
      for (std::size_t d = 0; d < tensor.hidden_size; ++d) {
        tensor.at(s, t, d) =
            static_cast<float>(slice(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(d)));
      }
    }
  }
  return tensor;
}

}  // namespace mtbias
