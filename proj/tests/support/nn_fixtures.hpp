#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "symreg/datagen.hpp"
#include "symreg/nn/batch.hpp"
#include "symreg/nn/model.hpp"
#include "symreg/nn/train.hpp"

namespace fixtures {

inline std::vector<symreg::nn::TrainingExample> make_examples(std::size_t n, std::uint64_t seed, int dims = 1,
                                                              int max_ops = 4) {
  auto config = symreg::GeneratorConfig::defaults(dims);
  config.max_operators = max_ops;
  symreg::Generator gen(config);
  std::vector<symreg::nn::TrainingExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(symreg::nn::to_training_example(gen.generate(i, symreg::derive_seed(seed, i)), gen.vocabulary()));
  }
  return out;
}

inline symreg::nn::Batch batch_of(const std::vector<symreg::nn::TrainingExample>& examples,
                                  const symreg::Vocabulary& vocab, int n_variables = 2) {
  std::vector<const symreg::nn::TrainingExample*> ptrs;
  for (const auto& e : examples) ptrs.push_back(&e);
  return symreg::nn::make_batch(ptrs, vocab, n_variables);
}

/// Keeps only a subset of the points so finite-difference checks stay cheap.
inline void thin_points(std::vector<symreg::nn::TrainingExample>& examples, int keep) {
  for (auto& e : examples) {
    const auto n = std::min<Eigen::Index>(keep, e.outputs.size());
    e.inputs.conservativeResize(n, Eigen::NoChange);
    e.outputs.conservativeResize(n);
  }
}

struct GradCheckResult {
  std::size_t checked = 0;
  std::size_t failures = 0;
  double worst = 0.0;
  std::string worst_name;
};

/// Compares every parameter gradient of batch_loss with a central difference
/// in double precision. Relative error uses max(|analytic|, |numeric|, floor).
inline GradCheckResult gradient_check(symreg::nn::Model<double>& model, const symreg::nn::Batch& batch,
                                      double lambda, double tolerance, double step = 1e-5, double floor = 1e-6) {
  using namespace symreg::nn;
  model.params().zero_grad();
  batch_loss(model, batch, lambda, 0.0, nullptr, true);
  GradCheckResult r;
  for (auto* p : model.params().all()) {
    for (std::size_t k = 0; k < p->value.size(); ++k) {
      const double saved = p->value.data[k];
      p->value.data[k] = saved + step;
      const double up = batch_loss(model, batch, lambda, 0.0, nullptr, false).total;
      p->value.data[k] = saved - step;
      const double down = batch_loss(model, batch, lambda, 0.0, nullptr, false).total;
      p->value.data[k] = saved;
      const double numeric = (up - down) / (2 * step);
      const double analytic = p->grad.data[k];
      const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
      ++r.checked;
      if (rel > tolerance) ++r.failures;
      if (rel > r.worst) {
        r.worst = rel;
        r.worst_name = p->name + "[" + std::to_string(k) + "]";
      }
    }
  }
  return r;
}

}  // namespace fixtures
