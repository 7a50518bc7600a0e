#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "senti/errors.hpp"
#include "senti/rng.hpp"
#include "senti/sparse_vector.hpp"
#include "senti/vocabulary.hpp"

namespace senti {

struct TrainConfig {
  double lambda = 0.0003;
  int max_epochs = 5;
  std::uint64_t seed = 0;
  double scale_floor = 1e-9;

  void validate() const {
    if (!(lambda > 0)) throw ConfigError("lambda must be > 0");
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (!(scale_floor > 0 && scale_floor < 1))
      throw ConfigError("scale_floor must be in (0, 1)");
  }
};

// Linear SVM weights with a lazy global scale: the effective weight of term i
// is scale * weights[i], so the multiplicative shrink each step is O(1).
struct LinearModel {
  std::unordered_map<TermId, double> weights;
  double scale = 1.0;
  double lambda = 0.0003;
  std::int64_t step_count = 0;
  FeatureMode feature_mode = FeatureMode::bag_of_words;
  std::uint64_t seed = 0;
  int epochs_run = 0;
  std::string vocab_hash;

  double effective_weight(TermId id) const {
    auto it = weights.find(id);
    return it == weights.end() ? 0.0 : scale * it->second;
  }

  void fold_scale() {
    for (auto& [id, w] : weights) w *= scale;
    scale = 1.0;
  }
};

inline double margin(const LinearModel& model, const SparseVector& x) {
  double dot = 0.0;
  for (const auto& [id, v] : x.entries) {
    auto it = model.weights.find(id);
    if (it != model.weights.end()) dot += it->second * v;
  }
  return model.scale * dot;
}

// One Pegasos step: t = t+1, eta = 1/(t*lambda), shrink by (1 - eta*lambda),
// add eta*y*x on a margin violation (strict "< 1"). The first step has
// eta*lambda = 1, which wipes the initial weights entirely.
inline void step(LinearModel& model, const SparseVector& x, int y,
                 double scale_floor = 1e-9) {
  if (!x.all_finite())
    throw ValidationError("non-finite feature value in training sample");
  model.step_count += 1;
  const double eta = 1.0 / (static_cast<double>(model.step_count) * model.lambda);
  const bool violated = y * margin(model, x) < 1.0;
  const double shrink = 1.0 - eta * model.lambda;
  if (shrink <= 0.0) {  // t == 1 only
    model.weights.clear();
    model.scale = 1.0;
  } else {
    model.scale *= shrink;
  }
  if (violated) {
    const double coef = eta * static_cast<double>(y) / model.scale;
    for (const auto& [id, v] : x.entries) model.weights[id] += coef * v;
  }
  if (model.scale < scale_floor) model.fold_scale();
}

using LabeledVector = std::pair<SparseVector, int>;

inline LinearModel train(const std::vector<LabeledVector>& data,
                         const TrainConfig& config,
                         FeatureMode mode = FeatureMode::bag_of_words,
                         std::string vocab_hash = {}) {
  config.validate();
  if (data.empty()) throw ValidationError("cannot train on empty data");
  LinearModel model;
  model.lambda = config.lambda;
  model.feature_mode = mode;
  model.seed = config.seed;
  model.vocab_hash = std::move(vocab_hash);
  Rng rng(config.seed);
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    for (std::size_t i : rng.permutation(data.size()))
      step(model, data[i].first, data[i].second, config.scale_floor);
    model.epochs_run = epoch;
  }
  return model;
}

inline int predict(const LinearModel& model, const SparseVector& x) {
  return margin(model, x) > 0.0 ? +1 : -1;  // tie at 0 -> -1
}

struct EvalResult {
  double accuracy = 0.0;
  double error = 0.0;
  std::int64_t n_samples = 0;
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
};

inline EvalResult evaluate(const LinearModel& model,
                           const std::vector<LabeledVector>& data) {
  if (data.empty()) throw ValidationError("cannot evaluate on empty data");
  EvalResult r;
  r.n_samples = static_cast<std::int64_t>(data.size());
  for (const auto& [x, y] : data) {
    const int p = predict(model, x);
    if (p == +1)
      (y == +1 ? r.tp : r.fp) += 1;
    else
      (y == -1 ? r.tn : r.fn) += 1;
  }
  r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(r.n_samples);
  r.error = 1.0 - r.accuracy;
  return r;
}

struct SweepRow {
  double lambda = 0.0;
  EvalResult validation;
};

struct SweepResult {
  double best_lambda = 0.0;
  std::vector<SweepRow> table;
};

// One model per lambda, judged on validation accuracy. Ties go to the
// smaller lambda.
inline SweepResult sweep_lambda(const std::vector<LabeledVector>& train_data,
                                const std::vector<LabeledVector>& validation,
                                std::vector<double> grid, TrainConfig config,
                                FeatureMode mode = FeatureMode::bag_of_words,
                                const std::string& vocab_hash = {}) {
  if (grid.empty()) throw ConfigError("lambda grid is empty");
  std::sort(grid.begin(), grid.end());
  SweepResult result;
  double best_acc = -1.0;
  for (double lam : grid) {
    config.lambda = lam;
    LinearModel m = train(train_data, config, mode, vocab_hash);
    SweepRow row{lam, evaluate(m, validation)};
    if (row.validation.accuracy > best_acc) {
      best_acc = row.validation.accuracy;
      result.best_lambda = lam;
    }
    result.table.push_back(row);
  }
  return result;
}

inline std::vector<double> default_lambda_grid() {
  return {1e-5, 3e-5, 1e-4, 0.0003, 1e-3, 3e-3, 1e-2};
}

namespace detail {

inline std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace detail

// Versioned flat file; scale is folded on save so lines hold effective
// weights. Round-trip preserves them exactly (17 significant digits).
inline void save_model(const LinearModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "# senti-model v1\n";
  out << "lambda\t" << detail::fmt_double(model.lambda) << '\n';
  out << "mode\t" << to_string(model.feature_mode) << '\n';
  out << "seed\t" << model.seed << '\n';
  out << "epochs\t" << model.epochs_run << '\n';
  out << "steps\t" << model.step_count << '\n';
  out << "vocab_hash\t" << model.vocab_hash << '\n';
  out << "weights\n";
  std::vector<std::pair<TermId, double>> rows;
  rows.reserve(model.weights.size());
  for (const auto& [id, w] : model.weights)
    rows.emplace_back(id, model.scale * w);
  std::sort(rows.begin(), rows.end());
  for (const auto& [id, w] : rows)
    out << id << '\t' << detail::fmt_double(w) << '\n';
}

inline LinearModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "# senti-model v1")
    throw ValidationError("bad model header in " + path);
  LinearModel model;
  while (std::getline(in, line) && line != "weights") {
    std::istringstream row(line);
    std::string key;
    std::getline(row, key, '\t');
    std::string value;
    std::getline(row, value);
    if (key == "lambda") model.lambda = std::stod(value);
    else if (key == "mode") model.feature_mode = feature_mode_from_string(value);
    else if (key == "seed") model.seed = std::stoull(value);
    else if (key == "epochs") model.epochs_run = std::stoi(value);
    else if (key == "steps") model.step_count = std::stoll(value);
    else if (key == "vocab_hash") model.vocab_hash = value;
    else throw ValidationError("unknown model metadata key: " + key);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    TermId id;
    double w;
    if (!(row >> id >> w)) throw ValidationError("bad weight row: " + line);
    model.weights[id] = w;
  }
  model.scale = 1.0;
  return model;
}

}  // namespace senti
