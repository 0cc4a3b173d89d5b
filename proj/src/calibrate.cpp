// Copyright 2026 The Perspex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "perspex/calibrate.hpp"

#include <cmath>

#include "perspex/error.hpp"

namespace perspex::calibrate {

using corpus::Label;
using corpus::LabelSet;

std::string_view mode_name(ThresholdMode m) {
  return m == ThresholdMode::kPerClass ? "per_class" : "global";
}

ThresholdMode parse_mode(std::string_view name) {
  if (name == "per_class") return ThresholdMode::kPerClass;
  if (name == "global") return ThresholdMode::kGlobal;
  throw ArgumentError("unknown threshold mode: " + std::string(name));
}

namespace {

std::size_t grid_intervals(double step) {
  if (!(step > 0.0) || step > kGridHigh - kGridLow + 1e-12) {
    throw ArgumentError("threshold step must be in (0, 0.8]");
  }
  const double n = (kGridHigh - kGridLow) / step;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9) throw ArgumentError("threshold step does not divide [0.1, 0.9]");
  return static_cast<std::size_t>(rounded);
}

// With |union| <= 3 every Jaccard
// value times 6 is an integer, so sums compare exactly.
int jaccard6(LabelSet a, LabelSet b) {
  const auto uni = a.unite(b).size();
  if (uni == 0) return 6;
  return static_cast<int>(6 * a.intersect(b).size() / uni);
}

}  // namespace

void ThresholdConfig::validate() const {
  grid_intervals(step);
  for (double t : tau) {
    if (!(t >= kGridLow - 1e-12 && t <= kGridHigh + 1e-12)) {
      throw ArgumentError("threshold outside [0.1, 0.9]: " + std::to_string(t));
    }
  }
}

nlohmann::json to_json(const ThresholdConfig& c) {
  return {{"tau", {{"C", c.tau[0]}, {"E", c.tau[1]}, {"N", c.tau[2]}}},
          {"step", c.step},
          {"mode", mode_name(c.mode)}};
}

ThresholdConfig threshold_config_from_json(const nlohmann::json& j) {
  ThresholdConfig c;
  try {
    const auto& t = j.at("tau");
    c.tau = {t.at("C").get<double>(), t.at("E").get<double>(), t.at("N").get<double>()};
    c.step = j.at("step").get<double>();
    c.mode = parse_mode(j.at("mode").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError(std::string("malformed threshold file: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<double> threshold_grid(double step) {
  const std::size_t n = grid_intervals(step);
  std::vector<double> grid(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    grid[k] = kGridLow + (kGridHigh - kGridLow) * static_cast<double>(k) / static_cast<double>(n);
  }
  return grid;
}

LabelSet predict_label_set(const ClassProbabilities& p, const std::array<double, corpus::kNumLabels>& tau) {
  LabelSet out;
  for (auto l : corpus::kAllLabels) {
    const auto c = static_cast<std::size_t>(l);
    if (p[c] >= tau[c]) out.insert(l);
  }
  if (out.empty()) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < corpus::kNumLabels; ++c) {
      if (p[c] > p[best]) best = c;
    }
    out.insert(static_cast<Label>(best));
  }
  return out;
}

std::vector<LabelSet> predict_all(std::span<const ClassProbabilities> probs,
                                  const std::array<double, corpus::kNumLabels>& tau) {
  std::vector<LabelSet> out;
  out.reserve(probs.size());
  for (const auto& p : probs) out.push_back(predict_label_set(p, tau));
  return out;
}

TuneResult tune_thresholds(std::span<const ClassProbabilities> probs, const corpus::AnnotationTensor& gold,
                           ThresholdMode mode, double step) {
  if (probs.size() != gold.num_instances() * gold.num_annotators()) {
    throw ArgumentError("probability dump does not align with the gold tensor");
  }
  const auto grid = threshold_grid(step);
  const std::size_t g = grid.size();

  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < gold.num_instances(); ++i) {
    for (std::size_t j = 0; j < gold.num_annotators(); ++j) {
      if (gold.observed(i, j)) cells.push_back(i * gold.num_annotators() + j);
    }
  }
  if (cells.empty()) throw ArgumentError("threshold tuning on an empty dev split");

  std::vector<LabelSet> golds;
  golds.reserve(cells.size());
  for (auto cell : cells) {
    golds.push_back(gold.label_set(cell / gold.num_annotators(), cell % gold.num_annotators()));
  }

  long best_score = -1;
  std::array<std::size_t, 3> best_idx{0, 0, 0};
  std::size_t evaluated = 0;
  auto evaluate = [&](std::size_t a, std::size_t b, std::size_t c) {
    const std::array<double, 3> tau{grid[a], grid[b], grid[c]};
    long score = 0;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      score += jaccard6(predict_label_set(probs[cells[k]], tau), golds[k]);
    }
    ++evaluated;
    if (score > best_score) {
      best_score = score;
      best_idx = {a, b, c};
    }
  };
  if (mode == ThresholdMode::kPerClass) {
    for (std::size_t a = 0; a < g; ++a) {
      for (std::size_t b = 0; b < g; ++b) {
        for (std::size_t c = 0; c < g; ++c) evaluate(a, b, c);
      }
    }
  } else {
    for (std::size_t a = 0; a < g; ++a) evaluate(a, a, a);
  }
  const std::size_t expected = mode == ThresholdMode::kPerClass ? g * g * g : g;
  if (evaluated != expected) throw InvariantError("threshold grid was not searched exhaustively");

  TuneResult r;
  r.config.tau = {grid[best_idx[0]], grid[best_idx[1]], grid[best_idx[2]]};
  r.config.step = step;
  r.config.mode = mode;
  r.mean_jaccard = static_cast<double>(best_score) / (6.0 * static_cast<double>(cells.size()));
  r.points_evaluated = evaluated;
  return r;
}

}  // namespace perspex::calibrate
