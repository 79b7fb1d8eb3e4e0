// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#include "sglab/metrics.hpp"

#include <algorithm>

#include "sglab/errors.hpp"

namespace sglab {

std::vector<int> match_triplets(const std::vector<RankedTriplet>& preds,
                                const std::vector<Relation>& gt,
                                const std::vector<int>& gt_labels, bool require_labels) {
  std::vector<int> hit_rank(gt.size(), -1);
  std::vector<char> taken(gt.size(), 0);
  for (std::size_t r = 0; r < preds.size(); ++r) {
    const RankedTriplet& p = preds[r];
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (taken[g]) continue;
      const Relation& t = gt[g];
      if (p.subject != t.subject || p.object != t.object || p.predicate != t.predicate) continue;
      if (require_labels) {
        if (p.subject_label != gt_labels[static_cast<std::size_t>(t.subject)] ||
            p.object_label != gt_labels[static_cast<std::size_t>(t.object)]) {
          continue;
        }
      }
      taken[g] = 1;
      hit_rank[g] = static_cast<int>(r) + 1;
      break;  // each prediction matches at most one GT triplet
    }
  }
  return hit_rank;
}

double recall_at_k(const std::vector<SceneHits>& scenes, int k) {
  if (k < 1) throw UsageError("recall_at_k: K must be >= 1");
  double sum = 0.0;
  int counted = 0;
  for (const SceneHits& s : scenes) {
    if (s.gt_predicate.empty()) continue;
    int hit = 0;
    for (std::size_t g = 0; g < s.gt_predicate.size(); ++g) {
      if (s.hit_rank[g] > 0 && s.hit_rank[g] <= k) ++hit;
    }
    sum += static_cast<double>(hit) / static_cast<double>(s.gt_predicate.size());
    ++counted;
  }
  if (counted == 0) throw UsageError("recall_at_k: split has no GT triplets");
  return sum / counted;
}

double mean_recall_at_k(const std::vector<SceneHits>& scenes, int k, int num_predicates) {
  if (k < 1) throw UsageError("mean_recall_at_k: K must be >= 1");
  std::vector<long> total(static_cast<std::size_t>(num_predicates), 0);
  std::vector<long> hit(static_cast<std::size_t>(num_predicates), 0);
  for (const SceneHits& s : scenes) {
    for (std::size_t g = 0; g < s.gt_predicate.size(); ++g) {
      int c = s.gt_predicate[g];
      if (c < 0 || c >= num_predicates) {
        throw UsageError("mean_recall_at_k: predicate id out of range");
      }
      ++total[static_cast<std::size_t>(c)];
      if (s.hit_rank[g] > 0 && s.hit_rank[g] <= k) ++hit[static_cast<std::size_t>(c)];
    }
  }
  double sum = 0.0;
  int classes = 0;
  for (int c = 0; c < num_predicates; ++c) {
    if (total[static_cast<std::size_t>(c)] == 0) continue;  // absent classes excluded
    sum += static_cast<double>(hit[static_cast<std::size_t>(c)]) /
           static_cast<double>(total[static_cast<std::size_t>(c)]);
    ++classes;
  }
  if (classes == 0) throw UsageError("mean_recall_at_k: split has no GT triplets");
  return sum / classes;
}

}  // namespace sglab
