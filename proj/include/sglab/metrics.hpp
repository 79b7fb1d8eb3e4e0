// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "sglab/scene.hpp"

namespace sglab {

struct RankedTriplet {
  int subject = 0;
  int object = 0;
  int predicate = 0;
  int subject_label = 0;
  int object_label = 0;
  double score = 0.0;
};

// Walks predictions in rank order and matches each against at most one not yet
// matched GT triplet with the same (subject, predicate, object) — and, when
// `require_labels` is set (SGCls), correct subject/object labels. Returns the
// 1-based rank at which each GT triplet was hit, or -1.
std::vector<int> match_triplets(const std::vector<RankedTriplet>& preds,
                                const std::vector<Relation>& gt,
                                const std::vector<int>& gt_labels, bool require_labels);

// Per-scene matching outcome: the predicate class and hit rank of each GT triplet.
struct SceneHits {
  std::vector<int> gt_predicate;
  std::vector<int> hit_rank;  // -1 = missed
};

// R@K: fraction of GT triplets hit within the top K, averaged over scenes
// (scenes without GT are skipped). Throws if the split has no GT at all.
double recall_at_k(const std::vector<SceneHits>& scenes, int k);

// mR@K: recall per predicate class with instances pooled across the split,
// averaged over the classes that occur at least once.
double mean_recall_at_k(const std::vector<SceneHits>& scenes, int k, int num_predicates);

}  // namespace sglab
