#pragma once

#include <cstdint>
#include <string>

#include "contrasum/corpus.hpp"

namespace contrasum {

// The four sentence-level document augmentations.
enum class AugmentationKind { RI, RS, RD, DR };

AugmentationKind augmentation_kind_from_string(const std::string& s);
std::string to_string(AugmentationKind kind);

struct AugmentationSpec {
  AugmentationKind kind = AugmentationKind::RI;
  int n = 1;            // sequential applications, re-drawing each time
  uint64_t seed = 0;    // seeds one draw stream shared across the n steps
};

// Two augmented views of one source document plus its original summary.
struct AugmentedPair {
  SentenceDocument first;
  SentenceDocument second;
  size_t source_index = 0;
  std::string target_summary;
};

// Applies spec.kind n times in sequence, drawing indices from a single
// deterministic stream seeded by spec.seed. One application on a k-sentence
// document:
//   RI: duplicate a uniform sentence (first draw, 0..k-1) and insert the copy
//       at a uniform position (second draw, 0..k); length k+1.
//   RS: swap two distinct uniform indices (first draw 0..k-1; second draw
//       0..k-2, bumped past the first); no-op with no draws when k = 1.
//   RD: delete a uniform index (one draw); no-op with no draws when k = 1.
//   DR: rotate so the uniform pivot (one draw, 0..k-1) becomes the first
//       sentence: [s_p.. , s_0..s_{p-1}].
SentenceDocument apply(const AugmentationSpec& spec,
                       const SentenceDocument& doc);

// Builds the positive pair for source document idx: each view runs its spec
// with a per-view seed derived as derive_seed(spec.seed, idx, view) where
// view is 0 for `first` and 1 for `second`, so epochs are reproducible while
// the two views draw from decorrelated streams.
AugmentedPair make_pair(const AugmentationSpec& a1, const AugmentationSpec& a2,
                        const SentenceDocument& doc, const std::string& summary,
                        size_t idx);

}  // namespace contrasum
