#include "contrasum/augment.hpp"

#include <algorithm>

#include "contrasum/errors.hpp"
#include "contrasum/rng.hpp"

namespace contrasum {

AugmentationKind augmentation_kind_from_string(const std::string& s) {
  if (s == "RI" || s == "ri") return AugmentationKind::RI;
  if (s == "RS" || s == "rs") return AugmentationKind::RS;
  if (s == "RD" || s == "rd") return AugmentationKind::RD;
  if (s == "DR" || s == "dr") return AugmentationKind::DR;
  throw ValidationError("unknown augmentation kind '" + s + "'");
}

std::string to_string(AugmentationKind kind) {
  switch (kind) {
    case AugmentationKind::RI: return "RI";
    case AugmentationKind::RS: return "RS";
    case AugmentationKind::RD: return "RD";
    case AugmentationKind::DR: return "DR";
  }
  throw ContractError("invalid AugmentationKind");
}

namespace {

void apply_once(AugmentationKind kind, std::vector<std::string>& s, Rng& rng) {
  const size_t k = s.size();
  switch (kind) {
    case AugmentationKind::RI: {
      const size_t src = static_cast<size_t>(rng.next_below(k));
      const size_t pos = static_cast<size_t>(rng.next_below(k + 1));
      std::string copy = s[src];
      s.insert(s.begin() + static_cast<std::ptrdiff_t>(pos), std::move(copy));
      break;
    }
    case AugmentationKind::RS: {
      if (k == 1) return;
      const size_t i = static_cast<size_t>(rng.next_below(k));
      size_t j = static_cast<size_t>(rng.next_below(k - 1));
      if (j >= i) ++j;  // map 0..k-2 onto 0..k-1 minus i
      std::swap(s[i], s[j]);
      break;
    }
    case AugmentationKind::RD: {
      if (k == 1) return;
      const size_t i = static_cast<size_t>(rng.next_below(k));
      s.erase(s.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
    case AugmentationKind::DR: {
      const size_t p = static_cast<size_t>(rng.next_below(k));
      std::rotate(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(p),
                  s.end());
      break;
    }
  }
}

}  // namespace

SentenceDocument apply(const AugmentationSpec& spec,
                       const SentenceDocument& doc) {
  if (spec.n < 1) {
    throw ContractError("augment: n must be >= 1, got " +
                        std::to_string(spec.n));
  }
  if (doc.sentences.empty()) {
    throw ContractError("augment: empty document");
  }
  SentenceDocument out = doc;
  Rng rng(spec.seed);
  for (int step = 0; step < spec.n; ++step) {
    apply_once(spec.kind, out.sentences, rng);
  }
  return out;
}

AugmentedPair make_pair(const AugmentationSpec& a1, const AugmentationSpec& a2,
                        const SentenceDocument& doc, const std::string& summary,
                        size_t idx) {
  if (summary.empty()) throw ContractError("make_pair: empty summary");
  AugmentationSpec v1 = a1;
  v1.seed = derive_seed(a1.seed, idx, 0);
  AugmentationSpec v2 = a2;
  v2.seed = derive_seed(a2.seed, idx, 1);
  AugmentedPair pair;
  pair.first = apply(v1, doc);
  pair.second = apply(v2, doc);
  pair.source_index = idx;
  pair.target_summary = summary;
  return pair;
}

}  // namespace contrasum
