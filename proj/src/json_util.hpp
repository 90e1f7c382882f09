#pragma once

#include <json.hpp>

#include "hice/scoring.hpp"

namespace hice::detail {

/// Breakdown as an ordered JSON object; absent optional terms are omitted.
inline nlohmann::ordered_json breakdown_to_json(const ScoreBreakdown& b) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  out["g_itc"] = b.g_itc;
  out["l_itc_precision"] = b.l_itc_precision;
  out["l_itc_recall"] = b.l_itc_recall;
  out["l_itc"] = b.l_itc;
  if (b.g_ttc) out["g_ttc"] = *b.g_ttc;
  if (b.l_ttc_precision) out["l_ttc_precision"] = *b.l_ttc_precision;
  if (b.l_ttc_recall) out["l_ttc_recall"] = *b.l_ttc_recall;
  if (b.l_ttc) out["l_ttc"] = *b.l_ttc;
  out["hice"] = b.hice;
  if (b.ref_hice) out["ref_hice"] = *b.ref_hice;
  return out;
}

}  // namespace hice::detail
