#include "hice/report.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "hice/errors.hpp"
#include "json_util.hpp"
#include "hice/similarity.hpp"

namespace hice {

namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string escape_cell(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out += ' ';
    else out.push_back(c);
  }
  return out;
}

double number_at(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw SchemaError(std::string("report: missing numeric field \"") + key + "\"");
  }
  return it->get<double>();
}

std::optional<double> optional_number(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  if (!it->is_number()) throw SchemaError(std::string("report: field \"") + key + "\" must be a number");
  return it->get<double>();
}

std::string string_at(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw SchemaError(std::string("report: missing string field \"") + key + "\"");
  }
  return it->get<std::string>();
}

}  // namespace

InterpretReport build_report(const EvalBundle& bundle, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw InvalidArgumentError("report threshold must lie strictly between 0 and 1");
  }
  const SimMatrix s = local_itc_matrix(bundle);

  InterpretReport report;
  report.bundle_id = bundle.bundle_id;
  report.threshold = threshold;
  report.breakdown = bundle.has_references() ? ref_hice_score(bundle) : hice_score(bundle);

  const auto column_best = s.column_max();
  for (std::size_t m = 0; m < column_best.size(); ++m) {
    PhraseVerdict v;
    v.phrase_index = m;
    v.text = bundle.candidate.phrases[m].text;
    v.score = column_best[m];
    v.flag = v.score > threshold ? PhraseFlag::correct : PhraseFlag::incorrect;
    report.phrases.push_back(std::move(v));
  }

  for (std::size_t n = 0; n < s.rows(); ++n) {
    const auto row = s.row(n);
    std::size_t best = 0;
    for (std::size_t m = 1; m < row.size(); ++m) {
      if (row[m] > row[best]) best = m;
    }
    RegionVerdict v;
    v.region_id = bundle.regions[n].region_id;
    v.score = row[best];
    v.flag = v.score > threshold ? RegionFlag::mentioned : RegionFlag::unmentioned;
    if (v.flag == RegionFlag::mentioned) v.matched_phrase_index = best;
    report.regions.push_back(std::move(v));
  }
  return report;
}

std::string_view to_string(ReportFormat format) noexcept {
  return format == ReportFormat::structured ? "structured" : "markdown";
}

std::optional<ReportFormat> parse_report_format(std::string_view name) noexcept {
  if (name == "structured") return ReportFormat::structured;
  if (name == "markdown") return ReportFormat::markdown;
  return std::nullopt;
}

std::string_view to_string(PhraseFlag flag) noexcept {
  return flag == PhraseFlag::correct ? "correct" : "incorrect";
}

std::string_view to_string(RegionFlag flag) noexcept {
  return flag == RegionFlag::mentioned ? "mentioned" : "unmentioned";
}

std::string render_report(const InterpretReport& report, ReportFormat format) {
  if (format == ReportFormat::structured) {
    ordered_json out = ordered_json::object();
    out["bundle_id"] = report.bundle_id;
    out["threshold"] = report.threshold;
    out["breakdown"] = detail::breakdown_to_json(report.breakdown);
    ordered_json phrases = ordered_json::array();
    for (const auto& p : report.phrases) {
      ordered_json po = ordered_json::object();
      po["phrase_index"] = p.phrase_index;
      po["text"] = p.text;
      po["score"] = p.score;
      po["flag"] = to_string(p.flag);
      phrases.push_back(std::move(po));
    }
    out["phrases"] = std::move(phrases);
    ordered_json regions = ordered_json::array();
    for (const auto& r : report.regions) {
      ordered_json ro = ordered_json::object();
      ro["region_id"] = r.region_id;
      ro["score"] = r.score;
      ro["flag"] = to_string(r.flag);
      if (r.matched_phrase_index) ro["matched_phrase_index"] = *r.matched_phrase_index;
      regions.push_back(std::move(ro));
    }
    out["regions"] = std::move(regions);
    return out.dump(2) + "\n";
  }

  const auto& b = report.breakdown;
  std::ostringstream md;
  md << "# Caption report: " << escape_cell(report.bundle_id) << "\n\n";
  md << "Threshold: " << fixed6(report.threshold) << "\n\n";
  md << "## Scores\n\n| component | value |\n|---|---|\n";
  md << "| gITC | " << fixed6(b.g_itc) << " |\n";
  md << "| lITC precision | " << fixed6(b.l_itc_precision) << " |\n";
  md << "| lITC recall | " << fixed6(b.l_itc_recall) << " |\n";
  md << "| lITC | " << fixed6(b.l_itc) << " |\n";
  if (b.g_ttc) md << "| gTTC | " << fixed6(*b.g_ttc) << " |\n";
  if (b.l_ttc_precision) md << "| lTTC precision | " << fixed6(*b.l_ttc_precision) << " |\n";
  if (b.l_ttc_recall) md << "| lTTC recall | " << fixed6(*b.l_ttc_recall) << " |\n";
  if (b.l_ttc) md << "| lTTC | " << fixed6(*b.l_ttc) << " |\n";
  md << "| HICE-S | " << fixed6(b.hice) << " |\n";
  if (b.ref_hice) md << "| RefHICE-S | " << fixed6(*b.ref_hice) << " |\n";

  md << "\n## Phrases (correctness)\n\n| # | phrase | score | verdict |\n|---|---|---|---|\n";
  for (const auto& p : report.phrases) {
    md << "| " << p.phrase_index << " | " << escape_cell(p.text) << " | " << fixed6(p.score) << " | "
       << to_string(p.flag) << " |\n";
  }

  md << "\n## Regions (completeness)\n\n| region | score | verdict | matched phrase |\n|---|---|---|---|\n";
  for (const auto& r : report.regions) {
    md << "| " << escape_cell(r.region_id) << " | " << fixed6(r.score) << " | " << to_string(r.flag) << " | ";
    if (r.matched_phrase_index) {
      const std::size_t m = *r.matched_phrase_index;
      const std::string text = m < report.phrases.size() ? report.phrases[m].text : std::string();
      md << escape_cell(text) << " (#" << m << ")";
    } else {
      md << "-";
    }
    md << " |\n";
  }
  return md.str();
}

InterpretReport parse_structured_report(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("report: byte ") + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw SchemaError("report: expected an object");

  InterpretReport r;
  r.bundle_id = string_at(doc, "bundle_id");
  r.threshold = number_at(doc, "threshold");
  const auto bit = doc.find("breakdown");
  if (bit == doc.end() || !bit->is_object()) throw SchemaError("report: missing \"breakdown\"");
  const json& b = *bit;
  r.breakdown.g_itc = number_at(b, "g_itc");
  r.breakdown.l_itc_precision = number_at(b, "l_itc_precision");
  r.breakdown.l_itc_recall = number_at(b, "l_itc_recall");
  r.breakdown.l_itc = number_at(b, "l_itc");
  r.breakdown.g_ttc = optional_number(b, "g_ttc");
  r.breakdown.l_ttc_precision = optional_number(b, "l_ttc_precision");
  r.breakdown.l_ttc_recall = optional_number(b, "l_ttc_recall");
  r.breakdown.l_ttc = optional_number(b, "l_ttc");
  r.breakdown.hice = number_at(b, "hice");
  r.breakdown.ref_hice = optional_number(b, "ref_hice");

  for (const auto& po : doc.value("phrases", json::array())) {
    PhraseVerdict v;
    v.phrase_index = static_cast<std::size_t>(number_at(po, "phrase_index"));
    v.text = string_at(po, "text");
    v.score = number_at(po, "score");
    v.flag = string_at(po, "flag") == "correct" ? PhraseFlag::correct : PhraseFlag::incorrect;
    r.phrases.push_back(std::move(v));
  }
  for (const auto& ro : doc.value("regions", json::array())) {
    RegionVerdict v;
    v.region_id = string_at(ro, "region_id");
    v.score = number_at(ro, "score");
    v.flag = string_at(ro, "flag") == "mentioned" ? RegionFlag::mentioned : RegionFlag::unmentioned;
    if (ro.contains("matched_phrase_index")) {
      v.matched_phrase_index = static_cast<std::size_t>(number_at(ro, "matched_phrase_index"));
    }
    r.regions.push_back(std::move(v));
  }
  return r;
}

}  // namespace hice
