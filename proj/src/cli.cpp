#include "hice/cli.hpp"

#include <cstdio>
#include <iostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hice/benchmark_harness.hpp"
#include "hice/bundle_io.hpp"
#include "hice/errors.hpp"
#include "hice/parallel.hpp"
#include "hice/report.hpp"
#include "hice/scoring.hpp"
#include "hice/triplets.hpp"
#include "json_util.hpp"

namespace hice {

namespace {

const std::vector<std::string> kScorerNames = {"hice", "ref_hice", "global_only", "local_only"};

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct ScoreArgs {
  std::vector<std::string> bundles;
  bool refs = false;
  std::string ablation;
  bool breakdown = false;
  std::string format = "structured";
  int threads = 1;
};

struct CorrelationArgs {
  std::string input;
  std::string scorer;
  std::string stat;
  int threads = 1;
};

struct PairsArgs {
  std::string input;
  std::string scorer;
  int draws = 5;
  std::size_t refs_per_draw = 5;
  std::uint64_t seed = 42;
  int threads = 1;
};

struct FoilArgs {
  std::string input;
  std::string scorer;
  int threads = 1;
};

struct ReportArgs {
  std::string bundle;
  double threshold = kDefaultReportThreshold;
  std::string format = "markdown";
  std::string out;
};

struct ExtractArgs {
  std::string text;
  std::string file;
  std::string lexicon;
};

struct ValidateArgs {
  std::string bundle;
};

void add_threads_option(CLI::App& cmd, int& threads) {
  threads = default_thread_count();
  cmd.add_option("--threads", threads, "Worker threads (output order never depends on this)")
      ->check(CLI::PositiveNumber);
}

// Prefixes the bundle path onto any input error raised while handling it.
template <class Fn>
auto with_path(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0) throw;
    throw Error(path + ": " + what);
  }
}

int cmd_score(const ScoreArgs& args, std::ostream& out) {
  const auto format_text = args.format == "text";
  const auto ablation = args.ablation.empty() ? std::nullopt : parse_ablation_mode(args.ablation);

  std::vector<EvalBundle> bundles(args.bundles.size());
  std::vector<std::string> lines(args.bundles.size());
  parallel_for(args.bundles.size(), args.threads, [&](std::size_t i) {
    const auto& path = args.bundles[i];
    with_path(path, [&] {
      const EvalBundle bundle = read_bundle(path);
      const ScoreBreakdown b = args.refs ? ref_hice_score(bundle) : hice_score(bundle);
      std::string metric = args.refs ? "ref_hice" : "hice";
      double value = args.refs ? *b.ref_hice : b.hice;
      if (ablation) {
        metric = std::string(to_string(*ablation));
        value = *ablation == AblationMode::global_only ? b.g_itc
                : *ablation == AblationMode::local_only ? b.l_itc
                                                        : b.hice;
      }
      if (format_text) {
        std::string line = bundle.bundle_id + " " + metric + " " + fixed6(value) + "\n";
        if (args.breakdown) {
          for (const auto& [key, v] : detail::breakdown_to_json(b).items()) {
            line += "  " + key + " " + fixed6(v.get<double>()) + "\n";
          }
        }
        lines[i] = std::move(line);
      } else {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        obj["bundle_id"] = bundle.bundle_id;
        obj["metric"] = metric;
        obj["value"] = value;
        if (args.breakdown) obj["breakdown"] = detail::breakdown_to_json(b);
        lines[i] = obj.dump() + "\n";
      }
    });
  });
  for (const auto& line : lines) out << line;
  return kExitOk;
}

void emit_warnings(const BenchmarkResult& result, std::ostream& err) {
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";
}

int cmd_correlation(const CorrelationArgs& args, std::ostream& out, std::ostream& err) {
  const auto records = read_judgment_records(args.input);
  const auto scorer = *parse_scorer(args.scorer);
  const auto stat = *parse_correlation_stat(args.stat);
  const auto result = correlation_benchmark(records, scorer, stat, args.threads);
  emit_warnings(result, err);
  out << to_json({"correlation", args.scorer, args.stat, result.n, result.value, std::nullopt}) << "\n";
  return kExitOk;
}

int cmd_pairs(const PairsArgs& args, std::ostream& out, std::ostream& err) {
  const auto records = read_pair_records(args.input);
  PairwiseOptions options;
  options.draws = args.draws;
  options.refs_per_draw = args.refs_per_draw;
  options.seed = args.seed;
  options.threads = args.threads;
  const auto result = pairwise_benchmark(records, *parse_scorer(args.scorer), options);
  emit_warnings(result, err);
  out << to_json({"pairs", args.scorer, std::nullopt, result.n, result.value, args.seed}) << "\n";
  return kExitOk;
}

int cmd_foil(const FoilArgs& args, std::ostream& out, std::ostream& err) {
  const auto records = read_foil_records(args.input);
  const auto result = foil_benchmark(records, *parse_scorer(args.scorer), args.threads);
  emit_warnings(result, err);
  out << to_json({"foil", args.scorer, std::nullopt, result.n, result.value, std::nullopt}) << "\n";
  return kExitOk;
}

int cmd_report(const ReportArgs& args, std::ostream& out) {
  const EvalBundle bundle = read_bundle(args.bundle);
  const InterpretReport report = build_report(bundle, args.threshold);
  const std::string rendered = render_report(report, *parse_report_format(args.format));
  if (args.out.empty()) {
    out << rendered;
  } else {
    write_text_file_atomically(args.out, rendered);
  }
  return kExitOk;
}

void print_triplets(const std::vector<Triplet>& triplets, std::ostream& out) {
  for (const auto& t : triplets) out << t.subject << " | " << t.predicate << " | " << t.object << "\n";
}

int cmd_extract(const ExtractArgs& args, std::ostream& out) {
  const PredicateLexicon custom =
      args.lexicon.empty() ? PredicateLexicon{} : PredicateLexicon::load(args.lexicon);
  const PredicateLexicon& lexicon = args.lexicon.empty() ? PredicateLexicon::builtin() : custom;
  if (!args.file.empty()) {
    // One caption per line; captions are separated by a blank line in the output.
    std::istringstream in(read_text_file(args.file));
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (!first) out << "\n";
      first = false;
      print_triplets(extract_triplets(line, lexicon), out);
    }
    return kExitOk;
  }
  print_triplets(extract_triplets(args.text, lexicon), out);
  return kExitOk;
}

int cmd_validate(const ValidateArgs& args, std::ostream& out, std::ostream& err) {
  const EvalBundle bundle = parse_bundle(args.bundle);
  const auto issues = validate_bundle(bundle);
  std::size_t errors = 0;
  for (const auto& issue : issues) {
    if (issue.severity == Severity::error) ++errors;
    err << args.bundle << ": " << format_issue(issue) << "\n";
  }
  if (errors == 0) {
    out << args.bundle << ": valid";
    if (!issues.empty()) out << " (" << issues.size() << " warning" << (issues.size() == 1 ? "" : "s") << ")";
    out << "\n";
    return kExitOk;
  }
  out << args.bundle << ": invalid (" << errors << " error" << (errors == 1 ? "" : "s") << ")\n";
  return kExitInputError;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical image-caption evaluation over precomputed embedding bundles", "hice"};
  app.require_subcommand(1);

  ScoreArgs score_args;
  auto* score_cmd = app.add_subcommand("score", "Score bundles with HICE-S / RefHICE-S");
  score_cmd->add_option("--bundle", score_args.bundles, "Bundle file (repeatable)")->required();
  auto* refs_flag = score_cmd->add_flag("--refs", score_args.refs, "Reference-based score (RefHICE-S)");
  score_cmd->add_option("--ablation", score_args.ablation, "Single-component score")
      ->check(CLI::IsMember({"global_only", "local_only", "fused"}))
      ->excludes(refs_flag);
  score_cmd->add_flag("--breakdown", score_args.breakdown, "Include every component score");
  score_cmd->add_option("--format", score_args.format)->check(CLI::IsMember({"structured", "text"}));
  add_threads_option(*score_cmd, score_args.threads);

  auto* bench_cmd = app.add_subcommand("benchmark", "Run an evaluation protocol");
  bench_cmd->require_subcommand(1);

  CorrelationArgs corr_args;
  auto* corr_cmd = bench_cmd->add_subcommand("correlation", "Kendall correlation with human judgments");
  corr_cmd->add_option("--input", corr_args.input, "JSON Lines judgment records")->required();
  corr_cmd->add_option("--scorer", corr_args.scorer)->required()->check(CLI::IsMember(kScorerNames));
  corr_cmd->add_option("--stat", corr_args.stat)->required()->check(CLI::IsMember({"tau_b", "tau_c"}));
  add_threads_option(*corr_cmd, corr_args.threads);

  PairsArgs pairs_args;
  auto* pairs_cmd = bench_cmd->add_subcommand("pairs", "Pairwise ranking accuracy");
  pairs_cmd->add_option("--input", pairs_args.input, "JSON Lines pair records")->required();
  pairs_cmd->add_option("--scorer", pairs_args.scorer)->required()->check(CLI::IsMember(kScorerNames));
  pairs_cmd->add_option("--draws", pairs_args.draws, "Reference draws (reference-based scorers)")
      ->check(CLI::PositiveNumber);
  pairs_cmd->add_option("--refs-per-draw", pairs_args.refs_per_draw, "References sampled per draw")
      ->check(CLI::PositiveNumber);
  pairs_cmd->add_option("--seed", pairs_args.seed, "RNG seed for tie breaking and reference draws");
  add_threads_option(*pairs_cmd, pairs_args.threads);

  FoilArgs foil_args;
  auto* foil_cmd = bench_cmd->add_subcommand("foil", "Hallucination (FOIL) detection accuracy");
  foil_cmd->add_option("--input", foil_args.input, "JSON Lines correct/foil records")->required();
  foil_cmd->add_option("--scorer", foil_args.scorer)->required()->check(CLI::IsMember(kScorerNames));
  add_threads_option(*foil_cmd, foil_args.threads);

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "Per-phrase / per-region interpretability report");
  report_cmd->add_option("--bundle", report_args.bundle)->required();
  auto* threshold_opt = report_cmd->add_option("--threshold", report_args.threshold, "Verdict threshold in (0, 1)");
  report_cmd->add_option("--format", report_args.format)->check(CLI::IsMember({"structured", "markdown"}));
  report_cmd->add_option("--out", report_args.out, "Write to this file instead of stdout");

  ExtractArgs extract_args;
  auto* extract_cmd = app.add_subcommand("extract-triplets", "Rule-based subject-predicate-object extraction");
  auto* text_opt = extract_cmd->add_option("--text", extract_args.text, "Caption text");
  auto* file_opt = extract_cmd->add_option("--file", extract_args.file, "File with one caption per line");
  text_opt->excludes(file_opt);
  extract_cmd->add_option("--lexicon", extract_args.lexicon, "Predicate lexicon file (default: built-in)");

  ValidateArgs validate_args;
  auto* validate_cmd = app.add_subcommand("validate", "Check a bundle file against the format and invariants");
  validate_cmd->add_option("--bundle", validate_args.bundle)->required();

  std::vector<const char*> argv;
  argv.push_back("hice");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  if (extract_cmd->parsed() && text_opt->count() + file_opt->count() != 1) {
    err << "error: extract-triplets needs exactly one of --text or --file\n";
    return kExitInputError;
  }
  if (threshold_opt->count() > 0 && !(report_args.threshold > 0.0 && report_args.threshold < 1.0)) {
    err << "error: --threshold must lie strictly between 0 and 1\n";
    return kExitInputError;
  }

  try {
    if (score_cmd->parsed()) return cmd_score(score_args, out);
    if (corr_cmd->parsed()) return cmd_correlation(corr_args, out, err);
    if (pairs_cmd->parsed()) return cmd_pairs(pairs_args, out, err);
    if (foil_cmd->parsed()) return cmd_foil(foil_args, out, err);
    if (report_cmd->parsed()) return cmd_report(report_args, out);
    if (extract_cmd->parsed()) return cmd_extract(extract_args, out);
    if (validate_cmd->parsed()) return cmd_validate(validate_args, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
  err << "internal error: no command dispatched\n";
  return kExitInternalError;
}

}  // namespace hice
