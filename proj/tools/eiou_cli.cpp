// Command-line surface for the EIoU toolkit: pairwise metric evaluation,
// optimization traces from scenario files, seeded sweeps, gradient
// conformance, counterexample searches and the NMS-guidance simulator.
//
// Exit codes: 0 success / all assertions pass, 1 assertions fail or a search
// exhausts its budget, 2 malformed input or bad flags.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "iou/box.hpp"
#include "iou/errors.hpp"
#include "iou/format.hpp"
#include "iou/gradients.hpp"
#include "iou/losses.hpp"
#include "iou/nms.hpp"
#include "iou/optimizer.hpp"
#include "iou/rng.hpp"
#include "iou/scenario.hpp"
#include "iou/search.hpp"

namespace {

using namespace iou;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw Error("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::pair<double, double> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ParseError("range must be 'lo:hi'", 1);
  const double lo = parse_double(text.substr(0, colon));
  const double hi = parse_double(text.substr(colon + 1));
  if (!(lo < hi)) throw ParseError("range must satisfy lo < hi", 1);
  return {lo, hi};
}

// ---------------------------------------------------------------- eval ----

struct EvalOptions {
  std::string input = "-";
  std::string out;
  double power = 2.0;
};

int cmd_eval(const EvalOptions& opt) {
  std::ifstream file;
  if (opt.input != "-") {
    file.open(opt.input);
    if (!file) throw Error("cannot open input file '" + opt.input + "'");
  }
  std::istream& in = opt.input == "-" ? std::cin : file;
  Output out(opt.out);

  out.stream() << "tx1,ty1,tx2,ty2,px1,py1,px2,py2,siou,eiou,giou,smooth_eiou_loss,"
                  "overlap_class\n";
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    std::istringstream fields(line);
    std::string t_text, p_text, extra;
    if (!(fields >> t_text)) continue;  // blank line
    if (!(fields >> p_text) || (fields >> extra)) {
      throw ParseError("expected two box literals separated by whitespace", line_no);
    }
    const Box t = parse_box_literal(t_text, line_no);
    const Box p = parse_box_literal(p_text, line_no);
    out.stream() << box_literal(t) << ',' << box_literal(p) << ',' << fmt17(siou(t, p))
                 << ',' << fmt17(eiou(t, p)) << ',' << fmt17(giou(t, p)) << ','
                 << fmt17(smooth_eiou_loss(t, p, opt.power)) << ','
                 << to_string(classify_overlap(t, p)) << '\n';
  }
  return kExitOk;
}

// --------------------------------------------------------------- trace ----

struct TraceOptions {
  std::string scenario_file;
  std::string name;  // run everything when empty
  std::string out_dir = ".";
  std::string format = "csv";
};

int cmd_trace(const TraceOptions& opt) {
  const auto scenarios = load_scenarios(opt.scenario_file);
  std::vector<Scenario> selected;
  for (const Scenario& s : scenarios) {
    if (opt.name.empty() || s.name == opt.name) selected.push_back(s);
  }
  if (selected.empty()) {
    throw Error(opt.name.empty() ? "scenario file is empty"
                                 : "no scenario named '" + opt.name + "'");
  }

  std::filesystem::create_directories(opt.out_dir);
  bool all_pass = true;
  for (const Scenario& s : selected) {
    const Trace trace = run(s.target, s.init, s.cfg);
    const std::string ext = opt.format == "jsonl" ? ".jsonl" : ".csv";
    const std::string path = opt.out_dir + "/" + s.name + ext;
    std::ofstream file(path);
    if (!file) throw Error("cannot open trace output '" + path + "'");
    if (opt.format == "jsonl") {
      write_trace_jsonl(file, trace);
    } else {
      write_trace_csv(file, trace);
    }

    if (trace.status == RunStatus::DegenerateStep) {
      std::cout << "NOTE " << s.name << ": run ended on a degenerate step at iter "
                << trace.records.back().iter << "\n";
    }
    for (const AssertionResult& r : check_expectations(s, trace)) {
      std::cout << (r.pass ? "PASS " : "FAIL ") << s.name << '.' << r.name << " ("
                << r.detail << ")\n";
      all_pass = all_pass && r.pass;
    }
  }
  return all_pass ? kExitOk : kExitFail;
}

// --------------------------------------------------------------- sweep ----

struct SweepOptions {
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  double alpha = 0.1;
  std::size_t max_iters = 1000;
  double loss_tol = 1e-6;
  std::string range = "-2:2";
  std::string loss = "neg-eiou:p=2";
  unsigned threads = 1;
  std::string out;
};

struct SweepOutcome {
  bool converged = false;
  std::size_t iters = 0;
  double final_eiou = 0.0;
};

double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const std::size_t idx =
      static_cast<std::size_t>(q * static_cast<double>(values.size() - 1) + 0.5);
  return values[std::min(idx, values.size() - 1)];
}

int cmd_sweep(const SweepOptions& opt) {
  if (opt.n < 1) throw DomainError("sweep needs n >= 1");
  const auto [lo, hi] = parse_range(opt.range);
  const LossSpec loss = parse_loss_spec(opt.loss);

  const StepMode modes[2] = {StepMode::Sot, StepMode::Plain};
  std::vector<std::vector<SweepOutcome>> outcomes(2, std::vector<SweepOutcome>(opt.n));

  const auto run_pair = [&](std::size_t i) {
    SplitMix64 rng(substream_seed(opt.seed, i));
    const Box target = random_box(rng, lo, hi);
    const Box init = random_box(rng, lo, hi);
    for (int m = 0; m < 2; ++m) {
      OptimConfig cfg;
      cfg.alpha = opt.alpha;
      cfg.max_iters = opt.max_iters;
      cfg.loss_tol = opt.loss_tol;
      cfg.mode = modes[m];
      cfg.loss = loss;
      const Trace trace = run(target, init, cfg);
      outcomes[m][i] = SweepOutcome{trace.status == RunStatus::Converged,
                                    trace.records.back().iter,
                                    trace.records.back().eiou};
    }
  };

  if (opt.threads <= 1) {
    for (std::size_t i = 0; i < opt.n; ++i) run_pair(i);
  } else {
    const unsigned n_workers =
        static_cast<unsigned>(std::min<std::size_t>(opt.threads, opt.n));
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < n_workers; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t i = w; i < opt.n; i += n_workers) run_pair(i);
      });
    }
    for (std::thread& t : workers) t.join();
  }

  std::vector<std::string> variants;
  for (int m = 0; m < 2; ++m) {
    std::size_t converged = 0;
    std::vector<double> iters, finals;
    for (const SweepOutcome& o : outcomes[m]) {
      converged += o.converged ? 1 : 0;
      iters.push_back(static_cast<double>(o.iters));
      finals.push_back(o.final_eiou);
    }
    JsonObject v;
    v.field("mode", m == 0 ? "sot" : "plain")
        .field("converged", converged)
        .field("convergence_rate",
               static_cast<double>(converged) / static_cast<double>(opt.n))
        .field("median_iters", quantile(iters, 0.5))
        .field("final_eiou_q10", quantile(finals, 0.1))
        .field("final_eiou_q50", quantile(finals, 0.5))
        .field("final_eiou_q90", quantile(finals, 0.9));
    variants.push_back(v.str());
  }

  JsonObject summary;
  summary.field("n", opt.n)
      .field("seed", static_cast<std::size_t>(opt.seed))
      .field("alpha", opt.alpha)
      .field("max_iters", opt.max_iters)
      .field("loss_tol", opt.loss_tol)
      .field("loss", to_string(loss))
      .field("range_lo", lo)
      .field("range_hi", hi)
      .field_raw("variants", json_array(variants));

  Output out(opt.out);
  out.stream() << summary.str() << '\n';
  return kExitOk;
}

// ----------------------------------------------------------- gradcheck ----

struct GradcheckOptions {
  std::size_t n = 10000;
  std::uint64_t seed = 42;
  double tol = 1e-5;
  unsigned threads = 1;
  std::string out;
};

int cmd_gradcheck(const GradcheckOptions& opt) {
  const GradcheckReport report = gradcheck_report(opt.n, opt.seed, opt.tol, opt.threads);
  JsonObject json;
  json.field("samples", report.samples)
      .field("max_rel_err", report.max_rel_err)
      .field("mean_rel_err", report.mean_rel_err)
      .field("pass", report.pass);
  Output out(opt.out);
  out.stream() << json.str() << '\n';
  return report.pass ? kExitOk : kExitFail;
}

// ------------------------------------------------------------ misalign ----

struct BudgetOptions {
  std::size_t max_samples = 100000;
  std::uint64_t seed = 1;
  std::string range = "-2:2";
  unsigned threads = 1;
  std::string out;
};

SearchBudget to_budget(const BudgetOptions& opt) {
  SearchBudget b;
  b.max_samples = opt.max_samples;
  b.seed = opt.seed;
  std::tie(b.range_lo, b.range_hi) = parse_range(opt.range);
  return b;
}

int cmd_misalign(const BudgetOptions& opt) {
  const auto witness = find_misalignment(to_budget(opt), opt.threads);
  if (!witness) {
    std::cerr << "no misaligned pair found within " << opt.max_samples << " samples\n";
    return kExitFail;
  }
  // Independent recomputation of both metrics from the emitted boxes.
  const bool verified = smooth_l1_box(witness->target, witness->pred_a) == witness->l1_a &&
                        smooth_l1_box(witness->target, witness->pred_b) == witness->l1_b &&
                        siou(witness->target, witness->pred_a) == witness->siou_a &&
                        siou(witness->target, witness->pred_b) == witness->siou_b &&
                        witness->l1_a > witness->l1_b && witness->siou_a > witness->siou_b;
  JsonObject json;
  json.field("found", true)
      .field("sample_index", witness->sample_index)
      .field("target", box_literal(witness->target))
      .field("pred_a", box_literal(witness->pred_a))
      .field("pred_b", box_literal(witness->pred_b))
      .field("smooth_l1_a", witness->l1_a)
      .field("smooth_l1_b", witness->l1_b)
      .field("siou_a", witness->siou_a)
      .field("siou_b", witness->siou_b)
      .field("verified", verified);
  Output out(opt.out);
  out.stream() << json.str() << '\n';
  return verified ? kExitOk : kExitFail;
}

int cmd_giou_anomaly(const BudgetOptions& opt) {
  const auto witness = find_giou_anomaly(to_budget(opt), opt.threads);
  if (!witness) {
    std::cerr << "no overlapping pair with negative giou found within "
              << opt.max_samples << " samples\n";
    return kExitFail;
  }
  const bool verified =
      witness->giou_overlapping < 0.0 && witness->eiou_overlapping > 0.0 &&
      std::fabs(witness->giou_touching) <= 1e-12 &&
      giou(witness->target, witness->pred) == witness->giou_overlapping &&
      eiou(witness->target, witness->pred) == witness->eiou_overlapping;
  JsonObject json;
  json.field("found", true)
      .field("sample_index", witness->sample_index)
      .field("target", box_literal(witness->target))
      .field("pred", box_literal(witness->pred))
      .field("giou_overlapping", witness->giou_overlapping)
      .field("eiou_overlapping", witness->eiou_overlapping)
      .field("touch_pred", box_literal(witness->touch_pred))
      .field("giou_touching", witness->giou_touching)
      .field("verified", verified);
  Output out(opt.out);
  out.stream() << json.str() << '\n';
  return verified ? kExitOk : kExitFail;
}

// ------------------------------------------------------------- nms-sim ----

struct NmsSimOptions {
  std::string clusters;  // cluster spec file
  std::string dets;      // raw detections file
  std::string gts;       // box literals, one per line (with --dets)
  std::string score_source = "predicted-iou";
  std::size_t n_clusters = 50;
  std::uint64_t seed = 9001;
  std::size_t candidates = 8;
  double jitter = 0.3;
  double cls_noise = 0.0;
  double iou_noise = 0.0;
  double iou_thresh = 0.5;
  double match_thresh = 0.5;
  std::string out;
};

std::vector<ClusterSpec> generated_suite(const NmsSimOptions& opt) {
  // Ground-truth boxes on a grid of 3x3 cells, eight per row, so clusters
  // stay mostly independent while jitter can still reach a neighbor.
  std::vector<ClusterSpec> specs;
  for (std::size_t i = 0; i < opt.n_clusters; ++i) {
    const double cx = 3.0 * static_cast<double>(i % 8);
    const double cy = 3.0 * static_cast<double>(i / 8);
    ClusterSpec s;
    s.gt_box = Box{cx, cy, cx + 1.0, cy + 1.0};
    s.n_candidates = opt.candidates;
    s.jitter_scale = opt.jitter;
    s.cls_noise = opt.cls_noise;
    s.iou_noise = opt.iou_noise;
    s.seed = opt.seed;
    specs.push_back(s);
  }
  return specs;
}

std::string metrics_json(const std::vector<Detection>& kept,
                         const std::vector<Box>& gts, double match_thresh) {
  const SelectionMetrics m = evaluate_selection(kept, gts, match_thresh);
  JsonObject json;
  json.field("kept", kept.size())
      .field("mean_siou", m.mean_siou)
      .field("recall", m.recall)
      .field_raw("per_gt_best", json_array(m.per_gt_best));
  return json.str();
}

int cmd_nms_sim(const NmsSimOptions& opt) {
  Output out(opt.out);

  if (!opt.dets.empty()) {
    // Direct mode: run NMS over a detections file.
    const auto dets = load_detections_csv(opt.dets);
    const ScoreSource source = opt.score_source == "classification"
                                   ? ScoreSource::Classification
                                   : ScoreSource::PredictedIoU;
    const auto kept = nms(dets, opt.iou_thresh, source);
    if (opt.gts.empty()) {
      write_detections_csv(out.stream(), kept);
      return kExitOk;
    }
    std::ifstream gt_file(opt.gts);
    if (!gt_file) throw Error("cannot open gt file '" + opt.gts + "'");
    std::vector<Box> gts;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(gt_file, line)) {
      ++line_no;
      const auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos || line[b] == '#') continue;
      gts.push_back(parse_box_literal(line, line_no));
    }
    out.stream() << metrics_json(kept, gts, opt.match_thresh) << '\n';
    return kExitOk;
  }

  const std::vector<ClusterSpec> specs =
      opt.clusters.empty() ? generated_suite(opt) : load_cluster_file(opt.clusters);
  if (specs.empty()) throw EmptyInputError("no clusters to simulate");
  const auto dets = synth_clusters(specs);
  std::vector<Box> gts;
  for (const auto& s : specs) gts.push_back(s.gt_box);

  const auto by_cls = nms(dets, opt.iou_thresh, ScoreSource::Classification);
  const auto by_iou = nms(dets, opt.iou_thresh, ScoreSource::PredictedIoU);

  JsonObject json;
  json.field("n_clusters", specs.size())
      .field("n_detections", dets.size())
      .field("iou_thresh", opt.iou_thresh)
      .field("match_thresh", opt.match_thresh)
      .field_raw("classification", metrics_json(by_cls, gts, opt.match_thresh))
      .field_raw("predicted_iou", metrics_json(by_iou, gts, opt.match_thresh));
  out.stream() << json.str() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EIoU bounding-box metric, losses, optimization and NMS toolkit"};
  app.require_subcommand(1);

  EvalOptions eval_opt;
  auto* eval = app.add_subcommand(
      "eval", "Evaluate siou/eiou/giou/loss for box pairs (one pair per line)");
  eval->add_option("input", eval_opt.input, "pairs file, or '-' for stdin");
  eval->add_option("--out", eval_opt.out, "output path (default stdout)");
  eval->add_option("--power", eval_opt.power, "loss power")->check(CLI::PositiveNumber);

  TraceOptions trace_opt;
  auto* trace = app.add_subcommand("trace", "Run scenarios and write per-iteration traces");
  trace->add_option("scenario-file", trace_opt.scenario_file)->required();
  trace->add_option("--name", trace_opt.name, "run only the named scenario");
  trace->add_option("--out-dir", trace_opt.out_dir, "directory for trace files");
  trace->add_option("--format", trace_opt.format, "csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));

  SweepOptions sweep_opt;
  auto* sweep = app.add_subcommand("sweep", "Seeded random (target, init) sweep, sot vs plain");
  sweep->add_option("--n", sweep_opt.n);
  sweep->add_option("--seed", sweep_opt.seed);
  sweep->add_option("--alpha", sweep_opt.alpha)->check(CLI::PositiveNumber);
  sweep->add_option("--max-iters", sweep_opt.max_iters);
  sweep->add_option("--loss-tol", sweep_opt.loss_tol);
  sweep->add_option("--range", sweep_opt.range, "coordinate range lo:hi");
  sweep->add_option("--loss", sweep_opt.loss, "loss spec string");
  sweep->add_option("--threads", sweep_opt.threads);
  sweep->add_option("--out", sweep_opt.out);

  GradcheckOptions grad_opt;
  auto* gradcheck =
      app.add_subcommand("gradcheck", "Analytic gradients vs central finite differences");
  gradcheck->add_option("--n", grad_opt.n);
  gradcheck->add_option("--seed", grad_opt.seed);
  gradcheck->add_option("--tol", grad_opt.tol)->check(CLI::PositiveNumber);
  gradcheck->add_option("--threads", grad_opt.threads);
  gradcheck->add_option("--out", grad_opt.out);

  BudgetOptions mis_opt;
  auto* misalign = app.add_subcommand(
      "misalign", "Find a pair where smooth-l1 and siou order predictions oppositely");
  misalign->add_option("--max-samples", mis_opt.max_samples);
  misalign->add_option("--seed", mis_opt.seed);
  misalign->add_option("--range", mis_opt.range);
  misalign->add_option("--threads", mis_opt.threads);
  misalign->add_option("--out", mis_opt.out);

  BudgetOptions giou_opt;
  auto* anomaly = app.add_subcommand(
      "giou-anomaly", "Find an overlapping pair scored below a touching pair by giou");
  anomaly->add_option("--max-samples", giou_opt.max_samples);
  anomaly->add_option("--seed", giou_opt.seed);
  anomaly->add_option("--range", giou_opt.range);
  anomaly->add_option("--threads", giou_opt.threads);
  anomaly->add_option("--out", giou_opt.out);

  NmsSimOptions nms_opt;
  auto* nms_sim = app.add_subcommand("nms-sim", "Synthetic IoU-guided NMS simulation");
  nms_sim->add_option("--clusters", nms_opt.clusters, "cluster spec file");
  nms_sim->add_option("--dets", nms_opt.dets, "detections csv (direct NMS mode)");
  nms_sim->add_option("--gts", nms_opt.gts, "ground-truth boxes for --dets mode");
  nms_sim->add_option("--score-source", nms_opt.score_source)
      ->check(CLI::IsMember({"classification", "predicted-iou"}));
  nms_sim->add_option("--n-clusters", nms_opt.n_clusters);
  nms_sim->add_option("--seed", nms_opt.seed);
  nms_sim->add_option("--candidates", nms_opt.candidates);
  nms_sim->add_option("--jitter", nms_opt.jitter);
  nms_sim->add_option("--cls-noise", nms_opt.cls_noise);
  nms_sim->add_option("--iou-noise", nms_opt.iou_noise);
  nms_sim->add_option("--iou-thresh", nms_opt.iou_thresh);
  nms_sim->add_option("--match-thresh", nms_opt.match_thresh);
  nms_sim->add_option("--out", nms_opt.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (eval->parsed()) return cmd_eval(eval_opt);
    if (trace->parsed()) return cmd_trace(trace_opt);
    if (sweep->parsed()) return cmd_sweep(sweep_opt);
    if (gradcheck->parsed()) return cmd_gradcheck(grad_opt);
    if (misalign->parsed()) return cmd_misalign(mis_opt);
    if (anomaly->parsed()) return cmd_giou_anomaly(giou_opt);
    if (nms_sim->parsed()) return cmd_nms_sim(nms_opt);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const EmptyInputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
