#include "iou/nms.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "iou/errors.hpp"
#include "iou/format.hpp"
#include "iou/rng.hpp"

namespace iou {

std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_thresh,
                           ScoreSource source) {
  if (dets.empty()) throw EmptyInputError("nms called with no detections");
  if (!(iou_thresh > 0.0 && iou_thresh < 1.0)) {
    throw DomainError("iou threshold must be in (0, 1)");
  }
  const auto score = [&](const Detection& d) {
    return source == ScoreSource::Classification ? d.cls_score : d.iou_score;
  };

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return score(dets[a]) > score(dets[b]);
  });

  std::vector<bool> suppressed(dets.size(), false);
  std::vector<Detection> kept;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t top = order[i];
    if (suppressed[top]) continue;
    kept.push_back(dets[top]);
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const std::size_t other = order[j];
      if (!suppressed[other] && siou(dets[top].box, dets[other].box) >= iou_thresh) {
        suppressed[other] = true;
      }
    }
  }
  return kept;
}

std::vector<Detection> synth_clusters(const std::vector<ClusterSpec>& specs) {
  std::vector<Detection> out;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const ClusterSpec& spec = specs[c];
    validate(spec.gt_box);
    if (spec.n_candidates < 1) throw DomainError("cluster needs n_candidates >= 1");
    SplitMix64 rng(substream_seed(spec.seed, c));
    const double s = std::sqrt(spec.gt_box.area());
    const double half = spec.jitter_scale * s;
    const double min_side = 1e-3 * s;

    for (std::size_t k = 0; k < spec.n_candidates; ++k) {
      Box cand;
      for (;;) {
        cand = Box{spec.gt_box.x1 + rng.uniform(-half, half),
                   spec.gt_box.y1 + rng.uniform(-half, half),
                   spec.gt_box.x2 + rng.uniform(-half, half),
                   spec.gt_box.y2 + rng.uniform(-half, half)};
        if (cand.width() >= min_side && cand.height() >= min_side) break;
      }
      Detection det;
      det.box = cand;
      det.gt_id = c;
      const double true_iou = siou(spec.gt_box, cand);
      det.iou_score =
          std::clamp(true_iou + rng.uniform(-spec.iou_noise, spec.iou_noise), 0.0, 1.0);
      const double cls_base = rng.uniform();  // independent of localization
      det.cls_score =
          std::clamp(cls_base + rng.uniform(-spec.cls_noise, spec.cls_noise), 0.0, 1.0);
      out.push_back(det);
    }
  }
  return out;
}

SelectionMetrics evaluate_selection(const std::vector<Detection>& kept,
                                    const std::vector<Box>& gts, double match_thresh) {
  if (gts.empty()) throw EmptyInputError("evaluate_selection needs ground-truth boxes");
  if (kept.empty()) throw EmptyInputError("evaluate_selection needs kept detections");

  SelectionMetrics m;
  m.per_gt_best.assign(gts.size(), 0.0);
  double sum = 0.0;
  for (const Detection& det : kept) {
    double best = 0.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double v = siou(gts[g], det.box);
      best = std::max(best, v);
      m.per_gt_best[g] = std::max(m.per_gt_best[g], v);
    }
    sum += best;
  }
  m.mean_siou = sum / static_cast<double>(kept.size());

  std::size_t hit = 0;
  for (const double v : m.per_gt_best) {
    if (v >= match_thresh) ++hit;
  }
  m.recall = static_cast<double>(hit) / static_cast<double>(gts.size());
  return m;
}

namespace {

std::vector<std::string> effective_lines(std::istream& in,
                                         std::vector<std::size_t>& line_numbers) {
  std::vector<std::string> lines;
  std::string raw;
  std::size_t n = 0;
  while (std::getline(in, raw)) {
    ++n;
    const auto comment = raw.find('#');
    if (comment != std::string::npos) raw = raw.substr(0, comment);
    const auto b = raw.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = raw.find_last_not_of(" \t\r");
    lines.push_back(raw.substr(b, e - b + 1));
    line_numbers.push_back(n);
  }
  return lines;
}

std::vector<std::string> whitespace_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string f;
  while (in >> f) fields.push_back(f);
  return fields;
}

}  // namespace

std::vector<ClusterSpec> parse_cluster_file(std::istream& in) {
  std::vector<std::size_t> line_numbers;
  const auto lines = effective_lines(in, line_numbers);
  std::vector<ClusterSpec> specs;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t ln = line_numbers[i];
    const auto fields = whitespace_fields(lines[i]);
    if (fields.size() != 6) {
      throw ParseError("cluster line needs 'box n jitter cls_noise iou_noise seed'", ln);
    }
    ClusterSpec s;
    s.gt_box = parse_box_literal(fields[0], ln);
    const double n = parse_double(fields[1], ln);
    if (!(n >= 1.0)) throw ParseError("n_candidates must be >= 1", ln);
    s.n_candidates = static_cast<std::size_t>(n);
    s.jitter_scale = parse_double(fields[2], ln);
    s.cls_noise = parse_double(fields[3], ln);
    s.iou_noise = parse_double(fields[4], ln);
    s.seed = static_cast<std::uint64_t>(parse_double(fields[5], ln));
    specs.push_back(s);
  }
  if (specs.empty()) throw EmptyInputError("cluster file has no clusters");
  return specs;
}

std::vector<ClusterSpec> load_cluster_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open cluster file '" + path + "'");
  return parse_cluster_file(in);
}

std::vector<Detection> parse_detections_csv(std::istream& in) {
  std::vector<std::size_t> line_numbers;
  const auto lines = effective_lines(in, line_numbers);
  std::vector<Detection> dets;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t ln = line_numbers[i];
    const auto fields = split(lines[i], ',');
    if (fields.size() != 6 && fields.size() != 7) {
      throw ParseError("detection line needs x1,y1,x2,y2,cls_score,iou_score[,gt_id]", ln);
    }
    Detection d;
    d.box = parse_box_literal(fields[0] + "," + fields[1] + "," + fields[2] + "," + fields[3], ln);
    d.cls_score = parse_double(fields[4], ln);
    d.iou_score = parse_double(fields[5], ln);
    if (fields.size() == 7) {
      d.gt_id = static_cast<std::size_t>(parse_double(fields[6], ln));
    }
    dets.push_back(d);
  }
  if (dets.empty()) throw EmptyInputError("detections file has no detections");
  return dets;
}

std::vector<Detection> load_detections_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open detections file '" + path + "'");
  return parse_detections_csv(in);
}

void write_detections_csv(std::ostream& out, const std::vector<Detection>& dets) {
  for (const Detection& d : dets) {
    out << box_literal(d.box) << ',' << fmt17(d.cls_score) << ',' << fmt17(d.iou_score);
    if (d.gt_id) out << ',' << *d.gt_id;
    out << '\n';
  }
}

}  // namespace iou
