#include "iou/scenario.hpp"

#include <fstream>
#include <set>

#include "iou/errors.hpp"
#include "iou/format.hpp"

namespace iou {

namespace {

constexpr const char* kFormatTag = "eiou-scenario/1";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t parse_count(const std::string& text, std::size_t line) {
  const double v = parse_double(text, line);
  if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
    throw ParseError("expected a nonnegative integer, got '" + text + "'", line);
  }
  return static_cast<std::size_t>(v);
}

struct Builder {
  Scenario scenario;
  bool has_target = false;
  bool has_init = false;
  std::size_t start_line = 0;
};

// Names become trace file names; keep them to a safe character set.
bool valid_name(const std::string& name) {
  if (name.empty()) return false;
  for (const char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    if (!ok) return false;
  }
  return true;
}

void finish(Builder& b, std::vector<Scenario>& out, std::set<std::string>& names) {
  if (b.scenario.name.empty()) throw ParseError("scenario without a name", b.start_line);
  if (!valid_name(b.scenario.name)) {
    throw ParseError("scenario name '" + b.scenario.name +
                         "' may only use letters, digits, '-', '_' and '.'",
                     b.start_line);
  }
  if (!b.has_target) throw ParseError("scenario '" + b.scenario.name + "' has no target", b.start_line);
  if (!b.has_init) throw ParseError("scenario '" + b.scenario.name + "' has no init", b.start_line);
  if (!names.insert(b.scenario.name).second) {
    throw ParseError("duplicate scenario name '" + b.scenario.name + "'", b.start_line);
  }
  out.push_back(b.scenario);
}

void apply_key(Builder& b, const std::string& key, const std::string& value,
               std::size_t line) {
  Scenario& s = b.scenario;
  if (key == "name") {
    s.name = value;
  } else if (key == "target") {
    s.target = parse_box_literal(value, line);
    b.has_target = true;
  } else if (key == "init") {
    s.init = parse_box_literal(value, line);
    b.has_init = true;
  } else if (key == "mode") {
    if (value == "sot") s.cfg.mode = StepMode::Sot;
    else if (value == "plain") s.cfg.mode = StepMode::Plain;
    else throw ParseError("mode must be 'sot' or 'plain', got '" + value + "'", line);
  } else if (key == "loss") {
    try {
      s.cfg.loss = parse_loss_spec(value);
    } catch (const Error& e) {
      throw ParseError(e.what(), line);
    }
  } else if (key == "alpha") {
    s.cfg.alpha = parse_double(value, line);
  } else if (key == "max_iters") {
    s.cfg.max_iters = parse_count(value, line);
  } else if (key == "loss_tol") {
    s.cfg.loss_tol = parse_double(value, line);
  } else if (key == "expect.final_loss_le") {
    s.expect.final_loss_le = parse_double(value, line);
  } else if (key == "expect.within_iters") {
    s.expect.within_iters = parse_count(value, line);
  } else if (key == "expect.loss_range_last_ge") {
    s.expect.loss_range_last_ge = parse_double(value, line);
  } else if (key == "expect.range_window") {
    s.expect.range_window = parse_count(value, line);
  } else if (key == "expect.eiou_max_ge") {
    s.expect.eiou_max_ge = parse_double(value, line);
  } else if (key == "expect.eiou_max_lt") {
    s.expect.eiou_max_lt = parse_double(value, line);
  } else {
    throw ParseError("unknown key '" + key + "'", line);
  }
}

}  // namespace

std::vector<Scenario> parse_scenarios(std::istream& in) {
  std::vector<Scenario> out;
  std::set<std::string> names;
  std::optional<Builder> current;
  bool saw_format = false;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = trim(line.substr(0, comment));
    if (line.empty()) continue;

    if (!saw_format) {
      if (line.rfind("format:", 0) != 0 || trim(line.substr(7)) != kFormatTag) {
        throw ParseError(std::string("expected 'format: ") + kFormatTag + "'", line_no);
      }
      saw_format = true;
      continue;
    }

    if (line == "[scenario]") {
      if (current) finish(*current, out, names);
      current = Builder{};
      current->start_line = line_no;
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    if (!current) throw ParseError("key outside a [scenario] section", line_no);
    apply_key(*current, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no);
  }
  if (current) finish(*current, out, names);
  if (!saw_format) throw ParseError(std::string("expected 'format: ") + kFormatTag + "'", 1);
  return out;
}

std::vector<Scenario> load_scenarios(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file '" + path + "'");
  return parse_scenarios(in);
}

std::vector<AssertionResult> check_expectations(const Scenario& scenario,
                                                const Trace& trace) {
  std::vector<AssertionResult> results;
  const ScenarioExpect& e = scenario.expect;
  const auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    results.push_back(AssertionResult{name, pass, detail});
  };

  if (e.final_loss_le) {
    const double v = trace.final_loss();
    add("final_loss_le", v <= *e.final_loss_le,
        "final loss " + fmt17(v) + " vs bound " + fmt17(*e.final_loss_le));
  }
  if (e.within_iters) {
    const std::size_t it = trace.records.back().iter;
    const bool converged = trace.status == RunStatus::Converged;
    add("within_iters", converged && it <= *e.within_iters,
        std::string(converged ? "converged" : "did not converge") + " at iter " +
            std::to_string(it) + " vs budget " + std::to_string(*e.within_iters));
  }
  if (e.loss_range_last_ge) {
    const double r = trace.loss_range_last(e.range_window);
    add("loss_range_last_ge", r >= *e.loss_range_last_ge,
        "range " + fmt17(r) + " over last " + std::to_string(e.range_window) +
            " records vs bound " + fmt17(*e.loss_range_last_ge));
  }
  if (e.eiou_max_ge) {
    const double m = trace.max_eiou();
    add("eiou_max_ge", m >= *e.eiou_max_ge,
        "max eiou " + fmt17(m) + " vs bound " + fmt17(*e.eiou_max_ge));
  }
  if (e.eiou_max_lt) {
    const double m = trace.max_eiou();
    add("eiou_max_lt", m < *e.eiou_max_lt,
        "max eiou " + fmt17(m) + " vs bound " + fmt17(*e.eiou_max_lt));
  }
  return results;
}

}  // namespace iou
