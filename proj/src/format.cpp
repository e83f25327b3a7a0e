#include "iou/format.hpp"

#include <charconv>
#include <cstdio>

#include "iou/errors.hpp"

namespace iou {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string box_literal(const Box& b) {
  return fmt17(b.x1) + "," + fmt17(b.y1) + "," + fmt17(b.x2) + "," + fmt17(b.y2);
}

std::vector<std::string> split(std::string_view text, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == delim) {
      out.emplace_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

double parse_double(std::string_view text, std::size_t line) {
  // Trim surrounding whitespace first; from_chars accepts none.
  std::size_t b = text.find_first_not_of(" \t");
  std::size_t e = text.find_last_not_of(" \t");
  if (b == std::string_view::npos) throw ParseError("empty number", line);
  text = text.substr(b, e - b + 1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ParseError("bad number '" + std::string(text) + "'", line);
  }
  return v;
}

Box parse_box_literal(std::string_view text, std::size_t line) {
  const std::vector<std::string> parts = split(text, ',');
  if (parts.size() != 4) {
    throw ParseError("box literal needs four comma-separated values, got '" +
                         std::string(text) + "'",
                     line);
  }
  const Box b{parse_double(parts[0], line), parse_double(parts[1], line),
              parse_double(parts[2], line), parse_double(parts[3], line)};
  try {
    return validate(b);
  } catch (const Error& err) {
    throw ParseError(err.what(), line);
  }
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << "iter,x1,y1,x2,y2,ie,ue,eiou,loss,gx1,gy1,gx2,gy2,step_norm\n";
  for (const TraceRecord& r : trace.records) {
    out << r.iter << ',' << fmt17(r.pred.x1) << ',' << fmt17(r.pred.y1) << ','
        << fmt17(r.pred.x2) << ',' << fmt17(r.pred.y2) << ',' << fmt17(r.i_e) << ','
        << fmt17(r.u_e) << ',' << fmt17(r.eiou) << ',' << fmt17(r.loss) << ','
        << fmt17(r.grad.dx1) << ',' << fmt17(r.grad.dy1) << ',' << fmt17(r.grad.dx2)
        << ',' << fmt17(r.grad.dy2) << ',' << fmt17(r.step_norm) << '\n';
  }
}

void write_trace_jsonl(std::ostream& out, const Trace& trace) {
  for (const TraceRecord& r : trace.records) {
    JsonObject row;
    row.field("iter", r.iter)
        .field("x1", r.pred.x1)
        .field("y1", r.pred.y1)
        .field("x2", r.pred.x2)
        .field("y2", r.pred.y2)
        .field("ie", r.i_e)
        .field("ue", r.u_e)
        .field("eiou", r.eiou)
        .field("loss", r.loss)
        .field("gx1", r.grad.dx1)
        .field("gy1", r.grad.dy1)
        .field("gx2", r.grad.dx2)
        .field("gy2", r.grad.dy2)
        .field("step_norm", r.step_norm);
    out << row.str() << '\n';
  }
}

std::string json_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

namespace {

void append_field(std::string& body, std::string_view key, const std::string& value) {
  if (!body.empty()) body += ',';
  body += '"';
  body += json_escape(key);
  body += "\":";
  body += value;
}

}  // namespace

JsonObject& JsonObject::field(std::string_view key, double v) {
  append_field(body_, key, fmt17(v));
  return *this;
}

JsonObject& JsonObject::field(std::string_view key, std::size_t v) {
  append_field(body_, key, std::to_string(v));
  return *this;
}

JsonObject& JsonObject::field(std::string_view key, bool v) {
  append_field(body_, key, v ? "true" : "false");
  return *this;
}

JsonObject& JsonObject::field(std::string_view key, std::string_view v) {
  append_field(body_, key, "\"" + json_escape(v) + "\"");
  return *this;
}

JsonObject& JsonObject::field_raw(std::string_view key, std::string_view raw) {
  append_field(body_, key, std::string(raw));
  return *this;
}

std::string JsonObject::str() const { return "{" + body_ + "}"; }

std::string json_array(const std::vector<std::string>& rendered_elements) {
  std::string out = "[";
  for (std::size_t i = 0; i < rendered_elements.size(); ++i) {
    if (i > 0) out += ',';
    out += rendered_elements[i];
  }
  return out + "]";
}

std::string json_array(const std::vector<double>& values) {
  std::vector<std::string> rendered;
  rendered.reserve(values.size());
  for (const double v : values) rendered.push_back(fmt17(v));
  return json_array(rendered);
}

}  // namespace iou
