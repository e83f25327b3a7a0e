#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "iou/box.hpp"
#include "iou/optimizer.hpp"

namespace iou {

// 17 significant digits; every numeric field in CLI output goes through this
// so golden-file comparisons are exact.
std::string fmt17(double v);

// "x1,y1,x2,y2" with fmt17 fields.
std::string box_literal(const Box& b);

// Parses and validates a box literal. line is used for error reporting.
Box parse_box_literal(std::string_view text, std::size_t line = 1);

double parse_double(std::string_view text, std::size_t line = 1);

// Splits on a delimiter without collapsing empty fields.
std::vector<std::string> split(std::string_view text, char delim);

// Trace serialization. CSV header:
// iter,x1,y1,x2,y2,ie,ue,eiou,loss,gx1,gy1,gx2,gy2,step_norm
void write_trace_csv(std::ostream& out, const Trace& trace);
void write_trace_jsonl(std::ostream& out, const Trace& trace);

// Minimal JSON emitter: fields appear in insertion order and numbers use
// fmt17, so repeated runs are byte-identical.
class JsonObject {
 public:
  JsonObject& field(std::string_view key, double v);
  JsonObject& field(std::string_view key, std::size_t v);
  JsonObject& field(std::string_view key, bool v);
  JsonObject& field(std::string_view key, std::string_view v);
  JsonObject& field(std::string_view key, const char* v) {
    return field(key, std::string_view(v));
  }
  // Pre-rendered JSON (nested objects or arrays).
  JsonObject& field_raw(std::string_view key, std::string_view raw);

  std::string str() const;

 private:
  std::string body_;
};

std::string json_escape(std::string_view s);
std::string json_array(const std::vector<std::string>& rendered_elements);
std::string json_array(const std::vector<double>& values);

}  // namespace iou
