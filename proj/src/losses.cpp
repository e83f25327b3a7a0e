#include "iou/losses.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "iou/errors.hpp"

namespace iou {

namespace {

double default_base_min(LossBase base) {
  switch (base) {
    case LossBase::NegEiou: return -1.0;
    case LossBase::ReciprocalIou: return 1.0;  // 1/eiou on (0, 1]
    case LossBase::NegLogIou: return 0.0;      // -ln(eiou) on (0, 1]
  }
  return 0.0;
}

double parse_number(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') {
    throw ParseError("bad number '" + text + "' in loss spec", 1);
  }
  return v;
}

}  // namespace

LossSpec parse_loss_spec(const std::string& text) {
  LossSpec spec;
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  if (name == "neg-eiou") {
    spec.base = LossBase::NegEiou;
  } else if (name == "reciprocal-iou") {
    spec.base = LossBase::ReciprocalIou;
  } else if (name == "neg-log-iou") {
    spec.base = LossBase::NegLogIou;
  } else {
    throw ParseError("unknown loss base '" + name + "'", 1);
  }
  spec.base_min = default_base_min(spec.base);

  if (colon != std::string::npos) {
    std::string rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string item = rest.substr(0, comma);
      rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
      if (item == "raw") {
        spec.convexified = false;
      } else if (item.rfind("p=", 0) == 0) {
        spec.power = parse_number(item.substr(2));
      } else if (item.rfind("min=", 0) == 0) {
        spec.base_min = parse_number(item.substr(4));
      } else {
        throw ParseError("unknown loss option '" + item + "'", 1);
      }
    }
  }
  if (spec.convexified && !(spec.power > 1.0)) {
    throw InvalidPowerError("convexification power must be > 1");
  }
  return spec;
}

std::string to_string(const LossSpec& spec) {
  std::string name;
  switch (spec.base) {
    case LossBase::NegEiou: name = "neg-eiou"; break;
    case LossBase::ReciprocalIou: name = "reciprocal-iou"; break;
    case LossBase::NegLogIou: name = "neg-log-iou"; break;
  }
  if (!spec.convexified) return name + ":raw";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", spec.power);
  std::string out = name + ":p=" + buf;
  if (spec.base_min != default_base_min(spec.base)) {
    std::snprintf(buf, sizeof(buf), "%g", spec.base_min);
    out += std::string(",min=") + buf;
  }
  return out;
}

double convexify(double base_value, double base_min, double power) {
  if (!(power > 1.0)) {
    throw InvalidPowerError("power must be > 1, got " + std::to_string(power));
  }
  if (base_value < base_min) {
    throw DomainError("base value " + std::to_string(base_value) +
                      " below its stated minimum " + std::to_string(base_min));
  }
  const double offset = base_value - base_min;
  if (power == 2.0) return offset * offset;
  return std::pow(offset, power);
}

double smooth_eiou_loss(const Box& target, const Box& pred, double power) {
  return convexify(-eiou(target, pred), -1.0, power);
}

double smooth_l1_loss(const std::array<double, 4>& target_deltas,
                      const std::array<double, 4>& pred_deltas) {
  double total = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double d = pred_deltas[i] - target_deltas[i];
    if (!std::isfinite(d)) throw NonFiniteError("non-finite delta");
    const double a = std::fabs(d);
    total += a < 1.0 ? 0.5 * d * d : a - 0.5;
  }
  return total;
}

double smooth_l1_box(const Box& target, const Box& pred) {
  const AnchorEncoding t = encode(target, target);
  const AnchorEncoding p = encode(pred, target);
  return smooth_l1_loss(t.deltas, p.deltas);
}

double kl_iou_loss(const IoUScorePair& pair) {
  if (!(pair.q_g >= 0.0 && pair.q_g <= 1.0)) {
    throw DomainError("q_g must be in [0, 1]");
  }
  if (!std::isfinite(pair.x)) throw NonFiniteError("non-finite head output");
  const double q_p = 1.0 / (1.0 + std::exp(-pair.x));
  const double q = pair.q_g;
  double loss = 0.0;
  if (q > 0.0) loss += q * std::log(q / q_p);
  if (q < 1.0) loss += (1.0 - q) * std::log((1.0 - q) / (1.0 - q_p));
  return loss;
}

double focal_weight(const Box& target, const Box& pred) {
  return 1.0 - eiou(target, pred);
}

double base_value(LossBase base, double eiou_value) {
  switch (base) {
    case LossBase::NegEiou:
      return -eiou_value;
    case LossBase::ReciprocalIou:
      if (!(eiou_value > 0.0)) {
        throw DomainError("reciprocal-iou base requires eiou > 0");
      }
      return 1.0 / eiou_value;
    case LossBase::NegLogIou:
      if (!(eiou_value > 0.0)) {
        throw DomainError("neg-log-iou base requires eiou > 0");
      }
      return -std::log(eiou_value);
  }
  throw DomainError("unreachable loss base");
}

double loss_value(const Box& target, const Box& pred, const LossSpec& spec) {
  const double b = base_value(spec.base, eiou(target, pred));
  if (!spec.convexified) return b;
  return convexify(b, spec.base_min, spec.power);
}

}  // namespace iou
