// diagram.cpp

#include "lrc/diagram.hpp"

#include <charconv>

namespace lrc {

namespace {

[[noreturn]] void parse_error(std::string_view token, std::size_t offset, const std::string& why) {
  throw Error(ErrorCode::Parse, "diagram parse error at offset " + std::to_string(offset) + " (token '" +
                                    std::string(token) + "'): " + why);
}

}  // namespace

LiftingDiagram parse_diagram(std::string_view spec) {
  LiftingDiagram d;
  if (spec.empty()) parse_error(spec, 0, "empty diagram");
  std::size_t offset = 0;
  bool gate_seen = false;
  while (offset <= spec.size()) {
    const std::size_t comma = spec.find(',', offset);
    const std::size_t end = comma == std::string_view::npos ? spec.size() : comma;
    const std::string_view token = spec.substr(offset, end - offset);
    if (gate_seen) parse_error(token, offset, "'gate' must be the last token");
    if (token == "gate") {
      d.termination = Termination::EmptyOrOneToK;
      gate_seen = true;
    } else {
      if (token.size() < 2 || (token[0] != 'x' && token[0] != '/')) {
        parse_error(token, offset, "expected xC, /D or gate");
      }
      Residue value = 0;
      const char* first = token.data() + 1;
      const char* last = token.data() + token.size();
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc() || ptr != last) parse_error(token, offset, "expected a decimal integer");
      if (token[0] == 'x') {
        if (value < 2) parse_error(token, offset, "lift factor must be at least 2");
        d.steps.push_back(Step::lift(value));
      } else {
        if (value < 2) parse_error(token, offset, "projection divisor must be at least 2");
        if (!d.steps.empty() && d.steps.back().kind == Step::Kind::Project) {
          parse_error(token, offset, "a projection cannot follow another projection");
        }
        d.steps.push_back(Step::project(value));
      }
    }
    if (comma == std::string_view::npos) break;
    offset = comma + 1;
  }
  if (d.steps.empty()) parse_error(spec, 0, "diagram has no steps");
  return d;
}

std::string describe(const Step& s) {
  return (s.kind == Step::Kind::Lift ? "x" : "/") + std::to_string(s.factor);
}

std::string render(const LiftingDiagram& d) {
  std::string out;
  for (const Step& s : d.steps) {
    if (!out.empty()) out += ',';
    out += describe(s);
  }
  if (d.termination == Termination::EmptyOrOneToK) out += ",gate";
  return out;
}

std::vector<Residue> diagram_levels(const LiftingDiagram& d) {
  std::vector<Residue> levels;
  Residue l = 1;
  for (std::size_t i = 0; i < d.steps.size(); ++i) {
    const Step& s = d.steps[i];
    if (s.kind == Step::Kind::Lift) {
      if (Wide{l} * s.factor >= kMaxModulus) throw Error(ErrorCode::Overflow, "diagram level overflows");
      l *= s.factor;
    } else {
      if (s.factor != l) {
        throw Error(ErrorCode::InvalidParams, "step " + std::to_string(i + 1) + " projects /" +
                                                  std::to_string(s.factor) + " but the current level is l = " +
                                                  std::to_string(l));
      }
      l = 1;
    }
    levels.push_back(l);
  }
  return levels;
}

void validate_diagram(const LiftingDiagram& d, int k) {
  diagram_levels(d);
  if (d.termination == Termination::EmptyOrOneToK && !(k + 1 > 2 && is_prime(static_cast<std::uint64_t>(k) + 1))) {
    throw Error(ErrorCode::InvalidParams, "the gate termination mode requires k + 1 to be an odd prime (k = " +
                                              std::to_string(k) + ")");
  }
}

LiftingDiagram diagram_from_name_or_spec(std::string_view text) {
  if (text == "k10" || text == "k12") return parse_diagram("x2,x2,x2,/8,gate");
  if (text == "k11") return parse_diagram("x2,x2,x2,x2,x3,x3");
  return parse_diagram(text);
}

}  // namespace lrc
