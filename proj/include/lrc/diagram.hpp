// diagram.hpp
// Lifting diagrams: an ordered program of lift (xC) and project (/D) steps
// applied to S1, written as comma-separated tokens, e.g. "x2,x2,x2,/8,gate".
// The optional final token "gate" selects the EmptyOrOneToK termination mode.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lrc/core.hpp"

namespace lrc {

struct Step {
  enum class Kind { Lift, Project };
  Kind kind;
  /// Lift factor c, or the declared divisor d of a projection pi_{dp -> p}.
  Residue factor;

  static Step lift(Residue c) { return {Kind::Lift, c}; }
  static Step project(Residue d) { return {Kind::Project, d}; }
  bool operator==(const Step&) const = default;
};

enum class Termination { MustBeEmpty, EmptyOrOneToK };

struct LiftingDiagram {
  std::vector<Step> steps;
  Termination termination = Termination::MustBeEmpty;

  bool operator==(const LiftingDiagram&) const = default;
};

/// Throws Error(Parse) naming the offending token and its character offset.
LiftingDiagram parse_diagram(std::string_view spec);
std::string render(const LiftingDiagram& d);
std::string describe(const Step& s);

/// Level l after each step, starting from l = 1. Throws InvalidParams when a
/// projection's declared divisor differs from the accumulated level.
std::vector<Residue> diagram_levels(const LiftingDiagram& d);

/// Checks the diagram against k: level bookkeeping, and that EmptyOrOneToK is
/// only used when k + 1 is an odd prime.
void validate_diagram(const LiftingDiagram& d, int k);

/// Built-in diagrams: "k10", "k11", "k12". Any other name is parsed as a spec.
LiftingDiagram diagram_from_name_or_spec(std::string_view text);

}  // namespace lrc
