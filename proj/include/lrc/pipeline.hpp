// pipeline.hpp
// Lifting and backward projection of tuple sets, and execution of lifting
// diagrams with checkpointed, resumable stage files.
//
// A run directory holds one immutable file per stage (S1.txt, S2.txt, ...) and
// manifest.json recording stage order, parameters, counts and SHA-256 digests.
// Stages are published write-then-rename and the manifest is rewritten the
// same way after each stage.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lrc/diagram.hpp"
#include "lrc/log.hpp"
#include "lrc/tuple_set.hpp"

namespace lrc {

/// Improper members of the fiber of S under pi_{c lp -> lp}, at level c l.
/// Throws Overflow naming the maximal admissible c.
TupleSet lift(const TupleSet& s, Residue c, unsigned threads = 1);

/// pi_{lp -> p} followed by canonicalization; result is at l = 1.
TupleSet project(const TupleSet& s, unsigned threads = 1);

/// canonicalize((1, 2, ..., k), p); requires p > k.
std::vector<Residue> canonical_one_to_k(int k, Residue p);

struct StageReport {
  std::size_t index = 0;  // 1 for S1
  std::string step;       // "sieve", "x2", "/8"
  std::string label;
  Residue level = 1;
  std::size_t input_count = 0;
  std::size_t output_count = 0;
  double wall_seconds = 0;
  unsigned workers = 1;
  std::string digest;
  std::string file;

  bool operator==(const StageReport&) const = default;
};

enum class Outcome { Empty, OnlyOneToK, Survivors };
const char* to_string(Outcome o);
Outcome outcome_from_string(const std::string& s);

struct RunOptions {
  unsigned threads = 1;
  bool resume = false;
  /// Stop after this many diagram steps (S1 is not a step). Used to run a
  /// campaign in batches; a later call with resume continues.
  std::optional<std::size_t> stop_after_steps;
  RunLog* log = nullptr;
};

struct DiagramOutcome {
  Outcome outcome = Outcome::Survivors;
  bool complete = false;
  TupleSet final_set;
  std::vector<StageReport> stages;
  std::filesystem::path manifest_path;
};

/// Runs sieve_initial and every step of d, checkpointing each stage into
/// run_dir. With resume, continues after the last recorded stage once every
/// recorded digest has been verified; a mismatch throws Error(Corrupt) naming
/// the stage. Without resume, an existing manifest is a usage error.
DiagramOutcome run_diagram(int k, Residue p, const LiftingDiagram& d, const std::filesystem::path& run_dir,
                           const RunOptions& options = {});

/// Classification of a final set under the diagram's termination mode.
Outcome classify_final(const TupleSet& final_set, const LiftingDiagram& d);

struct Manifest {
  int k = 0;
  Residue p = 0;
  std::string diagram;
  std::vector<StageReport> stages;
  bool complete = false;
  std::optional<Outcome> outcome;

  std::string serialize() const;
  static Manifest parse(const std::string& text);
  static Manifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

inline constexpr const char* kManifestName = "manifest.json";

/// Recomputes the digest of every stage listed in the manifest. Returns the
/// label of the first mismatching or missing stage, if any.
std::optional<std::string> verify_stage_digests(const std::filesystem::path& run_dir, const Manifest& m);

/// StageReports reconstructed from stage_complete events of a run log.
std::vector<StageReport> replay_stage_reports(const std::filesystem::path& log_path, int k, Residue p);

}  // namespace lrc
