// planner.hpp
// Exact bound B_k, per-prime certification campaigns, the verdict ledger and
// its independent audit.
//
// Ledger file (workdir/ledger_k<k>.txt), one record per line:
//
//   # lrc-ledger k=<k>
//   diagram spec=<diagram>
//   dependency kind=<trivial|literature|verified-here> note=<text>
//   cert prime=<p> route=<diagram-empty|one-to-k+gate> run=<dir> manifest_sha256=<hex> final_sha256=<hex> [gate_*=...]
//   skip prime=<p> reason=<text>
//   product value=<decimal>
//   bound numerator=<decimal> denominator=<decimal>
//   ln product=<x.xxxxxx> bound=<x.xxxxxx>
//   verdict value=<verified|inconclusive> [deficit_ln=<x.xxxxxx>]

#pragma once

#include <gmpxx.h>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lrc/analytic.hpp"
#include "lrc/diagram.hpp"
#include "lrc/log.hpp"
#include "lrc/pipeline.hpp"

namespace lrc {

/// B_k = (C(k+1,2)^(k-1) / k)^k held as an exact reduced fraction.
struct BoundValue {
  int k = 0;
  mpz_class numerator;
  mpz_class denominator;
  double ln = 0;  // display only

  /// product >= B_k, by cross-multiplication.
  bool met_by(const mpz_class& product) const { return product * denominator >= numerator; }
};

BoundValue compute_bound(int k);

/// Natural log of a positive integer (display only).
double ln_of(const mpz_class& x);

/// Fixed 6-decimal rendering.
std::string format_ln(double x);

enum class Route { DiagramEmpty, OneToKPlusGate };
const char* to_string(Route r);

struct Certificate {
  Residue prime = 0;
  Route route = Route::DiagramEmpty;
  std::string run;  // run directory relative to the workdir
  std::string manifest_sha256;
  std::string final_sha256;
  std::optional<FiberCertificate> gate;
};

struct SkippedPrime {
  Residue prime = 0;
  std::string reason;
};

struct Dependency {
  enum class Kind { Trivial, Literature, VerifiedHere };
  Kind kind = Kind::Trivial;
  std::string note;
};
const char* to_string(Dependency::Kind kind);

enum class Verdict { Verified, Inconclusive };

struct VerdictLedger {
  int k = 0;
  std::string diagram;
  Dependency dependency;
  std::vector<Certificate> certificates;
  std::vector<SkippedPrime> skipped;
  mpz_class product = 1;
  BoundValue bound;
  Verdict verdict = Verdict::Inconclusive;

  std::string serialize() const;
  static VerdictLedger parse(const std::string& text);
  static VerdictLedger load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

std::filesystem::path ledger_path(const std::filesystem::path& workdir, int k);

/// Largest k - 1 for which --assume-literature may cite a published proof.
inline constexpr int kLiteratureMaxK = 9;

/// LRC(k-1) status for a campaign on k. Prefers a verified ledger for k - 1 in
/// the workdir; otherwise trivial (k - 1 <= 2) or literature when allowed.
/// Throws Usage when the dependency cannot be satisfied.
Dependency resolve_dependency(int k, const std::filesystem::path& workdir, bool assume_literature);

struct PlanOptions {
  std::filesystem::path workdir;
  LiftingDiagram diagram;
  unsigned threads = 1;
  bool assume_literature = false;
  /// Explicit candidate primes, used in the order given. Otherwise primes are
  /// taken ascending from k + 2 up to auto_limit.
  std::optional<std::vector<Residue>> primes;
  Residue auto_limit = 100'000;
  GateOptions gate;
  RunLog* log = nullptr;
};

/// Certifies primes until the exact product reaches B_k, persisting the ledger
/// after every prime.
VerdictLedger plan_primes(int k, const PlanOptions& options);

struct CheckReport {
  bool passed = true;
  std::vector<std::string> lines;  // one per check, prefixed PASS / FAIL

  void record(bool ok, const std::string& what);
};

/// Consistency of a ledger on its own: distinct primes, exact product,
/// recomputed bound, gates open, verdict justified; recursively the k - 1
/// ledger when the dependency is verified-here.
CheckReport verify_ledger(const VerdictLedger& ledger, const std::filesystem::path& workdir);

struct AuditOptions {
  std::uint64_t seed = 1;
  std::size_t fiber_samples = 256;
  std::size_t member_checks = 256;
};

/// Independent re-verification against the run directories: stage digests,
/// final-stage content, sampled witness certificates of the last lift, the
/// exact product-vs-bound comparison and gate preconditions.
CheckReport audit(const VerdictLedger& ledger, const std::filesystem::path& workdir, const AuditOptions& options = {});

}  // namespace lrc
