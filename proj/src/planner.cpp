// planner.cpp

#include "lrc/planner.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "lrc/digest.hpp"
#include "lrc/witness.hpp"

namespace lrc {

namespace fs = std::filesystem;

// --- bound ------------------------------------------------------------------

BoundValue compute_bound(int k) {
  if (k < 3) throw Error(ErrorCode::InvalidParams, "B_k is defined for k >= 3, got " + std::to_string(k));
  const unsigned long pairs = static_cast<unsigned long>(k) * (k + 1) / 2;
  BoundValue b;
  b.k = k;
  mpz_ui_pow_ui(b.numerator.get_mpz_t(), pairs, static_cast<unsigned long>(k - 1) * k);
  mpz_ui_pow_ui(b.denominator.get_mpz_t(), static_cast<unsigned long>(k), static_cast<unsigned long>(k));
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), b.numerator.get_mpz_t(), b.denominator.get_mpz_t());
  b.numerator /= g;
  b.denominator /= g;
  b.ln = k * ((k - 1) * std::log(static_cast<double>(pairs)) - std::log(static_cast<double>(k)));
  return b;
}

double ln_of(const mpz_class& x) {
  if (x <= 0) throw Error(ErrorCode::InvalidParams, "ln of a nonpositive integer");
  long exp = 0;
  const double mantissa = mpz_get_d_2exp(&exp, x.get_mpz_t());
  return std::log(mantissa) + static_cast<double>(exp) * std::log(2.0);
}

std::string format_ln(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

// --- ledger -----------------------------------------------------------------

const char* to_string(Route r) { return r == Route::DiagramEmpty ? "diagram-empty" : "one-to-k+gate"; }

const char* to_string(Dependency::Kind kind) {
  switch (kind) {
    case Dependency::Kind::Trivial: return "trivial";
    case Dependency::Kind::Literature: return "literature";
    case Dependency::Kind::VerifiedHere: return "verified-here";
  }
  return "trivial";
}

namespace {

[[noreturn]] void bad_ledger(const std::string& what) { throw Error(ErrorCode::Corrupt, "ledger: " + what); }

Route route_from_string(const std::string& s) {
  if (s == "diagram-empty") return Route::DiagramEmpty;
  if (s == "one-to-k+gate") return Route::OneToKPlusGate;
  bad_ledger("unknown route " + s);
}

Dependency::Kind dependency_from_string(const std::string& s) {
  if (s == "trivial") return Dependency::Kind::Trivial;
  if (s == "literature") return Dependency::Kind::Literature;
  if (s == "verified-here") return Dependency::Kind::VerifiedHere;
  bad_ledger("unknown dependency kind " + s);
}

GateRoute gate_route_from_string(const std::string& s) {
  if (s == to_string(GateRoute::LargePrime)) return GateRoute::LargePrime;
  if (s == to_string(GateRoute::RkInclusion)) return GateRoute::RkInclusion;
  bad_ledger("unknown gate route " + s);
}

const std::string& field(const LogRecord& rec, const std::string& key) {
  auto it = rec.fields.find(key);
  if (it == rec.fields.end()) bad_ledger("record '" + rec.timestamp + "' lacks " + key);
  return it->second;
}

std::uint64_t field_u64(const LogRecord& rec, const std::string& key) {
  try {
    return std::stoull(field(rec, key));
  } catch (const std::logic_error&) {
    bad_ledger("bad integer for " + key);
  }
}

mpz_class field_mpz(const LogRecord& rec, const std::string& key) {
  mpz_class v;
  if (v.set_str(field(rec, key), 10) != 0) bad_ledger("bad integer for " + key);
  return v;
}

}  // namespace

std::string VerdictLedger::serialize() const {
  std::ostringstream out;
  out << "# lrc-ledger k=" << k << "\n";
  out << "diagram " << format_fields({{"spec", diagram}}) << "\n";
  out << "dependency " << format_fields({{"kind", to_string(dependency.kind)}, {"note", dependency.note}}) << "\n";
  for (const auto& c : certificates) {
    LogFields f{{"prime", std::to_string(c.prime)},
                {"route", to_string(c.route)},
                {"run", c.run},
                {"manifest_sha256", c.manifest_sha256},
                {"final_sha256", c.final_sha256}};
    if (c.gate) {
      const auto& g = *c.gate;
      f.insert(f.end(), {{"gate_route", to_string(g.route)},
                         {"gate_mode", g.exhaustive ? "exhaustive" : "sampled"},
                         {"gate_seed", std::to_string(g.seed)},
                         {"gate_checked", std::to_string(g.checked)},
                         {"gate_improper", std::to_string(g.improper)},
                         {"gate_gcd", std::to_string(g.by_gcd)},
                         {"gate_witness", std::to_string(g.by_witness)},
                         {"gate_decomposed", std::to_string(g.decomposed)}});
    }
    out << "cert " << format_fields(f) << "\n";
  }
  for (const auto& s : skipped) {
    out << "skip " << format_fields({{"prime", std::to_string(s.prime)}, {"reason", s.reason}}) << "\n";
  }
  out << "product " << format_fields({{"value", product.get_str()}}) << "\n";
  out << "bound "
      << format_fields({{"numerator", bound.numerator.get_str()}, {"denominator", bound.denominator.get_str()}})
      << "\n";
  out << "ln " << format_fields({{"product", format_ln(ln_of(product))}, {"bound", format_ln(bound.ln)}}) << "\n";
  LogFields v{{"value", verdict == Verdict::Verified ? "verified" : "inconclusive"}};
  if (verdict != Verdict::Verified) v.emplace_back("deficit_ln", format_ln(bound.ln - ln_of(product)));
  out << "verdict " << format_fields(v) << "\n";
  return out.str();
}

VerdictLedger VerdictLedger::parse(const std::string& text) {
  VerdictLedger l;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# lrc-ledger k=", 0) != 0) bad_ledger("missing header");
  try {
    l.k = std::stoi(line.substr(15));
  } catch (const std::logic_error&) {
    bad_ledger("bad k in header");
  }
  bool saw_bound = false, saw_verdict = false, saw_product = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto rec = parse_log_line(line);
    if (!rec) bad_ledger("unparseable line: " + line);
    const std::string& tag = rec->timestamp;
    if (tag == "diagram") {
      l.diagram = field(*rec, "spec");
    } else if (tag == "dependency") {
      l.dependency = {dependency_from_string(field(*rec, "kind")), field(*rec, "note")};
    } else if (tag == "cert") {
      Certificate c;
      c.prime = static_cast<Residue>(field_u64(*rec, "prime"));
      c.route = route_from_string(field(*rec, "route"));
      c.run = field(*rec, "run");
      c.manifest_sha256 = field(*rec, "manifest_sha256");
      c.final_sha256 = field(*rec, "final_sha256");
      if (rec->fields.count("gate_route")) {
        FiberCertificate g;
        g.k = l.k;
        g.p = c.prime;
        g.route = gate_route_from_string(field(*rec, "gate_route"));
        g.exhaustive = field(*rec, "gate_mode") == "exhaustive";
        g.seed = field_u64(*rec, "gate_seed");
        g.checked = field_u64(*rec, "gate_checked");
        g.improper = field_u64(*rec, "gate_improper");
        g.by_gcd = field_u64(*rec, "gate_gcd");
        g.by_witness = field_u64(*rec, "gate_witness");
        g.decomposed = field_u64(*rec, "gate_decomposed");
        c.gate = g;
      }
      l.certificates.push_back(std::move(c));
    } else if (tag == "skip") {
      l.skipped.push_back({static_cast<Residue>(field_u64(*rec, "prime")), field(*rec, "reason")});
    } else if (tag == "product") {
      l.product = field_mpz(*rec, "value");
      saw_product = true;
    } else if (tag == "bound") {
      l.bound.k = l.k;
      l.bound.numerator = field_mpz(*rec, "numerator");
      l.bound.denominator = field_mpz(*rec, "denominator");
      saw_bound = true;
    } else if (tag == "ln") {
      l.bound.ln = std::stod(field(*rec, "bound"));
    } else if (tag == "verdict") {
      const auto& v = field(*rec, "value");
      if (v != "verified" && v != "inconclusive") bad_ledger("unknown verdict " + v);
      l.verdict = v == "verified" ? Verdict::Verified : Verdict::Inconclusive;
      saw_verdict = true;
    } else {
      bad_ledger("unknown record " + tag);
    }
  }
  if (!saw_bound || !saw_verdict || !saw_product) bad_ledger("missing product, bound or verdict record");
  return l;
}

VerdictLedger VerdictLedger::load(const fs::path& path) { return parse(read_file(path)); }

void VerdictLedger::save(const fs::path& path) const { write_file_atomic(path, serialize()); }

fs::path ledger_path(const fs::path& workdir, int k) { return workdir / ("ledger_k" + std::to_string(k) + ".txt"); }

// --- dependency ---------------------------------------------------------------

Dependency resolve_dependency(int k, const fs::path& workdir, bool assume_literature) {
  const int prev = k - 1;
  if (prev <= 2) return {Dependency::Kind::Trivial, "LRC(" + std::to_string(prev) + ") is trivial"};
  const fs::path prev_ledger = ledger_path(workdir, prev);
  if (fs::exists(prev_ledger)) {
    const auto l = VerdictLedger::load(prev_ledger);
    if (l.verdict == Verdict::Verified && verify_ledger(l, workdir).passed) {
      return {Dependency::Kind::VerifiedHere, prev_ledger.filename().string()};
    }
  }
  if (assume_literature) {
    if (prev > kLiteratureMaxK) {
      throw Error(ErrorCode::Usage, "LRC(" + std::to_string(prev) + ") cannot be assumed from the literature; "
                                    "verify it in this workdir first");
    }
    return {Dependency::Kind::Literature, "published proof of LRC(" + std::to_string(prev) + ")"};
  }
  throw Error(ErrorCode::Usage, "LRC(" + std::to_string(prev) + ") is not established: no verified " +
                                    prev_ledger.filename().string() + " in " + workdir.string() +
                                    " (run plan for k=" + std::to_string(prev) + " or pass --assume-literature)");
}

// --- campaign -----------------------------------------------------------------

namespace {

std::vector<Residue> auto_primes(int k, Residue limit) {
  std::vector<Residue> out;
  for (std::uint64_t p = next_prime(static_cast<std::uint64_t>(k) + 1); p <= limit; p = next_prime(p)) {
    out.push_back(static_cast<Residue>(p));
  }
  return out;
}

void log_event(RunLog* log, LogLevel level, const std::string& stage, const std::string& event,
               const LogFields& fields) {
  if (log) log->event(level, stage, event, fields);
}

}  // namespace

VerdictLedger plan_primes(int k, const PlanOptions& options) {
  validate_diagram(options.diagram, k);
  VerdictLedger ledger;
  ledger.k = k;
  ledger.diagram = render(options.diagram);
  ledger.bound = compute_bound(k);
  ledger.dependency = resolve_dependency(k, options.workdir, options.assume_literature);
  const bool use_gate = options.diagram.termination == Termination::EmptyOrOneToK;
  const fs::path out_path = ledger_path(options.workdir, k);
  const std::string stage = "plan-k" + std::to_string(k);

  log_event(options.log, LogLevel::Info, stage, "plan_start",
            {{"k", std::to_string(k)}, {"diagram", ledger.diagram},
             {"dependency", to_string(ledger.dependency.kind)}, {"ln_bound", format_ln(ledger.bound.ln)}});

  const std::vector<Residue> candidates = options.primes ? *options.primes : auto_primes(k, options.auto_limit);
  std::set<Residue> seen;
  auto skip = [&](Residue p, const std::string& reason) {
    ledger.skipped.push_back({p, reason});
    log_event(options.log, LogLevel::Warn, stage, "prime_skipped", {{"p", std::to_string(p)}, {"reason", reason}});
  };

  for (Residue p : candidates) {
    if (ledger.bound.met_by(ledger.product)) break;
    if (!seen.insert(p).second) continue;
    if (!is_prime(p) || p < 3) {
      skip(p, "not an odd prime");
      ledger.save(out_path);
      continue;
    }
    if (use_gate) {
      try {
        gate_route(k, p);
      } catch (const Error& e) {
        skip(p, e.what());
        ledger.save(out_path);
        continue;
      }
    }

    const std::string run = "k" + std::to_string(k) + "/p" + std::to_string(p);
    const fs::path run_dir = options.workdir / run;
    RunOptions ro;
    ro.threads = options.threads;
    ro.resume = true;
    ro.log = options.log;
    try {
      const DiagramOutcome outcome = run_diagram(k, p, options.diagram, run_dir, ro);
      Certificate cert;
      cert.prime = p;
      cert.run = run;
      cert.manifest_sha256 = sha256_file(outcome.manifest_path);
      cert.final_sha256 = outcome.stages.back().digest;
      if (outcome.outcome == Outcome::Empty) {
        cert.route = Route::DiagramEmpty;
      } else if (outcome.outcome == Outcome::OnlyOneToK) {
        GateOptions go = options.gate;
        go.threads = options.threads;
        cert.route = Route::OneToKPlusGate;
        cert.gate = certify_one_to_k(k, p, go);
        if (!cert.gate->open()) {
          skip(p, "gate verification found " + std::to_string(cert.gate->improper) + " improper fiber elements");
          ledger.save(out_path);
          continue;
        }
      } else {
        skip(p, "diagram left " + std::to_string(outcome.final_set.size()) + " survivors");
        ledger.save(out_path);
        continue;
      }
      ledger.product *= p;
      log_event(options.log, LogLevel::Info, stage, "prime_certified",
                {{"p", std::to_string(p)}, {"route", to_string(cert.route)},
                 {"ln_product", format_ln(ln_of(ledger.product))}});
      ledger.certificates.push_back(std::move(cert));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Corrupt || e.code() == ErrorCode::Io) throw;
      skip(p, e.what());
    }
    ledger.verdict = ledger.bound.met_by(ledger.product) ? Verdict::Verified : Verdict::Inconclusive;
    ledger.save(out_path);
  }

  ledger.verdict = ledger.bound.met_by(ledger.product) ? Verdict::Verified : Verdict::Inconclusive;
  ledger.save(out_path);
  LogFields done{{"k", std::to_string(k)},
                 {"verdict", ledger.verdict == Verdict::Verified ? "verified" : "inconclusive"},
                 {"primes", std::to_string(ledger.certificates.size())},
                 {"ln_product", format_ln(ln_of(ledger.product))}};
  if (ledger.verdict != Verdict::Verified) done.emplace_back("deficit_ln", format_ln(ledger.bound.ln - ln_of(ledger.product)));
  log_event(options.log, LogLevel::Info, stage, "plan_complete", done);
  return ledger;
}

// --- verification and audit -----------------------------------------------------

void CheckReport::record(bool ok, const std::string& what) {
  lines.push_back((ok ? "PASS " : "FAIL ") + what);
  passed = passed && ok;
}

CheckReport verify_ledger(const VerdictLedger& ledger, const fs::path& workdir) {
  CheckReport r;
  const std::string tag = "k=" + std::to_string(ledger.k) + ": ";
  std::set<Residue> primes;
  mpz_class product = 1;
  bool distinct = true, all_prime = true;
  for (const auto& c : ledger.certificates) {
    distinct = primes.insert(c.prime).second && distinct;
    all_prime = is_prime(c.prime) && all_prime;
    product *= c.prime;
  }
  r.record(distinct, tag + "certified primes are distinct");
  r.record(all_prime, tag + "certified values are prime");
  r.record(product == ledger.product, tag + "recorded product equals the product of certified primes");

  const BoundValue bound = compute_bound(ledger.k);
  r.record(bound.numerator == ledger.bound.numerator && bound.denominator == ledger.bound.denominator,
           tag + "recorded B_k matches the exact recomputation");
  const bool met = bound.met_by(product);
  r.record(ledger.verdict != Verdict::Verified || met,
           tag + "product " + (met ? ">=" : "<") + " B_k (exact cross-multiplication)");

  bool gates_ok = true;
  LiftingDiagram diagram;
  try {
    diagram = parse_diagram(ledger.diagram);
  } catch (const Error&) {
    gates_ok = false;
  }
  for (const auto& c : ledger.certificates) {
    if (c.route != Route::OneToKPlusGate) continue;
    bool ok = c.gate && c.gate->open() && diagram.termination == Termination::EmptyOrOneToK;
    try {
      ok = ok && gate_route(ledger.k, c.prime) == c.gate->route;
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) r.record(false, tag + "gate certificate for p=" + std::to_string(c.prime) + " is not open");
    gates_ok = gates_ok && ok;
  }
  r.record(gates_ok, tag + "every one-to-k+gate certificate has an open gate");

  const int prev = ledger.k - 1;
  switch (ledger.dependency.kind) {
    case Dependency::Kind::Trivial:
      r.record(prev <= 2, tag + "dependency LRC(" + std::to_string(prev) + ") is trivial");
      break;
    case Dependency::Kind::Literature:
      r.record(prev <= kLiteratureMaxK, tag + "dependency LRC(" + std::to_string(prev) + ") cited from literature");
      break;
    case Dependency::Kind::VerifiedHere: {
      const fs::path p = ledger_path(workdir, prev);
      if (!fs::exists(p)) {
        r.record(false, tag + "dependency ledger " + p.filename().string() + " is missing");
        break;
      }
      const auto sub = verify_ledger(VerdictLedger::load(p), workdir);
      for (const auto& line : sub.lines) r.lines.push_back("  " + line);
      r.record(sub.passed && VerdictLedger::load(p).verdict == Verdict::Verified,
               tag + "dependency LRC(" + std::to_string(prev) + ") verified in this workdir");
      break;
    }
  }
  return r;
}

namespace {

// gcd(l, coords without i) > 1 for some i, by direct recomputation.
bool gcd_condition_direct(std::span<const Residue> coords, Residue l) {
  for (std::size_t i = 0; i < coords.size(); ++i) {
    Residue g = l;
    for (std::size_t j = 0; j < coords.size(); ++j) {
      if (j != i) g = std::gcd(g, coords[j]);
    }
    if (g > 1) return true;
  }
  return false;
}

bool has_any_witness(std::span<const Residue> coords, int k, Residue lp) {
  for (Residue a = 0; a < lp; ++a) {
    if (witness_certificate_check(coords, k, lp, a)) return true;
  }
  return false;
}

void audit_certificate(const VerdictLedger& ledger, const Certificate& c, const fs::path& workdir,
                       const AuditOptions& options, CheckReport& r) {
  const std::string tag = "k=" + std::to_string(ledger.k) + " p=" + std::to_string(c.prime) + ": ";
  const fs::path run_dir = workdir / c.run;
  const fs::path manifest_path = run_dir / kManifestName;
  if (!fs::exists(manifest_path)) {
    r.record(false, tag + "manifest missing at " + manifest_path.string());
    return;
  }
  r.record(sha256_file(manifest_path) == c.manifest_sha256, tag + "manifest digest matches ledger");
  const Manifest m = Manifest::load(manifest_path);
  const auto bad = verify_stage_digests(run_dir, m);
  r.record(!bad, tag + "stage file digests" + (bad ? " mismatch at stage " + *bad : " match"));
  if (bad) return;
  r.record(m.k == ledger.k && m.p == c.prime && m.diagram == ledger.diagram && m.complete,
           tag + "manifest parameters and completion");
  if (m.stages.empty()) return;
  r.record(m.stages.back().digest == c.final_sha256, tag + "final stage digest matches ledger");

  const LiftingDiagram diagram = parse_diagram(m.diagram);
  const TupleSet final_set = TupleSet::load(run_dir / m.stages.back().file);
  const Outcome outcome = classify_final(final_set, diagram);
  const Outcome expected = c.route == Route::DiagramEmpty ? Outcome::Empty : Outcome::OnlyOneToK;
  r.record(outcome == expected, tag + "final stage " + m.stages.back().label + " is " + to_string(outcome) +
                                    ", ledger route " + to_string(c.route));

  // Re-derive the last lift on a seeded sample of its fiber.
  std::size_t last_lift = 0;
  for (std::size_t i = 1; i < m.stages.size(); ++i) {
    if (m.stages[i].step.front() == 'x') last_lift = i;
  }
  if (last_lift > 0) {
    const auto& st = m.stages[last_lift];
    const TupleSet input = TupleSet::load(run_dir / m.stages[last_lift - 1].file);
    const TupleSet output = TupleSet::load(run_dir / st.file);
    const Residue factor = static_cast<Residue>(std::stoul(st.step.substr(1)));
    const AnsatzParams target = input.params().lifted(factor);
    const WitnessTable table(target);
    std::mt19937_64 rng(options.seed ^ (Wide{c.prime} << 20) ^ static_cast<Wide>(ledger.k));
    std::size_t witnesses = 0, failures = 0, improper = 0, gcds = 0;
    std::vector<Residue> u(static_cast<std::size_t>(ledger.k));
    for (std::size_t s = 0; s < options.fiber_samples && !input.empty(); ++s) {
      const auto src = input[std::uniform_int_distribution<std::size_t>(0, input.size() - 1)(rng)];
      for (std::size_t j = 0; j < u.size(); ++j) {
        u[j] = src[j] + std::uniform_int_distribution<Residue>(0, factor - 1)(rng) * input.params().modulus();
      }
      const ProperVerdict v = is_proper(u, table);
      bool ok = true;
      switch (v.kind) {
        case ProperVerdict::Kind::ByWitness:
          ++witnesses;
          ok = witness_certificate_check(u, ledger.k, target.modulus(), v.value);
          break;
        case ProperVerdict::Kind::ByGcd:
          ++gcds;
          ok = gcd_condition_direct(u, target.l());
          break;
        case ProperVerdict::Kind::Improper:
          ++improper;
          ok = output.contains(u) && !gcd_condition_direct(u, target.l()) &&
               !has_any_witness(u, ledger.k, target.modulus());
          break;
      }
      if (!ok) ++failures;
    }
    r.record(failures == 0, tag + "stage " + st.label + ": " + std::to_string(witnesses) +
                                " sampled witness certificates, " + std::to_string(gcds) + " gcd, " +
                                std::to_string(improper) + " improper re-checked, " + std::to_string(failures) +
                                " failures");
    std::size_t member_failures = 0;
    const std::size_t members = std::min(options.member_checks, output.size());
    for (std::size_t i = 0; i < members; ++i) {
      const auto t = output[i];
      if (gcd_condition_direct(t, target.l()) || has_any_witness(t, ledger.k, target.modulus())) ++member_failures;
    }
    r.record(member_failures == 0, tag + "stage " + st.label + ": " + std::to_string(members) +
                                       " members confirmed improper by full scan");
  }
  // A final projection is recomputed exactly.
  if (m.stages.size() >= 2 && m.stages.back().step.front() == '/') {
    TupleSet again = project(TupleSet::load(run_dir / m.stages[m.stages.size() - 2].file));
    again.set_label(final_set.label());
    r.record(sha256_hex(again.serialize()) == m.stages.back().digest,
             tag + "final projection recomputed byte-identically");
  }
  if (c.route == Route::OneToKPlusGate) {
    bool ok = c.gate.has_value() && c.gate->open();
    try {
      ok = ok && gate_route(ledger.k, c.prime) == c.gate->route;
    } catch (const Error&) {
      ok = false;
    }
    r.record(ok, tag + "gate preconditions hold and the fiber check found no improper element");
  }
}

}  // namespace

CheckReport audit(const VerdictLedger& ledger, const fs::path& workdir, const AuditOptions& options) {
  CheckReport r;
  for (const auto& c : ledger.certificates) audit_certificate(ledger, c, workdir, options, r);
  const CheckReport v = verify_ledger(ledger, workdir);
  for (const auto& line : v.lines) r.lines.push_back(line);
  r.passed = r.passed && v.passed;
  const BoundValue bound = compute_bound(ledger.k);
  mpz_class product = 1;
  for (const auto& c : ledger.certificates) product *= c.prime;
  const bool met = bound.met_by(product);
  r.record(ledger.verdict != Verdict::Verified || met,
           "k=" + std::to_string(ledger.k) + ": bound comparison " + (met ? "met" : "not met") +
               " for the certified primes (ln product " + format_ln(ln_of(product)) + ", ln B_k " +
               format_ln(bound.ln) + ")");
  return r;
}

}  // namespace lrc
