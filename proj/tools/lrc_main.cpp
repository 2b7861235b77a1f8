// lrc_main.cpp
// Command-line entry point. Exit codes: 0 verdict reached (Inconclusive
// included), 1 usage error, 2 internal or audit failure.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <regex>

#include "lrc/analytic.hpp"
#include "lrc/diagram.hpp"
#include "lrc/pipeline.hpp"
#include "lrc/planner.hpp"
#include "lrc/sieve.hpp"

namespace fs = std::filesystem;
using namespace lrc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;

struct Config {
  int k = 0;
  Residue p = 0;
  Residue c = 0;
  std::string in, out, spec, primes = "auto", workdir;
  unsigned threads = 1;
  std::uint64_t seed = 1;
  bool resume = false, assume_literature = false, exhaustive = false, quiet = false;
  std::uint64_t samples = 10'000;
  std::uint64_t cap = 0;
  std::size_t stop_after = 0;
  Residue prime_limit = 100'000;
  std::size_t fiber_samples = 256, member_checks = 256;
};

std::vector<Residue> read_prime_file(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<Residue> out;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    line = line.substr(0, line.find('#'));
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream words(line);
    for (std::string w; words >> w;) {
      try {
        std::size_t used = 0;
        const unsigned long v = std::stoul(w, &used);
        if (used != w.size() || v >= kMaxModulus) throw std::invalid_argument(w);
        out.push_back(static_cast<Residue>(v));
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::Usage, "prime file " + path.string() + ": bad entry '" + w + "'");
      }
    }
  }
  return out;
}

void print_stage(const StageReport& s) {
  std::cout << "stage " << s.label << " level=" << s.level << " in=" << s.input_count << " out=" << s.output_count
            << " seconds=" << s.wall_seconds << " sha256=" << s.digest << "\n";
}

void print_certificate(const FiberCertificate& c) {
  std::cout << "gate k=" << c.k << " p=" << c.p << " route=" << to_string(c.route)
            << " mode=" << (c.exhaustive ? "exhaustive" : "sampled") << " seed=" << c.seed
            << " checked=" << c.checked << " gcd=" << c.by_gcd << " witness=" << c.by_witness
            << " decomposed=" << c.decomposed << " improper=" << c.improper << " open=" << (c.open() ? "yes" : "no")
            << "\n";
}

int report(const CheckReport& r) {
  for (const auto& line : r.lines) std::cout << line << "\n";
  std::cout << (r.passed ? "result PASS" : "result FAIL") << "\n";
  return r.passed ? kExitOk : kExitFailure;
}

int cmd_sieve(const Config& cfg) {
  const TupleSet s = sieve_initial(cfg.k, cfg.p, {cfg.threads, true});
  const fs::path out = fs::path(cfg.out) / "S1.txt";
  fs::create_directories(cfg.out);
  s.save_atomic(out);
  std::cout << "S1 k=" << cfg.k << " p=" << cfg.p << " count=" << s.size() << " file=" << out.string() << "\n";
  return kExitOk;
}

int cmd_lift(const Config& cfg) {
  const TupleSet in = TupleSet::load(cfg.in);
  const TupleSet out = lift(in, cfg.c, cfg.threads);
  out.save_atomic(cfg.out);
  std::cout << out.label() << " l=" << out.params().l() << " in=" << in.size() << " out=" << out.size() << "\n";
  return kExitOk;
}

int cmd_project(const Config& cfg) {
  const TupleSet in = TupleSet::load(cfg.in);
  TupleSet out = project(in, cfg.threads);
  out.set_label("/" + std::to_string(in.params().l()) + "(" + in.label() + ")");
  out.save_atomic(cfg.out);
  std::cout << out.label() << " l=1 in=" << in.size() << " out=" << out.size() << "\n";
  return kExitOk;
}

int cmd_diagram(const Config& cfg) {
  const LiftingDiagram d = diagram_from_name_or_spec(cfg.spec);
  validate_diagram(d, cfg.k);
  fs::create_directories(cfg.workdir);
  RunLog log(fs::path(cfg.workdir) / "run.log", !cfg.quiet);
  RunOptions ro;
  ro.threads = cfg.threads;
  ro.resume = cfg.resume;
  ro.log = &log;
  if (cfg.stop_after > 0) ro.stop_after_steps = cfg.stop_after;
  const DiagramOutcome r = run_diagram(cfg.k, cfg.p, d, cfg.workdir, ro);
  for (const auto& s : r.stages) print_stage(s);
  if (!r.complete) {
    std::cout << "outcome incomplete stages=" << r.stages.size() << "/" << d.steps.size() + 1 << "\n";
    return kExitOk;
  }
  std::cout << "outcome " << to_string(r.outcome) << " final_count=" << r.final_set.size() << "\n";
  if (r.outcome == Outcome::OnlyOneToK) std::cout << "note J(k,p) is empty only if the gate passes for (k,p)\n";
  return kExitOk;
}

int cmd_poly_check(const Config& cfg) {
  const PolyReport r = cfg.exhaustive
                           ? poly_check_all_exhaustive(cfg.k, cfg.cap ? cfg.cap : kPolyExhaustiveCap, cfg.threads)
                           : poly_check_all_sample(cfg.k, cfg.samples, cfg.seed, cfg.threads);
  std::cout << "poly-check k=" << r.k << " mode=" << (r.exhaustive ? "exhaustive" : "sampled");
  if (!r.exhaustive) std::cout << " seed=" << r.seed;
  std::cout << " checked=" << r.checked;
  if (r.exhaustive) std::cout << " |N_k|=" << nk_size(r.k);
  std::cout << " counterexamples=" << r.counterexamples.size() << "\n";
  for (std::size_t i = 0; i < std::min<std::size_t>(r.counterexamples.size(), 10); ++i) {
    std::cout << "counterexample";
    for (int x : r.counterexamples[i]) std::cout << " " << x;
    std::cout << "\n";
  }
  return r.counterexamples.empty() ? kExitOk : kExitFailure;
}

int cmd_rk_check(const Config& cfg) {
  if (!is_prime(cfg.p)) throw Error(ErrorCode::NotPrime, std::to_string(cfg.p) + " is not prime");
  const bool inc = rk_inclusion(cfg.k, cfg.p);
  std::cout << "rk-inclusion k=" << cfg.k << " p=" << cfg.p << " " << (inc ? "holds" : "fails")
            << " |image(k+1)|=" << rk_image(cfg.k, cfg.k + 1).size() << " |image(p)|=" << rk_image(cfg.k, cfg.p).size()
            << "\n";
  return kExitOk;
}

int cmd_gate(const Config& cfg) {
  GateOptions go;
  go.seed = cfg.seed;
  go.samples = cfg.samples;
  go.threads = cfg.threads;
  if (cfg.cap) go.exhaustive_cap = cfg.cap;
  const FiberCertificate c = certify_one_to_k(cfg.k, cfg.p, go);
  print_certificate(c);
  return c.open() ? kExitOk : kExitFailure;
}

int cmd_plan(const Config& cfg) {
  PlanOptions po;
  po.workdir = cfg.workdir;
  po.diagram = diagram_from_name_or_spec(cfg.spec);
  po.threads = cfg.threads;
  po.assume_literature = cfg.assume_literature;
  po.auto_limit = cfg.prime_limit;
  if (cfg.primes != "auto") po.primes = read_prime_file(cfg.primes);
  po.gate.seed = cfg.seed;
  po.gate.samples = cfg.samples;
  if (cfg.cap) po.gate.exhaustive_cap = cfg.cap;
  fs::create_directories(po.workdir);
  RunLog log(po.workdir / "run.log", !cfg.quiet);
  po.log = &log;
  const VerdictLedger l = plan_primes(cfg.k, po);
  std::cout << "ledger " << ledger_path(po.workdir, cfg.k).string() << "\n";
  std::cout << "certified " << l.certificates.size() << " primes, skipped " << l.skipped.size() << "\n";
  std::cout << "ln product " << format_ln(ln_of(l.product)) << " ln B_k " << format_ln(l.bound.ln) << "\n";
  if (l.verdict == Verdict::Verified) {
    std::cout << "verdict LRC(" << cfg.k << ") verified\n";
  } else {
    std::cout << "verdict inconclusive deficit_ln " << format_ln(l.bound.ln - ln_of(l.product)) << "\n";
  }
  return kExitOk;
}

int cmd_verify(const Config& cfg) {
  const fs::path path = ledger_path(cfg.workdir, cfg.k);
  if (!fs::exists(path)) throw Error(ErrorCode::Usage, "no ledger at " + path.string());
  const VerdictLedger l = VerdictLedger::load(path);
  const int rc = report(verify_ledger(l, cfg.workdir));
  std::cout << "verdict " << (l.verdict == Verdict::Verified ? "verified" : "inconclusive") << "\n";
  return rc;
}

int cmd_audit(const Config& cfg) {
  std::vector<std::pair<int, fs::path>> ledgers;
  const std::regex name(R"(ledger_k(\d+)\.txt)");
  if (!fs::is_directory(cfg.workdir)) throw Error(ErrorCode::Usage, "no workdir " + cfg.workdir);
  for (const auto& e : fs::directory_iterator(cfg.workdir)) {
    std::smatch m;
    const std::string f = e.path().filename().string();
    if (std::regex_match(f, m, name) && (cfg.k == 0 || std::stoi(m[1]) == cfg.k)) {
      ledgers.emplace_back(std::stoi(m[1]), e.path());
    }
  }
  if (ledgers.empty()) throw Error(ErrorCode::Usage, "no ledgers in " + cfg.workdir);
  std::sort(ledgers.begin(), ledgers.end());
  RunLog log(fs::path(cfg.workdir) / "run.log", false);
  AuditOptions ao{cfg.seed, cfg.fiber_samples, cfg.member_checks};
  bool passed = true;
  for (const auto& [k, path] : ledgers) {
    std::cout << "audit " << path.filename().string() << "\n";
    CheckReport r;
    try {
      r = audit(VerdictLedger::load(path), cfg.workdir, ao);
    } catch (const Error& e) {
      r.record(false, std::string("k=") + std::to_string(k) + ": " + e.what());
    }
    for (const auto& line : r.lines) {
      std::cout << line << "\n";
      if (line.rfind("FAIL", 0) == 0) log.event(LogLevel::Error, "audit", "audit_failure", {{"check", line.substr(5)}});
    }
    log.event(r.passed ? LogLevel::Info : LogLevel::Error, "audit", "audit_complete",
              {{"ledger", path.filename().string()}, {"result", r.passed ? "pass" : "fail"}});
    passed = passed && r.passed;
  }
  std::cout << (passed ? "result PASS" : "result FAIL") << "\n";
  return passed ? kExitOk : kExitFailure;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Corrupt:
    case ErrorCode::Io:
      return kExitFailure;
    default:
      return kExitUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lonely runner verification by sieving, lifting and prime certificates"};
  app.require_subcommand(1);
  Config cfg;

  auto add_threads = [&](CLI::App* s) {
    s->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);
  };
  auto add_seed = [&](CLI::App* s) { s->add_option("--seed", cfg.seed, "Seed for every sampled check"); };
  auto add_kp = [&](CLI::App* s) {
    s->add_option("--k", cfg.k, "Number of runners")->required();
    s->add_option("--p", cfg.p, "Prime")->required();
  };

  auto* sieve = app.add_subcommand("sieve", "Compute S1 = canonical I(k,p,1)");
  add_kp(sieve);
  sieve->add_option("--out", cfg.out, "Output directory")->required();
  add_threads(sieve);

  auto* lift_cmd = app.add_subcommand("lift", "Lift a stage file by a factor c");
  lift_cmd->add_option("--in", cfg.in)->required()->check(CLI::ExistingFile);
  lift_cmd->add_option("--c", cfg.c)->required();
  lift_cmd->add_option("--out", cfg.out)->required();
  add_threads(lift_cmd);

  auto* project_cmd = app.add_subcommand("project", "Project a stage file back to l = 1");
  project_cmd->add_option("--in", cfg.in)->required()->check(CLI::ExistingFile);
  project_cmd->add_option("--out", cfg.out)->required();
  add_threads(project_cmd);

  auto* diagram = app.add_subcommand("diagram", "Run a lifting diagram with checkpoints");
  add_kp(diagram);
  diagram->add_option("--spec", cfg.spec, "Diagram, e.g. x2,x2,/4 or a preset k10|k11|k12")->required();
  diagram->add_option("--workdir", cfg.workdir, "Run directory")->required();
  diagram->add_flag("--resume", cfg.resume, "Continue from the last intact stage");
  diagram->add_option("--stop-after", cfg.stop_after, "Stop after this many steps (batch mode)");
  diagram->add_flag("--quiet", cfg.quiet, "Do not echo log events to stderr");
  add_threads(diagram);

  auto* poly = app.add_subcommand("poly-check", "Check the unit-pair statement on N_k");
  poly->add_option("--k", cfg.k)->required();
  auto* ex = poly->add_flag("--exhaustive", cfg.exhaustive, "Enumerate all of N_k");
  poly->add_option("--samples", cfg.samples, "Random vectors when sampling")->excludes(ex);
  poly->add_option("--cap", cfg.cap, "Override the exhaustive size cap");
  add_seed(poly);
  add_threads(poly);

  auto* rk = app.add_subcommand("rk-check", "Test the r_k image inclusion for (k, p)");
  add_kp(rk);

  auto* gate = app.add_subcommand("gate", "Certify that (1..k) is eventually proper for (k, p)");
  add_kp(gate);
  gate->add_option("--samples", cfg.samples, "Fiber samples when not exhaustive");
  gate->add_option("--cap", cfg.cap, "Override the exhaustive fiber cap");
  add_seed(gate);
  add_threads(gate);

  auto* plan = app.add_subcommand("plan", "Certify primes until the product reaches B_k");
  plan->add_option("--k", cfg.k)->required();
  plan->add_option("--diagram", cfg.spec)->required();
  plan->add_option("--primes", cfg.primes, "auto, or a file of primes")->capture_default_str();
  plan->add_option("--prime-limit", cfg.prime_limit, "Largest prime tried in auto mode")->capture_default_str();
  plan->add_flag("--assume-literature", cfg.assume_literature, "Cite LRC(k-1) for k-1 <= 9");
  plan->add_option("--workdir", cfg.workdir)->required();
  plan->add_option("--samples", cfg.samples, "Gate fiber samples when not exhaustive");
  plan->add_option("--cap", cfg.cap, "Override the exhaustive fiber cap");
  plan->add_flag("--quiet", cfg.quiet, "Do not echo log events to stderr");
  add_seed(plan);
  add_threads(plan);

  auto* verify = app.add_subcommand("verify", "Check a ledger's internal consistency");
  verify->add_option("--k", cfg.k)->required();
  verify->add_option("--workdir", cfg.workdir)->required();

  auto* audit_cmd = app.add_subcommand("audit", "Re-verify every ledger in a workdir against its runs");
  audit_cmd->add_option("--workdir", cfg.workdir)->required();
  audit_cmd->add_option("--k", cfg.k, "Audit only this ledger");
  audit_cmd->add_option("--fiber-samples", cfg.fiber_samples)->capture_default_str();
  audit_cmd->add_option("--member-checks", cfg.member_checks)->capture_default_str();
  add_seed(audit_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sieve) return cmd_sieve(cfg);
    if (*lift_cmd) return cmd_lift(cfg);
    if (*project_cmd) return cmd_project(cfg);
    if (*diagram) return cmd_diagram(cfg);
    if (*poly) return cmd_poly_check(cfg);
    if (*rk) return cmd_rk_check(cfg);
    if (*gate) return cmd_gate(cfg);
    if (*plan) return cmd_plan(cfg);
    if (*verify) return cmd_verify(cfg);
    if (*audit_cmd) return cmd_audit(cfg);
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
